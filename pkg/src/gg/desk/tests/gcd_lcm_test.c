#include "minirt.h"

int gcd(int a, int b);
int lcm(int a, int b);

int main(void) {
    mr_check("gcd_basic", gcd(12, 18) == 6);
    mr_check("gcd_coprime", gcd(35, 64) == 1);
    mr_check("gcd_zero", gcd(0, 5) == 5);
    mr_check("gcd_negative", gcd(-12, 18) == 6 && gcd(12, -18) == 6);
    mr_check("lcm_basic", lcm(4, 6) == 12);
    mr_check("lcm_zero", lcm(0, 9) == 0);
    mr_check("lcm_negative", lcm(-4, 6) == 12);
    return mr_done();
}
