#include "minirt.h"

int iabs(int x);
int clamp(int x, int lo, int hi);
int sign(int x);

int main(void) {
    mr_check("abs_negative", iabs(-7) == 7);
    mr_check("abs_positive", iabs(9) == 9);
    mr_check("clamp_below", clamp(-5, 0, 10) == 0);
    mr_check("clamp_above", clamp(15, 0, 10) == 10);
    mr_check("clamp_inside", clamp(5, 0, 10) == 5);
    mr_check("sign_all", sign(3) == 1 && sign(-3) == -1 && sign(0) == 0);
    return mr_done();
}
