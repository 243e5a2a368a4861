#include "minirt.h"

long ipow(long base, int exp);

int main(void) {
    mr_check("zero_exp", ipow(9, 0) == 1);
    mr_check("one_exp", ipow(9, 1) == 9);
    mr_check("pow2", ipow(2, 16) == 65536);
    mr_check("pow_neg_base", ipow(-3, 3) == -27);
    mr_check("pow10", ipow(10, 9) == 1000000000L);
    return mr_done();
}
