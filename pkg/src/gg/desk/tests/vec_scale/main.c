#include "minirt.h"

void vec_scale(int *v, int n, int num, int den);
int vec_sum(const int *v, int n);

int main(void) {
    int v[5] = {10, -20, 30, -40, 50};
    mr_print_str("sum ");
    mr_print_int(vec_sum(v, 5));
    mr_print_str("\n");
    vec_scale(v, 5, 3, 2);
    for (int i = 0; i < 5; i++) {
        mr_print_str("v ");
        mr_print_int(v[i]);
        mr_print_str("\n");
    }
    mr_print_str("scaled_sum ");
    mr_print_int(vec_sum(v, 5));
    mr_print_str("\n");
    return 0;
}
