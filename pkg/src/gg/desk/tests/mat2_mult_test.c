#include "minirt.h"

void mat2_mult(const int *a, const int *b, int *out);
int mat2_trace(const int *a);

int main(void) {
    int a[4] = {1, 2, 3, 4};
    int b[4] = {5, 6, 7, 8};
    int identity[4] = {1, 0, 0, 1};
    int out[4];
    mat2_mult(a, b, out);
    mr_check("mult", out[0] == 19 && out[1] == 22 && out[2] == 43 && out[3] == 50);
    mat2_mult(a, identity, out);
    mr_check("identity", out[0] == 1 && out[1] == 2 && out[2] == 3 && out[3] == 4);
    mr_check("trace", mat2_trace(a) == 5);
    return mr_done();
}
