/* 2x2 integer matrices stored row-major in 4-element arrays */
void mat2_mult(const int *a, const int *b, int *out) {
    out[0] = a[0] * b[0] + a[1] * b[2];
    out[1] = a[0] * b[1] + a[1] * b[3];
    out[2] = a[2] * b[0] + a[3] * b[2];
    out[3] = a[2] * b[1] + a[3] * b[3];
}

int mat2_trace(const int *a) {
    return a[0] + a[3];
}
