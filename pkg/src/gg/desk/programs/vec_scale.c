void vec_scale(int *v, int n, int num, int den) {
    for (int i = 0; i < n; i++) {
        v[i] = v[i] * num / den;
    }
}

int vec_sum(const int *v, int n) {
    int total = 0;
    for (int i = 0; i < n; i++)
        total += v[i];
    return total;
}
