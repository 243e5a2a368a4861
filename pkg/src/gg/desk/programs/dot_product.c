long dot(const int *a, const int *b, int n) {
    long total = 0;
    for (int i = 0; i < n; i++) {
        total += (long)a[i] * b[i];
    }
    return total;
}

long norm1(const int *a, int n) {
    long total = 0;
    for (int i = 0; i < n; i++) {
        total += a[i] < 0 ? -(long)a[i] : (long)a[i];
    }
    return total;
}
