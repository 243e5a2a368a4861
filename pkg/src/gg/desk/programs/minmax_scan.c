int array_min(const int *a, int n) {
    int best = a[0];
    for (int i = 1; i < n; i++) {
        if (a[i] < best)
            best = a[i];
    }
    return best;
}

int array_max(const int *a, int n) {
    int best = a[0];
    for (int i = 1; i < n; i++) {
        if (a[i] > best)
            best = a[i];
    }
    return best;
}

int argmin(const int *a, int n) {
    int idx = 0;
    for (int i = 1; i < n; i++) {
        if (a[i] < a[idx])
            idx = i;
    }
    return idx;
}
