long triangular(int n) {
    if (n < 0)
        return 0;
    return (long)n * (n + 1) / 2;
}

long range_sum(int lo, int hi) {
    if (lo > hi)
        return 0;
    long total = 0;
    for (int i = lo; i <= hi; i++)
        total += i;
    return total;
}
