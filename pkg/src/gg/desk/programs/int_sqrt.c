int isqrt(int n) {
    if (n <= 0)
        return 0;
    int x = n;
    int y = (x + 1) / 2;
    while (y < x) {
        x = y;
        y = (x + n / x) / 2;
    }
    return x;
}

int is_square(int n) {
    int r = isqrt(n);
    return r * r == n;
}
