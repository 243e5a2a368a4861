int digit_sum(long n) {
    if (n < 0)
        n = -n;
    int total = 0;
    while (n > 0) {
        total += (int)(n % 10);
        n /= 10;
    }
    return total;
}

int digital_root(long n) {
    if (n < 0)
        n = -n;
    while (n >= 10)
        n = digit_sum(n);
    return (int)n;
}
