int to_base_digits(long n, int base, int *digits) {
    if (base < 2 || n < 0)
        return -1;
    if (n == 0) {
        digits[0] = 0;
        return 1;
    }
    int count = 0;
    while (n > 0) {
        digits[count] = (int)(n % base);
        n /= base;
        count++;
    }
    /* digits are little-endian; reverse in place */
    for (int i = 0; i < count / 2; i++) {
        int t = digits[i];
        digits[i] = digits[count - 1 - i];
        digits[count - 1 - i] = t;
    }
    return count;
}

long from_base_digits(const int *digits, int count, int base) {
    long n = 0;
    for (int i = 0; i < count; i++)
        n = n * base + digits[i];
    return n;
}
