int is_prime(int n) {
    if (n < 2)
        return 0;
    if (n < 4)
        return 1;
    if (n % 2 == 0)
        return 0;
    for (int d = 3; d * d <= n; d += 2) {
        if (n % d == 0)
            return 0;
    }
    return 1;
}

int count_primes_below(int n) {
    int count = 0;
    for (int i = 2; i < n; i++) {
        if (is_prime(i))
            count++;
    }
    return count;
}
