long fib(int n) {
    if (n <= 0)
        return 0;
    long prev = 0;
    long cur = 1;
    for (int i = 1; i < n; i++) {
        long next = prev + cur;
        prev = cur;
        cur = next;
    }
    return cur;
}
