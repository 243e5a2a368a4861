int popcount(unsigned x) {
    int count = 0;
    while (x != 0) {
        count += (int)(x & 1u);
        x >>= 1;
    }
    return count;
}

int parity(unsigned x) {
    return popcount(x) & 1;
}
