unsigned fletcher16(const unsigned char *data, int len) {
    unsigned sum1 = 0;
    unsigned sum2 = 0;
    for (int i = 0; i < len; i++) {
        sum1 = (sum1 + data[i]) % 255u;
        sum2 = (sum2 + sum1) % 255u;
    }
    return (sum2 << 8) | sum1;
}

int fletcher16_ok(const unsigned char *data, int len, unsigned expected) {
    return fletcher16(data, len) == expected;
}
