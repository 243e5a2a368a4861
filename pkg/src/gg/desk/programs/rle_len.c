int rle_len(const char *s) {
    int len = 0;
    int i = 0;
    while (s[i] != '\0') {
        int run = 1;
        while (s[i + run] == s[i] && s[i + run] != '\0')
            run++;
        /* a run encodes as the char plus its count's digits */
        int digits = 0;
        int r = run;
        while (r > 0) {
            digits++;
            r /= 10;
        }
        len += 1 + digits;
        i += run;
    }
    return len;
}
