/* pack runs of bytes as (count, value) pairs; returns packed length */
int rle_pack(const unsigned char *src, int n, unsigned char *dst) {
    int out = 0;
    int i = 0;
    while (i < n) {
        int run = 1;
        while (i + run < n && src[i + run] == src[i] && run < 255)
            run++;
        dst[out] = (unsigned char)run;
        dst[out + 1] = src[i];
        out += 2;
        i += run;
    }
    return out;
}

int rle_unpack(const unsigned char *src, int n, unsigned char *dst) {
    int out = 0;
    for (int i = 0; i + 1 < n; i += 2) {
        for (int k = 0; k < src[i]; k++) {
            dst[out] = src[i + 1];
            out++;
        }
    }
    return out;
}
