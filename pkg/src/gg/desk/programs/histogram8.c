void histogram8(const unsigned char *data, int n, int *bins) {
    for (int i = 0; i < 8; i++)
        bins[i] = 0;
    for (int i = 0; i < n; i++) {
        bins[data[i] & 7u]++;
    }
}

int hist_peak(const int *bins) {
    int best = 0;
    for (int i = 1; i < 8; i++) {
        if (bins[i] > bins[best])
            best = i;
    }
    return best;
}
