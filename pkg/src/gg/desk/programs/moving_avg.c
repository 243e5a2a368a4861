/* integer moving average with window w over n samples, floor division */
int moving_avg(const int *data, int n, int w, int *out) {
    if (w <= 0 || w > n)
        return 0;
    int count = n - w + 1;
    for (int i = 0; i < count; i++) {
        int total = 0;
        for (int j = 0; j < w; j++)
            total += data[i + j];
        out[i] = total / w;
    }
    return count;
}
