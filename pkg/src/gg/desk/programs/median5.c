int int_less(int a, int b) {
    return a < b;
}

int median5(int a, int b, int c, int d, int e) {
    int v[5];
    v[0] = a;
    v[1] = b;
    v[2] = c;
    v[3] = d;
    v[4] = e;
    for (int i = 0; i < 4; i++) {
        for (int j = 0; j < 4 - i; j++) {
            if (int_less(v[j + 1], v[j])) {
                int t = v[j];
                v[j] = v[j + 1];
                v[j + 1] = t;
            }
        }
    }
    return v[2];
}
