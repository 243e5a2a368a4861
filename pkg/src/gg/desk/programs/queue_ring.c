/* fixed-capacity ring queue over a caller-provided buffer of 8 slots */
void q_init(int *q) {
    q[0] = 0; /* head */
    q[1] = 0; /* count */
}

int q_push(int *q, int value) {
    if (q[1] >= 6)
        return 0;
    int tail = (q[0] + q[1]) % 6;
    q[2 + tail] = value;
    q[1]++;
    return 1;
}

int q_pop(int *q, int *out) {
    if (q[1] == 0)
        return 0;
    *out = q[2 + q[0]];
    q[0] = (q[0] + 1) % 6;
    q[1]--;
    return 1;
}
