unsigned rotl32(unsigned x, int k) {
    k &= 31;
    if (k == 0)
        return x;
    return (x << k) | (x >> (32 - k));
}

unsigned set_bit(unsigned x, int i) {
    return x | (1u << i);
}

unsigned clear_bit(unsigned x, int i) {
    return x & ~(1u << i);
}

int get_bit(unsigned x, int i) {
    return (int)((x >> i) & 1u);
}
