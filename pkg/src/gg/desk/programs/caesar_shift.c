void caesar_shift(char *buf, int shift) {
    shift %= 26;
    if (shift < 0)
        shift += 26;
    for (int i = 0; buf[i] != '\0'; i++) {
        char c = buf[i];
        if (c >= 'a' && c <= 'z')
            buf[i] = (char)('a' + (c - 'a' + shift) % 26);
        else if (c >= 'A' && c <= 'Z')
            buf[i] = (char)('A' + (c - 'A' + shift) % 26);
    }
}
