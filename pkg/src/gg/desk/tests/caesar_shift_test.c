#include "minirt.h"

void caesar_shift(char *buf, int shift);

static int eq(const char *a, const char *b) {
    int i = 0;
    while (a[i] != '\0' && a[i] == b[i])
        i++;
    return a[i] == b[i];
}

int main(void) {
    char word[6] = {'a', 'b', 'z', 'Z', '!', '\0'};
    char plain[6] = {'h', 'e', 'l', 'l', 'o', '\0'};
    caesar_shift(word, 1);
    mr_check("wraps", eq(word, "bcaA!"));
    caesar_shift(plain, 26);
    mr_check("full_cycle", eq(plain, "hello"));
    caesar_shift(plain, -1);
    mr_check("negative", eq(plain, "gdkkn"));
    return mr_done();
}
