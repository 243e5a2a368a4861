#include "minirt.h"

int rle_len(const char *s);

int main(void) {
    mr_check("empty", rle_len("") == 0);
    mr_check("single", rle_len("x") == 2);
    mr_check("runs", rle_len("aaabbc") == 6);
    mr_check("long_run", rle_len("aaaaaaaaaaaa") == 3);
    return mr_done();
}
