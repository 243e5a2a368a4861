/* Freestanding entry point; empty TU in hosted builds. */
#ifndef MR_HOSTED
#include "minirt.h"

extern int main(void);

void _start(void) {
    mr_exit(main());
}
#endif
