/* Tiny runtime for unit-test drivers.
 *
 * Works hosted (compile with -DMR_HOSTED, uses libc) and freestanding
 * (raw syscalls + start.c, for cross builds without a target libc).
 */
#ifndef MINIRT_H
#define MINIRT_H

void mr_print_str(const char *s);
void mr_print_int(long v);
void mr_puts(const char *s);
void mr_exit(int code);

/* test protocol: one "ok <name>"/"FAIL <name>" line per case,
 * then a final "TESTS <passed>/<total>" line from mr_done() */
void mr_check(const char *name, int ok);
int mr_done(void);

#endif
