#include "minirt.h"

#ifdef MR_HOSTED
#include <stdlib.h>
#include <unistd.h>

static void mr_write(const char *buf, long len) {
    long done = 0;
    while (done < len) {
        long n = write(1, buf + done, (size_t)(len - done));
        if (n <= 0)
            break;
        done += n;
    }
}

void mr_exit(int code) {
    exit(code); /* normal exit so coverage data gets flushed */
}

#else /* freestanding */

static long mr_syscall3(long num, long a, long b, long c) {
#if defined(__aarch64__)
    register long x8 __asm__("x8") = num;
    register long x0 __asm__("x0") = a;
    register long x1 __asm__("x1") = b;
    register long x2 __asm__("x2") = c;
    __asm__ volatile("svc #0" : "+r"(x0) : "r"(x8), "r"(x1), "r"(x2) : "memory");
    return x0;
#elif defined(__x86_64__)
    long ret;
    __asm__ volatile("syscall" : "=a"(ret)
                     : "a"(num), "D"(a), "S"(b), "d"(c)
                     : "rcx", "r11", "memory");
    return ret;
#elif defined(__riscv)
    register long a7 __asm__("a7") = num;
    register long a0 __asm__("a0") = a;
    register long a1 __asm__("a1") = b;
    register long a2 __asm__("a2") = c;
    __asm__ volatile("ecall" : "+r"(a0) : "r"(a7), "r"(a1), "r"(a2) : "memory");
    return a0;
#elif defined(__arm__)
    register long r7 __asm__("r7") = num;
    register long r0 __asm__("r0") = a;
    register long r1 __asm__("r1") = b;
    register long r2 __asm__("r2") = c;
    __asm__ volatile("svc #0" : "+r"(r0) : "r"(r7), "r"(r1), "r"(r2) : "memory");
    return r0;
#else
#error "unsupported architecture"
#endif
}

#if defined(__aarch64__) || defined(__riscv)
#define MR_SYS_WRITE 64
#define MR_SYS_EXIT 93
#elif defined(__x86_64__)
#define MR_SYS_WRITE 1
#define MR_SYS_EXIT 60
#elif defined(__arm__)
#define MR_SYS_WRITE 4
#define MR_SYS_EXIT 1
#endif

static void mr_write(const char *buf, long len) {
    long done = 0;
    while (done < len) {
        long n = mr_syscall3(MR_SYS_WRITE, 1, (long)(buf + done), len - done);
        if (n <= 0)
            break;
        done += n;
    }
}

void mr_exit(int code) {
    mr_syscall3(MR_SYS_EXIT, code, 0, 0);
    for (;;)
        ;
}

#if defined(__arm__) && !defined(__aarch64__)
/* EABI helpers so -nostdlib links survive / and % in C code.
 * Quotient returns in the low word, remainder in the high word. */
static unsigned long long mr_udivmod(unsigned num, unsigned den) {
    unsigned quot = 0, rem = 0;
    int i;
    if (den == 0)
        return 0;
    for (i = 31; i >= 0; i--) {
        rem = (rem << 1) | ((num >> i) & 1u);
        if (rem >= den) {
            rem -= den;
            quot |= 1u << i;
        }
    }
    return ((unsigned long long)rem << 32) | quot;
}

unsigned long long __aeabi_uidivmod(unsigned num, unsigned den) {
    return mr_udivmod(num, den);
}

unsigned __aeabi_uidiv(unsigned num, unsigned den) {
    return (unsigned)mr_udivmod(num, den);
}

unsigned long long __aeabi_idivmod(int num, int den) {
    unsigned un = num < 0 ? (unsigned)-num : (unsigned)num;
    unsigned ud = den < 0 ? (unsigned)-den : (unsigned)den;
    unsigned long long qr = mr_udivmod(un, ud);
    int quot = (int)(unsigned)qr;
    int rem = (int)(unsigned)(qr >> 32);
    if ((num < 0) != (den < 0))
        quot = -quot;
    if (num < 0)
        rem = -rem;
    return ((unsigned long long)(unsigned)rem << 32) | (unsigned)quot;
}

int __aeabi_idiv(int num, int den) {
    return (int)(unsigned)__aeabi_idivmod(num, den);
}
#endif

#endif /* MR_HOSTED */

static long mr_strlen(const char *s) {
    long n = 0;
    while (s[n])
        n++;
    return n;
}

void mr_print_str(const char *s) {
    mr_write(s, mr_strlen(s));
}

void mr_puts(const char *s) {
    mr_print_str(s);
    mr_write("\n", 1);
}

void mr_print_int(long v) {
    char buf[24];
    int pos = 24;
    int negative = v < 0;
    unsigned long mag = negative ? (unsigned long)-v : (unsigned long)v;
    if (mag == 0)
        buf[--pos] = '0';
    while (mag > 0) {
        buf[--pos] = (char)('0' + (mag % 10));
        mag /= 10;
    }
    if (negative)
        buf[--pos] = '-';
    mr_write(buf + pos, 24 - pos);
}

static int mr_passed = 0;
static int mr_total = 0;

void mr_check(const char *name, int ok) {
    mr_total++;
    if (ok) {
        mr_passed++;
        mr_print_str("ok ");
    } else {
        mr_print_str("FAIL ");
    }
    mr_puts(name);
}

int mr_done(void) {
    mr_print_str("TESTS ");
    mr_print_int(mr_passed);
    mr_print_str("/");
    mr_print_int(mr_total);
    mr_print_str("\n");
    return mr_passed == mr_total ? 0 : 1;
}
