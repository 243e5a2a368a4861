#include "minirt.h"

int is_prime(int n);
int count_primes_below(int n);

int main(void) {
    mr_check("one_not_prime", is_prime(1) == 0);
    mr_check("two_prime", is_prime(2) == 1);
    mr_check("nine_composite", is_prime(9) == 0);
    mr_check("prime_97", is_prime(97) == 1);
    mr_check("even_composite", is_prime(100) == 0);
    mr_check("count_below_30", count_primes_below(30) == 10);
    mr_check("count_below_2", count_primes_below(2) == 0);
    return mr_done();
}
