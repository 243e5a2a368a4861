#include "minirt.h"

unsigned rotl32(unsigned x, int k);
unsigned set_bit(unsigned x, int i);
unsigned clear_bit(unsigned x, int i);
int get_bit(unsigned x, int i);

int main(void) {
    mr_check("rot_zero", rotl32(0x12345678u, 0) == 0x12345678u);
    mr_check("rot_eight", rotl32(0x12345678u, 8) == 0x34567812u);
    mr_check("rot_wrap", rotl32(0x12345678u, 32) == 0x12345678u);
    mr_check("set", set_bit(0u, 5) == 32u);
    mr_check("clear", clear_bit(0xFFu, 0) == 0xFEu);
    mr_check("get", get_bit(0b100u, 2) == 1 && get_bit(0b100u, 1) == 0);
    return mr_done();
}
