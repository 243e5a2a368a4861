#include "minirt.h"

int my_strlen(const char *s);
int my_strcmp(const char *a, const char *b);
int count_char(const char *s, char c);

int main(void) {
    mr_check("strlen_empty", my_strlen("") == 0);
    mr_check("strlen_word", my_strlen("assembly") == 8);
    mr_check("strcmp_equal", my_strcmp("mov", "mov") == 0);
    mr_check("strcmp_less", my_strcmp("add", "mov") == -1);
    mr_check("strcmp_greater", my_strcmp("sub", "mov") == 1);
    mr_check("strcmp_prefix", my_strcmp("mo", "mov") == -1);
    mr_check("count_char", count_char("mississippi", 's') == 4);
    return mr_done();
}
