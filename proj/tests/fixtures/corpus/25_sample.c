#include <stdio.h>
#include <string.h>

int commented_sig(int a) /* { */
{
    return a; // }
}

#define LONG_MACRO(x) \
    { (x) + 1 }
int spliced(void) {
    const char *s = "line one \
line two }";
    return s[0];
}
