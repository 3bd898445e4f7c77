#include <stdio.h>
#include <string.h>

#if 0
int disabled(void) {
    return 0;
}
#endif
int enabled(void) {
    return 1;
}

/* café naïve über */
int unicode_names(void) {
    const char *s = "été {";
    return s[0];
}

__attribute__((noinline)) static int attr_fn(int v) {
    return v + 1;
}
