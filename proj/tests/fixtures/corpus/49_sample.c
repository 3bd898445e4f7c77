#include <stdio.h>
#include <string.h>

typedef enum { RED, GREEN } color_t;
enum mode { MODE_A = 1, MODE_B = 2 };
color_t pick(enum mode m) { return m == MODE_A ? RED : GREEN; }

#if 0
int disabled(void) {
    return 0;
}
#endif
int enabled(void) {
    return 1;
}

#define SWAP(a, b) do { int t_ = (a); (a) = (b); (b) = t_; } while (0)
#define BLOCK_BEGIN {
void swap_both(int *x, int *y) {
    SWAP(*x, *y);
}
