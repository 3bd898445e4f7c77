/*
 * Header comment with stray braces: } {
 */
#ifndef FIXTURE_H
#define FIXTURE_H

typedef enum { RED, GREEN } color_t;
enum mode { MODE_A = 1, MODE_B = 2 };
color_t pick(enum mode m) { return m == MODE_A ? RED : GREEN; }

#define SWAP(a, b) do { int t_ = (a); (a) = (b); (b) = t_; } while (0)
#define BLOCK_BEGIN {
void swap_both(int *x, int *y) {
    SWAP(*x, *y);
}

int proto(int);
extern int g_var;
typedef int (*cmp_fn)(const void *, const void *);
struct ops {
    int (*open)(const char *path);
    void (*close)(int fd);
};

/* café naïve über */
int unicode_names(void) {
    const char *s = "été {";
    return s[0];
}

char open_brace(void) { return '{'; }
char close_brace(void) { return '}'; }

#endif
