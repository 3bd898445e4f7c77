/*
 * Header comment with stray braces: } {
 */
#ifndef FIXTURE_H
#define FIXTURE_H

static int
multi_line_sig(int a,
               int b)
{
    return a - b;
}

typedef enum { RED, GREEN } color_t;
enum mode { MODE_A = 1, MODE_B = 2 };
color_t pick(enum mode m) { return m == MODE_A ? RED : GREEN; }

DECLARE_HANDLER(on_open)

int handle_open(int fd) {
    return fd;
}

#define LONG_MACRO(x) \
    { (x) + 1 }
int spliced(void) {
    const char *s = "line one \
line two }";
    return s[0];
}

#endif
