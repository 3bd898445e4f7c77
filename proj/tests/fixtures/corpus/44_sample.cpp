#include <stdio.h>
#include <string.h>

int digit_sep() {
    int big = 1'000'000;
    char c = 'x';
    return big + c;
}

int count_if_positive(const std::vector<int>& v) {
    auto pos = [](int x) { return x > 0; };
    int n = 0;
    for (int x : v) { if (pos(x)) { ++n; } }
    return n;
}

typedef enum { RED, GREEN } color_t;
enum mode { MODE_A = 1, MODE_B = 2 };
color_t pick(enum mode m) { return m == MODE_A ? RED : GREEN; }

void apply(int (*fn)(int), int *v, int n) {
    for (int i = 0; i < n; i++) {
        v[i] = fn(v[i]);
    }
}
