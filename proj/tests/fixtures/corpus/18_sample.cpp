/*
 * Header comment with stray braces: } {
 */
#ifndef FIXTURE_H
#define FIXTURE_H

int count_if_positive(const std::vector<int>& v) {
    auto pos = [](int x) { return x > 0; };
    int n = 0;
    for (int x : v) { if (pos(x)) { ++n; } }
    return n;
}

const char* raw_text() {
    return R"delim(
    } not a brace { "quote"
)delim";
}

template <typename T>
void Stack<T>::push(const T& v) {
    items_.push_back(v);
}

DECLARE_HANDLER(on_open)

int handle_open(int fd) {
    return fd;
}

void apply(int (*fn)(int), int *v, int n) {
    for (int i = 0; i < n; i++) {
        v[i] = fn(v[i]);
    }
}

char open_brace(void) { return '{'; }
char close_brace(void) { return '}'; }

#endif
