/*
 * Header comment with stray braces: } {
 */
#ifndef FIXTURE_H
#define FIXTURE_H

/* a comment with { braces } and "quotes" */
int parse(const char *s) {
    // closing brace in comment }
    if (*s == '{') { /* { */
        return 1;
    }
    return 0;
}

int count_if_positive(const std::vector<int>& v) {
    auto pos = [](int x) { return x > 0; };
    int n = 0;
    for (int x : v) { if (pos(x)) { ++n; } }
    return n;
}

#if 0
int disabled(void) {
    return 0;
}
#endif
int enabled(void) {
    return 1;
}

static const struct pair table[] = {
    { "a", 1 },
    { "b", 2 },
};
int lookup(const char *k) {
    return k[0] == 'a' ? table[0].v : table[1].v;
}

#endif
