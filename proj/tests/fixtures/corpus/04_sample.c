/*
 * Header comment with stray braces: } {
 */
#ifndef FIXTURE_H
#define FIXTURE_H

struct outer {
    struct inner {
        int x;
    } in;
    int y;
};

int outer_sum(struct outer *o) {
    struct local { int z; } l = { 0 };
    return o->in.x + o->y + l.z;
}

static const struct pair table[] = {
    { "a", 1 },
    { "b", 2 },
};
int lookup(const char *k) {
    return k[0] == 'a' ? table[0].v : table[1].v;
}

const char *banner(void) {
    return "}{ \"quoted\" \\ {";
}

int guarded(int x) {
#ifdef CHECK
    if (x > 0) {
#else
    if (x >= 0) {
#endif
        return 1;
    }
    return 0;
}

static int (*handlers[])(int) = { add_one, 0 };
static struct cfg defaults = {
    .name = "x{",
    .opts = { .a = 1, .b = { 2, 3 } },
};
int use_defaults(void) {
    return defaults.opts.a;
}

/* a comment with { braces } and "quotes" */
int parse(const char *s) {
    // closing brace in comment }
    if (*s == '{') { /* { */
        return 1;
    }
    return 0;
}

#endif
