/*
 * Header comment with stray braces: } {
 */
#ifndef FIXTURE_H
#define FIXTURE_H

DECLARE_HANDLER(on_open)

int handle_open(int fd) {
    return fd;
}

int dispatch(int op) {
    switch (op) {
    case 1: {
        return 10;
    }
    default:
        break;
    }
    goto out;
out:
    return -1;
}

#if 0
}}} garbage {{{
#elif defined(FOO)
int foo_variant(void) {
    return 3;
}
#else
int foo_variant(void) {
    return 4;
}
#endif

void apply(int (*fn)(int), int *v, int n) {
    for (int i = 0; i < n; i++) {
        v[i] = fn(v[i]);
    }
}

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

#endif
