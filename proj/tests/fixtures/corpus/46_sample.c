static int
multi_line_sig(int a,
               int b)
{
    return a - b;
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

__attribute__((noinline)) static int attr_fn(int v) {
    return v + 1;
}

static int (*handlers[])(int) = { add_one, 0 };
static struct cfg defaults = {
    .name = "x{",
    .opts = { .a = 1, .b = { 2, 3 } },
};
int use_defaults(void) {
    return defaults.opts.a;
}
