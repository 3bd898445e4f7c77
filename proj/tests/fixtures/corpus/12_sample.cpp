int main(int argc, char *argv[]) {
    if (argc > 1) {
        return argv[1][0];
    }
    return 0;
}

__attribute__((noinline)) static int attr_fn(int v) {
    return v + 1;
}

char open_brace(void) { return '{'; }
char close_brace(void) { return '}'; }

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
