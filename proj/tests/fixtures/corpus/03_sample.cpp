#if 0
int disabled(void) {
    return 0;
}
#endif
int enabled(void) {
    return 1;
}

#ifdef USE_LONG
long width(long v) {
#else
int width(int v) {
#endif
    return v * 2;
}

__attribute__((noinline)) static int attr_fn(int v) {
    return v + 1;
}

int proto(int);
extern int g_var;
typedef int (*cmp_fn)(const void *, const void *);
struct ops {
    int (*open)(const char *path);
    void (*close)(int fd);
};
