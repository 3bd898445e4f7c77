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

int main(int argc, char *argv[]) {
    if (argc > 1) {
        return argv[1][0];
    }
    return 0;
}

static int add(int a, int b)
{
    return a + b;
}
