template <typename T>
T max_of(T a, T b) {
    return a > b ? a : b;
}

template <>
int max_of<int>(int a, int b) {
    return a > b ? a : b;
}

bool operator<(const Key& a, const Key& b) {
    return a.id < b.id;
}
Matrix& Matrix::operator+=(const Matrix& o) {
    return *this;
}
int Functor::operator()(int x) const {
    return x;
}

int proto(int);
extern int g_var;
typedef int (*cmp_fn)(const void *, const void *);
struct ops {
    int (*open)(const char *path);
    void (*close)(int fd);
};

[[nodiscard]] int nodisc(int v) {
    return v;
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

auto trailing(int v) -> int {
    return v;
}
void nothrow_fn() noexcept {
}
