struct point make_point(int x, int y) {
    struct point p = { x, y };
    return p;
}

/* café naïve über */
int unicode_names(void) {
    const char *s = "été {";
    return s[0];
}

auto trailing(int v) -> int {
    return v;
}
void nothrow_fn() noexcept {
}

#if 0
int disabled(void) {
    return 0;
}
#endif
int enabled(void) {
    return 1;
}

class Shape {
public:
    virtual ~Shape() {}
    struct Box {
        int w() const { return 1; }
    };
    virtual double area() const = 0;
};

double Circle::area() const {
    return 3.14159 * r_ * r_;
}
