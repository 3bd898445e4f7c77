Buffer::Buffer(std::size_t n)
    : data_(n), sizes_{std::vector<int>{1, 2}} {
}

struct point make_point(int x, int y) {
    struct point p = { x, y };
    return p;
}

auto trailing(int v) -> int {
    return v;
}
void nothrow_fn() noexcept {
}

extern "C" int cfun(void) { return 0; }
