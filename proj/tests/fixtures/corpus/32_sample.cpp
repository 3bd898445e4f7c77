#define SWAP(a, b) do { int t_ = (a); (a) = (b); (b) = t_; } while (0)
#define BLOCK_BEGIN {
void swap_both(int *x, int *y) {
    SWAP(*x, *y);
}

int digit_sep() {
    int big = 1'000'000;
    char c = 'x';
    return big + c;
}

std::string wide_literals() {
    auto a = L"{";
    auto b = u8"}";
    auto c = U'}';
    return "ok";
}
