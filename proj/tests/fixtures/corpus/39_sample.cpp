void apply(int (*fn)(int), int *v, int n) {
    for (int i = 0; i < n; i++) {
        v[i] = fn(v[i]);
    }
}

Buffer::Buffer(std::size_t n)
    : data_(n), sizes_{std::vector<int>{1, 2}} {
}

int main(int argc, char *argv[]) {
    if (argc > 1) {
        return argv[1][0];
    }
    return 0;
}
