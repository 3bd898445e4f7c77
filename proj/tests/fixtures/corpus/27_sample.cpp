std::string wide_literals() {
    auto a = L"{";
    auto b = u8"}";
    auto c = U'}';
    return "ok";
}

template <typename T>
T max_of(T a, T b) {
    return a > b ? a : b;
}

template <>
int max_of<int>(int a, int b) {
    return a > b ? a : b;
}
