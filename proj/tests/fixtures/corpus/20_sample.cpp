[[nodiscard]] int nodisc(int v) {
    return v;
}

template <typename T>
void Stack<T>::push(const T& v) {
    items_.push_back(v);
}

void apply(int (*fn)(int), int *v, int n) {
    for (int i = 0; i < n; i++) {
        v[i] = fn(v[i]);
    }
}

__attribute__((noinline)) static int attr_fn(int v) {
    return v + 1;
}

/* café naïve über */
int unicode_names(void) {
    const char *s = "été {";
    return s[0];
}
