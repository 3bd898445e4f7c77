auto trailing(int v) -> int {
    return v;
}
void nothrow_fn() noexcept {
}

Buffer::Buffer(std::size_t n)
    : data_(n), sizes_{std::vector<int>{1, 2}} {
}

/* a comment with { braces } and "quotes" */
int parse(const char *s) {
    // closing brace in comment }
    if (*s == '{') { /* { */
        return 1;
    }
    return 0;
}

char open_brace(void) { return '{'; }
char close_brace(void) { return '}'; }
