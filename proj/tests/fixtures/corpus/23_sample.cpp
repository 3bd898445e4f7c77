#include <stdio.h>
#include <string.h>

namespace outer::inner {
inline namespace v1 {
int nested_ns(int a) {
    return a * 3;
}
}
}

static Registry reg("name", [](int) { return 0; });
Foo::Foo() = default;
Foo& Foo::operator=(const Foo&) = delete;

#if 0
int disabled(void) {
    return 0;
}
#endif
int enabled(void) {
    return 1;
}

__attribute__((noinline)) static int attr_fn(int v) {
    return v + 1;
}

const char* raw_text() {
    return R"delim(
    } not a brace { "quote"
)delim";
}

int dispatch(int op) {
    switch (op) {
    case 1: {
        return 10;
    }
    default:
        break;
    }
    goto out;
out:
    return -1;
}
