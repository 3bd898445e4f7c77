#include <vector>
#include <string>
using namespace std;

DECLARE_HANDLER(on_open)

int handle_open(int fd) {
    return fd;
}

namespace outer::inner {
inline namespace v1 {
int nested_ns(int a) {
    return a * 3;
}
}
}

std::string wide_literals() {
    auto a = L"{";
    auto b = u8"}";
    auto c = U'}';
    return "ok";
}
