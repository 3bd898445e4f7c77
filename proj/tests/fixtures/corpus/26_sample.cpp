#include <stdio.h>
#include <string.h>

std::string wide_literals() {
    auto a = L"{";
    auto b = u8"}";
    auto c = U'}';
    return "ok";
}

const char* raw_text() {
    return R"delim(
    } not a brace { "quote"
)delim";
}

Widget::Widget(int size)
    : size_(size),
      data_{new int[size]} {
    init();
}

Widget::~Widget() {
    delete[] data_;
}
