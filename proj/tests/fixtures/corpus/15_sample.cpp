#include <vector>
#include <string>
using namespace std;

namespace geo {
class Point {
public:
    Point(int x, int y) : x_(x), y_(y) {}
    int x() const { return x_; }
private:
    int x_, y_;
};

int point_norm(const Point& p) {
    return p.x() * p.x();
}
}  // namespace geo

Widget::Widget(int size)
    : size_(size),
      data_{new int[size]} {
    init();
}

Widget::~Widget() {
    delete[] data_;
}

/* café naïve über */
int unicode_names(void) {
    const char *s = "été {";
    return s[0];
}

static int
multi_line_sig(int a,
               int b)
{
    return a - b;
}

template <typename T>
void Stack<T>::push(const T& v) {
    items_.push_back(v);
}

template <typename T>
T max_of(T a, T b) {
    return a > b ? a : b;
}

template <>
int max_of<int>(int a, int b) {
    return a > b ? a : b;
}
