#include <vector>
#include <string>
using namespace std;

int guarded(int x) {
#ifdef CHECK
    if (x > 0) {
#else
    if (x >= 0) {
#endif
        return 1;
    }
    return 0;
}

DECLARE_HANDLER(on_open)

int handle_open(int fd) {
    return fd;
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
