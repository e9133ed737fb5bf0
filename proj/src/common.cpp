#include "slicescope/common.hpp"

#include <cstdio>

namespace slicescope {

std::string format_g9(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.9g", v);
    return buf;
}

}  // namespace slicescope
