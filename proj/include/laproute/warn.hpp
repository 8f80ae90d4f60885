#pragma once

#include <iostream>
#include <string_view>

namespace laproute {

inline void warn(std::string_view msg) { std::cerr << "warning: " << msg << "\n"; }

}  // namespace laproute
