#pragma once

#include <string>

namespace hartree {

/// Shortest decimal text that parses back to exactly the same double.
std::string exact(double v);

}  // namespace hartree
