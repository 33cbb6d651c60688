#pragma once

#include <string>

namespace sitfuzz {

/// Shortest decimal text that reads back to the same double.
std::string formatNumber(double value);

}  // namespace sitfuzz
