#include "sitfuzz/format.hpp"

#include <array>
#include <charconv>

namespace sitfuzz {

std::string formatNumber(double value) {
  if (value == 0.0) return "0";  // folds -0
  std::array<char, 32> buffer{};
  auto [end, ec] = std::to_chars(buffer.data(), buffer.data() + buffer.size(), value);
  return std::string(buffer.data(), end);
}

}  // namespace sitfuzz
