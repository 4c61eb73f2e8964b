#include "mfa/text_format.hpp"

#include <array>
#include <charconv>

namespace mfa {

std::string format_real(double v) {
  std::array<char, 64> buf{};
  auto [end, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  return std::string(buf.data(), end);
}

}  // namespace mfa
