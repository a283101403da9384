#include "dmm/common.hpp"

#include <charconv>
#include <system_error>

namespace dmm {

std::string format_double(double value) {
  char buffer[64];
  const auto result = std::to_chars(buffer, buffer + sizeof(buffer), value);
  if (result.ec != std::errc()) throw NumericError("could not format double");
  return std::string(buffer, result.ptr);
}

double parse_double(const std::string& text, const std::string& what) {
  double value = 0.0;
  const char* begin = text.data();
  const char* end = begin + text.size();
  const auto result = std::from_chars(begin, end, value);
  if (result.ec != std::errc() || result.ptr != end)
    throw InvalidArgument("invalid number for " + what + ": '" + text + "'");
  return value;
}

}  // namespace dmm
