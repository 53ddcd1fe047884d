#include "stnet/format.hpp"

#include <charconv>
#include <system_error>

#include "stnet/errors.hpp"

namespace stnet {

std::string format_real(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

double parse_real(const std::string& field, long line) {
  std::size_t begin = 0;
  std::size_t end = field.size();
  while (begin < end && (field[begin] == ' ' || field[begin] == '\t')) ++begin;
  while (end > begin && (field[end - 1] == ' ' || field[end - 1] == '\t' || field[end - 1] == '\r')) --end;
  double v = 0.0;
  const char* first = field.data() + begin;
  const char* last = field.data() + end;
  if (first != last && *first == '+') ++first;
  const auto res = std::from_chars(first, last, v);
  if (begin == end || res.ec != std::errc() || res.ptr != last) {
    throw ParseError("not a real number: '" + field + "'", line);
  }
  return v;
}

}  // namespace stnet
