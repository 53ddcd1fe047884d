#pragma once

#include <string>

namespace stnet {

/// Shortest decimal form that reads back to the same double.
std::string format_real(double v);
/// Strict parse of a whole field; throws ParseError on trailing garbage.
double parse_real(const std::string& field, long line = 0);

}  // namespace stnet
