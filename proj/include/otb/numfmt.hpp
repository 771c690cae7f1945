#pragma once

#include <string>
#include <string_view>

namespace otb {

/// Shortest decimal text that parses back to exactly the same double.
/// Non-finite values are written as "inf", "-inf" and "nan".
std::string format_real(double v);
void append_real(std::string& out, double v);

/// Parses decimal text (and the non-finite spellings above); throws a parse
/// error on trailing garbage.
double parse_real(std::string_view text);

/// Rounds to the given number of significant decimal digits.
double round_significant(double v, int digits);

}  // namespace otb
