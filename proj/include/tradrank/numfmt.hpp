#pragma once

#include <string>
#include <string_view>

namespace tradrank {

/// Shortest decimal text that parses back to exactly the same double.
std::string format_double(double value);

/// Strict parse of a full token; throws Error(ParseError) on junk.
double parse_double(std::string_view text);
long long parse_int(std::string_view text);

}  // namespace tradrank
