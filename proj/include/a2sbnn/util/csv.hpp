#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace a2sbnn::util {

// %.17g formatting used for every float written to CSV.
std::string format_double(double v);

// Shortest round-trip representation, used for file names ("1.5", "2").
std::string format_short(double v);

std::vector<double> parse_csv_doubles(std::string_view line);

}  // namespace a2sbnn::util
