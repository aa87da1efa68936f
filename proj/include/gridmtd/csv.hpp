#pragma once

#include <string>
#include <vector>

namespace gridmtd::csv {

/// printf "%.6g"
std::string format_float(double v);

std::vector<double> parse_float_list(const std::string& text);

}  // namespace gridmtd::csv
