#include "gridmtd/csv.hpp"

#include <cerrno>
#include <cstdio>
#include <cstdlib>

#include "gridmtd/errors.hpp"

namespace gridmtd::csv {

std::string format_float(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return buf;
}

std::vector<double> parse_float_list(const std::string& text) {
    std::vector<double> out;
    std::size_t start = 0;
    while (start <= text.size()) {
        auto comma = text.find(',', start);
        if (comma == std::string::npos) comma = text.size();
        const auto token = text.substr(start, comma - start);
        char* end = nullptr;
        errno = 0;
        const double v = std::strtod(token.c_str(), &end);
        if (token.empty() || end != token.c_str() + token.size() || errno == ERANGE)
            throw ValidationError("not a number in list: '" + token + "'");
        out.push_back(v);
        start = comma + 1;
    }
    return out;
}

}  // namespace gridmtd::csv
