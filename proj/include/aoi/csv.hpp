// Deterministic CSV output: fixed column orders, fixed float formatting
// (17 significant digits, scientific notation below 1e-3), RFC-4180
// quoting. Byte-identical files for identical inputs are part of the
// contract.

#pragma once

#include <cmath>
#include <cstdio>
#include <optional>
#include <string>

namespace aoi {

inline std::string format_csv_double(double x) {
    char buf[48];
    if (std::isnan(x)) return "nan";
    if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
    if (std::fabs(x) < 1e-3)
        std::snprintf(buf, sizeof buf, "%.16e", x);
    else
        std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

inline std::string format_csv_double(const std::optional<double>& x) {
    return x ? format_csv_double(*x) : std::string{};
}

inline std::string csv_escape(const std::string& field) {
    if (field.find_first_of(",\"\n\r") == std::string::npos) return field;
    std::string out = "\"";
    for (char ch : field) {
        if (ch == '"') out += '"';
        out += ch;
    }
    out += '"';
    return out;
}

}  // namespace aoi
