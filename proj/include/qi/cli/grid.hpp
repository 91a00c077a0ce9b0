#pragma once

// Parsing of angle expressions and grid specifications used by the command-line front end.
//   angle:    1.2 | pi | -pi/2 | 3pi/8 | 3*pi/8
//   list:     comma-separated angles or numbers
//   linspace: start:stop:count (inclusive endpoints)
//   int range: a..b or comma-separated integers

#include <cstdio>
#include <string>
#include <string_view>
#include <vector>

#include "qi/calibration.hpp"
#include "qi/interrogation.hpp"

namespace qi::cli {

inline double parse_number(std::string_view s) {
    double v = 0.0;
    if (!detail::parse_double(s, v) || !std::isfinite(v)) {
        throw DomainError("not a number: '" + std::string(s) + "'");
    }
    return v;
}

inline double parse_angle(std::string_view text) {
    const std::string_view s = detail::trim(text);
    const auto pi_pos = s.find("pi");
    if (pi_pos == std::string_view::npos) return parse_number(s);

    std::string_view coef = detail::trim(s.substr(0, pi_pos));
    if (!coef.empty() && coef.back() == '*') coef = detail::trim(coef.substr(0, coef.size() - 1));
    double factor = 1.0;
    if (coef == "-") {
        factor = -1.0;
    } else if (!coef.empty() && coef != "+") {
        factor = parse_number(coef);
    }
    std::string_view rest = detail::trim(s.substr(pi_pos + 2));
    if (!rest.empty()) {
        if (rest.front() != '/') throw DomainError("bad angle expression: '" + std::string(s) + "'");
        const double den = parse_number(rest.substr(1));
        if (den == 0.0) throw DomainError("division by zero in angle: '" + std::string(s) + "'");
        factor /= den;
    }
    return factor * kPi;
}

inline std::vector<std::string_view> split(std::string_view s, char sep) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        const auto pos = s.find(sep, start);
        out.push_back(s.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
        if (pos == std::string_view::npos) break;
        start = pos + 1;
    }
    return out;
}

inline std::vector<double> parse_angle_list(std::string_view s) {
    std::vector<double> out;
    for (auto tok : split(s, ',')) out.push_back(parse_angle(tok));
    return out;
}

inline std::vector<double> parse_linspace(std::string_view s) {
    const auto parts = split(s, ':');
    if (parts.size() != 3) throw DomainError("grid must be start:stop:count, got '" + std::string(s) + "'");
    const double start = parse_angle(parts[0]);
    const double stop = parse_angle(parts[1]);
    const double count_d = parse_number(parts[2]);
    if (count_d < 1.0 || count_d != static_cast<double>(static_cast<long>(count_d))) {
        throw DomainError("grid count must be a positive integer");
    }
    const auto count = static_cast<std::size_t>(count_d);
    std::vector<double> out(count);
    if (count == 1) {
        out[0] = start;
        return out;
    }
    for (std::size_t i = 0; i < count; ++i) {
        out[i] = start + (stop - start) * static_cast<double>(i) / static_cast<double>(count - 1);
    }
    out.back() = stop;
    return out;
}

inline std::vector<int> parse_int_range(std::string_view s) {
    std::vector<int> out;
    const auto dots = s.find("..");
    auto to_int = [](std::string_view t) {
        const double v = parse_number(t);
        if (v != static_cast<double>(static_cast<int>(v))) throw DomainError("not an integer: '" + std::string(t) + "'");
        return static_cast<int>(v);
    };
    if (dots != std::string_view::npos) {
        const int a = to_int(s.substr(0, dots));
        const int b = to_int(s.substr(dots + 2));
        if (b < a) throw DomainError("empty integer range");
        for (int n = a; n <= b; ++n) out.push_back(n);
        return out;
    }
    for (auto tok : split(s, ',')) out.push_back(to_int(tok));
    return out;
}

/// Shortest stable text for a double in CSV output ("%.15g", with -0 printed as 0).
inline std::string format_number(double x) {
    if (x == 0.0) x = 0.0;
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.15g", x);
    return buf;
}

} // namespace qi::cli
