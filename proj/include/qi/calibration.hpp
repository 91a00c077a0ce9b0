#pragma once

// Stage position -> absorber transmittance calibration tables.
//
// CSV layout:
//   # wavelength: 635 nm          (optional comment line, stored as the label)
//   position_mm,transmittance
//   0.0,0.0
//   ...

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <string>
#include <string_view>
#include <vector>

#include "qi/errors.hpp"

namespace qi {

struct CalibrationRow {
    double position_mm = 0.0;
    double transmittance = 0.0;
};

struct CalibrationTable {
    std::vector<CalibrationRow> rows;
    std::string wavelength_label;
};

namespace detail {

inline std::string_view trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

inline bool parse_double(std::string_view s, double& out) {
    s = trim(s);
    if (!s.empty() && s.front() == '+') s.remove_prefix(1);
    const auto res = std::from_chars(s.data(), s.data() + s.size(), out);
    return res.ec == std::errc{} && res.ptr == s.data() + s.size() && !s.empty();
}

} // namespace detail

inline void validate(const CalibrationTable& table) {
    if (table.rows.size() < 2) throw ValidationError("calibration table needs at least 2 rows");
    for (std::size_t i = 0; i < table.rows.size(); ++i) {
        const auto& r = table.rows[i];
        if (r.transmittance < 0.0 || r.transmittance > 1.0) {
            throw ValidationError("transmittance outside [0, 1] in row " + std::to_string(i + 1));
        }
        if (i > 0 && !(r.position_mm > table.rows[i - 1].position_mm)) {
            throw ValidationError("positions are not strictly increasing at row " + std::to_string(i + 1));
        }
    }
}

inline CalibrationTable parse_calibration(std::istream& in, const std::string& source = "<calibration>") {
    CalibrationTable table;
    std::string line;
    std::size_t line_no = 0;
    bool have_header = false;
    while (std::getline(in, line)) {
        ++line_no;
        const std::string_view v = detail::trim(line);
        if (v.empty()) continue;
        if (v.front() == '#') {
            constexpr std::string_view key = "wavelength:";
            const auto body = detail::trim(v.substr(1));
            if (body.substr(0, key.size()) == key) table.wavelength_label = std::string(detail::trim(body.substr(key.size())));
            continue;
        }
        if (!have_header) {
            const auto comma = v.find(',');
            if (comma == std::string_view::npos || detail::trim(v.substr(0, comma)) != "position_mm" ||
                detail::trim(v.substr(comma + 1)) != "transmittance") {
                throw ParseError(source, line_no, "expected header 'position_mm,transmittance'");
            }
            have_header = true;
            continue;
        }
        const auto comma = v.find(',');
        if (comma == std::string_view::npos || v.find(',', comma + 1) != std::string_view::npos) {
            throw ParseError(source, line_no, "expected exactly two fields");
        }
        CalibrationRow row;
        if (!detail::parse_double(v.substr(0, comma), row.position_mm) || !std::isfinite(row.position_mm)) {
            throw ParseError(source, line_no, "bad position value");
        }
        if (!detail::parse_double(v.substr(comma + 1), row.transmittance) || !std::isfinite(row.transmittance)) {
            throw ParseError(source, line_no, "bad transmittance value");
        }
        table.rows.push_back(row);
    }
    if (!have_header) throw ParseError(source, line_no, "missing header");
    validate(table);
    return table;
}

inline CalibrationTable load_calibration(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError(path);
    return parse_calibration(in, path);
}

/// Linear interpolation; positions outside the table are rejected.
inline double mu_at(const CalibrationTable& table, double position_mm) {
    if (table.rows.empty()) throw ValidationError("empty calibration table");
    if (!std::isfinite(position_mm) || position_mm < table.rows.front().position_mm ||
        position_mm > table.rows.back().position_mm) {
        throw DomainError("position " + std::to_string(position_mm) + " mm outside calibrated range");
    }
    const auto hi = std::lower_bound(table.rows.begin(), table.rows.end(), position_mm,
                                     [](const CalibrationRow& r, double x) { return r.position_mm < x; });
    if (hi->position_mm == position_mm) return hi->transmittance;
    const auto lo = hi - 1;
    const double t = (position_mm - lo->position_mm) / (hi->position_mm - lo->position_mm);
    return lo->transmittance + t * (hi->transmittance - lo->transmittance);
}

} // namespace qi
