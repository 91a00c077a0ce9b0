#pragma once

// Efficiencies of the earlier interaction-free schemes, for side-by-side reporting with i_prob.

#include <cmath>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "qi/interrogation.hpp"

namespace qi {

enum class Scheme { EV, NPass, Zeno, ThisWork };

inline const char* to_string(Scheme s) {
    switch (s) {
    case Scheme::EV: return "EV";
    case Scheme::NPass: return "NPass";
    case Scheme::Zeno: return "Zeno";
    case Scheme::ThisWork: return "ThisWork";
    }
    return "unknown";
}

struct SchemeEfficiency {
    Scheme scheme = Scheme::EV;
    /// Pass count N, transmittance mu, or nothing for the EV bound.
    std::variant<std::monostate, int, double> parameter;
    double eta = 0.0;
};

struct SchemeComparison {
    std::vector<SchemeEfficiency> rows;
    std::string footnote;
};

inline constexpr const char* kMetricFootnote =
    "EV/NPass/Zeno rows are efficiencies eta (fraction of object-signalling detections); "
    "ThisWork rows are the absorber identification probability I_prob. The metrics differ "
    "and are not directly comparable.";

/// Upper bound of the single-interferometer Elitzur-Vaidman scheme.
inline double eta_ev_bound() { return 1.0 / 3.0; }

/// N consecutive interferometers with beam-splitter reflectivity cos^2(pi/2N): eta = cos^{2N}(pi/2N).
inline double eta_npass(int n) {
    if (n < 2) throw DomainError("pass count must be at least 2");
    const double r = std::cos(kPi / (2.0 * n));
    return std::pow(r * r, n);
}

/// Zeno loop with N rotations by pi/2N; the horizontal survival probability has the same form.
inline double eta_zeno(int n) { return eta_npass(n); }

inline SchemeComparison compare_schemes(std::span<const int> n_values, std::span<const double> mu_values,
                                        double epsilon) {
    SchemeComparison table;
    table.footnote = kMetricFootnote;
    table.rows.push_back({Scheme::EV, std::monostate{}, eta_ev_bound()});
    for (int n : n_values) table.rows.push_back({Scheme::NPass, n, eta_npass(n)});
    for (int n : n_values) table.rows.push_back({Scheme::Zeno, n, eta_zeno(n)});
    for (double mu : mu_values) table.rows.push_back({Scheme::ThisWork, mu, i_prob(mu, epsilon)});
    return table;
}

} // namespace qi
