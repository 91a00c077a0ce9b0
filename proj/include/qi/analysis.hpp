#pragma once

// Fringe visibility extraction, closed-form visibility laws, transmittance/purity estimation
// and the weak-value form of the detection probability.

#include <algorithm>
#include <array>
#include <cmath>
#include <optional>
#include <span>
#include <vector>

#include "qi/fringe_scan.hpp"
#include "qi/interrogation.hpp"

namespace qi {

struct VisibilityResult {
    double visibility = 0.0;
    double std_error = 0.0;
    double d_max = 0.0;
    double d_min = 0.0;
    double fit_offset = 0.0;
    double fit_amplitude = 0.0;
    double fit_phase = 0.0;
    /// Poisson-weighted chi^2 per degree of freedom (0 when the fit is exactly determined).
    double reduced_chi2 = 0.0;
    /// Set when the sinusoid was rejected and the raw count extrema were used instead.
    bool extrema_fallback = false;
};

/// Fits whose reduced chi^2 exceeds this are replaced by the raw extrema.
inline constexpr double kFringeFallbackChi2 = 25.0;

/// (d_max - d_min) / (d_max + d_min).
inline double visibility_from_extrema(double d_max, double d_min) {
    detail::require_finite(d_max, "d_max");
    detail::require_finite(d_min, "d_min");
    if (d_min < 0.0 || d_max < d_min) throw DomainError("visibility needs d_max >= d_min >= 0");
    if (d_max + d_min == 0.0) throw UndefinedVisibilityError("visibility undefined: both extremes are zero");
    return (d_max - d_min) / (d_max + d_min);
}

namespace detail {

using Mat3 = std::array<std::array<double, 3>, 3>;

inline std::optional<Mat3> invert_symmetric3(const Mat3& m) {
    Mat3 c{};
    c[0][0] = m[1][1] * m[2][2] - m[1][2] * m[2][1];
    c[0][1] = m[0][2] * m[2][1] - m[0][1] * m[2][2];
    c[0][2] = m[0][1] * m[1][2] - m[0][2] * m[1][1];
    c[1][1] = m[0][0] * m[2][2] - m[0][2] * m[2][0];
    c[1][2] = m[0][2] * m[1][0] - m[0][0] * m[1][2];
    c[2][2] = m[0][0] * m[1][1] - m[0][1] * m[1][0];
    c[1][0] = c[0][1];
    c[2][0] = c[0][2];
    c[2][1] = c[1][2];
    const double det = m[0][0] * c[0][0] + m[0][1] * c[1][0] + m[0][2] * c[2][0];
    const double scale = m[0][0] * m[1][1] * m[2][2];
    if (!(std::abs(det) > 1e-12 * std::abs(scale))) return std::nullopt;
    for (auto& row : c)
        for (double& x : row) x /= det;
    return c;
}

struct SinusoidFit {
    std::array<double, 3> coef{}; // offset, cos, sin
    Mat3 cov{};
    double chi2 = 0.0;
};

/// Weighted least squares of y ~ a + c cos(phi) + s sin(phi), reweighted with Poisson
/// variances taken from the model (floored at one count).
inline SinusoidFit fit_sinusoid_poisson(std::span<const double> phases, std::span<const double> y) {
    const std::size_t n = phases.size();
    std::vector<double> w(n, 1.0);
    SinusoidFit fit;
    constexpr int kPasses = 4; // one unweighted pass, then model-variance reweighting
    for (int pass = 0; pass < kPasses; ++pass) {
        Mat3 ata{};
        std::array<double, 3> aty{};
        for (std::size_t k = 0; k < n; ++k) {
            const std::array<double, 3> row{1.0, std::cos(phases[k]), std::sin(phases[k])};
            for (int i = 0; i < 3; ++i) {
                aty[i] += w[k] * row[i] * y[k];
                for (int j = 0; j < 3; ++j) ata[i][j] += w[k] * row[i] * row[j];
            }
        }
        const auto inv = invert_symmetric3(ata);
        if (!inv) throw DomainError("phase grid does not determine a sinusoid");
        for (int i = 0; i < 3; ++i) {
            fit.coef[i] = 0.0;
            for (int j = 0; j < 3; ++j) fit.coef[i] += (*inv)[i][j] * aty[j];
        }
        fit.cov = *inv;
        fit.chi2 = 0.0;
        for (std::size_t k = 0; k < n; ++k) {
            const double model = fit.coef[0] + fit.coef[1] * std::cos(phases[k]) + fit.coef[2] * std::sin(phases[k]);
            const double var = std::max(model, 1.0);
            const double r = y[k] - model;
            fit.chi2 += r * r / var;
            w[k] = 1.0 / var;
        }
    }
    return fit;
}

inline VisibilityResult extrema_result(std::span<const double> y) {
    const auto [lo, hi] = std::minmax_element(y.begin(), y.end());
    VisibilityResult r;
    r.d_max = *hi;
    r.d_min = *lo;
    r.visibility = visibility_from_extrema(r.d_max, r.d_min);
    const double sum = r.d_max + r.d_min;
    // Poisson errors on each extreme propagated through (max - min) / (max + min).
    r.std_error = 2.0 * std::sqrt(r.d_min * r.d_min * r.d_max + r.d_max * r.d_max * r.d_min) / (sum * sum);
    r.fit_offset = 0.5 * sum;
    r.fit_amplitude = 0.5 * (r.d_max - r.d_min);
    r.extrema_fallback = true;
    return r;
}

} // namespace detail

/// Fits counts ~ a + b cos(phi - phi0) with Poisson weights. V = b / a, with sigma_V from the
/// full fit covariance of (a, c, s). The offset/amplitude correlation matters: dropping it
/// overstates the error by roughly half at V ~ 0.8. Constant data (b = 0) gets sigma_b / a.
inline VisibilityResult fit_fringe(std::span<const double> phases, std::span<const double> counts) {
    if (phases.size() != counts.size()) throw DomainError("phase and count arrays differ in length");
    if (phases.size() < 4) throw DomainError("fringe fit needs at least 4 points");
    for (std::size_t k = 0; k < phases.size(); ++k) {
        detail::require_finite(phases[k], "phase");
        detail::require_finite(counts[k], "counts");
        if (counts[k] < 0.0) throw DomainError("counts must be non-negative");
    }

    const auto fit = detail::fit_sinusoid_poisson(phases, counts);
    const double a = fit.coef[0];
    const double c = fit.coef[1];
    const double s = fit.coef[2];
    double b = std::hypot(c, s);
    const std::size_t dof = phases.size() - 3;
    const double reduced_chi2 = dof > 0 ? fit.chi2 / static_cast<double>(dof) : 0.0;

    // Exact full-contrast data can land a rounding step above b = a.
    if (a > 0.0 && b > a && b - a <= 1e-12 * a) b = a;
    if (!(a > 0.0) || b > a || reduced_chi2 > kFringeFallbackChi2) {
        auto r = detail::extrema_result(counts);
        r.reduced_chi2 = reduced_chi2;
        return r;
    }

    const double v = b / a;
    double var_v;
    if (b > 0.0) {
        // gradient of b / a with respect to (a, c, s)
        const std::array<double, 3> g{-v / a, c / (a * b), s / (a * b)};
        var_v = 0.0;
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j) var_v += g[i] * fit.cov[i][j] * g[j];
    } else {
        var_v = 0.5 * (fit.cov[1][1] + fit.cov[2][2]) / (a * a);
    }

    VisibilityResult r;
    r.fit_offset = a;
    r.fit_amplitude = b;
    r.fit_phase = b > 0.0 ? std::atan2(s, c) : 0.0;
    r.d_max = a + b;
    r.d_min = a - b;
    r.visibility = v;
    r.std_error = std::sqrt(std::max(var_v, 0.0));
    r.reduced_chi2 = reduced_chi2;
    return r;
}

inline VisibilityResult fit_fringe(const FringeScan& scan) {
    std::vector<double> phases;
    std::vector<double> counts;
    phases.reserve(scan.points.size());
    counts.reserve(scan.points.size());
    for (const auto& p : scan.points) {
        phases.push_back(p.phase);
        counts.push_back(static_cast<double>(p.counts));
    }
    return fit_fringe(phases, counts);
}

// ---------------------------------------------------------------------------
// Closed-form visibility laws
// ---------------------------------------------------------------------------

/// Fringe visibility without an absorber: eps |sin 2 theta|.
inline double visibility_no_absorber(double theta, double epsilon) {
    detail::require_finite(theta, "theta");
    detail::require_unit_interval(epsilon, "epsilon");
    return epsilon * std::abs(std::sin(2.0 * theta));
}

inline double visibility_one_arm(double mu, double epsilon) {
    detail::require_unit_interval(mu, "transmittance");
    detail::require_unit_interval(epsilon, "epsilon");
    return 2.0 * epsilon * std::sqrt(mu) / (1.0 + mu);
}

inline double visibility_two_arm(double mu1, double mu2, double epsilon) {
    detail::require_unit_interval(mu1, "transmittance mu1");
    detail::require_unit_interval(mu2, "transmittance mu2");
    detail::require_unit_interval(epsilon, "epsilon");
    if (mu1 + mu2 == 0.0) throw UndefinedVisibilityError("visibility undefined: both arms blocked");
    return 2.0 * epsilon * std::sqrt(mu1 * mu2) / (mu1 + mu2);
}

// ---------------------------------------------------------------------------
// Inversions
// ---------------------------------------------------------------------------

namespace detail {

/// Smaller root of V (1 + x^2) = 2 eps x; the two roots multiply to 1.
inline double small_ratio_root(double visibility, double epsilon) {
    require_finite(visibility, "visibility");
    require_finite(epsilon, "epsilon");
    if (!(epsilon > 0.0) || epsilon > 1.0) throw DomainError("epsilon must lie in (0, 1]");
    if (!(visibility > 0.0)) throw DomainError("visibility must be positive");
    if (visibility > epsilon * (1.0 + 1e-12)) {
        throw InfeasibleError("no transmittance consistent with this purity: V > epsilon");
    }
    if (visibility >= epsilon) return 1.0;
    return visibility / (epsilon + std::sqrt(epsilon * epsilon - visibility * visibility));
}

} // namespace detail

/// Transmittance (mu <= 1 root) from a one-arm visibility and known epsilon.
inline double estimate_mu(double visibility, double epsilon) {
    const double x = detail::small_ratio_root(visibility, epsilon);
    return x * x;
}

enum class Mu2Branch { below_mu1, above_mu1 };

/// Transmittance of the second arm given mu1. Both roots mu1 r^2 and mu1 / r^2 reproduce V;
/// the default picks mu2 <= mu1.
inline double estimate_mu_two_arm(double visibility, double mu1, double epsilon,
                                  Mu2Branch branch = Mu2Branch::below_mu1) {
    detail::require_finite(mu1, "mu1");
    if (!(mu1 > 0.0) || mu1 > 1.0) throw DomainError("mu1 must lie in (0, 1]");
    const double r = detail::small_ratio_root(visibility, epsilon);
    const double r2 = r * r;
    if (branch == Mu2Branch::below_mu1) return mu1 * r2;
    const double mu2 = mu1 / r2;
    if (mu2 > 1.0 + 1e-12) throw InfeasibleError("upper branch gives mu2 > 1");
    return std::min(mu2, 1.0);
}

// ---------------------------------------------------------------------------
// Purity fits
// ---------------------------------------------------------------------------

struct EpsilonFit {
    double epsilon = 0.0;
    double rmse = 0.0;
};

struct IprobSample {
    double mu = 0.0;
    double i_prob = 0.0;
};

struct VisibilitySample {
    double mu2 = 0.0;
    double visibility = 0.0;
};

/// Least-squares epsilon for I = 1/4 (1 + 2 eps - mu). The model is linear in eps, so the
/// optimum is eps = 2 mean(I - (1 - mu)/4), clamped to [0, 1].
inline EpsilonFit fit_epsilon_iprob(std::span<const IprobSample> data) {
    if (data.empty()) throw DomainError("no data to fit");
    if (data.size() < 2) throw DomainError("fit needs at least 2 points");
    double acc = 0.0;
    for (const auto& d : data) {
        detail::require_unit_interval(d.mu, "transmittance");
        detail::require_finite(d.i_prob, "i_prob");
        acc += d.i_prob - 0.25 * (1.0 - d.mu);
    }
    const double eps = std::clamp(2.0 * acc / static_cast<double>(data.size()), 0.0, 1.0);
    double sse = 0.0;
    for (const auto& d : data) {
        const double r = d.i_prob - 0.25 * (1.0 + 2.0 * eps - d.mu);
        sse += r * r;
    }
    return {eps, std::sqrt(sse / static_cast<double>(data.size()))};
}

/// Least-squares epsilon for V = eps g(mu2), g = 2 sqrt(mu1 mu2) / (mu1 + mu2).
inline EpsilonFit fit_epsilon_visibility(std::span<const VisibilitySample> data, double mu1) {
    if (data.empty()) throw DomainError("no data to fit");
    detail::require_finite(mu1, "mu1");
    if (!(mu1 > 0.0) || mu1 > 1.0) throw DomainError("mu1 must lie in (0, 1]");
    double gv = 0.0;
    double gg = 0.0;
    for (const auto& d : data) {
        detail::require_unit_interval(d.mu2, "transmittance mu2");
        detail::require_finite(d.visibility, "visibility");
        const double g = visibility_two_arm(mu1, d.mu2, 1.0);
        gv += g * d.visibility;
        gg += g * g;
    }
    if (!(gg > 0.0)) throw DomainError("data carry no information on epsilon (all mu2 = 0)");
    const double eps = std::clamp(gv / gg, 0.0, 1.0);
    double sse = 0.0;
    for (const auto& d : data) {
        const double r = d.visibility - eps * visibility_two_arm(mu1, d.mu2, 1.0);
        sse += r * r;
    }
    return {eps, std::sqrt(sse / static_cast<double>(data.size()))};
}

// ---------------------------------------------------------------------------
// Weak values
// ---------------------------------------------------------------------------

/// Weak value of the absorber operator for pre-selection (|H> + |V>)/sqrt2 and
/// post-selection cos(theta)|H> + sin(theta)|V>, normalized as (cos theta + sin theta e^{i delta} sqrt mu)/sqrt2.
inline Complex weak_value(double theta, double delta, double mu) {
    detail::require_finite(theta, "theta");
    detail::require_finite(delta, "delta");
    detail::require_unit_interval(mu, "transmittance");
    return (std::cos(theta) + std::sin(theta) * std::polar(std::sqrt(mu), delta)) / std::numbers::sqrt2;
}

/// |A_w(pi/4, phi + delta, mu)|^2, which equals the detection probability at eps = 1.
inline double weak_value_detection_identity(double phi_plus_delta, double mu) {
    return std::norm(weak_value(kPi / 4.0, phi_plus_delta, mu));
}

/// Visibility of |A_w|^2 as the phase is scanned; the extremes sit at phase 0 and pi.
inline double weak_value_visibility(double mu) {
    const double hi = weak_value_detection_identity(0.0, mu);
    const double lo = weak_value_detection_identity(kPi, mu);
    return visibility_from_extrema(hi, lo);
}

struct NonunitaryVisibility {
    double visibility = 0.0;
    /// <i|F|i>
    Complex expectation{};
    /// <i|R^2|i> = <i|F^dagger F|i>
    double r_squared_expectation = 0.0;
    /// R_w = <f|R|i> / <f|i>; empty when <f|i> = 0.
    std::optional<Complex> weak_value_r;
    /// R_w <f|i>; empty when the weak value is undefined.
    std::optional<Complex> weak_value_product;
};

/// V = 2 |<i|F|i>| / (1 + <i|R^2|i>) for F = U R, together with the weak value of R for
/// the post-selected state f.
inline NonunitaryVisibility nonunitary_expectation_visibility(const OpticalOperator& f, const Ket& i_state,
                                                              const Ket& post = linear_ket(kPi / 4.0)) {
    if (std::abs(norm(i_state) - 1.0) > 1e-9) throw DomainError("pre-selected state must be normalized");
    const auto pd = polar_decompose(f);
    const Mat2& F = f.matrix();
    const Mat2& R = pd.hermitian.matrix();

    NonunitaryVisibility out;
    out.expectation = inner(i_state, F * i_state);
    out.r_squared_expectation = inner(i_state, (R * R) * i_state).real();
    out.visibility = 2.0 * std::abs(out.expectation) / (1.0 + out.r_squared_expectation);

    const Complex overlap = inner(post, i_state);
    if (std::abs(overlap) > 1e-12) {
        const Complex rw = inner(post, R * i_state) / overlap;
        out.weak_value_r = rw;
        out.weak_value_product = rw * overlap;
    }
    return out;
}

} // namespace qi
