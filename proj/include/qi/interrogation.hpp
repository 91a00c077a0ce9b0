#pragma once

// End-to-end model of the polarization interferometer: pre-selection polarizer at H,
// HWP at pi/8, first BDP, absorber, HWP at pi/4, second BDP, post-selection polarizer.

#include <cmath>
#include <numbers>
#include <type_traits>
#include <variant>

#include "qi/jones.hpp"

namespace qi {

inline constexpr double kPi = std::numbers::pi;

struct BenchConfig {
    double epsilon = 1.0;
    double phi1 = 0.0;
    double phi2 = 0.0;
    double theta_post = kPi / 4.0;
    /// Fringe contrast gamma in [0, 1] applied to the coherences; 0 models a path
    /// difference beyond the coherence length.
    double contrast = 1.0;

    static constexpr double pre_selection_angle = 0.0;
    static constexpr double hwp1_angle = kPi / 8.0;
    static constexpr double hwp2_angle = kPi / 4.0;

    double phi() const { return phi1 + phi2; }

    void validate() const {
        detail::require_unit_interval(epsilon, "epsilon");
        detail::require_unit_interval(contrast, "contrast");
        detail::require_finite(phi1, "phi1");
        detail::require_finite(phi2, "phi2");
        detail::require_finite(theta_post, "theta_post");
    }
};

struct NoAbsorber {};

struct OneArmAbsorber {
    double mu = 1.0;
    double delta = 0.0;
};

/// Absorbers in both arms; the shared phase is global and drops out of every probability.
struct TwoArmAbsorber {
    double mu1 = 1.0;
    double mu2 = 1.0;
    double delta = 0.0;
};

using AbsorberSpec = std::variant<NoAbsorber, OneArmAbsorber, TwoArmAbsorber>;

inline OpticalOperator absorber_operator(const AbsorberSpec& abs) {
    return std::visit(
        [](const auto& a) -> OpticalOperator {
            using T = std::decay_t<decltype(a)>;
            if constexpr (std::is_same_v<T, NoAbsorber>) {
                return OpticalOperator(Mat2::identity(), OperatorKind::absorber);
            } else if constexpr (std::is_same_v<T, OneArmAbsorber>) {
                return make_absorber(a.mu, a.delta);
            } else {
                return make_two_arm_absorber(a.mu1, a.mu2, a.delta);
            }
        },
        abs);
}

/// State after the second BDP. The second prism adds phi2 to the same spatial arm as the
/// first; after the pi/4 HWP swap that arm carries |H>, so in the polarization basis the
/// prism acts as bdp(-phi2) and the coherence picks up phi = phi1 + phi2.
inline DensityMatrix2 evolve_bench(const BenchConfig& cfg, const AbsorberSpec& abs) {
    cfg.validate();
    DensityMatrix2 rho = make_initial(cfg.epsilon);
    rho = apply(make_hwp(BenchConfig::hwp1_angle), rho);
    rho = apply(make_bdp(cfg.phi1), rho);
    rho = apply(absorber_operator(abs), rho);
    rho = apply(make_hwp(BenchConfig::hwp2_angle), rho);
    rho = apply(make_bdp(-cfg.phi2), rho);
    return rho.dephased(cfg.contrast);
}

/// Tr[rho_4 P(theta_post)] evaluated through the full operator pipeline.
inline double detection_prob(const BenchConfig& cfg, const AbsorberSpec& abs) {
    const DensityMatrix2 rho = evolve_bench(cfg, abs);
    const double p = expectation(rho, make_polarizer(cfg.theta_post));
    return std::clamp(p, 0.0, 1.0);
}

/// Closed form of detection_prob for arbitrary post-selection angle:
///   1/2 [ T_H cos^2(theta) + T_V sin^2(theta) + gamma eps sqrt(T_H T_V) sin(2 theta) cos(phi + delta) ]
/// where T_H, T_V are the arm transmittances after the swap.
inline double detection_prob_closed_form(const BenchConfig& cfg, const AbsorberSpec& abs) {
    cfg.validate();
    double t_h = 1.0;
    double t_v = 1.0;
    double delta = 0.0;
    if (const auto* a = std::get_if<OneArmAbsorber>(&abs)) {
        detail::require_unit_interval(a->mu, "transmittance");
        t_h = a->mu;
        delta = a->delta;
    } else if (const auto* b = std::get_if<TwoArmAbsorber>(&abs)) {
        detail::require_unit_interval(b->mu1, "transmittance mu1");
        detail::require_unit_interval(b->mu2, "transmittance mu2");
        t_h = b->mu2;
        t_v = b->mu1;
    }
    const double c = std::cos(cfg.theta_post);
    const double s = std::sin(cfg.theta_post);
    const double coherence = cfg.contrast * cfg.epsilon * std::sqrt(t_h * t_v);
    return 0.5 * (t_h * c * c + t_v * s * s + coherence * std::sin(2.0 * cfg.theta_post) * std::cos(cfg.phi() + delta));
}

/// 1/4 (1 + mu + 2 eps sqrt(mu) cos(phase)): one-arm absorber, theta_post = pi/4, full contrast.
inline double one_arm_detection(double mu, double epsilon, double phase) {
    detail::require_unit_interval(mu, "transmittance");
    detail::require_unit_interval(epsilon, "epsilon");
    return 0.25 * (1.0 + mu + 2.0 * epsilon * std::sqrt(mu) * std::cos(phase));
}

/// Detection probability once the object's path difference exceeds the coherence length.
inline double detection_prob_washed(double mu, double theta_post = kPi / 4.0) {
    detail::require_unit_interval(mu, "transmittance");
    const double c = std::cos(theta_post);
    const double s = std::sin(theta_post);
    return 0.5 * (mu * c * c + s * s);
}

inline double two_arm_detection(double mu1, double mu2, double epsilon, double phi) {
    detail::require_unit_interval(mu1, "transmittance mu1");
    detail::require_unit_interval(mu2, "transmittance mu2");
    detail::require_unit_interval(epsilon, "epsilon");
    return 0.25 * (mu1 + mu2 + 2.0 * epsilon * std::sqrt(mu1 * mu2) * std::cos(phi));
}

/// Probability of flagging the absorber: D_max(mu = 1, eps) - D(mu) = 1/4 (1 + 2 eps - mu).
inline double i_prob(double mu, double epsilon) {
    detail::require_unit_interval(mu, "transmittance");
    detail::require_unit_interval(epsilon, "epsilon");
    return 0.5 * (1.0 + epsilon) - 0.25 * (1.0 + mu);
}

} // namespace qi
