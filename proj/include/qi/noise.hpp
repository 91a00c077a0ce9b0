#pragma once

// Imperfection models: back-reflection from optical elements and relative-phase jitter.

#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "qi/interrogation.hpp"

namespace qi {

/// Largest phase variance accepted by the second-order expansion.
inline constexpr double kMaxPhaseVariance = 0.5;
/// Above this variance the expansion is flagged as unreliable.
inline constexpr double kPhaseVarianceWarning = 0.2;

struct NoiseSpec {
    /// Collective reflectivity lambda used by the closed-form laws.
    double lambda_total = 0.0;
    /// Phase-fluctuation variance, rad^2.
    double dphi2 = 0.0;
    /// Optional per-element reflectivities for the forward/backward state split.
    std::vector<double> lambdas;

    /// Throws DomainError on hard violations; returns soft warnings.
    std::vector<std::string> validate() const {
        detail::require_finite(lambda_total, "lambda");
        if (lambda_total < 0.0 || lambda_total >= 1.0) throw DomainError("lambda must lie in [0, 1)");
        detail::require_finite(dphi2, "dphi2");
        if (dphi2 < 0.0 || dphi2 > kMaxPhaseVariance) throw DomainError("dphi2 must lie in [0, 0.5]");
        double sum = 0.0;
        for (double l : lambdas) {
            detail::require_finite(l, "element reflectivity");
            if (l < 0.0) throw DomainError("element reflectivity must be non-negative");
            sum += l;
        }
        if (sum >= 1.0) throw DomainError("element reflectivities must sum below 1");
        std::vector<std::string> warnings;
        if (dphi2 > kPhaseVarianceWarning) {
            warnings.push_back("dphi2 = " + std::to_string(dphi2) +
                               " exceeds 0.2; second-order phase expansion is inaccurate");
        }
        return warnings;
    }
};

struct ReflectionSplit {
    DensityMatrix2 forward;
    /// Probability carried by the backward (reflected) block.
    double reflected_prob;
};

/// Splits rho into the forward block (1 - sum lambda_j) rho and the reflected block.
/// The reflected weight is sum lambda_j times Tr(rho), so Tr(forward) + reflected = Tr(rho);
/// for a normalized input it is sum lambda_j.
inline ReflectionSplit augment_with_reflection(const DensityMatrix2& rho, std::span<const double> lambdas) {
    double sum = 0.0;
    for (double l : lambdas) {
        detail::require_finite(l, "element reflectivity");
        if (l < 0.0) throw DomainError("element reflectivity must be non-negative");
        sum += l;
    }
    if (sum >= 1.0) throw DomainError("element reflectivities must sum below 1");
    const DensityMatrix2 fwd = DensityMatrix2::from_matrix((1.0 - sum) * rho.matrix(), kCompositeTol);
    return {fwd, sum * rho.trace()};
}

namespace detail {

inline void require_reflectivity(double lambda) {
    require_finite(lambda, "lambda");
    if (lambda < 0.0 || lambda >= 1.0) throw DomainError("lambda must lie in [0, 1)");
}

inline void require_phase_variance(double dphi2) {
    require_finite(dphi2, "dphi2");
    if (dphi2 < 0.0 || dphi2 > kMaxPhaseVariance) throw DomainError("dphi2 must lie in [0, 0.5]");
}

} // namespace detail

inline double detection_with_reflectivity(double mu, double epsilon, double phi, double lambda_total) {
    detail::require_reflectivity(lambda_total);
    return (1.0 - lambda_total) * one_arm_detection(mu, epsilon, phi);
}

inline double i_prob_reflectivity(double mu, double epsilon, double lambda_total) {
    detail::require_reflectivity(lambda_total);
    return (1.0 - lambda_total) * i_prob(mu, epsilon);
}

/// Constructive-interference maximum with cos(dphi) expanded to second order.
inline double dmax_with_jitter(double mu, double epsilon, double dphi2) {
    detail::require_phase_variance(dphi2);
    detail::require_unit_interval(mu, "transmittance");
    detail::require_unit_interval(epsilon, "epsilon");
    return 0.25 * (1.0 + mu + 2.0 * epsilon * std::sqrt(mu) * (1.0 - 0.5 * dphi2));
}

inline double i_prob_jitter(double mu, double epsilon, double dphi2) {
    detail::require_phase_variance(dphi2);
    detail::require_unit_interval(mu, "transmittance");
    detail::require_unit_interval(epsilon, "epsilon");
    return 0.25 * (1.0 + 2.0 * epsilon - mu - dphi2);
}

} // namespace qi
