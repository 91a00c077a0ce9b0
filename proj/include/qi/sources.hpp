#pragma once

// Photon-counting statistics for heralded single-photon and coherent (Poissonian) sources.
//
// Every phase point draws from its own engine seeded with derive_seed(seed, index), so a scan
// is reproducible under a fixed seed and points could be sampled in any order or in parallel.
// The engine is std::mt19937_64 with the standard library's binomial/Poisson distributions:
// streams are bit-identical for a given build and toolchain.

#include <cstdint>
#include <random>
#include <span>
#include <type_traits>
#include <variant>

#include "qi/fringe_scan.hpp"
#include "qi/interrogation.hpp"

namespace qi {

struct Heralded {
    std::uint64_t pairs_per_window = 0;
};

struct Coherent {
    /// Mean photons per window.
    double nbar = 0.0;
};

struct SourceModel {
    std::variant<Heralded, Coherent> kind = Heralded{};
    double epsilon = 1.0;
    /// Mean background (dark) counts per window.
    double background_rate = 0.0;

    void validate() const {
        detail::require_unit_interval(epsilon, "epsilon");
        detail::require_finite(background_rate, "background rate");
        if (background_rate < 0.0) throw DomainError("background rate must be non-negative");
        if (const auto* c = std::get_if<Coherent>(&kind)) {
            detail::require_finite(c->nbar, "nbar");
            if (c->nbar < 0.0) throw DomainError("nbar must be non-negative");
        }
    }

    /// Mean signal photons per window reaching the post-selector.
    double rate() const {
        return std::visit(
            [](const auto& k) -> double {
                if constexpr (std::is_same_v<std::decay_t<decltype(k)>, Heralded>) {
                    return static_cast<double>(k.pairs_per_window);
                } else {
                    return k.nbar;
                }
            },
            kind);
    }

    bool heralded() const { return std::holds_alternative<Heralded>(kind); }
};

struct RngSeed {
    std::uint64_t value = 0;
};

struct CountRecord {
    double phase_setting = 0.0;
    std::uint64_t counts = 0;
    std::uint64_t window_id = 0;
};

/// splitmix64 finalizer applied to seed + (index + 1) * golden gamma.
inline std::uint64_t derive_seed(RngSeed seed, std::uint64_t index) {
    std::uint64_t z = seed.value + (index + 1) * 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

namespace detail {

inline void require_probability(double p) {
    require_finite(p, "detection probability");
    if (p < 0.0 || p > 1.0) throw DomainError("detection probability must lie in [0, 1]");
}

template <class Engine>
std::uint64_t draw_window(const SourceModel& src, double p, Engine& rng) {
    std::uint64_t n = 0;
    if (const auto* h = std::get_if<Heralded>(&src.kind)) {
        if (p >= 1.0) {
            n += h->pairs_per_window;
        } else if (h->pairs_per_window > 0 && p > 0.0) {
            using Binom = std::binomial_distribution<std::uint64_t>;
            n += Binom(h->pairs_per_window, p)(rng);
        }
    } else {
        const double mean = std::get<Coherent>(src.kind).nbar * p;
        if (mean > 0.0) n += std::poisson_distribution<std::uint64_t>(mean)(rng);
    }
    if (src.background_rate > 0.0) n += std::poisson_distribution<std::uint64_t>(src.background_rate)(rng);
    return n;
}

} // namespace detail

/// Counts in one detection window: Binomial(pairs, p) for heralded photons, Poisson(nbar p)
/// for a coherent beam, plus Poisson background.
inline CountRecord sample_counts(const SourceModel& src, double detection_probability, RngSeed seed,
                                 double phase_setting = 0.0, std::uint64_t window_id = 0) {
    src.validate();
    detail::require_probability(detection_probability);
    std::mt19937_64 rng(derive_seed(seed, window_id));
    return {phase_setting, detail::draw_window(src, detection_probability, rng), window_id};
}

/// Total counts over `windows` consecutive windows drawn from one engine seeded by `seed`.
inline std::uint64_t sample_total(const SourceModel& src, double detection_probability, std::uint64_t seed,
                                  std::uint64_t windows) {
    src.validate();
    detail::require_probability(detection_probability);
    std::mt19937_64 rng(seed);
    std::uint64_t total = 0;
    for (std::uint64_t w = 0; w < windows; ++w) total += detail::draw_window(src, detection_probability, rng);
    return total;
}

/// Scans the total phase over `phase_grid` by setting phi2 = phase - phi1. The source's
/// epsilon is the input-state mixing parameter; cfg.epsilon is ignored.
inline FringeScan simulate_fringe_scan(const SourceModel& src, BenchConfig cfg, const AbsorberSpec& abs,
                                       std::span<const double> phase_grid, std::uint64_t windows_per_point,
                                       RngSeed seed) {
    if (phase_grid.empty()) throw DomainError("phase grid is empty");
    if (windows_per_point < 1) throw DomainError("windows per point must be at least 1");
    src.validate();
    cfg.epsilon = src.epsilon;

    FringeScan scan;
    scan.exposure = src.rate() * static_cast<double>(windows_per_point);
    scan.windows_per_point = windows_per_point;
    scan.points.reserve(phase_grid.size());
    for (std::size_t i = 0; i < phase_grid.size(); ++i) {
        detail::require_finite(phase_grid[i], "phase");
        cfg.phi2 = phase_grid[i] - cfg.phi1;
        const double p = detection_prob(cfg, abs);
        const std::uint64_t n = sample_total(src, p, derive_seed(seed, i), windows_per_point);
        scan.points.push_back({phase_grid[i], n, p});
    }
    return scan;
}

} // namespace qi
