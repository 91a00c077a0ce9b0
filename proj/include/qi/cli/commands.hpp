#pragma once

// Command implementations behind the `qi` executable. Each command renders its dataset to a
// stream so the same code path serves files, stdout and tests.

#include <cstdint>
#include <istream>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include <json.hpp>

#include "qi/analysis.hpp"
#include "qi/calibration.hpp"
#include "qi/cli/grid.hpp"
#include "qi/noise.hpp"
#include "qi/schemes.hpp"
#include "qi/sources.hpp"

namespace qi::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitInfeasible = 2;
inline constexpr int kExitValidation = 3;
inline constexpr int kExitIo = 4;

struct SourceOptions {
    std::string kind = "heralded"; // heralded | coherent
    std::uint64_t pairs = 20000;
    double nbar = 20000.0;
    std::uint64_t windows = 10;
    double background = 0.0;

    SourceModel model(double epsilon) const {
        SourceModel src;
        if (kind == "heralded") {
            src.kind = Heralded{pairs};
        } else if (kind == "coherent") {
            src.kind = Coherent{nbar};
        } else {
            throw DomainError("unknown source kind '" + kind + "' (heralded|coherent)");
        }
        src.epsilon = epsilon;
        src.background_rate = background;
        src.validate();
        if (windows < 1) throw DomainError("windows must be at least 1");
        return src;
    }
};

/// Uniform grid of n phases over [0, 2 pi).
inline std::vector<double> full_period_grid(std::size_t n) {
    if (n < 4) throw DomainError("phase grid needs at least 4 points");
    std::vector<double> g(n);
    for (std::size_t i = 0; i < n; ++i) g[i] = 2.0 * kPi * static_cast<double>(i) / static_cast<double>(n);
    return g;
}

// ---------------------------------------------------------------------------
// fringes
// ---------------------------------------------------------------------------

struct FringesConfig {
    double epsilon = 1.0;
    std::vector<double> thetas{0.0, kPi / 8.0, kPi / 4.0, 3.0 * kPi / 8.0, kPi / 2.0};
    std::size_t phase_points = 24;
    double phi1 = 0.0;
    double contrast = 1.0;
    AbsorberSpec absorber = NoAbsorber{};
    SourceOptions source;
    std::uint64_t seed = 1;
};

struct FringeSummary {
    double theta = 0.0;
    VisibilityResult fit;
};

/// Emits per-theta scan rows followed by a summary section with the fitted visibilities.
inline std::vector<FringeSummary> write_fringes(const FringesConfig& cfg, std::ostream& out) {
    if (cfg.thetas.empty()) throw DomainError("no post-selection angles given");
    const SourceModel src = cfg.source.model(cfg.epsilon);
    const auto grid = full_period_grid(cfg.phase_points);

    std::vector<FringeScan> scans;
    for (std::size_t t = 0; t < cfg.thetas.size(); ++t) {
        BenchConfig bench;
        bench.epsilon = cfg.epsilon;
        bench.phi1 = cfg.phi1;
        bench.contrast = cfg.contrast;
        bench.theta_post = cfg.thetas[t];
        scans.push_back(simulate_fringe_scan(src, bench, cfg.absorber, grid, cfg.source.windows,
                                             RngSeed{derive_seed(RngSeed{cfg.seed}, t)}));
    }

    out << "# schema: qi.fringes/1\n";
    out << "theta_rad,phase_rad,counts,expected_prob\n";
    for (std::size_t t = 0; t < scans.size(); ++t) {
        for (const auto& p : scans[t].points) {
            out << format_number(cfg.thetas[t]) << ',' << format_number(p.phase) << ',' << p.counts << ','
                << format_number(p.expected_prob) << '\n';
        }
    }

    std::vector<FringeSummary> summary;
    out << "# schema: qi.fringes.summary/1\n";
    out << "theta_rad,visibility,std_error,d_max,d_min,fit_offset,fit_amplitude,fit_phase,reduced_chi2,"
           "extrema_fallback\n";
    for (std::size_t t = 0; t < scans.size(); ++t) {
        const auto r = fit_fringe(scans[t]);
        summary.push_back({cfg.thetas[t], r});
        out << format_number(cfg.thetas[t]) << ',' << format_number(r.visibility) << ','
            << format_number(r.std_error) << ',' << format_number(r.d_max) << ',' << format_number(r.d_min) << ','
            << format_number(r.fit_offset) << ',' << format_number(r.fit_amplitude) << ','
            << format_number(r.fit_phase) << ',' << format_number(r.reduced_chi2) << ','
            << (r.extrema_fallback ? 1 : 0) << '\n';
    }
    return summary;
}

// ---------------------------------------------------------------------------
// sweep-mu
// ---------------------------------------------------------------------------

struct SweepMuConfig {
    double epsilon = 1.0;
    std::vector<double> mu_grid = parse_linspace("0:1:11");
    double lambda = 0.1;
    double dphi2 = 0.1;
    SourceOptions source;
    std::uint64_t seed = 1;
    /// With a calibration table the grid holds stage positions (mm) instead of mu values.
    std::optional<CalibrationTable> calibration;
};

struct SweepRow {
    std::optional<double> position_mm;
    double mu = 0.0;
    double ideal = 0.0;
    double measured_mc = 0.0;
    double reflectivity = 0.0;
    double jitter = 0.0;
};

/// Monte Carlo estimate of I_prob: counts at the constructive no-object setting minus counts
/// with the (dephased) object in place, normalized by the exposure.
inline double simulate_i_prob(const SourceModel& src, double mu, std::uint64_t windows, std::uint64_t seed) {
    BenchConfig bench;
    bench.epsilon = src.epsilon;
    const double p_max = detection_prob(bench, NoAbsorber{});
    bench.contrast = 0.0;
    const double p_obj = detection_prob(bench, OneArmAbsorber{mu, 0.0});
    const auto n_max = sample_total(src, p_max, derive_seed(RngSeed{seed}, 0), windows);
    const auto n_obj = sample_total(src, p_obj, derive_seed(RngSeed{seed}, 1), windows);
    const double exposure = src.rate() * static_cast<double>(windows);
    if (!(exposure > 0.0)) throw DomainError("source rate is zero");
    return (static_cast<double>(n_max) - static_cast<double>(n_obj)) / exposure;
}

inline std::vector<SweepRow> write_sweep_mu(const SweepMuConfig& cfg, std::ostream& out) {
    if (cfg.mu_grid.empty()) throw DomainError("empty sweep grid");
    NoiseSpec noise{cfg.lambda, cfg.dphi2, {}};
    noise.validate();
    const SourceModel src = cfg.source.model(cfg.epsilon);

    std::vector<SweepRow> rows;
    for (std::size_t i = 0; i < cfg.mu_grid.size(); ++i) {
        SweepRow r;
        if (cfg.calibration) {
            r.position_mm = cfg.mu_grid[i];
            r.mu = mu_at(*cfg.calibration, cfg.mu_grid[i]);
        } else {
            r.mu = cfg.mu_grid[i];
        }
        r.ideal = i_prob(r.mu, cfg.epsilon);
        r.measured_mc = simulate_i_prob(src, r.mu, cfg.source.windows, derive_seed(RngSeed{cfg.seed}, i));
        r.reflectivity = i_prob_reflectivity(r.mu, cfg.epsilon, cfg.lambda);
        r.jitter = i_prob_jitter(r.mu, cfg.epsilon, cfg.dphi2);
        rows.push_back(r);
    }

    out << (cfg.calibration ? "# schema: qi.sweep_mu.calibrated/1\n" : "# schema: qi.sweep_mu/1\n");
    out << "# epsilon=" << format_number(cfg.epsilon) << " lambda=" << format_number(cfg.lambda)
        << " dphi2=" << format_number(cfg.dphi2) << " source=" << cfg.source.kind << '\n';
    if (cfg.calibration && !cfg.calibration->wavelength_label.empty()) {
        out << "# calibration: " << cfg.calibration->wavelength_label << '\n';
    }
    out << (cfg.calibration ? "position_mm," : "")
        << "mu,i_prob_ideal,i_prob_measured_mc,i_prob_reflectivity,i_prob_jitter\n";
    for (const auto& r : rows) {
        if (r.position_mm) out << format_number(*r.position_mm) << ',';
        out << format_number(r.mu) << ',' << format_number(r.ideal) << ',' << format_number(r.measured_mc) << ','
            << format_number(r.reflectivity) << ',' << format_number(r.jitter) << '\n';
    }
    return rows;
}

// ---------------------------------------------------------------------------
// compare
// ---------------------------------------------------------------------------

struct CompareConfig {
    std::vector<int> n_values = parse_int_range("2..20");
    std::vector<double> mu_values = parse_linspace("0:1:11");
    double epsilon = 1.0;
};

inline SchemeComparison write_compare(const CompareConfig& cfg, std::ostream& out) {
    const auto table = compare_schemes(cfg.n_values, cfg.mu_values, cfg.epsilon);
    out << "# schema: qi.compare/1\n";
    out << "# note: " << table.footnote << '\n';
    out << "scheme,parameter,eta,metric\n";
    for (const auto& row : table.rows) {
        out << to_string(row.scheme) << ',';
        if (const auto* n = std::get_if<int>(&row.parameter)) {
            out << *n;
        } else if (const auto* mu = std::get_if<double>(&row.parameter)) {
            out << format_number(*mu);
        }
        out << ',' << format_number(row.eta) << ',' << (row.scheme == Scheme::ThisWork ? "i_prob" : "eta") << '\n';
    }
    return table;
}

// ---------------------------------------------------------------------------
// estimate
// ---------------------------------------------------------------------------

struct EstimateConfig {
    std::optional<double> visibility;
    std::optional<double> visibility_std_error;
    /// Fringe scan CSV (columns phase_rad, counts; optional theta_rad) to fit instead of a visibility.
    std::optional<std::string> scan_csv;
    std::optional<double> scan_theta;
    std::optional<double> epsilon;
    /// Visibility measured with equal transmittance in both arms; equals epsilon.
    std::optional<double> equal_arm_visibility;
    std::optional<double> mu1;
    Mu2Branch branch = Mu2Branch::below_mu1;
};

struct EstimateOutcome {
    nlohmann::ordered_json report;
    int exit_code = kExitOk;
};

/// Reads (phase, counts) pairs from the first CSV section with phase_rad and counts columns.
inline FringeScan read_scan_csv(std::istream& in, const std::string& source, std::optional<double> theta) {
    std::string line;
    std::size_t line_no = 0;
    std::vector<std::string> header;
    int col_phase = -1, col_counts = -1, col_theta = -1;
    FringeScan scan;
    std::optional<double> seen_theta;
    bool mixed_theta = false;
    while (std::getline(in, line)) {
        ++line_no;
        const auto v = detail::trim(line);
        if (v.empty()) continue;
        if (v.front() == '#') {
            if (!header.empty()) break; // next section
            continue;
        }
        const auto fields = split(v, ',');
        if (header.empty()) {
            for (std::size_t i = 0; i < fields.size(); ++i) {
                const auto f = detail::trim(fields[i]);
                header.emplace_back(f);
                if (f == "phase_rad") col_phase = static_cast<int>(i);
                if (f == "counts") col_counts = static_cast<int>(i);
                if (f == "theta_rad") col_theta = static_cast<int>(i);
            }
            if (col_phase < 0 || col_counts < 0) throw ParseError(source, line_no, "header needs phase_rad and counts");
            continue;
        }
        if (fields.size() != header.size()) throw ParseError(source, line_no, "wrong number of fields");
        double phase = 0.0, counts = 0.0;
        if (!detail::parse_double(fields[col_phase], phase)) throw ParseError(source, line_no, "bad phase_rad");
        if (!detail::parse_double(fields[col_counts], counts) || counts < 0.0) {
            throw ParseError(source, line_no, "bad counts");
        }
        if (col_theta >= 0) {
            double th = 0.0;
            if (!detail::parse_double(fields[col_theta], th)) throw ParseError(source, line_no, "bad theta_rad");
            if (theta) {
                if (std::abs(th - *theta) > 1e-9) continue;
            } else if (seen_theta && *seen_theta != th) {
                mixed_theta = true;
            }
            seen_theta = th;
        }
        scan.points.push_back({phase, static_cast<std::uint64_t>(std::llround(counts)), 0.0});
    }
    if (header.empty()) throw ParseError(source, line_no, "no data header found");
    if (mixed_theta) throw ValidationError("scan holds several theta_rad values; select one with --scan-theta");
    if (scan.points.empty()) throw ValidationError("scan has no rows for the requested theta");
    return scan;
}

/// Builds the JSON estimate report. Infeasible inputs are reported with exit code 2.
inline EstimateOutcome run_estimate(const EstimateConfig& cfg, std::istream* scan_stream = nullptr) {
    nlohmann::ordered_json j;
    j["schema"] = "qi.estimate/1";

    double eps = 0.0;
    if (cfg.epsilon) {
        eps = *cfg.epsilon;
        j["epsilon_source"] = "given";
    } else if (cfg.equal_arm_visibility) {
        eps = *cfg.equal_arm_visibility;
        j["epsilon_source"] = "equal_arm";
    } else {
        throw DomainError("estimate needs --epsilon or --equal-arm-visibility");
    }
    detail::require_unit_interval(eps, "epsilon");
    j["epsilon_used"] = eps;

    std::optional<double> vis = cfg.visibility;
    std::optional<double> vis_err = cfg.visibility_std_error;
    if (!vis && scan_stream) {
        const auto fit = fit_fringe(read_scan_csv(*scan_stream, cfg.scan_csv.value_or("<scan>"), cfg.scan_theta));
        vis = fit.visibility;
        vis_err = fit.std_error;
    }

    const bool two_arm = cfg.mu1.has_value();
    if (!vis) {
        j["mode"] = "calibration_only";
        j["feasibility"] = "feasible";
        return {j, kExitOk};
    }
    j["mode"] = two_arm ? "two_arm" : "one_arm";
    j["visibility"] = *vis;
    j["visibility_std_error"] = vis_err ? nlohmann::ordered_json(*vis_err) : nlohmann::ordered_json(nullptr);
    if (two_arm) j["mu1"] = *cfg.mu1;
    j["branch"] = two_arm ? (cfg.branch == Mu2Branch::below_mu1 ? "mu2_le_mu1" : "mu2_ge_mu1") : "mu_le_1";

    const char* key = two_arm ? "mu2_hat" : "mu_hat";
    try {
        double mu = 0.0;
        double model = 0.0;
        if (two_arm) {
            mu = estimate_mu_two_arm(*vis, *cfg.mu1, eps, cfg.branch);
            model = visibility_two_arm(*cfg.mu1, mu, eps);
        } else {
            mu = estimate_mu(*vis, eps);
            model = visibility_one_arm(mu, eps);
        }
        j[key] = mu;
        // d mu / d V from V = 2 eps x / (1 + x^2), mu = scale x^2; undefined at x = 1.
        const double scale = two_arm ? *cfg.mu1 : 1.0;
        const double x = std::sqrt(mu / scale);
        const double dv_dx = 2.0 * eps * (1.0 - x * x) / ((1.0 + x * x) * (1.0 + x * x));
        if (vis_err && std::abs(dv_dx) > 1e-12) {
            j[std::string(key) + "_std_error"] = std::abs(2.0 * scale * x / dv_dx) * *vis_err;
        } else {
            j[std::string(key) + "_std_error"] = nullptr;
        }
        j["feasibility"] = "feasible";
        j["residual"] = model - *vis;
        return {j, kExitOk};
    } catch (const InfeasibleError& e) {
        j[key] = nullptr;
        j["feasibility"] = "infeasible";
        j["message"] = e.what();
        return {j, kExitInfeasible};
    }
}

} // namespace qi::cli
