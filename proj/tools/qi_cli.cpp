// qi: simulation and estimation front end for post-selected quantum interrogation.
//
//   qi fringes   --epsilon 0.8827 --source coherent --out fringes.csv
//   qi sweep-mu  --epsilon 0.92 --mu-grid 0:1:21 --out sweep.csv
//   qi estimate  --visibility 0.8 --epsilon 1
//   qi compare   --n 2..20 --out compare.csv
//   qi calib     --table data/calibration_synthetic.csv --position 5
//
// Every subcommand accepts --config FILE with key=value lines (keys are flag names without
// dashes); flags given on the command line take precedence over the file.
//
// Exit codes: 0 success, 2 infeasible estimate, 3 validation/parse error, 4 I/O error.

#include <algorithm>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "qi/cli/commands.hpp"

namespace {

using namespace qi;
using namespace qi::cli;

struct Output {
    std::string path = "-";

    bool to_stdout() const { return path == "-"; }

    void write(const std::string& text) const {
        if (to_stdout()) {
            std::cout << text;
            return;
        }
        std::ofstream f(path, std::ios::binary | std::ios::trunc);
        if (!f) throw IoError(path, "cannot write");
        f << text;
        f.close();
        if (!f) throw IoError(path, "write failed");
    }

    std::ostream& summary() const { return to_stdout() ? std::cerr : std::cout; }
};

std::vector<std::string> read_config_args(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError(path);
    std::vector<std::string> args;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto v = qi::detail::trim(line);
        if (v.empty() || v.front() == '#' || v.front() == ';') continue;
        const auto eq = v.find('=');
        if (eq == std::string_view::npos) throw ParseError(path, line_no, "expected key=value");
        const auto key = qi::detail::trim(v.substr(0, eq));
        const auto value = qi::detail::trim(v.substr(eq + 1));
        if (key.empty()) throw ParseError(path, line_no, "empty key");
        args.push_back("--" + std::string(key) + "=" + std::string(value));
    }
    return args;
}

/// argv with config-file options spliced in right after the subcommand name.
std::vector<std::string> expand_config(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    std::string config;
    for (std::size_t i = 0; i < args.size(); ++i) {
        if (args[i] == "--config" && i + 1 < args.size()) config = args[i + 1];
        if (args[i].rfind("--config=", 0) == 0) config = args[i].substr(9);
    }
    if (config.empty() || args.empty()) return args;
    auto extra = read_config_args(config);
    args.insert(args.begin() + 1, extra.begin(), extra.end());
    return args;
}

void add_source_options(CLI::App* cmd, SourceOptions& src) {
    cmd->add_option("--source", src.kind, "heralded | coherent")->check(CLI::IsMember({"heralded", "coherent"}));
    cmd->add_option("--pairs", src.pairs, "heralded pairs per window");
    cmd->add_option("--nbar", src.nbar, "coherent mean photons per window");
    cmd->add_option("--windows", src.windows, "windows per point");
    cmd->add_option("--background", src.background, "background counts per window");
}

std::string theta_label(double theta) { return format_number(theta); }

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Post-selected quantum interrogation: simulation and estimation", "qi"};
    app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
    app.require_subcommand(1);
    std::string config_path;

    // fringes
    FringesConfig fr;
    Output fr_out;
    std::string fr_thetas;
    std::optional<double> fr_mu, fr_mu1, fr_mu2;
    double fr_delta = 0.0;
    auto* fringes = app.add_subcommand("fringes", "simulate fringe scans and fit visibilities");
    fringes->add_option("--epsilon", fr.epsilon);
    fringes->add_option("--thetas", fr_thetas, "post-selection angles, e.g. 0,pi/8,pi/4");
    fringes->add_option("--phase-points", fr.phase_points);
    fringes->add_option("--phi1", fr.phi1);
    fringes->add_option("--contrast", fr.contrast);
    fringes->add_option("--mu", fr_mu, "one-arm absorber transmittance");
    fringes->add_option("--delta", fr_delta, "absorber phase");
    fringes->add_option("--mu1", fr_mu1, "two-arm absorber, arm 1");
    fringes->add_option("--mu2", fr_mu2, "two-arm absorber, arm 2");
    fringes->add_option("--seed", fr.seed);
    fringes->add_option("--out", fr_out.path);
    fringes->add_option("--config", config_path);
    add_source_options(fringes, fr.source);

    // sweep-mu
    SweepMuConfig sw;
    Output sw_out;
    std::string sw_grid, sw_positions, sw_calibration;
    auto* sweep = app.add_subcommand("sweep-mu", "I_prob versus transmittance, ideal/noisy/Monte Carlo");
    sweep->add_option("--epsilon", sw.epsilon);
    sweep->add_option("--mu-grid", sw_grid, "start:stop:count");
    sweep->add_option("--lambda", sw.lambda);
    sweep->add_option("--dphi2", sw.dphi2);
    sweep->add_option("--seed", sw.seed);
    sweep->add_option("--calibration", sw_calibration, "position_mm,transmittance table");
    sweep->add_option("--positions", sw_positions, "stage positions start:stop:count (with --calibration)");
    sweep->add_option("--out", sw_out.path);
    sweep->add_option("--config", config_path);
    add_source_options(sweep, sw.source);

    // estimate
    EstimateConfig es;
    Output es_out;
    std::string es_branch = "below";
    auto* estimate = app.add_subcommand("estimate", "transmittance from visibility");
    estimate->add_option("--visibility", es.visibility);
    estimate->add_option("--stderr", es.visibility_std_error, "standard error of the visibility");
    estimate->add_option("--scan", es.scan_csv, "fringe scan CSV to fit");
    estimate->add_option("--scan-theta", es.scan_theta);
    estimate->add_option("--epsilon", es.epsilon);
    estimate->add_option("--equal-arm-visibility", es.equal_arm_visibility);
    estimate->add_option("--mu1", es.mu1, "known transmittance of the reference arm");
    estimate->add_option("--branch", es_branch, "below | above mu1")->check(CLI::IsMember({"below", "above"}));
    estimate->add_option("--out", es_out.path);
    estimate->add_option("--config", config_path);

    // compare
    CompareConfig cp;
    Output cp_out;
    std::string cp_n, cp_mu;
    auto* compare = app.add_subcommand("compare", "efficiency table of interrogation schemes");
    compare->add_option("--n", cp_n, "pass counts, a..b or list");
    compare->add_option("--mu-grid", cp_mu);
    compare->add_option("--epsilon", cp.epsilon);
    compare->add_option("--out", cp_out.path);
    compare->add_option("--config", config_path);

    // calib
    std::string cal_table;
    double cal_position = 0.0;
    auto* calib = app.add_subcommand("calib", "transmittance at a stage position");
    calib->add_option("--table", cal_table)->required();
    calib->add_option("--position", cal_position)->required();
    calib->add_option("--config", config_path);

    try {
        auto args = expand_config(argc, argv);
        std::reverse(args.begin(), args.end());
        app.parse(args);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitValidation;
    } catch (const IoError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitIo;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitValidation;
    }

    try {
        if (fringes->parsed()) {
            if (!fr_thetas.empty()) fr.thetas = parse_angle_list(fr_thetas);
            if (fr_mu1 || fr_mu2) {
                fr.absorber = TwoArmAbsorber{fr_mu1.value_or(1.0), fr_mu2.value_or(1.0), fr_delta};
            } else if (fr_mu) {
                fr.absorber = OneArmAbsorber{*fr_mu, fr_delta};
            }
            std::ostringstream os;
            const auto summary = write_fringes(fr, os);
            fr_out.write(os.str());
            for (const auto& s : summary) {
                fr_out.summary() << "theta=" << theta_label(s.theta) << "  V=" << format_number(s.fit.visibility)
                                 << " +- " << format_number(s.fit.std_error)
                                 << (s.fit.extrema_fallback ? "  (extrema fallback)" : "") << '\n';
            }
        } else if (sweep->parsed()) {
            if (!sw_calibration.empty()) {
                sw.calibration = load_calibration(sw_calibration);
                const auto& rows = sw.calibration->rows;
                sw.mu_grid = sw_positions.empty()
                                 ? parse_linspace(format_number(rows.front().position_mm) + ":" +
                                                  format_number(rows.back().position_mm) + ":11")
                                 : parse_linspace(sw_positions);
            } else if (!sw_grid.empty()) {
                sw.mu_grid = parse_linspace(sw_grid);
            }
            std::ostringstream os;
            const auto rows = write_sweep_mu(sw, os);
            sw_out.write(os.str());
            sw_out.summary() << "sweep-mu: " << rows.size() << " rows, I_prob ideal "
                             << format_number(rows.front().ideal) << " -> " << format_number(rows.back().ideal) << '\n';
        } else if (estimate->parsed()) {
            es.branch = es_branch == "above" ? Mu2Branch::above_mu1 : Mu2Branch::below_mu1;
            std::ifstream scan;
            std::istream* scan_stream = nullptr;
            if (es.scan_csv && !es.visibility) {
                scan.open(*es.scan_csv);
                if (!scan) throw IoError(*es.scan_csv);
                scan_stream = &scan;
            }
            const auto outcome = run_estimate(es, scan_stream);
            es_out.write(outcome.report.dump(2) + "\n");
            if (!es_out.to_stdout()) std::cout << "feasibility: " << outcome.report["feasibility"].get<std::string>() << '\n';
            return outcome.exit_code;
        } else if (compare->parsed()) {
            if (!cp_n.empty()) cp.n_values = parse_int_range(cp_n);
            if (!cp_mu.empty()) cp.mu_values = parse_linspace(cp_mu);
            std::ostringstream os;
            const auto table = write_compare(cp, os);
            cp_out.write(os.str());
            cp_out.summary() << "compare: " << table.rows.size() << " rows\n";
        } else if (calib->parsed()) {
            const auto table = load_calibration(cal_table);
            std::cout << format_number(mu_at(table, cal_position)) << '\n';
        }
    } catch (const IoError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitIo;
    } catch (const InfeasibleError& e) {
        std::cerr << "infeasible: " << e.what() << '\n';
        return kExitInfeasible;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitValidation;
    }
    return kExitOk;
}
