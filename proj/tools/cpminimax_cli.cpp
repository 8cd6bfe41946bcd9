// Batch CLI for the changepoint testing library: threshold calibration,
// single-matrix test verdicts, config-driven experiments and phase sweeps.

#include <cstdint>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "cpminimax/harness.hpp"
#include "cpminimax/matrix_io.hpp"
#include "cpminimax/procedures.hpp"
#include "cpminimax/rates.hpp"
#include "cpminimax/simgen.hpp"
#include "cpminimax/spatial.hpp"

namespace {

using cpminimax::CovarianceSpec;
using cpminimax::Procedure;
using cpminimax::SpatialFunctionals;
using nlohmann::json;

struct ProcOptions {
    std::string name = "fixed";
    std::int64_t s = 1;
    double C = 1.0;
    double Cprime = 2.0;
    std::string gamma = "0";  // number, or "auto" to plug in the gamma estimate
    double B = 0.0;
    double delta1 = 0.1;
    double delta2 = 0.1;
    double fn_trace = 0.0;
    double fn_frobenius = 0.0;
    double fn_operator = 0.0;
};

void add_proc_options(CLI::App* cmd, ProcOptions& opt) {
    cmd->add_option("--proc", opt.name,
                    "fixed|adaptive|dense-asym|sparse-asym|spatial-known|"
                    "spatial-est|equicorr|temporal")
        ->required();
    cmd->add_option("--s", opt.s, "sparsity tuning (fixed, sparse-asym, equicorr)");
    cmd->add_option("--C", opt.C, "threshold constant C");
    cmd->add_option("--Cprime", opt.Cprime, "median tolerance constant (equicorr)");
    cmd->add_option("--gamma", opt.gamma,
                    "equicorrelation level (equicorr); 'auto' estimates it from the "
                    "input via the robust trace inversion");
    cmd->add_option("--B", opt.B, "temporal dependence budget (temporal)");
    cmd->add_option("--delta1", opt.delta1, "asymptotic test margin");
    cmd->add_option("--delta2", opt.delta2, "geometric grid spacing");
    cmd->add_option("--trace", opt.fn_trace, "known trace (spatial-known)");
    cmd->add_option("--frobenius", opt.fn_frobenius, "known Frobenius norm");
    cmd->add_option("--operator", opt.fn_operator, "known operator norm");
}

// X is consulted only for --gamma auto; pass nullptr where no data exists
// (the calibrate subcommand simulates its own nulls).
Procedure make_procedure(const ProcOptions& opt, const cpminimax::ObservationMatrix* X,
                         std::optional<double>* gamma_estimate_out = nullptr) {
    if (opt.name == "fixed") return Procedure::fixed(opt.s, opt.C);
    if (opt.name == "adaptive") return Procedure::adaptive(opt.C);
    if (opt.name == "dense-asym") return Procedure::dense_asym(opt.delta1, opt.delta2);
    if (opt.name == "sparse-asym") return Procedure::sparse_asym(opt.s, opt.delta2);
    if (opt.name == "spatial-known") {
        return Procedure::spatial_known(
            SpatialFunctionals{opt.fn_trace, opt.fn_frobenius, opt.fn_operator}, opt.C);
    }
    if (opt.name == "spatial-est") return Procedure::spatial_estimated(opt.C);
    if (opt.name == "equicorr") {
        double gamma = 0.0;
        if (opt.gamma == "auto") {
            if (X == nullptr) {
                throw CLI::ValidationError("--gamma",
                                           "'auto' needs an input matrix to estimate from");
            }
            gamma = cpminimax::gamma_estimate(*X).value;
            if (gamma_estimate_out) *gamma_estimate_out = gamma;
        } else {
            gamma = std::stod(opt.gamma);
        }
        return Procedure::equicorr(gamma, opt.s, opt.C, opt.Cprime);
    }
    if (opt.name == "temporal") return Procedure::temporal(opt.B, opt.C);
    throw CLI::ValidationError("--proc", "unknown procedure: " + opt.name);
}

// Noise spec strings: identity | equicorr:<gamma> | temporal:<B> | explicit:<path>
CovarianceSpec parse_noise(const std::string& spec) {
    if (spec == "identity") return CovarianceSpec::identity();
    const auto colon = spec.find(':');
    if (colon != std::string::npos) {
        const std::string kind = spec.substr(0, colon);
        const std::string arg = spec.substr(colon + 1);
        if (kind == "equicorr") return CovarianceSpec::equicorrelated(std::stod(arg));
        if (kind == "temporal") return CovarianceSpec::temporal_block(std::stod(arg));
        if (kind == "explicit") {
            return CovarianceSpec::explicit_matrix(cpminimax::load_matrix(arg));
        }
    }
    throw CLI::ValidationError("--noise", "unknown noise spec: " + spec);
}

json outcome_to_json(const cpminimax::TestOutcome& out) {
    json j;
    j["procedure"] = out.procedure;
    j["reject"] = out.reject;
    j["max_stat"] = out.max_stat;
    j["threshold"] = out.threshold;
    j["threshold_mode"] = cpminimax::to_string(out.threshold_mode);
    j["degenerate"] = out.degenerate;
    j["grid"] = out.grid.points;
    json per_t = json::array();
    for (const auto& [t, stat] : out.per_t) {
        per_t.push_back({{"t", t}, {"stat", stat}});
    }
    j["per_t"] = per_t;
    if (!out.warnings.empty()) j["warnings"] = out.warnings;
    if (out.used_functionals) {
        j["functionals"] = {{"trace", out.used_functionals->trace},
                            {"frobenius", out.used_functionals->frobenius},
                            {"operator", out.used_functionals->operator_norm}};
    }
    if (!out.sub_outcomes.empty()) {
        json subs = json::array();
        for (const auto& sub : out.sub_outcomes) {
            subs.push_back({{"threshold", sub.threshold},
                            {"max_stat", sub.max_stat},
                            {"reject", sub.reject}});
        }
        j["sub_outcomes"] = subs;
    }
    return j;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Minimax changepoint tests and Monte Carlo harness"};
    app.require_subcommand(1);

    // --- calibrate ---------------------------------------------------------
    auto* cal = app.add_subcommand("calibrate", "null-quantile threshold calibration");
    ProcOptions cal_proc;
    add_proc_options(cal, cal_proc);
    std::int64_t cal_p = 0, cal_n = 0, cal_reps = 2000;
    std::uint64_t cal_seed = 1;
    double cal_alpha = 0.05;
    std::string cal_noise = "identity";
    cal->add_option("--p", cal_p, "dimension")->required();
    cal->add_option("--n", cal_n, "time length")->required();
    cal->add_option("--noise", cal_noise, "identity|equicorr:g|temporal:B|explicit:path");
    cal->add_option("--alpha", cal_alpha, "nominal level");
    cal->add_option("--reps", cal_reps, "null replications (>= 100)");
    cal->add_option("--seed", cal_seed, "master seed");

    // --- test --------------------------------------------------------------
    auto* tst = app.add_subcommand("test", "run one procedure on a matrix file");
    ProcOptions tst_proc;
    add_proc_options(tst, tst_proc);
    std::string tst_input, tst_threshold = "auto", tst_noise = "identity";
    std::int64_t tst_reps = 2000;
    std::uint64_t tst_seed = 1;
    double tst_alpha = 0.05;
    tst->add_option("--input", tst_input, "matrix file (CSV or CPMX binary)")->required();
    tst->add_option("--threshold", tst_threshold,
                    "numeric threshold, or 'auto' to calibrate on the null");
    tst->add_option("--noise", tst_noise, "null noise model for auto calibration");
    tst->add_option("--alpha", tst_alpha, "level for auto calibration");
    tst->add_option("--reps", tst_reps, "replications for auto calibration");
    tst->add_option("--seed", tst_seed, "seed for auto calibration");

    // --- experiment / sweep -------------------------------------------------
    auto* exp = app.add_subcommand("experiment", "config-driven error estimation");
    std::string exp_config, exp_out = ".";
    exp->add_option("--config", exp_config, "experiment config JSON")->required();
    exp->add_option("--out", exp_out, "output directory");

    auto* swp = app.add_subcommand("sweep", "power sweep over (s, signal) grid");
    std::string swp_config, swp_out = ".";
    swp->add_option("--config", swp_config, "sweep config JSON")->required();
    swp->add_option("--out", swp_out, "output directory");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*cal) {
            const auto proc = make_procedure(cal_proc, nullptr);
            const auto noise = parse_noise(cal_noise);
            const double thr =
                cpminimax::calibrate(proc, cal_p, cal_n, noise, cal_alpha, cal_reps, cal_seed);
            json j;
            j["procedure"] = proc.name();
            j["p"] = cal_p;
            j["n"] = cal_n;
            j["alpha"] = cal_alpha;
            j["reps"] = cal_reps;
            j["seed"] = cal_seed;
            j["threshold"] = thr;
            std::cout << j.dump(2) << std::endl;
        } else if (*tst) {
            const cpminimax::ObservationMatrix X(cpminimax::load_matrix(tst_input));
            std::optional<double> gamma_est;
            const auto proc = make_procedure(tst_proc, &X, &gamma_est);
            cpminimax::TestOutcome out;
            if (tst_threshold == "auto") {
                const auto noise = parse_noise(tst_noise);
                const double thr = cpminimax::calibrate(proc, X.p(), X.n(), noise,
                                                        tst_alpha, tst_reps, tst_seed);
                out = proc.run_with_threshold(X, thr, cpminimax::ThresholdMode::Calibrated);
            } else {
                out = proc.run_with_threshold(X, std::stod(tst_threshold),
                                              cpminimax::ThresholdMode::Explicit);
            }
            auto verdict = outcome_to_json(out);
            if (gamma_est) verdict["gamma_estimate"] = *gamma_est;
            std::cout << verdict.dump(2) << std::endl;
        } else if (*exp) {
            const auto cfg = cpminimax::ExperimentConfig::from_json_file(exp_config);
            const auto report = cpminimax::run_experiment(cfg);
            std::filesystem::create_directories(exp_out);
            cpminimax::export_json(report, exp_out + "/report.json");
            cpminimax::export_csv(report, exp_out + "/report.csv");
            std::cout << "wrote " << exp_out << "/report.{json,csv} ("
                      << report.cells.size() << " cells)" << std::endl;
        } else if (*swp) {
            const auto cfg = cpminimax::ExperimentConfig::from_json_file(swp_config);
            const auto report = cpminimax::sweep_phase(cfg);
            std::filesystem::create_directories(swp_out);
            cpminimax::export_json(report, swp_out + "/sweep.json");
            cpminimax::export_sweep_csv(report, swp_out + "/sweep.csv");
            std::cout << "wrote " << swp_out << "/sweep.{json,csv} ("
                      << report.cells.size() << " cells)" << std::endl;
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << std::endl;
        return 1;
    }
    return 0;
}
