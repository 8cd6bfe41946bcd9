#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "cpminimax/procedures.hpp"
#include "cpminimax/simgen.hpp"

namespace cpminimax {

inline constexpr const char* kLibraryVersion = "0.1.0";
inline constexpr const char* kReportSchema = "cpminimax-report/1";

/// Runs fn(i) for i in [0, count) on up to CPMINIMAX_THREADS workers
/// (hardware concurrency when unset). Work is raced but each index is
/// processed exactly once; callers write to disjoint slots so results do not
/// depend on scheduling.
void parallel_for(std::int64_t count, const std::function<void(std::int64_t)>& fn);

/// Empirical (1-alpha) null quantile of the procedure's calibration
/// statistic: order statistic at index ceil((1-alpha) R) of R simulated null
/// statistics. Requires R >= 100 and alpha in (0, 1).
double calibrate(const Procedure& proc, std::int64_t p, std::int64_t n,
                 const CovarianceSpec& noise, double alpha, std::int64_t R,
                 std::uint64_t seed);

// ---------------------------------------------------------------------------
// Experiment configuration
// ---------------------------------------------------------------------------

enum class SignalKind { Multiple, Xi, Rho2 };

std::string to_string(SignalKind kind);

struct SignalPoint {
    SignalKind kind = SignalKind::Multiple;
    double value = 0.0;
};

struct ExperimentConfig {
    Procedure procedure = Procedure::fixed(1, 1.0);
    bool procedure_s_from_cell = true;       // fixed/sparse-asym/equicorr track cell s
    bool procedure_gamma_from_noise = true;  // equicorr tracks the noise gamma
    std::optional<double> explicit_C;        // set: skip calibration

    std::vector<std::int64_t> ps{50};
    std::vector<std::int64_t> ns{128};
    std::vector<std::int64_t> ss{1};
    std::vector<std::int64_t> t0s;  // empty: n/2 per cell

    CovarianceSpec noise = CovarianceSpec::identity();
    std::vector<SignalPoint> signals;

    std::int64_t calibrate_reps = 2000;
    std::int64_t null_reps = 1000;
    std::int64_t alt_reps = 1000;
    double alpha = 0.05;
    std::uint64_t seed = 1;

    void validate() const;

    static ExperimentConfig from_json_text(const std::string& text);
    static ExperimentConfig from_json_file(const std::string& path);
    std::string to_json_text() const;
};

// ---------------------------------------------------------------------------
// Reports
// ---------------------------------------------------------------------------

struct SignalResult {
    SignalKind kind = SignalKind::Multiple;
    double value = 0.0;
    double rho2 = 0.0;
    std::int64_t reps = 0;
    double power = 0.0;
    double power_se = 0.0;
    double type2 = 1.0;
    double type2_se = 0.0;
};

struct CellResult {
    std::int64_t p = 0, n = 0, s = 0, t0 = 0;
    std::string procedure;
    std::string noise;
    double threshold = 0.0;
    std::string threshold_mode;
    double c_hat = 0.0;
    std::int64_t null_reps = 0;
    double type1 = 0.0;
    double type1_se = 0.0;
    std::vector<SignalResult> signals;
    std::string error;
    double wall_ms = 0.0;
};

struct ExperimentReport {
    std::string schema = kReportSchema;
    std::string version = kLibraryVersion;
    std::string rng_scheme;
    std::uint64_t seed = 0;
    double alpha = 0.0;
    std::uint64_t config_hash = 0;
    std::vector<CellResult> cells;
};

/// Binomial standard error sqrt(f(1-f)/R).
double binomial_se(double freq, std::int64_t reps);

/// Rate quantity multiplied by C in the signal recipes (r*, the spatial
/// cutoff scale, the temporal scale, ...). true_s is the sparsity of the
/// planted alternative.
double signal_scale(const Procedure& proc, std::int64_t p, std::int64_t n,
                    std::int64_t true_s, const CovarianceSpec& noise);

ExperimentReport run_experiment(const ExperimentConfig& cfg);

/// Experiment over an (s, signal) grid emitting one record per combination,
/// suitable for locating the empirical phase boundary.
ExperimentReport sweep_phase(const ExperimentConfig& cfg);

// Export / import. CSV has one row per cell (RFC-4180 quoting, '.' decimal,
// %.17g doubles, UTF-8); JSON mirrors the full report. Both round-trip.
void export_csv(const ExperimentReport& report, const std::string& path);
ExperimentReport import_csv(const std::string& path);
void export_json(const ExperimentReport& report, const std::string& path);
ExperimentReport import_json(const std::string& path);

/// Long-format sweep CSV: one row per (cell, signal) pair.
void export_sweep_csv(const ExperimentReport& report, const std::string& path);

std::uint64_t fnv1a_hash(const std::string& text);

}  // namespace cpminimax
