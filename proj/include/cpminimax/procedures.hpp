#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "cpminimax/core.hpp"
#include "cpminimax/matrix.hpp"
#include "cpminimax/rates.hpp"
#include "cpminimax/spatial.hpp"

namespace cpminimax {

enum class ThresholdMode { FromC, Calibrated, Explicit };

std::string to_string(ThresholdMode mode);

/// Result of running one procedure on one data matrix. reject is
/// max_stat > threshold, except that exactly degenerate inputs (all columns
/// identical) never reject and are flagged.
struct TestOutcome {
    std::string procedure;
    TimeGrid grid;
    std::vector<std::pair<std::int64_t, double>> per_t;
    double max_stat = 0.0;
    double threshold = 0.0;
    ThresholdMode threshold_mode = ThresholdMode::FromC;
    bool reject = false;
    bool degenerate = false;
    std::vector<std::string> warnings;
    std::vector<TestOutcome> sub_outcomes;  // adaptive: one per grid sparsity
    std::optional<SpatialFunctionals> used_functionals;  // spatial procedures
};

enum class ProcedureKind {
    Fixed,
    Adaptive,
    DenseAsym,
    SparseAsym,
    SpatialKnown,
    SpatialEstimated,
    Equicorr,
    Temporal,
};

/// A test procedure with its tuning values. `statistic` is the scalar the
/// decision compares against `threshold` in the outcome (for the adaptive
/// test this is the rate-normalised maximum, so a single calibrated constant
/// reproduces the max-over-grid decision exactly).
class Procedure {
  public:
    static Procedure fixed(std::int64_t s, double C);
    static Procedure adaptive(double C);
    static Procedure dense_asym(double delta1 = 0.1, double delta2 = 0.1);
    static Procedure sparse_asym(std::int64_t s, double delta2 = 0.1);
    static Procedure spatial_known(SpatialFunctionals fn, double C);
    static Procedure spatial_estimated(double C);
    static Procedure equicorr(double gamma, std::int64_t s, double C,
                              double Cprime = 2.0);
    static Procedure temporal(double B, double C);

    static Procedure from_name(const std::string& name);  // defaults, C = 1

    ProcedureKind kind() const { return kind_; }
    std::string name() const;

    std::int64_t s() const { return s_; }
    double C() const { return C_; }
    void set_C(double C) { C_ = C; }
    double gamma() const { return gamma_; }
    void set_gamma(double gamma);
    double B() const { return B_; }
    double Cprime() const { return Cprime_; }
    double delta1() const { return delta1_; }
    double delta2() const { return delta2_; }
    const std::optional<SpatialFunctionals>& functionals() const { return fn_; }

    /// Scalar statistic used for both the decision and null calibration.
    double statistic(const ObservationMatrix& X) const;

    /// Threshold implied by the stored tuning (C-scaled rate, or the
    /// theory-fixed cutoff for the asymptotic tests).
    double default_threshold(std::int64_t p, std::int64_t n) const;

    /// Run with the default threshold.
    TestOutcome run(const ObservationMatrix& X) const;

    /// Run against a supplied threshold (calibrated or explicit).
    TestOutcome run_with_threshold(const ObservationMatrix& X, double threshold,
                                   ThresholdMode mode) const;

  private:
    Procedure() = default;

    TestOutcome evaluate(const ObservationMatrix& X,
                         std::optional<double> threshold_override,
                         ThresholdMode mode) const;

    ProcedureKind kind_ = ProcedureKind::Fixed;
    std::int64_t s_ = 1;
    double C_ = 1.0;
    double gamma_ = 0.0;
    double B_ = 0.0;
    double Cprime_ = 2.0;
    double delta1_ = 0.1;
    double delta2_ = 0.1;
    double warn_c_ = 1.0;  // loglog(8n)/p warning level for the equicorr test
    std::optional<SpatialFunctionals> fn_;
};

// Free-function forms.
TestOutcome test_fixed(const ObservationMatrix& X, std::int64_t s, double C);
TestOutcome test_adaptive(const ObservationMatrix& X, double C);
TestOutcome test_dense_asym(const ObservationMatrix& X, double delta1, double delta2);
TestOutcome test_sparse_asym(const ObservationMatrix& X, std::int64_t s,
                             double delta2 = 0.1);
TestOutcome test_spatial_known(const ObservationMatrix& X, const SpatialFunctionals& fn,
                               double C);
TestOutcome test_spatial_estimated(const ObservationMatrix& X, double C);
TestOutcome test_equicorr(const ObservationMatrix& X, double gamma, std::int64_t s,
                          double C, double Cprime = 2.0);
TestOutcome test_temporal(const ObservationMatrix& X, double B, double C);

}  // namespace cpminimax
