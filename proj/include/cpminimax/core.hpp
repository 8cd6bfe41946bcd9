#pragma once

#include <cmath>
#include <cstdint>
#include <span>
#include <vector>

#include "cpminimax/matrix.hpp"

namespace cpminimax {

// ---------------------------------------------------------------------------
// Compensated summation
// ---------------------------------------------------------------------------

/// Neumaier-compensated accumulator. Add in index order; result() returns the
/// compensated total.
class CompensatedSum {
  public:
    void add(double x) {
        const double t = sum_ + x;
        if (std::abs(sum_) >= std::abs(x)) {
            comp_ += (sum_ - t) + x;
        } else {
            comp_ += (x - t) + sum_;
        }
        sum_ = t;
    }
    double result() const { return sum_ + comp_; }

  private:
    double sum_ = 0.0;
    double comp_ = 0.0;
};

double compensated_total(std::span<const double> xs);

// ---------------------------------------------------------------------------
// Truncation level and the truncated-statistic kernels
// ---------------------------------------------------------------------------

/// nu_a = E(Z^2 | |Z| >= a) for Z ~ N(0,1), equal to 1 + a*phi(a)/Phibar(a).
/// Direct phi/Phibar evaluation below a = 8; Mills-ratio continued fraction
/// above, where the direct ratio loses relative accuracy and eventually
/// underflows. Relative error <= 1e-10 on [0, 50].
double nu_a(double a);

/// Threshold a together with its centering constant nu_a.
struct TruncationLevel {
    double a = 0.0;
    double nu = 1.0;

    static TruncationLevel at(double a) { return TruncationLevel{a, nu_a(a)}; }
};

/// f_a(x) = (x^2 - nu_a) * 1{|x| >= a}.
double f_a(double x, const TruncationLevel& level);

/// inf{ f_a(y) : |y - x| <= w } in closed form, w >= 0.
double window_inf_f(double x, const TruncationLevel& level, double w);

/// Half-width of the tolerance window used by g_a: Cprime * sqrt(loglog(8n)/p).
double g_window_halfwidth(double Cprime, std::int64_t p, std::int64_t n);

/// g_a(x) = inf{ f_a(y) : |y - x| <= Cprime*sqrt(loglog(8n)/p) }.
double g_a(double x, const TruncationLevel& level, double Cprime, std::int64_t p,
           std::int64_t n);

/// Piecewise surrogate with window a/10:
///   0                      for |x| <= 9a/10,
///   a^2 - nu_a             for 9a/10 < |x| <= 11a/10,
///   (|x| - a/10)^2 - nu_a  for |x| > 11a/10.
/// Requires a > 0.
double h_a(double x, const TruncationLevel& level);

/// A = sum_j (y_j^2 - nu_a) * 1{|y_j| >= a}, accumulated in index order with
/// compensated summation. With a = 0 this is ||y||^2 - p.
double threshold_stat(const Vector& y, const TruncationLevel& level);

/// (y - Median(y) * 1) / sqrt(1 - gamma). Median of an even-length vector is
/// the average of the two central order statistics.
Vector median_correct(const Vector& y, double gamma);

/// Sample median used by median_correct.
double sample_median(const Vector& y);

// ---------------------------------------------------------------------------
// Time grids
// ---------------------------------------------------------------------------

enum class GridKind { Dyadic, Geometric };

/// Candidate changepoint scales. Dyadic: {1, 2, 4, ..., 2^floor(log2(n/2))}.
/// Geometric(delta2): {floor((1+delta2)^j)} up to n/2, deduplicated, together
/// with the time reflections {n - t}. Points are sorted ascending and unique.
struct TimeGrid {
    GridKind kind = GridKind::Dyadic;
    std::vector<std::int64_t> points;

    std::size_t size() const { return points.size(); }
};

TimeGrid dyadic_grid(std::int64_t n);
TimeGrid geometric_grid(std::int64_t n, double delta2);

// ---------------------------------------------------------------------------
// CUSUM statistics
// ---------------------------------------------------------------------------

/// Y_t = ((X_1 + ... + X_t) - (X_{n-t+1} + ... + X_n)) / sqrt(2t),
/// defined for 1 <= t <= floor(n/2).
Vector cusum(const ObservationMatrix& X, std::int64_t t);

/// Ytil_t = sqrt(t(n-t)/n) * ( mean of first t columns - mean of last n-t ),
/// defined for 1 <= t <= n-1.
Vector normalized_cusum(const ObservationMatrix& X, std::int64_t t);

/// Prefix-sum engine: pays O(pn) once, then answers any grid point in O(p),
/// so a whole grid costs O(pn) total.
class CusumTransform {
  public:
    explicit CusumTransform(const ObservationMatrix& X);

    std::int64_t p() const { return prefix_.rows(); }
    std::int64_t n() const { return n_; }

    Vector cusum(std::int64_t t) const;
    Vector normalized_cusum(std::int64_t t) const;

  private:
    Matrix prefix_;  // prefix_.col(t) = X_1 + ... + X_t, col(0) = 0
    std::int64_t n_;
};

}  // namespace cpminimax
