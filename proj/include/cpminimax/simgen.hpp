#pragma once

#include <cmath>
#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "cpminimax/matrix.hpp"
#include "cpminimax/rng.hpp"
#include "cpminimax/spatial.hpp"

namespace cpminimax {

// ---------------------------------------------------------------------------
// Noise models
// ---------------------------------------------------------------------------

enum class CovarianceKind { Identity, Equicorrelated, Explicit, TemporalBlock };

/// Per-time noise model. TemporalBlock draws one Gaussian vector per block of
/// floor(B)+1 consecutive times and repeats it within the block, so the
/// per-time covariance is I_p and sum_{s != t} ||Cov(E_s, E_t)||_op =
/// block_len - 1 <= B.
class CovarianceSpec {
  public:
    static CovarianceSpec identity();
    static CovarianceSpec equicorrelated(double gamma);
    static CovarianceSpec explicit_matrix(Matrix sigma);  // must be positive definite
    static CovarianceSpec temporal_block(double B);

    CovarianceKind kind() const { return kind_; }
    double gamma() const { return gamma_; }
    double B() const { return B_; }
    std::int64_t block_len() const { return block_len_; }
    const Matrix& sigma() const;

    /// p x n noise matrix drawn from the model. Explicit kind requires
    /// p == sigma.rows().
    Matrix sample_noise(std::int64_t p, std::int64_t n, RandomStream& stream) const;

    /// Exact trace / Frobenius / operator norm of the per-time covariance.
    SpatialFunctionals functionals(std::int64_t p) const;

    /// Sigma^{-1} y for the per-time covariance.
    Vector solve(const Vector& y) const;

    std::string description() const;

  private:
    CovarianceKind kind_ = CovarianceKind::Identity;
    double gamma_ = 0.0;
    double B_ = 0.0;
    std::int64_t block_len_ = 1;
    std::shared_ptr<const Matrix> sigma_;
    std::shared_ptr<const Eigen::LLT<Matrix>> chol_;
};

// ---------------------------------------------------------------------------
// Alternatives
// ---------------------------------------------------------------------------

/// Changepoint alternative: columns 1..t0 have mean mu1, columns t0+1..n have
/// mean mu2. Signal strength rho^2 = t0(n-t0)/n * ||mu1 - mu2||^2.
struct AlternativeSpec {
    std::int64_t p = 1;
    std::int64_t n = 2;
    std::int64_t t0 = 1;
    Vector mu1;
    Vector mu2;

    static AlternativeSpec of(std::int64_t n, std::int64_t t0, Vector mu1, Vector mu2);

    /// Equal shift of size sqrt(rho2 n / (t0 (n-t0)) / s) on the first s
    /// coordinates, mu1 = 0.
    static AlternativeSpec equal_shift(std::int64_t p, std::int64_t n, std::int64_t t0,
                                       std::int64_t s, double rho2);

    std::int64_t sparsity() const;
    double rho2() const;
};

ObservationMatrix gen_null(std::int64_t p, std::int64_t n, const Vector& mu,
                           const CovarianceSpec& cov, RandomStream& stream);
ObservationMatrix gen_null(std::int64_t p, std::int64_t n, const Vector& mu,
                           const CovarianceSpec& cov, std::uint64_t seed);

ObservationMatrix gen_alternative(const AlternativeSpec& alt, const CovarianceSpec& cov,
                                  RandomStream& stream);
ObservationMatrix gen_alternative(const AlternativeSpec& alt, const CovarianceSpec& cov,
                                  std::uint64_t seed);

// ---------------------------------------------------------------------------
// Lower-bound priors
// ---------------------------------------------------------------------------

enum class PriorKind { Dense, SparsePositive, AsymDense, AsymSparse };

/// Random mean matrices used to certify the lower bounds: uniform s-subset
/// support, duration 2^k with k uniform on a dyadic (or coarsened) grid,
/// entries beta * u_j / sqrt(2^k) with u_j = +-1 (Dense, AsymDense) or
/// u_j = 1 (SparsePositive, AsymSparse).
struct PriorSpec {
    PriorKind kind = PriorKind::Dense;
    std::int64_t s = 1;
    double beta = 1.0;     // Dense / SparsePositive
    double epsilon = 0.5;  // Asym kinds
    double c = 1.0;        // AsymDense grid-spacing constant

    static PriorSpec dense(std::int64_t s, double beta);
    static PriorSpec sparse_positive(std::int64_t s, double beta);
    static PriorSpec asym_dense(std::int64_t s, double epsilon, double c = 1.0);
    static PriorSpec asym_sparse(std::int64_t s, double epsilon);
};

struct PriorDraw {
    std::vector<std::int64_t> support;  // ascending 0-based coordinates
    std::vector<double> signs;          // aligned with support, +-1
    std::int64_t k = 0;                 // duration is 2^k
    double beta = 0.0;

    std::int64_t duration() const { return std::int64_t{1} << k; }
    double entry_value(std::size_t idx) const {
        return beta * signs[idx] / std::sqrt(static_cast<double>(duration()));
    }
};

PriorDraw sample_prior_draw(const PriorSpec& prior, std::int64_t p, std::int64_t n,
                            RandomStream& stream);

/// Dense p x n mean matrix theta for a draw.
Matrix materialize(const PriorDraw& draw, std::int64_t p, std::int64_t n);

/// Mean matrix theta sampled from the prior (deterministic given seed).
Matrix sample_prior(const PriorSpec& prior, std::int64_t p, std::int64_t n,
                    std::uint64_t seed);

// ---------------------------------------------------------------------------
// Chi-squared divergence diagnostic
// ---------------------------------------------------------------------------

struct DivergenceEstimate {
    double estimate = 0.0;  // mean exp<theta1, theta2>_{Sigma^-1} - 1
    double std_error = 0.0;
    std::int64_t overflow_terms = 0;
    bool finite = true;
};

/// Monte Carlo estimate of E exp(<theta1, theta2>_{Sigma^{-1}}) - 1 over
/// independent prior pairs, with jackknife standard error. Exponents are
/// formed in log space; any term whose exponent exceeds 700 marks the
/// estimate infinite. Sigma is the per-time covariance.
DivergenceEstimate chisq_divergence_mc(const PriorSpec& prior, const CovarianceSpec& cov,
                                       std::int64_t p, std::int64_t n, std::int64_t R,
                                       std::uint64_t seed);

}  // namespace cpminimax
