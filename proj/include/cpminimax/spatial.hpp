#pragma once

#include <array>
#include <cstdint>

#include "cpminimax/matrix.hpp"

namespace cpminimax {

/// Trace, Frobenius norm and operator norm of a covariance matrix, estimated
/// or exact. For a PSD matrix: operator <= frobenius <= sqrt(p) * operator and
/// trace <= p * operator.
struct SpatialFunctionals {
    double trace = 0.0;
    double frobenius = 0.0;
    double operator_norm = 0.0;
};

/// Exact functionals of an equicorrelated covariance (1-gamma) I + gamma 11^T:
/// trace = p, ||.||_F^2 = (1-gamma^2) p + p^2 gamma^2, ||.||_op = 1+(p-1)gamma.
SpatialFunctionals equicorrelated_functionals(std::int64_t p, double gamma);

/// Functionals of an explicit symmetric matrix (symmetrized before the
/// eigensolve).
SpatialFunctionals functionals_of(const Matrix& sigma);

/// Three consecutive index blocks covering [1, n], sizes differing by at most
/// one with earlier blocks larger, each of size >= 2 (requires n >= 6).
/// Ranges are half-open on 0-based column indices.
struct BlockPartition {
    std::array<std::int64_t, 3> begin{};
    std::array<std::int64_t, 3> end{};

    std::int64_t size(int j) const { return end[j] - begin[j]; }
};

BlockPartition make_blocks(std::int64_t n);

/// Sample covariance of each block: (|D|-1)^{-1} sum (X_t - mean)(X_t - mean)^T.
std::array<Matrix, 3> block_covariances(const ObservationMatrix& X);

/// Per-functional medians (middle order statistic of three) of the block
/// covariance functionals; medians may come from different blocks.
SpatialFunctionals robust_functionals(const ObservationMatrix& X);

struct GammaEstimate {
    double value = 0.0;
    bool clamped = false;
};

/// Equicorrelation estimate inverting 1^T Sigma(gamma) 1 = p + (p^2 - p) gamma:
/// gammahat = (median_block 1^T Sigmahat_D 1 - p) / (p^2 - p), clamped into
/// [0, 1). The grand sum is the functional that carries gamma; the literal
/// trace of Sigma(gamma) is p for every gamma. Requires p >= 2 and n >= 6.
GammaEstimate gamma_estimate(const ObservationMatrix& X);

}  // namespace cpminimax
