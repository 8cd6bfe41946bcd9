#pragma once

#include <cstdint>
#include <vector>

#include "cpminimax/core.hpp"

namespace cpminimax {

/// loglog(8n) = ln(ln(8n)), positive for all n >= 1.
double loglog8n(std::int64_t n);

struct ProblemSize {
    std::int64_t p = 1;
    std::int64_t n = 2;
    std::int64_t s = 1;

    static ProblemSize of(std::int64_t p, std::int64_t n, std::int64_t s);
};

enum class Regime { Dense, Sparse };

/// Dense iff s >= sqrt(p * loglog(8n)); ties classified dense.
Regime regime_of(const ProblemSize& sz);

/// Detection-boundary rate r*(p,n,s)^2-scale function:
///   sqrt(p L)                              if s >= sqrt(p L),
///   max(s log(e p L / s^2), L)             otherwise,       L = loglog(8n).
double rate_rstar(const ProblemSize& sz);

/// Tuning threshold: a^2 = 4 log(e p L / s^2) in the sparse regime, a = 0 in
/// the dense regime. Returns the level with nu_a populated.
TruncationLevel threshold_a(const ProblemSize& sz);

/// Sparsity grid S = {1, 2, 4, ..., 2^(ceil(log2 sqrt(p L)) - 1)} + {p},
/// deduplicated ascending (entries above p dropped).
std::vector<std::int64_t> sparsity_grid(std::int64_t p, std::int64_t n);

/// Asymptotic detection boundaries (natural logs, loglog n without the 8n
/// guard). Dense: rho = xi * (p loglog n)^{1/4}. Sparse:
/// rho = xi * sqrt(s log(p loglog n / s^2)). Throws when a log argument
/// fails to be > 1 (n too small, or sparsity too large).
double asymptotic_boundary_dense(std::int64_t p, std::int64_t n, double xi);
double asymptotic_boundary_sparse(std::int64_t p, std::int64_t n, std::int64_t s,
                                  double xi);
double asymptotic_boundary(Regime regime, const ProblemSize& sz, double xi);

/// Temporal-dependence rate: B p + (1+B) max(sqrt(p L), L).
double temporal_rate(std::int64_t p, std::int64_t n, double B);

struct TailBound {
    double upper = 0.0;
    double lower = 0.0;
};

/// Levels for sum lambda_j Z_j^2 exceeded/undershot with probability <= e^-x:
/// upper = sum lambda + 2 sqrt(x sum lambda^2) + 2 lambda_1 x,
/// lower = sum lambda - 2 sqrt(x sum lambda^2).
/// Weights must be sorted descending and nonnegative.
TailBound tail_chisq(const std::vector<double>& weights_desc, double x);

/// Noncentral chi-squared (p dof, noncentrality lambda):
/// upper = (p+lambda) + 2 sqrt(x(p+2lambda)) + 2x,
/// lower = (p+lambda) - 2 sqrt(x(p+2lambda)).
TailBound tail_noncentral(std::int64_t p, double lambda, double x);

/// Null level for the truncated statistic sum (Z_j^2 - nu_a) 1{|Z_j| >= a},
/// exceeded with probability <= e^-x: 9 (sqrt(p e^{-a^2/2} x) + x).
double tail_truncated(std::int64_t p, double a, double x);

}  // namespace cpminimax
