#include "cpminimax/rates.hpp"

#include <cmath>
#include <stdexcept>

namespace cpminimax {

double loglog8n(std::int64_t n) {
    if (n < 1) throw std::domain_error("loglog8n: n must be >= 1");
    return std::log(std::log(8.0 * static_cast<double>(n)));
}

ProblemSize ProblemSize::of(std::int64_t p, std::int64_t n, std::int64_t s) {
    if (p < 1) throw std::domain_error("ProblemSize: p must be >= 1");
    if (n < 2) throw std::domain_error("ProblemSize: n must be >= 2");
    if (s < 1 || s > p) throw std::domain_error("ProblemSize: s must lie in [1, p]");
    return ProblemSize{p, n, s};
}

Regime regime_of(const ProblemSize& sz) {
    const double L = loglog8n(sz.n);
    return static_cast<double>(sz.s) >= std::sqrt(static_cast<double>(sz.p) * L)
               ? Regime::Dense
               : Regime::Sparse;
}

double rate_rstar(const ProblemSize& sz) {
    const double L = loglog8n(sz.n);
    const double p = static_cast<double>(sz.p);
    const double s = static_cast<double>(sz.s);
    if (regime_of(sz) == Regime::Dense) return std::sqrt(p * L);
    return std::max(s * std::log(std::exp(1.0) * p * L / (s * s)), L);
}

TruncationLevel threshold_a(const ProblemSize& sz) {
    if (regime_of(sz) == Regime::Dense) return TruncationLevel::at(0.0);
    const double L = loglog8n(sz.n);
    const double p = static_cast<double>(sz.p);
    const double s = static_cast<double>(sz.s);
    const double a2 = 4.0 * std::log(std::exp(1.0) * p * L / (s * s));
    return TruncationLevel::at(std::sqrt(a2));
}

std::vector<std::int64_t> sparsity_grid(std::int64_t p, std::int64_t n) {
    if (p < 1) throw std::domain_error("sparsity_grid: p must be >= 1");
    const double L = loglog8n(n);
    const double boundary = std::sqrt(static_cast<double>(p) * L);
    const auto top = static_cast<std::int64_t>(std::ceil(std::log2(boundary))) - 1;
    std::vector<std::int64_t> grid;
    std::int64_t v = 1;
    for (std::int64_t k = 0; k <= top && v <= p; ++k, v *= 2) {
        grid.push_back(v);
    }
    if (grid.empty() || grid.back() != p) grid.push_back(p);
    return grid;
}

double asymptotic_boundary_dense(std::int64_t p, std::int64_t n, double xi) {
    if (!(xi > 0.0)) throw std::domain_error("asymptotic boundary: xi must be > 0");
    const double ln = std::log(static_cast<double>(n));
    if (ln <= 1.0) throw std::domain_error("asymptotic boundary: loglog n undefined");
    const double ll = std::log(ln);
    return xi * std::pow(static_cast<double>(p) * ll, 0.25);
}

double asymptotic_boundary_sparse(std::int64_t p, std::int64_t n, std::int64_t s,
                                  double xi) {
    if (!(xi > 0.0)) throw std::domain_error("asymptotic boundary: xi must be > 0");
    const double ln = std::log(static_cast<double>(n));
    if (ln <= 1.0) throw std::domain_error("asymptotic boundary: loglog n undefined");
    const double ll = std::log(ln);
    const double arg = static_cast<double>(p) * ll / (static_cast<double>(s) * s);
    if (arg <= 1.0) {
        throw std::domain_error("asymptotic boundary: log(p loglog n / s^2) <= 0");
    }
    return xi * std::sqrt(static_cast<double>(s) * std::log(arg));
}

double asymptotic_boundary(Regime regime, const ProblemSize& sz, double xi) {
    if (regime == Regime::Dense) return asymptotic_boundary_dense(sz.p, sz.n, xi);
    return asymptotic_boundary_sparse(sz.p, sz.n, sz.s, xi);
}

double temporal_rate(std::int64_t p, std::int64_t n, double B) {
    if (!(B >= 0.0) || !std::isfinite(B)) {
        throw std::domain_error("temporal_rate: B must be >= 0");
    }
    const double L = loglog8n(n);
    const double pd = static_cast<double>(p);
    return B * pd + (1.0 + B) * std::max(std::sqrt(pd * L), L);
}

TailBound tail_chisq(const std::vector<double>& weights_desc, double x) {
    if (!(x > 0.0)) throw std::domain_error("tail_chisq: x must be > 0");
    if (weights_desc.empty()) throw std::domain_error("tail_chisq: weights empty");
    double sum = 0.0, sumsq = 0.0;
    double prev = weights_desc.front();
    for (double w : weights_desc) {
        if (w < 0.0) throw std::domain_error("tail_chisq: weights must be >= 0");
        if (w > prev) throw std::domain_error("tail_chisq: weights must be descending");
        prev = w;
        sum += w;
        sumsq += w * w;
    }
    const double spread = 2.0 * std::sqrt(x * sumsq);
    return TailBound{sum + spread + 2.0 * weights_desc.front() * x, sum - spread};
}

TailBound tail_noncentral(std::int64_t p, double lambda, double x) {
    if (p < 1) throw std::domain_error("tail_noncentral: p must be >= 1");
    if (!(lambda >= 0.0)) throw std::domain_error("tail_noncentral: lambda must be >= 0");
    if (!(x > 0.0)) throw std::domain_error("tail_noncentral: x must be > 0");
    const double pd = static_cast<double>(p);
    const double spread = 2.0 * std::sqrt(x * (pd + 2.0 * lambda));
    return TailBound{pd + lambda + spread + 2.0 * x, pd + lambda - spread};
}

double tail_truncated(std::int64_t p, double a, double x) {
    if (p < 1) throw std::domain_error("tail_truncated: p must be >= 1");
    if (!(a >= 0.0)) throw std::domain_error("tail_truncated: a must be >= 0");
    if (!(x > 0.0)) throw std::domain_error("tail_truncated: x must be > 0");
    const double pd = static_cast<double>(p);
    return 9.0 * (std::sqrt(pd * std::exp(-0.5 * a * a) * x) + x);
}

}  // namespace cpminimax
