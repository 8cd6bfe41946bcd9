#include "cpminimax/simgen.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "cpminimax/core.hpp"

namespace cpminimax {

namespace {

constexpr std::uint64_t kNoiseTag = 0x6E6F6973;   // "nois"
constexpr std::uint64_t kPriorTag = 0x7072696F;   // "prio"
constexpr std::uint64_t kDivTag = 0x64697665;     // "dive"

void fill_normals(Matrix& m, RandomStream& stream) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
        for (Eigen::Index r = 0; r < m.rows(); ++r) {
            m(r, c) = stream.normal();
        }
    }
}

}  // namespace

CovarianceSpec CovarianceSpec::identity() { return CovarianceSpec{}; }

CovarianceSpec CovarianceSpec::equicorrelated(double gamma) {
    if (!(gamma >= 0.0 && gamma < 1.0)) {
        throw std::domain_error("CovarianceSpec: gamma must lie in [0, 1)");
    }
    CovarianceSpec spec;
    spec.kind_ = CovarianceKind::Equicorrelated;
    spec.gamma_ = gamma;
    return spec;
}

CovarianceSpec CovarianceSpec::explicit_matrix(Matrix sigma) {
    if (sigma.rows() != sigma.cols() || sigma.rows() < 1) {
        throw std::domain_error("CovarianceSpec: covariance must be square");
    }
    if (!sigma.isApprox(sigma.transpose(), 1e-12)) {
        throw std::domain_error("CovarianceSpec: covariance must be symmetric");
    }
    auto chol = std::make_shared<Eigen::LLT<Matrix>>(sigma);
    if (chol->info() != Eigen::Success) {
        throw std::domain_error("CovarianceSpec: covariance must be positive definite");
    }
    CovarianceSpec spec;
    spec.kind_ = CovarianceKind::Explicit;
    spec.sigma_ = std::make_shared<const Matrix>(std::move(sigma));
    spec.chol_ = std::move(chol);
    return spec;
}

CovarianceSpec CovarianceSpec::temporal_block(double B) {
    if (!(B >= 0.0) || !std::isfinite(B)) {
        throw std::domain_error("CovarianceSpec: B must be >= 0");
    }
    CovarianceSpec spec;
    spec.kind_ = CovarianceKind::TemporalBlock;
    spec.B_ = B;
    spec.block_len_ = static_cast<std::int64_t>(std::floor(B)) + 1;
    return spec;
}

const Matrix& CovarianceSpec::sigma() const {
    if (!sigma_) throw std::logic_error("CovarianceSpec: no explicit matrix");
    return *sigma_;
}

Matrix CovarianceSpec::sample_noise(std::int64_t p, std::int64_t n,
                                    RandomStream& stream) const {
    Matrix E(p, n);
    switch (kind_) {
        case CovarianceKind::Identity:
            fill_normals(E, stream);
            break;
        case CovarianceKind::Equicorrelated: {
            const double sg = std::sqrt(gamma_);
            const double sz = std::sqrt(1.0 - gamma_);
            for (std::int64_t t = 0; t < n; ++t) {
                const double w = stream.normal();  // shared factor, drawn first
                for (std::int64_t j = 0; j < p; ++j) {
                    E(j, t) = sg * w + sz * stream.normal();
                }
            }
            break;
        }
        case CovarianceKind::Explicit: {
            if (sigma_->rows() != p) {
                throw std::invalid_argument(
                    "sample_noise: p does not match explicit covariance");
            }
            Matrix Z(p, n);
            fill_normals(Z, stream);
            E.noalias() = chol_->matrixL() * Z;
            break;
        }
        case CovarianceKind::TemporalBlock: {
            Vector z(p);
            for (std::int64_t start = 0; start < n; start += block_len_) {
                for (std::int64_t j = 0; j < p; ++j) z[j] = stream.normal();
                const std::int64_t stop = std::min(start + block_len_, n);
                for (std::int64_t t = start; t < stop; ++t) E.col(t) = z;
            }
            break;
        }
    }
    return E;
}

SpatialFunctionals CovarianceSpec::functionals(std::int64_t p) const {
    switch (kind_) {
        case CovarianceKind::Identity:
        case CovarianceKind::TemporalBlock: {
            const double pd = static_cast<double>(p);
            return SpatialFunctionals{pd, std::sqrt(pd), 1.0};
        }
        case CovarianceKind::Equicorrelated:
            return equicorrelated_functionals(p, gamma_);
        case CovarianceKind::Explicit:
            return functionals_of(*sigma_);
    }
    throw std::logic_error("CovarianceSpec: unknown kind");
}

Vector CovarianceSpec::solve(const Vector& y) const {
    switch (kind_) {
        case CovarianceKind::Identity:
        case CovarianceKind::TemporalBlock:
            return y;
        case CovarianceKind::Equicorrelated: {
            // Sherman-Morrison: Sigma^{-1} = (I - gamma/(1+(p-1)gamma) 11^T)/(1-gamma)
            const double pd = static_cast<double>(y.size());
            const double shrink = gamma_ / (1.0 + (pd - 1.0) * gamma_);
            const double mean_part = shrink * y.sum();
            return (y.array() - mean_part) / (1.0 - gamma_);
        }
        case CovarianceKind::Explicit:
            return chol_->solve(y);
    }
    throw std::logic_error("CovarianceSpec: unknown kind");
}

std::string CovarianceSpec::description() const {
    switch (kind_) {
        case CovarianceKind::Identity:
            return "identity";
        case CovarianceKind::Equicorrelated:
            return "equicorr:" + std::to_string(gamma_);
        case CovarianceKind::Explicit:
            return "explicit[" + std::to_string(sigma_->rows()) + "]";
        case CovarianceKind::TemporalBlock:
            return "temporal:" + std::to_string(B_);
    }
    return "unknown";
}

AlternativeSpec AlternativeSpec::of(std::int64_t n, std::int64_t t0, Vector mu1,
                                    Vector mu2) {
    if (n < 2) throw std::domain_error("AlternativeSpec: n must be >= 2");
    if (t0 < 1 || t0 > n - 1) {
        throw std::domain_error("AlternativeSpec: t0 must lie in [1, n-1]");
    }
    if (mu1.size() != mu2.size() || mu1.size() < 1) {
        throw std::domain_error("AlternativeSpec: mean vectors must match and be nonempty");
    }
    AlternativeSpec alt;
    alt.p = mu1.size();
    alt.n = n;
    alt.t0 = t0;
    alt.mu1 = std::move(mu1);
    alt.mu2 = std::move(mu2);
    return alt;
}

AlternativeSpec AlternativeSpec::equal_shift(std::int64_t p, std::int64_t n,
                                             std::int64_t t0, std::int64_t s,
                                             double rho2) {
    if (s < 1 || s > p) throw std::domain_error("equal_shift: s must lie in [1, p]");
    if (!(rho2 >= 0.0)) throw std::domain_error("equal_shift: rho2 must be >= 0");
    const double t0d = static_cast<double>(t0);
    const double nd = static_cast<double>(n);
    const double shift =
        std::sqrt(rho2 * nd / (t0d * (nd - t0d)) / static_cast<double>(s));
    Vector mu1 = Vector::Zero(p);
    Vector mu2 = Vector::Zero(p);
    mu2.head(s).setConstant(shift);
    return of(n, t0, std::move(mu1), std::move(mu2));
}

std::int64_t AlternativeSpec::sparsity() const {
    std::int64_t s = 0;
    for (Eigen::Index j = 0; j < p; ++j) {
        if (mu1[j] != mu2[j]) ++s;
    }
    return s;
}

double AlternativeSpec::rho2() const {
    const double t0d = static_cast<double>(t0);
    const double nd = static_cast<double>(n);
    return t0d * (nd - t0d) / nd * (mu1 - mu2).squaredNorm();
}

ObservationMatrix gen_null(std::int64_t p, std::int64_t n, const Vector& mu,
                           const CovarianceSpec& cov, RandomStream& stream) {
    if (mu.size() != p) throw std::invalid_argument("gen_null: mean length != p");
    Matrix X = cov.sample_noise(p, n, stream);
    X.colwise() += mu;
    return ObservationMatrix(std::move(X));
}

ObservationMatrix gen_null(std::int64_t p, std::int64_t n, const Vector& mu,
                           const CovarianceSpec& cov, std::uint64_t seed) {
    auto stream = RandomStream::derive(seed, {kNoiseTag});
    return gen_null(p, n, mu, cov, stream);
}

ObservationMatrix gen_alternative(const AlternativeSpec& alt, const CovarianceSpec& cov,
                                  RandomStream& stream) {
    Matrix X = cov.sample_noise(alt.p, alt.n, stream);
    X.leftCols(alt.t0).colwise() += alt.mu1;
    X.rightCols(alt.n - alt.t0).colwise() += alt.mu2;
    return ObservationMatrix(std::move(X));
}

ObservationMatrix gen_alternative(const AlternativeSpec& alt, const CovarianceSpec& cov,
                                  std::uint64_t seed) {
    auto stream = RandomStream::derive(seed, {kNoiseTag});
    return gen_alternative(alt, cov, stream);
}

PriorSpec PriorSpec::dense(std::int64_t s, double beta) {
    if (s < 1) throw std::domain_error("PriorSpec: s must be >= 1");
    if (!(beta > 0.0)) throw std::domain_error("PriorSpec: beta must be > 0");
    return PriorSpec{PriorKind::Dense, s, beta, 0.0, 0.0};
}

PriorSpec PriorSpec::sparse_positive(std::int64_t s, double beta) {
    auto spec = dense(s, beta);
    spec.kind = PriorKind::SparsePositive;
    return spec;
}

PriorSpec PriorSpec::asym_dense(std::int64_t s, double epsilon, double c) {
    if (s < 1) throw std::domain_error("PriorSpec: s must be >= 1");
    if (!(epsilon > 0.0 && epsilon < 2.0)) {
        throw std::domain_error("PriorSpec: epsilon must lie in (0, 2)");
    }
    if (!(c > 0.0)) throw std::domain_error("PriorSpec: c must be > 0");
    PriorSpec spec;
    spec.kind = PriorKind::AsymDense;
    spec.s = s;
    spec.epsilon = epsilon;
    spec.c = c;
    return spec;
}

PriorSpec PriorSpec::asym_sparse(std::int64_t s, double epsilon) {
    if (s < 1) throw std::domain_error("PriorSpec: s must be >= 1");
    if (!(epsilon > 0.0 && epsilon < 1.0)) {
        throw std::domain_error("PriorSpec: epsilon must lie in (0, 1)");
    }
    PriorSpec spec;
    spec.kind = PriorKind::AsymSparse;
    spec.s = s;
    spec.epsilon = epsilon;
    return spec;
}

namespace {

std::vector<std::int64_t> sample_subset(std::int64_t p, std::int64_t s,
                                        RandomStream& stream) {
    std::vector<std::int64_t> idx(p);
    std::iota(idx.begin(), idx.end(), 0);
    for (std::int64_t i = 0; i < s; ++i) {  // partial Fisher-Yates
        const std::int64_t j = stream.uniform_int(i, p - 1);
        std::swap(idx[i], idx[j]);
    }
    idx.resize(s);
    std::sort(idx.begin(), idx.end());
    return idx;
}

// Coarsened grid {0, m, 2m, ..., m*floor(log2(sqrt(n))/m)}; spacing
// m = floor(c * logloglog n) must be >= 1, otherwise the grid is undefined.
std::vector<std::int64_t> coarsened_grid(std::int64_t n, double c) {
    const double ln = std::log(static_cast<double>(n));
    if (ln <= 1.0 || std::log(ln) <= 1.0) {
        throw std::domain_error("prior grid: logloglog n undefined, n too small");
    }
    const double lll = std::log(std::log(ln));
    const auto m = static_cast<std::int64_t>(std::floor(c * lll));
    if (m < 1) {
        throw std::domain_error("prior grid: spacing floor(c logloglog n) < 1");
    }
    const auto top = static_cast<std::int64_t>(
        std::floor(0.5 * std::log2(static_cast<double>(n)) / static_cast<double>(m)));
    std::vector<std::int64_t> grid;
    for (std::int64_t i = 0; i <= top; ++i) grid.push_back(i * m);
    return grid;
}

}  // namespace

PriorDraw sample_prior_draw(const PriorSpec& prior, std::int64_t p, std::int64_t n,
                            RandomStream& stream) {
    if (p < 1 || n < 2) throw std::domain_error("sample_prior: need p >= 1, n >= 2");
    if (prior.s > p) throw std::domain_error("sample_prior: s must be <= p");

    PriorDraw draw;
    draw.support = sample_subset(p, prior.s, stream);

    switch (prior.kind) {
        case PriorKind::Dense:
        case PriorKind::SparsePositive: {
            const auto kmax = static_cast<std::int64_t>(dyadic_grid(n).size()) - 1;
            draw.k = stream.uniform_int(0, kmax);
            draw.beta = prior.beta;
            break;
        }
        case PriorKind::AsymDense: {
            const auto grid = coarsened_grid(n, prior.c);
            draw.k = grid[stream.uniform_int(0, static_cast<std::int64_t>(grid.size()) - 1)];
            const double ll = std::log(std::log(static_cast<double>(n)));
            const double beta2 =
                (2.0 - prior.epsilon) *
                std::sqrt(static_cast<double>(p) * ll /
                          (static_cast<double>(prior.s) * static_cast<double>(prior.s)));
            draw.beta = std::sqrt(beta2);
            break;
        }
        case PriorKind::AsymSparse: {
            const auto grid = coarsened_grid(n, 1.0);
            draw.k = grid[stream.uniform_int(0, static_cast<std::int64_t>(grid.size()) - 1)];
            const double ll = std::log(std::log(static_cast<double>(n)));
            const double arg = static_cast<double>(p) * ll /
                               (static_cast<double>(prior.s) * static_cast<double>(prior.s));
            if (arg <= 1.0) {
                throw std::domain_error("sample_prior: log(p loglog n / s^2) <= 0");
            }
            draw.beta = std::sqrt((1.0 - prior.epsilon) * std::log(arg));
            break;
        }
    }

    const bool signed_entries =
        prior.kind == PriorKind::Dense || prior.kind == PriorKind::AsymDense;
    draw.signs.resize(draw.support.size(), 1.0);
    if (signed_entries) {
        for (auto& sgn : draw.signs) {
            sgn = stream.uniform_int(0, 1) == 0 ? -1.0 : 1.0;
        }
    }
    return draw;
}

Matrix materialize(const PriorDraw& draw, std::int64_t p, std::int64_t n) {
    Matrix theta = Matrix::Zero(p, n);
    const std::int64_t dur = draw.duration();
    if (dur > n) throw std::logic_error("materialize: duration exceeds n");
    for (std::size_t i = 0; i < draw.support.size(); ++i) {
        theta.row(draw.support[i]).head(dur).setConstant(draw.entry_value(i));
    }
    return theta;
}

Matrix sample_prior(const PriorSpec& prior, std::int64_t p, std::int64_t n,
                    std::uint64_t seed) {
    auto stream = RandomStream::derive(seed, {kPriorTag});
    return materialize(sample_prior_draw(prior, p, n, stream), p, n);
}

namespace {

double prior_pair_exponent(const PriorDraw& a, const PriorDraw& b,
                           const CovarianceSpec& cov, std::int64_t p) {
    const double scale =
        a.beta * b.beta *
        std::exp2(-0.5 * static_cast<double>(std::abs(a.k - b.k)));
    if (cov.kind() == CovarianceKind::Identity ||
        cov.kind() == CovarianceKind::TemporalBlock) {
        // sorted-support intersection
        double dot = 0.0;
        std::size_t i = 0, j = 0;
        while (i < a.support.size() && j < b.support.size()) {
            if (a.support[i] == b.support[j]) {
                dot += a.signs[i] * b.signs[j];
                ++i;
                ++j;
            } else if (a.support[i] < b.support[j]) {
                ++i;
            } else {
                ++j;
            }
        }
        return scale * dot;
    }
    Vector wa = Vector::Zero(p);
    Vector wb = Vector::Zero(p);
    for (std::size_t i = 0; i < a.support.size(); ++i) wa[a.support[i]] = a.signs[i];
    for (std::size_t j = 0; j < b.support.size(); ++j) wb[b.support[j]] = b.signs[j];
    return scale * wa.dot(cov.solve(wb));
}

}  // namespace

DivergenceEstimate chisq_divergence_mc(const PriorSpec& prior, const CovarianceSpec& cov,
                                       std::int64_t p, std::int64_t n, std::int64_t R,
                                       std::uint64_t seed) {
    if (R < 2) throw std::invalid_argument("chisq_divergence_mc: R must be >= 2");
    constexpr double kOverflowExponent = 700.0;

    std::vector<double> terms;
    terms.reserve(R);
    DivergenceEstimate out;
    for (std::int64_t r = 0; r < R; ++r) {
        auto stream = RandomStream::derive(seed, {kDivTag, static_cast<std::uint64_t>(r)});
        const PriorDraw a = sample_prior_draw(prior, p, n, stream);
        const PriorDraw b = sample_prior_draw(prior, p, n, stream);
        const double expo = prior_pair_exponent(a, b, cov, p);
        if (expo > kOverflowExponent) {
            ++out.overflow_terms;
            out.finite = false;
            continue;
        }
        terms.push_back(std::exp(expo));
    }
    if (!out.finite) {
        out.estimate = std::numeric_limits<double>::infinity();
        out.std_error = std::numeric_limits<double>::infinity();
        return out;
    }

    const double mean = compensated_total(terms) / static_cast<double>(R);
    CompensatedSum sq;
    for (double v : terms) sq.add((v - mean) * (v - mean));
    // Jackknife SE of a sample mean reduces to sqrt(sum (x - xbar)^2 / (R(R-1))).
    out.estimate = mean - 1.0;
    out.std_error =
        std::sqrt(sq.result() / (static_cast<double>(R) * static_cast<double>(R - 1)));
    return out;
}

}  // namespace cpminimax
