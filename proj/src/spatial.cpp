#include "cpminimax/spatial.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace cpminimax {

SpatialFunctionals equicorrelated_functionals(std::int64_t p, double gamma) {
    if (p < 1) throw std::domain_error("equicorrelated_functionals: p must be >= 1");
    if (!(gamma >= 0.0 && gamma < 1.0)) {
        throw std::domain_error("equicorrelated_functionals: gamma must lie in [0, 1)");
    }
    const double pd = static_cast<double>(p);
    SpatialFunctionals fn;
    fn.trace = pd;
    fn.frobenius = std::sqrt((1.0 - gamma * gamma) * pd + pd * pd * gamma * gamma);
    fn.operator_norm = 1.0 + (pd - 1.0) * gamma;
    return fn;
}

SpatialFunctionals functionals_of(const Matrix& sigma) {
    if (sigma.rows() != sigma.cols()) {
        throw std::invalid_argument("functionals_of: matrix must be square");
    }
    const Matrix sym = 0.5 * (sigma + sigma.transpose());
    SpatialFunctionals fn;
    fn.trace = sym.trace();
    fn.frobenius = sym.norm();
    Eigen::SelfAdjointEigenSolver<Matrix> eig(sym, Eigen::EigenvaluesOnly);
    fn.operator_norm = eig.eigenvalues().cwiseAbs().maxCoeff();
    return fn;
}

BlockPartition make_blocks(std::int64_t n) {
    if (n < 6) throw std::domain_error("make_blocks: n must be >= 6");
    const std::int64_t base = n / 3;
    const std::int64_t extra = n % 3;  // earlier blocks take the remainder
    BlockPartition part;
    std::int64_t cursor = 0;
    for (int j = 0; j < 3; ++j) {
        const std::int64_t len = base + (j < extra ? 1 : 0);
        part.begin[j] = cursor;
        part.end[j] = cursor + len;
        cursor += len;
    }
    return part;
}

std::array<Matrix, 3> block_covariances(const ObservationMatrix& X) {
    const auto part = make_blocks(X.n());
    std::array<Matrix, 3> covs;
    for (int j = 0; j < 3; ++j) {
        const auto len = part.size(j);
        const auto block = X.values().middleCols(part.begin[j], len);
        const Vector mean = block.rowwise().mean();
        const Matrix centered = block.colwise() - mean;
        covs[j].noalias() =
            centered * centered.transpose() / static_cast<double>(len - 1);
    }
    return covs;
}

SpatialFunctionals robust_functionals(const ObservationMatrix& X) {
    const auto covs = block_covariances(X);
    std::array<SpatialFunctionals, 3> fns;
    for (int j = 0; j < 3; ++j) fns[j] = functionals_of(covs[j]);

    auto median3 = [](double a, double b, double c) {
        return std::max(std::min(a, b), std::min(std::max(a, b), c));
    };
    SpatialFunctionals out;
    out.trace = median3(fns[0].trace, fns[1].trace, fns[2].trace);
    out.frobenius = median3(fns[0].frobenius, fns[1].frobenius, fns[2].frobenius);
    out.operator_norm =
        median3(fns[0].operator_norm, fns[1].operator_norm, fns[2].operator_norm);
    return out;
}

GammaEstimate gamma_estimate(const ObservationMatrix& X) {
    const auto p = X.p();
    if (p < 2) throw std::domain_error("gamma_estimate: p must be >= 2");
    const double pd = static_cast<double>(p);
    const auto covs = block_covariances(X);
    std::array<double, 3> sums{};
    for (int j = 0; j < 3; ++j) sums[j] = covs[j].sum();
    const double med =
        std::max(std::min(sums[0], sums[1]), std::min(std::max(sums[0], sums[1]), sums[2]));
    const double raw = (med - pd) / (pd * pd - pd);
    GammaEstimate est;
    constexpr double kGammaMax = 1.0 - 1e-10;
    est.value = std::clamp(raw, 0.0, kGammaMax);
    est.clamped = raw != est.value;
    return est;
}

}  // namespace cpminimax
