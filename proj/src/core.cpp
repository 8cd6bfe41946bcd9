#include "cpminimax/core.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace cpminimax {

namespace {

constexpr double kInvSqrt2Pi = 0.39894228040143267794;  // 1/sqrt(2*pi)
constexpr double kMillsSplit = 8.0;

double normal_pdf(double x) { return kInvSqrt2Pi * std::exp(-0.5 * x * x); }

double normal_upper_tail(double x) { return 0.5 * std::erfc(x / std::sqrt(2.0)); }

// Mills ratio Phibar(a)/phi(a) via the continued fraction
// 1/(a + 1/(a + 2/(a + 3/(...)))), evaluated by backward recurrence.
double mills_ratio_cf(double a) {
    double r = 0.0;
    for (int k = 160; k >= 1; --k) {
        r = static_cast<double>(k) / (a + r);
    }
    return 1.0 / (a + r);
}

}  // namespace

double compensated_total(std::span<const double> xs) {
    CompensatedSum acc;
    for (double x : xs) acc.add(x);
    return acc.result();
}

double nu_a(double a) {
    if (!std::isfinite(a) || a < 0.0) {
        throw std::domain_error("nu_a: a must be finite and nonnegative");
    }
    if (a == 0.0) return 1.0;
    if (a < kMillsSplit) {
        return 1.0 + a * normal_pdf(a) / normal_upper_tail(a);
    }
    return 1.0 + a / mills_ratio_cf(a);
}

double f_a(double x, const TruncationLevel& level) {
    if (std::abs(x) < level.a) return 0.0;
    return x * x - level.nu;
}

double window_inf_f(double x, const TruncationLevel& level, double w) {
    if (!std::isfinite(w) || w < 0.0) {
        throw std::domain_error("window_inf_f: window half-width must be >= 0");
    }
    const double u = std::abs(x);
    // Interval of |y| values reachable from x is [max(u-w, 0), u+w].
    if (u - w > level.a) {
        const double m = u - w;
        return m * m - level.nu;
    }
    if (u + w < level.a) return 0.0;
    // The window meets |y| = a, where f attains its minimum a^2 - nu_a < 0.
    return level.a * level.a - level.nu;
}

double g_window_halfwidth(double Cprime, std::int64_t p, std::int64_t n) {
    if (Cprime < 0.0 || !std::isfinite(Cprime)) {
        throw std::domain_error("g_window_halfwidth: Cprime must be >= 0");
    }
    if (p < 1) throw std::domain_error("g_window_halfwidth: p must be >= 1");
    if (n < 2) throw std::domain_error("g_window_halfwidth: n must be >= 2");
    const double ll = std::log(std::log(8.0 * static_cast<double>(n)));
    return Cprime * std::sqrt(ll / static_cast<double>(p));
}

double g_a(double x, const TruncationLevel& level, double Cprime, std::int64_t p,
           std::int64_t n) {
    return window_inf_f(x, level, g_window_halfwidth(Cprime, p, n));
}

double h_a(double x, const TruncationLevel& level) {
    if (level.a <= 0.0) {
        throw std::domain_error("h_a: requires a > 0");
    }
    const double a = level.a;
    const double u = std::abs(x);
    if (u <= 0.9 * a) return 0.0;
    if (u <= 1.1 * a) return a * a - level.nu;
    const double m = u - 0.1 * a;
    return m * m - level.nu;
}

double threshold_stat(const Vector& y, const TruncationLevel& level) {
    CompensatedSum acc;
    for (Eigen::Index j = 0; j < y.size(); ++j) {
        acc.add(f_a(y[j], level));
    }
    return acc.result();
}

double sample_median(const Vector& y) {
    const auto p = y.size();
    if (p < 1) throw std::domain_error("sample_median: empty vector");
    std::vector<double> v(y.data(), y.data() + p);
    const auto mid = v.begin() + p / 2;
    std::nth_element(v.begin(), mid, v.end());
    if (p % 2 == 1) return *mid;
    const double hi = *mid;
    const double lo = *std::max_element(v.begin(), mid);
    return 0.5 * (lo + hi);
}

Vector median_correct(const Vector& y, double gamma) {
    if (!(gamma >= 0.0 && gamma < 1.0)) {
        throw std::domain_error("median_correct: gamma must lie in [0, 1)");
    }
    const double med = sample_median(y);
    return (y.array() - med) / std::sqrt(1.0 - gamma);
}

TimeGrid dyadic_grid(std::int64_t n) {
    if (n < 2) throw std::domain_error("dyadic_grid: n must be >= 2");
    TimeGrid grid;
    grid.kind = GridKind::Dyadic;
    for (std::int64_t t = 1; 2 * t <= n; t *= 2) {
        grid.points.push_back(t);
    }
    return grid;
}

TimeGrid geometric_grid(std::int64_t n, double delta2) {
    if (n < 2) throw std::domain_error("geometric_grid: n must be >= 2");
    if (!(delta2 > 0.0) || !std::isfinite(delta2)) {
        throw std::domain_error("geometric_grid: delta2 must be > 0");
    }
    const double half = static_cast<double>(n) / 2.0;
    const auto jmax =
        static_cast<std::int64_t>(std::floor(std::log(half) / std::log1p(delta2)));
    std::vector<std::int64_t> pts;
    for (std::int64_t j = 0; j <= jmax; ++j) {
        const double v = std::pow(1.0 + delta2, static_cast<double>(j));
        if (v > half) break;
        pts.push_back(static_cast<std::int64_t>(std::floor(v)));
    }
    const std::size_t forward = pts.size();
    for (std::size_t i = 0; i < forward; ++i) {
        pts.push_back(n - pts[i]);
    }
    std::sort(pts.begin(), pts.end());
    pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
    std::erase_if(pts, [n](std::int64_t t) { return t < 1 || t > n - 1; });
    TimeGrid grid;
    grid.kind = GridKind::Geometric;
    grid.points = std::move(pts);
    return grid;
}

Vector cusum(const ObservationMatrix& X, std::int64_t t) {
    const auto n = X.n();
    if (t < 1 || 2 * t > n) {
        throw std::domain_error("cusum: t must satisfy 1 <= t <= n/2");
    }
    const Vector head = X.values().leftCols(t).rowwise().sum();
    const Vector tail = X.values().rightCols(t).rowwise().sum();
    return (head - tail) / std::sqrt(2.0 * static_cast<double>(t));
}

Vector normalized_cusum(const ObservationMatrix& X, std::int64_t t) {
    const auto n = X.n();
    if (t < 1 || t > n - 1) {
        throw std::domain_error("normalized_cusum: t must satisfy 1 <= t <= n-1");
    }
    const double td = static_cast<double>(t);
    const double nd = static_cast<double>(n);
    const Vector head = X.values().leftCols(t).rowwise().sum() / td;
    const Vector tail = X.values().rightCols(n - t).rowwise().sum() / (nd - td);
    return std::sqrt(td * (nd - td) / nd) * (head - tail);
}

CusumTransform::CusumTransform(const ObservationMatrix& X) : n_(X.n()) {
    const auto p = X.p();
    prefix_.resize(p, n_ + 1);
    prefix_.col(0).setZero();
    for (std::int64_t t = 1; t <= n_; ++t) {
        prefix_.col(t) = prefix_.col(t - 1) + X.values().col(t - 1);
    }
}

Vector CusumTransform::cusum(std::int64_t t) const {
    if (t < 1 || 2 * t > n_) {
        throw std::domain_error("CusumTransform::cusum: t must satisfy 1 <= t <= n/2");
    }
    const Vector head = prefix_.col(t);
    const Vector tail = prefix_.col(n_) - prefix_.col(n_ - t);
    return (head - tail) / std::sqrt(2.0 * static_cast<double>(t));
}

Vector CusumTransform::normalized_cusum(std::int64_t t) const {
    if (t < 1 || t > n_ - 1) {
        throw std::domain_error(
            "CusumTransform::normalized_cusum: t must satisfy 1 <= t <= n-1");
    }
    const double td = static_cast<double>(t);
    const double nd = static_cast<double>(n_);
    const Vector head = prefix_.col(t) / td;
    const Vector tail = (prefix_.col(n_) - prefix_.col(t)) / (nd - td);
    return std::sqrt(td * (nd - td) / nd) * (head - tail);
}

}  // namespace cpminimax
