#pragma once

#include <Eigen/Dense>
#include <cstdint>

namespace cpminimax {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// A p x n data matrix whose column t holds the observation X_t at time t.
/// Invariants: p >= 1, n >= 2, all entries finite.
class ObservationMatrix {
  public:
    explicit ObservationMatrix(Matrix values);

    std::int64_t p() const { return values_.rows(); }
    std::int64_t n() const { return values_.cols(); }
    const Matrix& values() const { return values_; }

    /// Column t using 1-based time indexing, t in [1, n].
    Eigen::Ref<const Vector> column(std::int64_t t) const { return values_.col(t - 1); }

    /// True when every column equals the first one exactly (zero-variance input).
    bool all_columns_identical() const;

  private:
    Matrix values_;
};

}  // namespace cpminimax
