#include "cpminimax/matrix.hpp"

#include <stdexcept>

namespace cpminimax {

ObservationMatrix::ObservationMatrix(Matrix values) : values_(std::move(values)) {
    if (values_.rows() < 1) {
        throw std::invalid_argument("ObservationMatrix: p must be >= 1");
    }
    if (values_.cols() < 2) {
        throw std::invalid_argument("ObservationMatrix: n must be >= 2");
    }
    if (!values_.allFinite()) {
        throw std::invalid_argument("ObservationMatrix: entries must be finite");
    }
}

bool ObservationMatrix::all_columns_identical() const {
    for (std::int64_t t = 1; t < values_.cols(); ++t) {
        if (values_.col(t) != values_.col(0)) return false;
    }
    return true;
}

}  // namespace cpminimax
