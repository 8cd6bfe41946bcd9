#pragma once

#include <string>

#include "cpminimax/matrix.hpp"

namespace cpminimax {

/// Binary matrix format: 8-byte magic "CPMX0001", little-endian u64 p, u64 n,
/// then p*n float64 values column-major (time-major).
inline constexpr char kMatrixMagic[9] = "CPMX0001";

Matrix load_matrix_csv(const std::string& path);
void save_matrix_csv(const std::string& path, const Matrix& m);

Matrix load_matrix_binary(const std::string& path);
void save_matrix_binary(const std::string& path, const Matrix& m);

/// Sniffs the magic bytes and dispatches to the binary or CSV loader.
Matrix load_matrix(const std::string& path);

}  // namespace cpminimax
