#include "cpminimax/matrix_io.hpp"

#include <bit>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <vector>

namespace cpminimax {

static_assert(std::endian::native == std::endian::little,
              "matrix binary I/O assumes a little-endian host");

namespace {

[[noreturn]] void io_fail(const std::string& what, const std::string& path) {
    throw std::runtime_error(what + ": " + path);
}

}  // namespace

Matrix load_matrix_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) io_fail("cannot open matrix CSV", path);
    std::vector<std::vector<double>> rows;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::vector<double> row;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) {
            size_t used = 0;
            const double v = std::stod(cell, &used);
            row.push_back(v);
        }
        if (!rows.empty() && row.size() != rows.front().size()) {
            io_fail("ragged rows in matrix CSV", path);
        }
        rows.push_back(std::move(row));
    }
    if (rows.empty()) io_fail("empty matrix CSV", path);
    Matrix m(rows.size(), rows.front().size());
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        for (Eigen::Index c = 0; c < m.cols(); ++c) {
            m(r, c) = rows[r][c];
        }
    }
    return m;
}

void save_matrix_csv(const std::string& path, const Matrix& m) {
    std::ofstream out(path);
    if (!out) io_fail("cannot write matrix CSV", path);
    char buf[64];
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        for (Eigen::Index c = 0; c < m.cols(); ++c) {
            std::snprintf(buf, sizeof(buf), "%.17g", m(r, c));
            out << buf;
            if (c + 1 < m.cols()) out << ',';
        }
        out << '\n';
    }
    if (!out) io_fail("short write for matrix CSV", path);
}

Matrix load_matrix_binary(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) io_fail("cannot open matrix file", path);
    char magic[8];
    if (!in.read(magic, 8) || std::memcmp(magic, kMatrixMagic, 8) != 0) {
        io_fail("bad magic in matrix file", path);
    }
    std::uint64_t p = 0, n = 0;
    in.read(reinterpret_cast<char*>(&p), 8);
    in.read(reinterpret_cast<char*>(&n), 8);
    if (!in || p == 0 || n == 0 || p > (1u << 24) || n > (1u << 24)) {
        io_fail("bad dimensions in matrix file", path);
    }
    Matrix m(static_cast<Eigen::Index>(p), static_cast<Eigen::Index>(n));
    // Eigen is column-major by default, matching the wire order.
    in.read(reinterpret_cast<char*>(m.data()),
            static_cast<std::streamsize>(p * n * sizeof(double)));
    if (!in) io_fail("truncated matrix file", path);
    return m;
}

void save_matrix_binary(const std::string& path, const Matrix& m) {
    std::ofstream out(path, std::ios::binary);
    if (!out) io_fail("cannot write matrix file", path);
    out.write(kMatrixMagic, 8);
    const std::uint64_t p = static_cast<std::uint64_t>(m.rows());
    const std::uint64_t n = static_cast<std::uint64_t>(m.cols());
    out.write(reinterpret_cast<const char*>(&p), 8);
    out.write(reinterpret_cast<const char*>(&n), 8);
    out.write(reinterpret_cast<const char*>(m.data()),
              static_cast<std::streamsize>(p * n * sizeof(double)));
    if (!out) io_fail("short write for matrix file", path);
}

Matrix load_matrix(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) io_fail("cannot open matrix file", path);
    char magic[8] = {};
    in.read(magic, 8);
    in.close();
    if (in.gcount() == 8 && std::memcmp(magic, kMatrixMagic, 8) == 0) {
        return load_matrix_binary(path);
    }
    return load_matrix_csv(path);
}

}  // namespace cpminimax
