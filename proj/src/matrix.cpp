#include "minet/matrix.hpp"

#include <cmath>

#include "minet/error.hpp"

namespace minet {

std::string Matrix::shape_str() const {
  return std::to_string(rows) + "x" + std::to_string(cols);
}

Matrix matmul(const Matrix& a, const Matrix& b) {
  if (a.cols != b.rows) {
    throw ShapeError("matmul: inner dimensions disagree (" + a.shape_str() + " vs " +
                     b.shape_str() + ")");
  }
  Matrix out(a.rows, b.cols, 0.0);
  // ikj order: the inner loop runs over contiguous rows of b and out.
  for (std::size_t i = 0; i < a.rows; ++i) {
    const double* arow = a.row(i);
    double* orow = out.row(i);
    for (std::size_t k = 0; k < a.cols; ++k) {
      const double aik = arow[k];
      const double* brow = b.row(k);
      for (std::size_t j = 0; j < b.cols; ++j) {
        orow[j] += aik * brow[j];
      }
    }
  }
  return out;
}

Matrix transpose(const Matrix& m) {
  Matrix out(m.cols, m.rows);
  for (std::size_t i = 0; i < m.rows; ++i) {
    for (std::size_t j = 0; j < m.cols; ++j) {
      out(j, i) = m(i, j);
    }
  }
  return out;
}

bool all_finite(const Matrix& m) {
  for (double v : m.values) {
    if (!std::isfinite(v)) return false;
  }
  return true;
}

void require_finite(const Matrix& m, const std::string& where) {
  if (!all_finite(m)) {
    throw Error(where + ": non-finite value");
  }
}

}  // namespace minet
