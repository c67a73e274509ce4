#pragma once

#include <cstddef>
#include <string>
#include <vector>

namespace minet {

// Dense row-major matrix of doubles. The only numeric container in the project.
struct Matrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> values;

  Matrix() = default;
  Matrix(std::size_t r, std::size_t c, double fill = 0.0)
      : rows(r), cols(c), values(r * c, fill) {}

  double& operator()(std::size_t i, std::size_t j) { return values[i * cols + j]; }
  double operator()(std::size_t i, std::size_t j) const { return values[i * cols + j]; }

  double* row(std::size_t i) { return values.data() + i * cols; }
  const double* row(std::size_t i) const { return values.data() + i * cols; }

  std::size_t size() const { return values.size(); }
  bool empty() const { return rows == 0 || cols == 0; }
  bool same_shape(const Matrix& other) const {
    return rows == other.rows && cols == other.cols;
  }
  void fill(double v) { values.assign(values.size(), v); }

  std::string shape_str() const;
};

Matrix matmul(const Matrix& a, const Matrix& b);
Matrix transpose(const Matrix& m);

bool all_finite(const Matrix& m);
// Throws Error naming `where` if any entry is NaN/Inf.
void require_finite(const Matrix& m, const std::string& where);

}  // namespace minet
