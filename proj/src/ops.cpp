#include "minet/ops.hpp"

#include <algorithm>
#include <cmath>

#include "minet/error.hpp"

namespace minet {

Matrix affine(const Matrix& x, const Param& w, const Param& b) {
  if (x.cols != w.value.rows) {
    throw ShapeError("affine: input width " + x.shape_str() + " does not match weight " +
                     w.value.shape_str());
  }
  if (b.value.rows != 1 || b.value.cols != w.value.cols) {
    throw ShapeError("affine: bias " + b.value.shape_str() + " does not match weight " +
                     w.value.shape_str());
  }
  Matrix out = matmul(x, w.value);
  const double* bias = b.value.row(0);
  for (std::size_t i = 0; i < out.rows; ++i) {
    double* orow = out.row(i);
    for (std::size_t j = 0; j < out.cols; ++j) {
      orow[j] += bias[j];
    }
  }
  return out;
}

Matrix affine_backward(const Matrix& d_out, const Matrix& x, Param& w, Param& b) {
  if (d_out.rows != x.rows || d_out.cols != w.value.cols) {
    throw ShapeError("affine_backward: upstream " + d_out.shape_str() +
                     " does not match input " + x.shape_str() + " and weight " +
                     w.value.shape_str());
  }
  // dW += x^T * d_out, db += column sums of d_out, dx = d_out * W^T
  const Matrix dw = matmul(transpose(x), d_out);
  for (std::size_t n = 0; n < dw.size(); ++n) w.grad.values[n] += dw.values[n];
  double* db = b.grad.row(0);
  for (std::size_t i = 0; i < d_out.rows; ++i) {
    const double* drow = d_out.row(i);
    for (std::size_t j = 0; j < d_out.cols; ++j) db[j] += drow[j];
  }
  return matmul(d_out, transpose(w.value));
}

Matrix relu(const Matrix& x) {
  Matrix out(x.rows, x.cols);
  for (std::size_t n = 0; n < x.size(); ++n) {
    out.values[n] = x.values[n] > 0.0 ? x.values[n] : 0.0;
  }
  return out;
}

Matrix relu_backward(const Matrix& d_out, const Matrix& x) {
  if (!d_out.same_shape(x)) {
    throw ShapeError("relu_backward: " + d_out.shape_str() + " vs " + x.shape_str());
  }
  Matrix out(x.rows, x.cols);
  for (std::size_t n = 0; n < x.size(); ++n) {
    out.values[n] = x.values[n] > 0.0 ? d_out.values[n] : 0.0;
  }
  return out;
}

static double sigmoid_scalar(double x) {
  if (x >= 0.0) {
    return 1.0 / (1.0 + std::exp(-x));
  }
  const double e = std::exp(x);
  return e / (1.0 + e);
}

Matrix sigmoid(const Matrix& x) {
  Matrix out(x.rows, x.cols);
  for (std::size_t n = 0; n < x.size(); ++n) {
    out.values[n] = sigmoid_scalar(x.values[n]);
  }
  return out;
}

Matrix sigmoid_backward(const Matrix& d_out, const Matrix& s) {
  if (!d_out.same_shape(s)) {
    throw ShapeError("sigmoid_backward: " + d_out.shape_str() + " vs " + s.shape_str());
  }
  Matrix out(s.rows, s.cols);
  for (std::size_t n = 0; n < s.size(); ++n) {
    out.values[n] = d_out.values[n] * s.values[n] * (1.0 - s.values[n]);
  }
  return out;
}

std::vector<double> softmax_vec(const std::vector<double>& v) {
  if (v.empty()) {
    throw DomainError("softmax_vec: empty vector");
  }
  const double m = *std::max_element(v.begin(), v.end());
  std::vector<double> out(v.size());
  double sum = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    out[i] = std::exp(v[i] - m);
    sum += out[i];
  }
  for (double& o : out) o /= sum;
  return out;
}

std::vector<double> softmax_vec_backward(const std::vector<double>& d_out,
                                         const std::vector<double>& s) {
  if (d_out.size() != s.size()) {
    throw ShapeError("softmax_vec_backward: length " + std::to_string(d_out.size()) +
                     " vs " + std::to_string(s.size()));
  }
  // d_in_i = s_i * (d_out_i - sum_j d_out_j s_j)
  double dot = 0.0;
  for (std::size_t i = 0; i < s.size(); ++i) dot += d_out[i] * s[i];
  std::vector<double> out(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) out[i] = s[i] * (d_out[i] - dot);
  return out;
}

Matrix dropout(const Matrix& x, double rate, Rng& rng, bool train_mode,
               Matrix* mask_out) {
  if (rate < 0.0 || rate >= 1.0) {
    throw DomainError("dropout: rate must be in [0, 1), got " + std::to_string(rate));
  }
  if (!train_mode || rate == 0.0) {
    if (mask_out) *mask_out = Matrix(x.rows, x.cols, 1.0);
    return x;
  }
  const double scale = 1.0 / (1.0 - rate);
  Matrix mask(x.rows, x.cols);
  Matrix out(x.rows, x.cols);
  for (std::size_t n = 0; n < x.size(); ++n) {
    const double keep = rng.uniform() >= rate ? scale : 0.0;
    mask.values[n] = keep;
    out.values[n] = x.values[n] * keep;
  }
  if (mask_out) *mask_out = std::move(mask);
  return out;
}

Matrix dropout_backward(const Matrix& d_out, const Matrix& mask) {
  if (!d_out.same_shape(mask)) {
    throw ShapeError("dropout_backward: " + d_out.shape_str() + " vs " + mask.shape_str());
  }
  Matrix out(d_out.rows, d_out.cols);
  for (std::size_t n = 0; n < d_out.size(); ++n) {
    out.values[n] = d_out.values[n] * mask.values[n];
  }
  return out;
}

Matrix init_params(std::size_t rows, std::size_t cols, Init scheme, Rng& rng) {
  if (rows == 0 || cols == 0) {
    throw ConfigError("init_params: dimensions must be positive");
  }
  Matrix out(rows, cols, 0.0);
  switch (scheme) {
    case Init::zeros:
      break;
    case Init::glorot_uniform: {
      const double limit = std::sqrt(6.0 / static_cast<double>(rows + cols));
      for (double& v : out.values) v = rng.uniform(-limit, limit);
      break;
    }
  }
  return out;
}

}  // namespace minet
