#pragma once

#include <cstddef>
#include <vector>

#include "minet/matrix.hpp"
#include "minet/param.hpp"
#include "minet/rng.hpp"

namespace minet {

// Forward passes keep no hidden state; each backward takes the cached inputs
// it needs, returns the gradient w.r.t. the op's input, and accumulates into
// any Param grads involved.

// out[i][j] = sum_k x[i][k] * w[k][j] + b[0][j]
Matrix affine(const Matrix& x, const Param& w, const Param& b);
Matrix affine_backward(const Matrix& d_out, const Matrix& x, Param& w, Param& b);

Matrix relu(const Matrix& x);
Matrix relu_backward(const Matrix& d_out, const Matrix& x);

// Saturation-safe elementwise logistic; no overflow for |x| up to ~1e3.
Matrix sigmoid(const Matrix& x);
// s is the forward output: d_in = d_out * s * (1 - s)
Matrix sigmoid_backward(const Matrix& d_out, const Matrix& s);

// Max-subtracted softmax over a vector; output sums to 1 and is invariant to
// adding a constant to every entry.
std::vector<double> softmax_vec(const std::vector<double>& v);
// Full Jacobian-vector product through softmax; s is the forward output.
std::vector<double> softmax_vec_backward(const std::vector<double>& d_out,
                                         const std::vector<double>& s);

// Inverted dropout: in train mode each entry is zeroed with probability
// `rate`, survivors scaled by 1/(1-rate); eval mode is the identity. When
// mask_out is given it receives the applied elementwise factors so the same
// mask can be replayed in the backward pass.
Matrix dropout(const Matrix& x, double rate, Rng& rng, bool train_mode,
               Matrix* mask_out = nullptr);
Matrix dropout_backward(const Matrix& d_out, const Matrix& mask);

enum class Init { glorot_uniform, zeros };

// glorot_uniform draws from U(-L, L) with L = sqrt(6 / (fan_in + fan_out)).
Matrix init_params(std::size_t rows, std::size_t cols, Init scheme, Rng& rng);

}  // namespace minet
