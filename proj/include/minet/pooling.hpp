#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "minet/matrix.hpp"
#include "minet/param.hpp"
#include "minet/rng.hpp"

namespace minet {

// The permutation-invariant aggregation operators. attention/gated carry
// trainable weights; max/mean are the pre-defined baselines.
enum class PoolingKind { attention, gated, max, mean };

std::string to_string(PoolingKind kind);
PoolingKind parse_pooling_kind(const std::string& name);

struct PoolingSpec {
  PoolingKind kind = PoolingKind::attention;
  std::size_t gated_hidden = 64;  // gate width L (gated kind only)
  double temperature = 1.0;       // softmax sharpness; 1 is the plain form
};

// Trainable state of the attention scorer. The plain kind scores an instance
// as sigmoid(w · x + b); the gated kind as head_w · (tanh(gate_v x) ⊙
// sigmoid(gate_u x)). Unused fields stay empty.
struct AttentionParams {
  Param w;       // 1 x d_in
  Param b;       // 1 x 1
  Param gate_v;  // L x d_in
  Param gate_u;  // L x d_in
  Param head_w;  // 1 x L
  bool gated = false;

  std::vector<Param*> params();
};

AttentionParams make_attention_params(std::size_t d_in, const PoolingSpec& spec, Rng& rng);

// Forward caches needed to run the backward pass.
struct AttentionTrace {
  Matrix sig;        // plain: k x 1 sigmoid scores
  Matrix gate_tanh;  // gated: k x L
  Matrix gate_sig;   // gated: k x L
  std::vector<double> weights;
};

// a = softmax(score(x_i) / temperature) over the k instances.
std::vector<double> attention_weights(const Matrix& x, const AttentionParams& p,
                                      double temperature, AttentionTrace* trace = nullptr);

// Accumulates parameter gradients into p and input gradients into d_x
// (k x d_in, added to — callers combine multiple paths into one buffer).
void attention_weights_backward(const std::vector<double>& d_a, const Matrix& x,
                                AttentionParams& p, double temperature,
                                const AttentionTrace& trace, Matrix& d_x);

// out_j = sum_i a_i * p[i][j]; a convex combination when a is a weight vector.
std::vector<double> weighted_pool(const Matrix& p, const std::vector<double>& a);
void weighted_pool_backward(const std::vector<double>& d_out, const Matrix& p,
                            const std::vector<double>& a, Matrix& d_p,
                            std::vector<double>& d_a);

// Per-column maximum; gradient is routed to the lowest-index maximizer.
std::vector<double> max_pool(const Matrix& p, std::vector<std::size_t>* argmax_out = nullptr);
void max_pool_backward(const std::vector<double>& d_out,
                       const std::vector<std::size_t>& argmax, Matrix& d_p);

std::vector<double> mean_pool(const Matrix& p);
void mean_pool_backward(const std::vector<double>& d_out, Matrix& d_p);

}  // namespace minet
