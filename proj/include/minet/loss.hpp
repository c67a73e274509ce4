#pragma once

#include <vector>

namespace minet {

// Bag-level cross-entropy, summed binary terms over every class with a 1/N
// prefactor (N = class count; a single sigmoid output is the N = 1 case):
//   L = -(1/N) * sum_c [ y_c log p_c + (1 - y_c) log(1 - p_c) ]
// Probabilities are clamped to [1e-12, 1 - 1e-12] inside the logs, so the
// loss and its gradients stay finite for saturated predictions.

struct LossGrad {
  double loss = 0.0;
  std::vector<double> d_logits;
};

struct LossProbGrad {
  double loss = 0.0;
  std::vector<double> d_prob;
};

// y_hat are post-activation probabilities (length 1: sigmoid; length >= 2:
// softmax); y is the matching binary/one-hot target. Returns the loss and the
// gradient w.r.t. the pre-activation logits.
LossGrad cross_entropy_loss(const std::vector<double>& y_hat, const std::vector<int>& y);

// Fused, saturation-safe forms used by the training path. Equal to
// cross_entropy_loss composed with sigmoid/softmax wherever the clamp is
// inactive.
LossGrad binary_ce_from_logit(double logit, int y);
LossGrad multiclass_ce_from_logits(const std::vector<double>& logits, int label);

// Loss plus gradient w.r.t. the probabilities themselves, for heads whose bag
// probability is pooled directly (no single bag logit exists). y follows the
// cross_entropy_loss convention: length 1 binary target, or a one-hot row.
LossProbGrad ce_on_probs(const std::vector<double>& probs, const std::vector<int>& y);

}  // namespace minet
