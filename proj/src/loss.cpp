#include "minet/loss.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "minet/error.hpp"
#include "minet/ops.hpp"

namespace minet {

namespace {

constexpr double kProbEps = 1e-12;

double clamp_prob(double p) { return std::clamp(p, kProbEps, 1.0 - kProbEps); }

double eq_loss(const std::vector<double>& probs, const std::vector<int>& y) {
  const double n = static_cast<double>(probs.size());
  double acc = 0.0;
  for (std::size_t c = 0; c < probs.size(); ++c) {
    const double p = clamp_prob(probs[c]);
    acc += y[c] == 1 ? std::log(p) : std::log(1.0 - p);
  }
  return -acc / n;
}

std::vector<int> one_hot(int label, std::size_t n) {
  std::vector<int> y(n, 0);
  y[static_cast<std::size_t>(label)] = 1;
  return y;
}

}  // namespace

LossGrad cross_entropy_loss(const std::vector<double>& y_hat, const std::vector<int>& y) {
  if (y_hat.size() != y.size()) {
    throw ShapeError("cross_entropy_loss: prediction length " +
                     std::to_string(y_hat.size()) + " vs target length " +
                     std::to_string(y.size()));
  }
  if (y_hat.empty()) {
    throw DomainError("cross_entropy_loss: empty vectors");
  }
  for (int t : y) {
    if (t != 0 && t != 1) {
      throw DomainError("cross_entropy_loss: targets must be 0 or 1");
    }
  }

  LossGrad out;
  out.loss = eq_loss(y_hat, y);
  out.d_logits.resize(y_hat.size());
  if (y_hat.size() == 1) {
    // sigmoid head, N = 1: dL/dz = p - y
    out.d_logits[0] = clamp_prob(y_hat[0]) - static_cast<double>(y[0]);
    return out;
  }
  // softmax head. With g_c = dL/dp_c = -(1/N)[y_c/p_c - (1-y_c)/(1-p_c)] and
  // dp_c/dz_j = p_c (δ_cj - p_j):
  //   dL/dz_j = t_j - p_j * sum_c t_c,  t_c = g_c p_c
  // t_c is computed in its cancelled form so it stays finite as p_c -> 0.
  const double n = static_cast<double>(y_hat.size());
  std::vector<double> t(y_hat.size());
  double t_sum = 0.0;
  for (std::size_t c = 0; c < y_hat.size(); ++c) {
    const double p = clamp_prob(y_hat[c]);
    t[c] = -(static_cast<double>(y[c]) - (1.0 - y[c]) * p / (1.0 - p)) / n;
    t_sum += t[c];
  }
  for (std::size_t j = 0; j < y_hat.size(); ++j) {
    out.d_logits[j] = t[j] - clamp_prob(y_hat[j]) * t_sum;
  }
  return out;
}

LossGrad binary_ce_from_logit(double logit, int y) {
  if (y != 0 && y != 1) {
    throw DomainError("binary_ce_from_logit: target must be 0 or 1");
  }
  // L = softplus(z) - y*z, computed overflow-free
  const double sp = std::max(logit, 0.0) + std::log1p(std::exp(-std::abs(logit)));
  const double p = logit >= 0.0 ? 1.0 / (1.0 + std::exp(-logit))
                                : std::exp(logit) / (1.0 + std::exp(logit));
  LossGrad out;
  out.loss = sp - static_cast<double>(y) * logit;
  out.d_logits = {p - static_cast<double>(y)};
  return out;
}

LossGrad multiclass_ce_from_logits(const std::vector<double>& logits, int label) {
  if (label < 0 || static_cast<std::size_t>(label) >= logits.size()) {
    throw DomainError("multiclass_ce_from_logits: label " + std::to_string(label) +
                      " out of range for " + std::to_string(logits.size()) + " classes");
  }
  const std::vector<double> probs = softmax_vec(logits);
  return cross_entropy_loss(probs, one_hot(label, logits.size()));
}

LossProbGrad ce_on_probs(const std::vector<double>& probs, const std::vector<int>& y) {
  if (probs.size() != y.size()) {
    throw ShapeError("ce_on_probs: prediction length " + std::to_string(probs.size()) +
                     " vs target length " + std::to_string(y.size()));
  }
  if (probs.empty()) {
    throw DomainError("ce_on_probs: empty vectors");
  }
  LossProbGrad out;
  out.loss = eq_loss(probs, y);
  out.d_prob.resize(probs.size());
  const double n = static_cast<double>(probs.size());
  for (std::size_t c = 0; c < probs.size(); ++c) {
    const double p = clamp_prob(probs[c]);
    out.d_prob[c] = -(static_cast<double>(y[c]) / p - (1.0 - y[c]) / (1.0 - p)) / n;
  }
  return out;
}

}  // namespace minet
