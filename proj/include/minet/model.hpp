#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <utility>
#include <vector>

#include "minet/data.hpp"
#include "minet/matrix.hpp"
#include "minet/metrics.hpp"
#include "minet/optim.hpp"
#include "minet/param.hpp"
#include "minet/pooling.hpp"
#include "minet/rng.hpp"

namespace minet {

// Bag classifier: a dense instance-level stack (fc+ReLU+dropout per hidden
// width), a MIL pooling operator, and a bag-level classification head.
//
// Layer order by pooling kind:
//   attention/gated (default)     embeddings -> attention pool -> fc head
//   attention/gated, score pool   embeddings -> fc head per instance ->
//                                 row sigmoid/softmax -> attention-weighted
//                                 convex combination of the probabilities
//   max/mean                      embeddings -> fc head per instance ->
//                                 row sigmoid/softmax -> max/mean pool
//
// Binary problems use a single sigmoid output; class_count > 2 uses a
// softmax row per instance (max-pooled distributions are renormalized).
struct ModelConfig {
  std::size_t input_dim = 0;
  std::vector<std::size_t> hidden = {256, 128, 64};
  double dropout_rate = 0.5;
  std::size_t class_count = 2;
  PoolingSpec pooling;
  bool classify_before_pool = false;  // score-pool order for attention kinds
  std::uint64_t seed = 0;
};

struct Prediction {
  std::vector<double> bag_prob;   // length class_count, sums to 1
  std::vector<double> attention;  // length k; uniform placeholder for max/mean
  Matrix instance_scores;         // k x (1 or class_count) per-instance probabilities
};

struct TrainConfig {
  OptimizerConfig optimizer;
  std::size_t epochs = 50;
  std::uint64_t seed = 0;
  bool shuffle = true;
};

class Model {
 public:
  explicit Model(const ModelConfig& config);

  const ModelConfig& config() const { return config_; }
  std::size_t out_dim() const { return out_dim_; }

  // Deterministic eval-mode pass (dropout off).
  Prediction forward(const Bag& bag) const;

  // Train-mode loss without gradients; the rng copy freezes dropout masks,
  // which makes repeated evaluation deterministic for gradient checking.
  double bag_loss(const Bag& bag, int label, Rng rng) const;

  // Train-mode forward + backprop; accumulates into every param's grad.
  double bag_loss_grads(const Bag& bag, int label, Rng& rng);

  std::vector<Param*> params();
  std::vector<const Param*> params() const;
  std::size_t param_count() const;
  void zero_grads();

  // Eval-mode backbone embeddings (k x hidden.back()).
  Matrix embed(const Matrix& instances) const;
  // Head + output activation applied to one pooled embedding.
  std::vector<double> classify_embedding(const std::vector<double>& embedding) const;

 private:
  struct Trace {
    std::vector<Matrix> affine_in;
    std::vector<Matrix> relu_in;
    std::vector<Matrix> drop_mask;
    Matrix embeddings;
    AttentionTrace attn;
    std::vector<double> attention;
    Matrix inst_logits;
    Matrix inst_probs;
    std::vector<std::size_t> argmax;
    double max_sum = 1.0;  // renormalizer for multi-class max pooling
    std::vector<double> pooled_embedding;
    std::vector<double> bag_logits;
    std::vector<double> head_prob;  // length out_dim
  };

  void forward_impl(const Matrix& instances, bool train_mode, Rng* rng, Trace& trace) const;
  double loss_from_trace(const Trace& trace, int label,
                         std::vector<double>* d_head_prob_or_logits) const;
  void backward_impl(const Matrix& instances, int label, Trace& trace);
  Matrix instance_probs(const Matrix& embeddings, Matrix* logits_out) const;
  void check_bag(const Bag& bag, int label) const;

  ModelConfig config_;
  std::size_t out_dim_ = 1;
  std::vector<Param> backbone_w_;
  std::vector<Param> backbone_b_;
  AttentionParams attn_;
  Param head_w_;
  Param head_b_;
};

// One optimizer step per bag, order reshuffled each epoch from the seed.
// Returns the mean per-bag loss of each epoch.
std::vector<double> train(Model& model, const std::vector<Bag>& bags, const TrainConfig& config);

Metrics evaluate(const Model& model, const std::vector<Bag>& bags);

int predict_class(const Prediction& prediction);

// Instances ranked by descending attention weight (ties by ascending index).
std::vector<std::pair<std::size_t, double>> key_instances(const Model& model, const Bag& bag,
                                                          std::size_t top_m);

// Versioned JSON model file: config echo, optional normalization stats, and
// every named parameter matrix. Doubles round-trip exactly, so a loaded model
// reproduces the saved model's predictions bit for bit.
void save_model(const Model& model, const std::filesystem::path& path,
                const NormStats* norm = nullptr);

struct LoadedModel {
  Model model;
  std::optional<NormStats> norm;
};

LoadedModel load_model(const std::filesystem::path& path);

}  // namespace minet
