#pragma once

#include <cstdint>
#include <vector>

#include "minet/param.hpp"

namespace minet {

enum class OptimizerKind { adam, sgd };

struct OptimizerConfig {
  OptimizerKind kind = OptimizerKind::adam;
  double learning_rate = 1e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  double momentum = 0.0;  // sgd only
  double weight_decay = 5e-4;
};

// Owns per-parameter moment/velocity state for a fixed set of registered
// params. Gradients are read, never modified; the caller zeroes them.
class Optimizer {
 public:
  Optimizer(OptimizerConfig config, const std::vector<Param*>& params);

  // Applies one update to every registered param. Weight decay enters as a
  // gradient-coupled L2 term (g + wd * value).
  void step(const std::vector<Param*>& params);

  std::int64_t step_count() const { return step_count_; }
  const OptimizerConfig& config() const { return config_; }

 private:
  OptimizerConfig config_;
  std::int64_t step_count_ = 0;
  std::vector<const Param*> registered_;
  std::vector<Matrix> first_moment_;   // adam m / sgd velocity
  std::vector<Matrix> second_moment_;  // adam v
};

}  // namespace minet
