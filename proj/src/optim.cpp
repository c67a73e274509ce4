#include "minet/optim.hpp"

#include <cmath>

#include "minet/error.hpp"

namespace minet {

Optimizer::Optimizer(OptimizerConfig config, const std::vector<Param*>& params)
    : config_(config) {
  if (config_.learning_rate < 0.0) {
    throw ConfigError("optimizer: negative learning rate");
  }
  registered_.reserve(params.size());
  for (const Param* p : params) {
    registered_.push_back(p);
    first_moment_.emplace_back(p->value.rows, p->value.cols, 0.0);
    if (config_.kind == OptimizerKind::adam) {
      second_moment_.emplace_back(p->value.rows, p->value.cols, 0.0);
    }
  }
}

void Optimizer::step(const std::vector<Param*>& params) {
  if (params.size() != registered_.size()) {
    throw ContractError("optimizer step: expected " + std::to_string(registered_.size()) +
                        " params, got " + std::to_string(params.size()));
  }
  for (std::size_t i = 0; i < params.size(); ++i) {
    if (params[i] != registered_[i]) {
      throw ContractError("optimizer step: param '" + params[i]->name +
                          "' was not registered at slot " + std::to_string(i));
    }
  }
  ++step_count_;
  const double t = static_cast<double>(step_count_);

  for (std::size_t i = 0; i < params.size(); ++i) {
    Param& p = *params[i];
    Matrix& m = first_moment_[i];
    const std::size_t n = p.value.size();
    if (config_.kind == OptimizerKind::adam) {
      Matrix& v = second_moment_[i];
      const double m_corr = 1.0 - std::pow(config_.beta1, t);
      const double v_corr = 1.0 - std::pow(config_.beta2, t);
      for (std::size_t k = 0; k < n; ++k) {
        const double g = p.grad.values[k] + config_.weight_decay * p.value.values[k];
        m.values[k] = config_.beta1 * m.values[k] + (1.0 - config_.beta1) * g;
        v.values[k] = config_.beta2 * v.values[k] + (1.0 - config_.beta2) * g * g;
        const double m_hat = m.values[k] / m_corr;
        const double v_hat = v.values[k] / v_corr;
        p.value.values[k] -= config_.learning_rate * m_hat / (std::sqrt(v_hat) + config_.epsilon);
      }
    } else {
      for (std::size_t k = 0; k < n; ++k) {
        const double g = p.grad.values[k] + config_.weight_decay * p.value.values[k];
        m.values[k] = config_.momentum * m.values[k] + g;
        p.value.values[k] -= config_.learning_rate * m.values[k];
      }
    }
  }
}

}  // namespace minet
