#include "minet/gradcheck.hpp"

#include <algorithm>
#include <cmath>

#include "minet/error.hpp"

namespace minet {

GradCheckReport grad_check(const std::function<double(bool)>& loss_fn,
                           const std::vector<Param*>& params, double h,
                           std::size_t samples_per_param, Rng& rng) {
  if (h < 1e-6 || h > 1e-4) {
    throw DomainError("grad_check: h must be in [1e-6, 1e-4]");
  }

  const double probe_a = loss_fn(false);
  const double probe_b = loss_fn(false);
  if (probe_a != probe_b) {
    throw ContractError("grad_check: loss_fn is not deterministic (" +
                        std::to_string(probe_a) + " vs " + std::to_string(probe_b) + ")");
  }

  for (Param* p : params) p->zero_grad();
  loss_fn(true);

  GradCheckReport report;
  for (Param* p : params) {
    const std::size_t n = p->value.size();
    std::vector<std::size_t> indices;
    if (n <= samples_per_param) {
      indices.resize(n);
      for (std::size_t k = 0; k < n; ++k) indices[k] = k;
    } else {
      // distinct random entries
      std::vector<std::size_t> all(n);
      for (std::size_t k = 0; k < n; ++k) all[k] = k;
      rng.shuffle(all);
      indices.assign(all.begin(), all.begin() + static_cast<long>(samples_per_param));
    }

    for (std::size_t k : indices) {
      const double saved = p->value.values[k];
      p->value.values[k] = saved + h;
      const double plus = loss_fn(false);
      p->value.values[k] = saved - h;
      const double minus = loss_fn(false);
      p->value.values[k] = saved;

      const double numeric = (plus - minus) / (2.0 * h);
      const double analytic = p->grad.values[k];
      const double denom = std::max({std::abs(analytic), std::abs(numeric), 1e-8});
      const double rel = std::abs(analytic - numeric) / denom;
      ++report.entries_checked;
      if (rel > report.max_rel_error) {
        report.max_rel_error = rel;
        report.worst_param = p->name;
        report.worst_index = k;
        report.analytic_at_worst = analytic;
        report.numeric_at_worst = numeric;
      }
    }
  }
  return report;
}

}  // namespace minet
