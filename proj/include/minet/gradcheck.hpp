#pragma once

#include <cstddef>
#include <functional>
#include <string>
#include <vector>

#include "minet/param.hpp"
#include "minet/rng.hpp"

namespace minet {

struct GradCheckReport {
  double max_rel_error = 0.0;
  std::string worst_param;
  std::size_t worst_index = 0;
  double analytic_at_worst = 0.0;
  double numeric_at_worst = 0.0;
  std::size_t entries_checked = 0;
};

// Compares analytic gradients against central finite differences.
//
// loss_fn(true) must run forward + backward, accumulating into each param's
// (pre-zeroed) grad; loss_fn(false) must be a pure forward evaluation. Both
// must be deterministic: the checker evaluates twice and throws ContractError
// if the values differ. For params larger than samples_per_param, a random
// subset of entries is checked. Relative error uses the denominator
// max(|analytic|, |numeric|, 1e-8).
GradCheckReport grad_check(const std::function<double(bool)>& loss_fn,
                           const std::vector<Param*>& params, double h,
                           std::size_t samples_per_param, Rng& rng);

}  // namespace minet
