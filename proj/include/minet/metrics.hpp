#pragma once

#include <cstddef>
#include <vector>

namespace minet {

// Bag-level classification metrics. F defaults to 0 when precision + recall
// is zero (the 0/0 case).
struct Metrics {
  std::size_t class_count = 0;
  std::size_t total = 0;
  std::vector<std::size_t> confusion;  // class_count x class_count, row = truth
  double accuracy = 0.0;
  std::vector<double> precision;
  std::vector<double> recall;
  std::vector<double> f1;

  std::size_t confusion_at(std::size_t truth, std::size_t predicted) const {
    return confusion[truth * class_count + predicted];
  }
};

Metrics compute_metrics(const std::vector<int>& truth, const std::vector<int>& predicted,
                        std::size_t class_count);

}  // namespace minet
