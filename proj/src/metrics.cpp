#include "minet/metrics.hpp"

#include <string>

#include "minet/error.hpp"

namespace minet {

Metrics compute_metrics(const std::vector<int>& truth, const std::vector<int>& predicted,
                        std::size_t class_count) {
  if (truth.size() != predicted.size()) {
    throw ShapeError("compute_metrics: " + std::to_string(truth.size()) + " truths vs " +
                     std::to_string(predicted.size()) + " predictions");
  }
  if (truth.empty()) throw DomainError("compute_metrics: empty evaluation set");

  Metrics m;
  m.class_count = class_count;
  m.total = truth.size();
  m.confusion.assign(class_count * class_count, 0);
  for (std::size_t i = 0; i < truth.size(); ++i) {
    const int t = truth[i];
    const int p = predicted[i];
    if (t < 0 || static_cast<std::size_t>(t) >= class_count || p < 0 ||
        static_cast<std::size_t>(p) >= class_count) {
      throw DomainError("compute_metrics: label outside 0.." + std::to_string(class_count - 1));
    }
    ++m.confusion[static_cast<std::size_t>(t) * class_count + static_cast<std::size_t>(p)];
  }

  std::size_t correct = 0;
  for (std::size_t c = 0; c < class_count; ++c) correct += m.confusion_at(c, c);
  m.accuracy = static_cast<double>(correct) / static_cast<double>(m.total);

  m.precision.assign(class_count, 0.0);
  m.recall.assign(class_count, 0.0);
  m.f1.assign(class_count, 0.0);
  for (std::size_t c = 0; c < class_count; ++c) {
    std::size_t predicted_c = 0, actual_c = 0;
    for (std::size_t o = 0; o < class_count; ++o) {
      predicted_c += m.confusion_at(o, c);
      actual_c += m.confusion_at(c, o);
    }
    const double tp = static_cast<double>(m.confusion_at(c, c));
    m.precision[c] = predicted_c > 0 ? tp / static_cast<double>(predicted_c) : 0.0;
    m.recall[c] = actual_c > 0 ? tp / static_cast<double>(actual_c) : 0.0;
    const double pr = m.precision[c] + m.recall[c];
    m.f1[c] = pr > 0.0 ? 2.0 * m.precision[c] * m.recall[c] / pr : 0.0;
  }
  return m;
}

}  // namespace minet
