#pragma once

#include <string>
#include <utility>

#include "minet/matrix.hpp"

namespace minet {

// A trainable matrix with its gradient accumulator. grad always matches
// value's shape; backward passes accumulate (+=) into grad.
struct Param {
  std::string name;
  Matrix value;
  Matrix grad;

  Param() = default;
  Param(std::string n, Matrix v)
      : name(std::move(n)), value(std::move(v)), grad(value.rows, value.cols, 0.0) {}

  void zero_grad() { grad.fill(0.0); }
  bool empty() const { return value.empty(); }
};

}  // namespace minet
