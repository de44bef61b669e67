#pragma once

#include <cstddef>
#include <functional>
#include <string>

#include "leadsheet/nn/graph.h"

namespace leadsheet::nn {

struct GradCheckResult {
  double max_relative_error = 0.0;
  std::string worst;        // "param[index]" of the worst entry
  double worst_analytic = 0.0;
  double worst_numeric = 0.0;
  std::size_t checked = 0;  // entries compared
  std::size_t skipped = 0;  // entries where both gradients were negligible
};

// Compares the analytic gradient of a scalar loss with central differences
// (f(x + h) - f(x - h)) / 2h for every entry of every parameter. The relative
// error is |a - n| / max(|a|, |n|); entries where both are below `floor` are
// skipped. `loss` must build a fresh 1 x 1 loss on the given graph and be
// deterministic.
GradCheckResult check_gradients(ParameterSet& params, const std::function<Var(Graph&)>& loss,
                                double h = 1e-5, double floor = 1e-9);

}  // namespace leadsheet::nn
