#pragma once

#include <vector>

#include "leadsheet/nn/graph.h"
#include "leadsheet/rng.h"

namespace leadsheet::nn {

// Glorot/Xavier uniform: U(-a, a) with a = sqrt(6 / (fan_in + fan_out)).
void glorot_uniform(Matrix& m, Rng& rng);

// Square root of the sum of squared gradients over every parameter.
double global_grad_norm(const ParameterSet& params);

// Rescales all gradients so their global norm is at most max_norm. Returns
// the norm before clipping.
double clip_grad_norm(ParameterSet& params, double max_norm);

struct AdamOptions {
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

class Adam {
 public:
  Adam(ParameterSet& params, AdamOptions options);

  // Applies one update from the accumulated gradients, then zeroes them.
  void step();
  long steps() const { return t_; }
  void set_learning_rate(double lr);
  double learning_rate() const { return options_.learning_rate; }

 private:
  ParameterSet& params_;
  AdamOptions options_;
  std::vector<Matrix> m_;
  std::vector<Matrix> v_;
  long t_ = 0;
};

}  // namespace leadsheet::nn
