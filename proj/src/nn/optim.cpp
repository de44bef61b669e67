#include "leadsheet/nn/optim.h"

#include <cmath>

#include "leadsheet/error.h"

namespace leadsheet::nn {

void glorot_uniform(Matrix& m, Rng& rng) {
  const double a = std::sqrt(6.0 / static_cast<double>(m.rows + m.cols));
  for (Scalar& v : m.data) v = static_cast<Scalar>(rng.uniform(-a, a));
}

double global_grad_norm(const ParameterSet& params) {
  double total = 0.0;
  for (const auto& p : params.all()) {
    for (Scalar g : p->grad.data) total += static_cast<double>(g) * static_cast<double>(g);
  }
  return std::sqrt(total);
}

double clip_grad_norm(ParameterSet& params, double max_norm) {
  if (!(max_norm > 0)) throw InvalidArgument("clip norm must be positive");
  const double norm = global_grad_norm(params);
  if (norm > max_norm) {
    const auto s = static_cast<Scalar>(max_norm / norm);
    for (const auto& p : params.all()) {
      for (Scalar& g : p->grad.data) g *= s;
    }
  }
  return norm;
}

Adam::Adam(ParameterSet& params, AdamOptions options) : params_(params), options_(options) {
  if (!(options.learning_rate > 0)) throw InvalidArgument("learning rate must be positive");
  for (const auto& p : params_.all()) {
    m_.emplace_back(p->value.rows, p->value.cols);
    v_.emplace_back(p->value.rows, p->value.cols);
  }
}

void Adam::set_learning_rate(double lr) {
  if (!(lr > 0)) throw InvalidArgument("learning rate must be positive");
  options_.learning_rate = lr;
}

void Adam::step() {
  ++t_;
  const double c1 = 1.0 - std::pow(options_.beta1, static_cast<double>(t_));
  const double c2 = 1.0 - std::pow(options_.beta2, static_cast<double>(t_));
  const auto b1 = static_cast<Scalar>(options_.beta1);
  const auto b2 = static_cast<Scalar>(options_.beta2);
  const auto all = params_.all();
  for (std::size_t k = 0; k < all.size(); ++k) {
    Parameter& p = *all[k];
    auto& m = m_[k].data;
    auto& v = v_[k].data;
    for (std::size_t i = 0; i < p.value.size(); ++i) {
      const Scalar g = p.grad.data[i];
      m[i] = b1 * m[i] + (1 - b1) * g;
      v[i] = b2 * v[i] + (1 - b2) * g * g;
      const double mhat = m[i] / c1;
      const double vhat = v[i] / c2;
      p.value.data[i] -=
          static_cast<Scalar>(options_.learning_rate * mhat / (std::sqrt(vhat) + options_.epsilon));
      p.grad.data[i] = 0;
    }
  }
}

}  // namespace leadsheet::nn
