#include "leadsheet/nn/gradcheck.h"

#include <algorithm>
#include <cmath>
#include <vector>

namespace leadsheet::nn {

namespace {

double evaluate(const std::function<Var(Graph&)>& loss) {
  NoGradGuard no_grad;
  Graph g;
  return static_cast<double>(loss(g).value().data[0]);
}

}  // namespace

GradCheckResult check_gradients(ParameterSet& params, const std::function<Var(Graph&)>& loss,
                                double h, double floor) {
  params.zero_grad();
  {
    Graph g;
    Var l = loss(g);
    g.backward(l);
  }
  std::vector<Matrix> analytic;
  for (const auto& p : params.all()) analytic.push_back(p->grad);
  params.zero_grad();

  GradCheckResult result;
  const auto all = params.all();
  for (std::size_t k = 0; k < all.size(); ++k) {
    Parameter& p = *all[k];
    for (std::size_t i = 0; i < p.value.size(); ++i) {
      const Scalar saved = p.value.data[i];
      p.value.data[i] = static_cast<Scalar>(saved + h);
      const double up = evaluate(loss);
      p.value.data[i] = static_cast<Scalar>(saved - h);
      const double down = evaluate(loss);
      p.value.data[i] = saved;
      const double numeric = (up - down) / (2 * h);
      const double a = analytic[k].data[i];
      const double scale = std::max(std::abs(a), std::abs(numeric));
      if (scale < floor) {
        ++result.skipped;
        continue;
      }
      ++result.checked;
      const double rel = std::abs(a - numeric) / scale;
      if (rel >= result.max_relative_error) {
        result.max_relative_error = rel;
        result.worst = p.name + "[" + std::to_string(i) + "]";
        result.worst_analytic = a;
        result.worst_numeric = numeric;
      }
    }
  }
  return result;
}

}  // namespace leadsheet::nn
