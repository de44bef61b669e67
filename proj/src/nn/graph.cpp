#include "leadsheet/nn/graph.h"

#include <algorithm>
#include <cmath>
#include <limits>

#include "leadsheet/error.h"
#include "leadsheet/kernels/gemm.h"

namespace leadsheet::nn {

namespace {

thread_local bool g_grad_enabled = true;

std::string shape(const Matrix& m) {
  return std::to_string(m.rows) + "x" + std::to_string(m.cols);
}

void require(bool ok, const char* op, const Matrix& a, const Matrix& b) {
  if (!ok) {
    throw InvalidArgument(std::string(op) + ": shape mismatch " + shape(a) + " vs " + shape(b));
  }
}

Graph& graph_of(Var a) {
  if (a.graph == nullptr) throw InvalidArgument("variable is not bound to a graph");
  return *a.graph;
}

Graph& graph_of(Var a, Var b) {
  if (a.graph != b.graph) throw InvalidArgument("variables belong to different graphs");
  return graph_of(a);
}

Scalar sigmoid_of(Scalar x) { return Scalar(1) / (Scalar(1) + std::exp(-x)); }

// Unary elementwise op whose derivative is a function of input x and output y.
template <typename F, typename D>
Var unary(Var a, F f, D dfdx) {
  Graph& g = graph_of(a);
  const Matrix& x = a.value();
  Matrix y(x.rows, x.cols);
  for (std::size_t i = 0; i < x.size(); ++i) y.data[i] = f(x.data[i]);
  const int ia = a.id;
  return g.push(std::move(y), {ia}, [ia, dfdx](Graph& g, int self) {
    const Matrix& gy = g.grad_of(self);
    const Matrix& x = g.value_of(ia);
    const Matrix& y = g.value_of(self);
    Matrix& gx = g.grad_ref(ia);
    for (std::size_t i = 0; i < gy.size(); ++i) gx.data[i] += gy.data[i] * dfdx(x.data[i], y.data[i]);
  });
}

}  // namespace

// --- ParameterSet -----------------------------------------------------------

Parameter& ParameterSet::add(std::string name, int rows, int cols) {
  if (by_name_.count(name) != 0) throw InvalidArgument("duplicate parameter " + name);
  auto p = std::make_unique<Parameter>();
  p->name = std::move(name);
  p->value = Matrix(rows, cols);
  p->grad = Matrix(rows, cols);
  Parameter& ref = *p;
  by_name_[ref.name] = &ref;
  params_.push_back(std::move(p));
  return ref;
}

Parameter* ParameterSet::find(const std::string& name) {
  auto it = by_name_.find(name);
  return it == by_name_.end() ? nullptr : it->second;
}

const Parameter* ParameterSet::find(const std::string& name) const {
  auto it = by_name_.find(name);
  return it == by_name_.end() ? nullptr : it->second;
}

std::size_t ParameterSet::count() const {
  std::size_t n = 0;
  for (const auto& p : params_) n += p->value.size();
  return n;
}

void ParameterSet::zero_grad() {
  for (auto& p : params_) std::fill(p->grad.data.begin(), p->grad.data.end(), Scalar(0));
}

// --- grad mode --------------------------------------------------------------

NoGradGuard::NoGradGuard() : previous_(g_grad_enabled) { g_grad_enabled = false; }
NoGradGuard::~NoGradGuard() { g_grad_enabled = previous_; }
bool grad_enabled() { return g_grad_enabled; }

// --- Graph ------------------------------------------------------------------

const Matrix& Var::value() const { return graph_of(*this).value(*this); }

Var Graph::param(Parameter& p) {
  auto it = param_nodes_.find(&p);
  if (it != param_nodes_.end()) return {this, it->second};
  Node node;
  node.param = &p;
  node.external = &p.value;
  node.needs_grad = g_grad_enabled;
  nodes_.push_back(std::move(node));
  const int id = static_cast<int>(nodes_.size()) - 1;
  param_nodes_[&p] = id;
  return {this, id};
}

Var Graph::constant(Matrix m) {
  Node node;
  node.value = std::move(m);
  nodes_.push_back(std::move(node));
  return {this, static_cast<int>(nodes_.size()) - 1};
}

Var Graph::view(const Matrix& m) {
  Node node;
  node.external = &m;
  nodes_.push_back(std::move(node));
  return {this, static_cast<int>(nodes_.size()) - 1};
}

Var Graph::push(Matrix value, std::vector<int> parents, Backward backward) {
  Node node;
  node.value = std::move(value);
  if (g_grad_enabled) {
    node.needs_grad = std::any_of(parents.begin(), parents.end(),
                                  [this](int p) { return needs_grad(p); });
    if (node.needs_grad) node.backward = std::move(backward);
  }
  nodes_.push_back(std::move(node));
  return {this, static_cast<int>(nodes_.size()) - 1};
}

Matrix& Graph::grad_ref(int id) {
  Node& n = nodes_[static_cast<std::size_t>(id)];
  const Matrix& v = value_of(id);
  if (n.grad.empty() && !v.empty()) n.grad = Matrix(v.rows, v.cols);
  return n.grad;
}

void Graph::backward(Var loss, Scalar seed) {
  if (loss.graph != this) throw InvalidArgument("loss belongs to another graph");
  const Matrix& v = value(loss);
  if (v.rows != 1 || v.cols != 1) throw InvalidArgument("backward needs a 1x1 loss, got " + shape(v));
  for (auto& n : nodes_) n.grad = Matrix();
  grad_ref(loss.id).data[0] = seed;
  for (int id = loss.id; id >= 0; --id) {
    Node& n = nodes_[static_cast<std::size_t>(id)];
    if (n.grad.empty() || !n.needs_grad) continue;
    if (n.backward) n.backward(*this, id);
    if (n.param != nullptr) {
      auto& dst = n.param->grad.data;
      for (std::size_t i = 0; i < dst.size(); ++i) dst[i] += n.grad.data[i];
    }
  }
}

// --- linear algebra ---------------------------------------------------------

Var matmul(Var a, Var b) {
  Graph& g = graph_of(a, b);
  const Matrix& x = a.value();
  const Matrix& y = b.value();
  require(x.cols == y.rows, "matmul", x, y);
  Matrix out(x.rows, y.cols);
  kernels::gemm(x.data.data(), y.data.data(), out.data.data(), x.rows, x.cols, y.cols, false);
  const int ia = a.id;
  const int ib = b.id;
  return g.push(std::move(out), {ia, ib}, [ia, ib](Graph& g, int self) {
    const Matrix& gy = g.grad_of(self);
    const Matrix& x = g.value_of(ia);
    const Matrix& y = g.value_of(ib);
    // dA = dC * B^T, dB = A^T * dC
    if (g.needs_grad(ia)) {
      kernels::gemm_nt(gy.data.data(), y.data.data(), g.grad_ref(ia).data.data(), x.rows, y.cols,
                       x.cols, true);
    }
    if (g.needs_grad(ib)) {
      kernels::gemm_tn(x.data.data(), gy.data.data(), g.grad_ref(ib).data.data(), x.rows, x.cols,
                       y.cols, true);
    }
  });
}

Var matmul_nt(Var a, Var b) {
  Graph& g = graph_of(a, b);
  const Matrix& x = a.value();
  const Matrix& y = b.value();
  require(x.cols == y.cols, "matmul_nt", x, y);
  Matrix out(x.rows, y.rows);
  kernels::gemm_nt(x.data.data(), y.data.data(), out.data.data(), x.rows, x.cols, y.rows, false);
  const int ia = a.id;
  const int ib = b.id;
  return g.push(std::move(out), {ia, ib}, [ia, ib](Graph& g, int self) {
    const Matrix& gy = g.grad_of(self);
    const Matrix& x = g.value_of(ia);
    const Matrix& y = g.value_of(ib);
    // C = A B^T: dA = dC * B, dB = dC^T * A
    if (g.needs_grad(ia)) {
      kernels::gemm(gy.data.data(), y.data.data(), g.grad_ref(ia).data.data(), x.rows, y.rows,
                    x.cols, true);
    }
    if (g.needs_grad(ib)) {
      kernels::gemm_tn(gy.data.data(), x.data.data(), g.grad_ref(ib).data.data(), x.rows, y.rows,
                       x.cols, true);
    }
  });
}

// --- elementwise ------------------------------------------------------------

Var add(Var a, Var b) {
  Graph& g = graph_of(a, b);
  const Matrix& x = a.value();
  const Matrix& y = b.value();
  require(x.rows == y.rows && x.cols == y.cols, "add", x, y);
  Matrix out = x;
  for (std::size_t i = 0; i < out.size(); ++i) out.data[i] += y.data[i];
  const int ia = a.id;
  const int ib = b.id;
  return g.push(std::move(out), {ia, ib}, [ia, ib](Graph& g, int self) {
    const Matrix& gy = g.grad_of(self);
    for (int id : {ia, ib}) {
      if (!g.needs_grad(id)) continue;
      Matrix& gx = g.grad_ref(id);
      for (std::size_t i = 0; i < gy.size(); ++i) gx.data[i] += gy.data[i];
    }
  });
}

Var sub(Var a, Var b) {
  Graph& g = graph_of(a, b);
  const Matrix& x = a.value();
  const Matrix& y = b.value();
  require(x.rows == y.rows && x.cols == y.cols, "sub", x, y);
  Matrix out = x;
  for (std::size_t i = 0; i < out.size(); ++i) out.data[i] -= y.data[i];
  const int ia = a.id;
  const int ib = b.id;
  return g.push(std::move(out), {ia, ib}, [ia, ib](Graph& g, int self) {
    const Matrix& gy = g.grad_of(self);
    if (g.needs_grad(ia)) {
      Matrix& gx = g.grad_ref(ia);
      for (std::size_t i = 0; i < gy.size(); ++i) gx.data[i] += gy.data[i];
    }
    if (g.needs_grad(ib)) {
      Matrix& gx = g.grad_ref(ib);
      for (std::size_t i = 0; i < gy.size(); ++i) gx.data[i] -= gy.data[i];
    }
  });
}

Var add_row(Var a, Var row) {
  Graph& g = graph_of(a, row);
  const Matrix& x = a.value();
  const Matrix& r = row.value();
  require(r.rows == 1 && r.cols == x.cols, "add_row", x, r);
  Matrix out = x;
  for (int i = 0; i < out.rows; ++i) {
    Scalar* o = out.row(i);
    for (int j = 0; j < out.cols; ++j) o[j] += r.data[static_cast<std::size_t>(j)];
  }
  const int ia = a.id;
  const int ir = row.id;
  return g.push(std::move(out), {ia, ir}, [ia, ir](Graph& g, int self) {
    const Matrix& gy = g.grad_of(self);
    if (g.needs_grad(ia)) {
      Matrix& gx = g.grad_ref(ia);
      for (std::size_t i = 0; i < gy.size(); ++i) gx.data[i] += gy.data[i];
    }
    if (g.needs_grad(ir)) {
      Matrix& gr = g.grad_ref(ir);
      for (int i = 0; i < gy.rows; ++i) {
        const Scalar* src = gy.row(i);
        for (int j = 0; j < gy.cols; ++j) gr.data[static_cast<std::size_t>(j)] += src[j];
      }
    }
  });
}

Var mul(Var a, Var b) {
  Graph& g = graph_of(a, b);
  const Matrix& x = a.value();
  const Matrix& y = b.value();
  require(x.rows == y.rows && x.cols == y.cols, "mul", x, y);
  Matrix out = x;
  for (std::size_t i = 0; i < out.size(); ++i) out.data[i] *= y.data[i];
  const int ia = a.id;
  const int ib = b.id;
  return g.push(std::move(out), {ia, ib}, [ia, ib](Graph& g, int self) {
    const Matrix& gy = g.grad_of(self);
    const Matrix& x = g.value_of(ia);
    const Matrix& y = g.value_of(ib);
    if (g.needs_grad(ia)) {
      Matrix& gx = g.grad_ref(ia);
      for (std::size_t i = 0; i < gy.size(); ++i) gx.data[i] += gy.data[i] * y.data[i];
    }
    if (g.needs_grad(ib)) {
      Matrix& gx = g.grad_ref(ib);
      for (std::size_t i = 0; i < gy.size(); ++i) gx.data[i] += gy.data[i] * x.data[i];
    }
  });
}

Var scale(Var a, Scalar s) {
  return unary(a, [s](Scalar x) { return x * s; }, [s](Scalar, Scalar) { return s; });
}

Var sigmoid(Var a) {
  return unary(a, sigmoid_of, [](Scalar, Scalar y) { return y * (Scalar(1) - y); });
}

Var tanh(Var a) {
  return unary(a, [](Scalar x) { return std::tanh(x); },
               [](Scalar, Scalar y) { return Scalar(1) - y * y; });
}

Var relu(Var a) {
  return unary(a, [](Scalar x) { return x > 0 ? x : Scalar(0); },
               [](Scalar x, Scalar) { return x > 0 ? Scalar(1) : Scalar(0); });
}

Var sum(Var a) {
  Graph& g = graph_of(a);
  Matrix out(1, 1);
  for (Scalar v : a.value().data) out.data[0] += v;
  const int ia = a.id;
  return g.push(std::move(out), {ia}, [ia](Graph& g, int self) {
    const Scalar gy = g.grad_of(self).data[0];
    for (Scalar& v : g.grad_ref(ia).data) v += gy;
  });
}

// --- indexing ---------------------------------------------------------------

Var embedding(Var table, std::span<const int> ids) {
  Graph& g = graph_of(table);
  const Matrix& t = table.value();
  Matrix out(static_cast<int>(ids.size()), t.cols);
  for (std::size_t i = 0; i < ids.size(); ++i) {
    if (ids[i] < 0 || ids[i] >= t.rows) {
      throw InvalidArgument("embedding id " + std::to_string(ids[i]) + " outside table of " +
                            std::to_string(t.rows) + " rows");
    }
    std::copy_n(t.row(ids[i]), t.cols, out.row(static_cast<int>(i)));
  }
  const int it = table.id;
  std::vector<int> index(ids.begin(), ids.end());
  return g.push(std::move(out), {it}, [it, index = std::move(index)](Graph& g, int self) {
    const Matrix& gy = g.grad_of(self);
    Matrix& gt = g.grad_ref(it);
    for (std::size_t i = 0; i < index.size(); ++i) {
      const Scalar* src = gy.row(static_cast<int>(i));
      Scalar* dst = gt.row(index[i]);
      for (int j = 0; j < gy.cols; ++j) dst[j] += src[j];
    }
  });
}

Var concat_cols(std::span<const Var> parts) {
  if (parts.empty()) throw InvalidArgument("concat_cols of nothing");
  Graph& g = graph_of(parts[0]);
  const int rows = parts[0].rows();
  int cols = 0;
  std::vector<int> ids;
  for (const Var& p : parts) {
    graph_of(parts[0], p);
    require(p.rows() == rows, "concat_cols", parts[0].value(), p.value());
    cols += p.cols();
    ids.push_back(p.id);
  }
  Matrix out(rows, cols);
  int offset = 0;
  for (const Var& p : parts) {
    const Matrix& m = p.value();
    for (int r = 0; r < rows; ++r) std::copy_n(m.row(r), m.cols, out.row(r) + offset);
    offset += m.cols;
  }
  return g.push(std::move(out), ids, [ids](Graph& g, int self) {
    const Matrix& gy = g.grad_of(self);
    int offset = 0;
    for (int id : ids) {
      const int w = g.value_of(id).cols;
      if (g.needs_grad(id)) {
        Matrix& gx = g.grad_ref(id);
        for (int r = 0; r < gy.rows; ++r) {
          const Scalar* src = gy.row(r) + offset;
          Scalar* dst = gx.row(r);
          for (int j = 0; j < w; ++j) dst[j] += src[j];
        }
      }
      offset += w;
    }
  });
}

Var concat_rows(std::span<const Var> parts) {
  if (parts.empty()) throw InvalidArgument("concat_rows of nothing");
  Graph& g = graph_of(parts[0]);
  const int cols = parts[0].cols();
  int rows = 0;
  std::vector<int> ids;
  for (const Var& p : parts) {
    graph_of(parts[0], p);
    require(p.cols() == cols, "concat_rows", parts[0].value(), p.value());
    rows += p.rows();
    ids.push_back(p.id);
  }
  Matrix out(rows, cols);
  std::size_t offset = 0;
  for (const Var& p : parts) {
    const auto& d = p.value().data;
    std::copy(d.begin(), d.end(), out.data.begin() + static_cast<std::ptrdiff_t>(offset));
    offset += d.size();
  }
  return g.push(std::move(out), ids, [ids](Graph& g, int self) {
    const Matrix& gy = g.grad_of(self);
    std::size_t offset = 0;
    for (int id : ids) {
      const std::size_t n = g.value_of(id).size();
      if (g.needs_grad(id)) {
        Matrix& gx = g.grad_ref(id);
        for (std::size_t i = 0; i < n; ++i) gx.data[i] += gy.data[offset + i];
      }
      offset += n;
    }
  });
}

Var slice_cols(Var a, int start, int count) {
  Graph& g = graph_of(a);
  const Matrix& x = a.value();
  if (start < 0 || count < 0 || start + count > x.cols) {
    throw InvalidArgument("slice_cols [" + std::to_string(start) + ", +" + std::to_string(count) +
                          ") outside " + shape(x));
  }
  Matrix out(x.rows, count);
  for (int r = 0; r < x.rows; ++r) std::copy_n(x.row(r) + start, count, out.row(r));
  const int ia = a.id;
  return g.push(std::move(out), {ia}, [ia, start, count](Graph& g, int self) {
    const Matrix& gy = g.grad_of(self);
    Matrix& gx = g.grad_ref(ia);
    for (int r = 0; r < gy.rows; ++r) {
      const Scalar* src = gy.row(r);
      Scalar* dst = gx.row(r) + start;
      for (int j = 0; j < count; ++j) dst[j] += src[j];
    }
  });
}

Var slice_rows(Var a, int start, int count) {
  Graph& g = graph_of(a);
  const Matrix& x = a.value();
  if (start < 0 || count < 0 || start + count > x.rows) {
    throw InvalidArgument("slice_rows [" + std::to_string(start) + ", +" + std::to_string(count) +
                          ") outside " + shape(x));
  }
  Matrix out(count, x.cols);
  std::copy_n(x.row(start), static_cast<std::size_t>(count) * x.cols, out.data.begin());
  const int ia = a.id;
  return g.push(std::move(out), {ia}, [ia, start](Graph& g, int self) {
    const Matrix& gy = g.grad_of(self);
    Scalar* dst = g.grad_ref(ia).row(start);
    for (std::size_t i = 0; i < gy.size(); ++i) dst[i] += gy.data[i];
  });
}

// --- normalisation and attention --------------------------------------------

Var layer_norm(Var x, Var gamma, Var beta, Scalar eps) {
  Graph& g = graph_of(x, gamma);
  graph_of(x, beta);
  const Matrix& in = x.value();
  const Matrix& ga = gamma.value();
  const Matrix& be = beta.value();
  require(ga.rows == 1 && ga.cols == in.cols, "layer_norm", in, ga);
  require(be.rows == 1 && be.cols == in.cols, "layer_norm", in, be);
  const int n = in.cols;
  Matrix out(in.rows, n);
  Matrix xhat(in.rows, n);
  std::vector<Scalar> inv_std(static_cast<std::size_t>(in.rows));
  for (int r = 0; r < in.rows; ++r) {
    const Scalar* v = in.row(r);
    Scalar mean = 0;
    for (int j = 0; j < n; ++j) mean += v[j];
    mean /= n;
    Scalar var = 0;
    for (int j = 0; j < n; ++j) var += (v[j] - mean) * (v[j] - mean);
    var /= n;
    const Scalar is = Scalar(1) / std::sqrt(var + eps);
    inv_std[static_cast<std::size_t>(r)] = is;
    for (int j = 0; j < n; ++j) {
      const Scalar h = (v[j] - mean) * is;
      xhat.at(r, j) = h;
      out.at(r, j) = h * ga.data[static_cast<std::size_t>(j)] + be.data[static_cast<std::size_t>(j)];
    }
  }
  const int ix = x.id;
  const int ig = gamma.id;
  const int ib = beta.id;
  return g.push(std::move(out), {ix, ig, ib},
                [ix, ig, ib, xhat = std::move(xhat), inv_std = std::move(inv_std)](Graph& g,
                                                                                   int self) {
    const Matrix& gy = g.grad_of(self);
    const Matrix& ga = g.value_of(ig);
    const int n = gy.cols;
    if (g.needs_grad(ig) || g.needs_grad(ib)) {
      Matrix& gg = g.grad_ref(ig);
      Matrix& gb = g.grad_ref(ib);
      for (int r = 0; r < gy.rows; ++r) {
        for (int j = 0; j < n; ++j) {
          gg.data[static_cast<std::size_t>(j)] += gy.at(r, j) * xhat.at(r, j);
          gb.data[static_cast<std::size_t>(j)] += gy.at(r, j);
        }
      }
    }
    if (!g.needs_grad(ix)) return;
    Matrix& gx = g.grad_ref(ix);
    std::vector<Scalar> dxhat(static_cast<std::size_t>(n));
    for (int r = 0; r < gy.rows; ++r) {
      Scalar sum_d = 0;
      Scalar sum_dx = 0;
      for (int j = 0; j < n; ++j) {
        const Scalar d = gy.at(r, j) * ga.data[static_cast<std::size_t>(j)];
        dxhat[static_cast<std::size_t>(j)] = d;
        sum_d += d;
        sum_dx += d * xhat.at(r, j);
      }
      const Scalar is = inv_std[static_cast<std::size_t>(r)];
      for (int j = 0; j < n; ++j) {
        gx.at(r, j) +=
            is / n * (n * dxhat[static_cast<std::size_t>(j)] - sum_d - xhat.at(r, j) * sum_dx);
      }
    }
  });
}

Var softmax_rows(Var x, bool causal) {
  Graph& g = graph_of(x);
  const Matrix& in = x.value();
  Matrix out(in.rows, in.cols);
  for (int r = 0; r < in.rows; ++r) {
    const int limit = causal ? std::min(r + 1, in.cols) : in.cols;
    const Scalar* v = in.row(r);
    Scalar* o = out.row(r);
    Scalar hi = -std::numeric_limits<Scalar>::infinity();
    for (int j = 0; j < limit; ++j) hi = std::max(hi, v[j]);
    Scalar total = 0;
    for (int j = 0; j < limit; ++j) {
      o[j] = std::exp(v[j] - hi);
      total += o[j];
    }
    for (int j = 0; j < limit; ++j) o[j] /= total;
  }
  const int ix = x.id;
  return g.push(std::move(out), {ix}, [ix](Graph& g, int self) {
    const Matrix& gy = g.grad_of(self);
    const Matrix& y = g.value_of(self);
    Matrix& gx = g.grad_ref(ix);
    for (int r = 0; r < y.rows; ++r) {
      Scalar dot = 0;
      for (int j = 0; j < y.cols; ++j) dot += gy.at(r, j) * y.at(r, j);
      // Masked entries have y == 0 and receive nothing.
      for (int j = 0; j < y.cols; ++j) gx.at(r, j) += y.at(r, j) * (gy.at(r, j) - dot);
    }
  });
}

Var dropout(Var x, Scalar p, Rng& rng) {
  if (p < 0 || p >= 1) throw InvalidArgument("dropout probability must be in [0, 1)");
  if (p == 0) return x;
  Graph& g = graph_of(x);
  const Matrix& in = x.value();
  Matrix mask(in.rows, in.cols);
  const Scalar keep = Scalar(1) / (Scalar(1) - p);
  for (Scalar& m : mask.data) m = rng.uniform() < p ? Scalar(0) : keep;
  Matrix out = in;
  for (std::size_t i = 0; i < out.size(); ++i) out.data[i] *= mask.data[i];
  const int ix = x.id;
  return g.push(std::move(out), {ix}, [ix, mask = std::move(mask)](Graph& g, int self) {
    const Matrix& gy = g.grad_of(self);
    Matrix& gx = g.grad_ref(ix);
    for (std::size_t i = 0; i < gy.size(); ++i) gx.data[i] += gy.data[i] * mask.data[i];
  });
}

Var cross_entropy_sum(Var logits, std::span<const int> targets, int ignore) {
  Graph& g = graph_of(logits);
  const Matrix& z = logits.value();
  if (static_cast<int>(targets.size()) != z.rows) {
    throw InvalidArgument("cross_entropy_sum: " + std::to_string(targets.size()) +
                          " targets for " + std::to_string(z.rows) + " rows");
  }
  Matrix probs(z.rows, z.cols);
  Matrix out(1, 1);
  for (int r = 0; r < z.rows; ++r) {
    const int t = targets[static_cast<std::size_t>(r)];
    if (t == ignore) continue;
    if (t < 0 || t >= z.cols) throw InvalidArgument("target " + std::to_string(t) + " out of range");
    const Scalar* v = z.row(r);
    const Scalar hi = *std::max_element(v, v + z.cols);
    Scalar total = 0;
    for (int j = 0; j < z.cols; ++j) total += std::exp(v[j] - hi);
    const Scalar lse = hi + std::log(total);
    out.data[0] += lse - v[t];
    Scalar* p = probs.row(r);
    for (int j = 0; j < z.cols; ++j) p[j] = std::exp(v[j] - lse);
    p[t] -= Scalar(1);
  }
  const int iz = logits.id;
  // probs already holds softmax - onehot for scored rows and zeros elsewhere.
  return g.push(std::move(out), {iz}, [iz, probs = std::move(probs)](Graph& g, int self) {
    const Scalar gy = g.grad_of(self).data[0];
    Matrix& gz = g.grad_ref(iz);
    for (std::size_t i = 0; i < gz.size(); ++i) gz.data[i] += gy * probs.data[i];
  });
}

// --- LSTM -------------------------------------------------------------------

Var lstm_cell_c(Var gates, Var c_prev) {
  Graph& g = graph_of(gates, c_prev);
  const Matrix& z = gates.value();
  const Matrix& cp = c_prev.value();
  require(z.rows == cp.rows && z.cols == 4 * cp.cols, "lstm_cell_c", z, cp);
  const int h = cp.cols;
  Matrix c(cp.rows, h);
  for (int r = 0; r < c.rows; ++r) {
    const Scalar* zr = z.row(r);
    for (int j = 0; j < h; ++j) {
      c.at(r, j) = sigmoid_of(zr[h + j]) * cp.at(r, j) + sigmoid_of(zr[j]) * std::tanh(zr[2 * h + j]);
    }
  }
  const int iz = gates.id;
  const int ic = c_prev.id;
  return g.push(std::move(c), {iz, ic}, [iz, ic](Graph& g, int self) {
    const Matrix& gc = g.grad_of(self);
    const Matrix& z = g.value_of(iz);
    const Matrix& cp = g.value_of(ic);
    const int h = cp.cols;
    Matrix* gz = g.needs_grad(iz) ? &g.grad_ref(iz) : nullptr;
    Matrix* gcp = g.needs_grad(ic) ? &g.grad_ref(ic) : nullptr;
    for (int r = 0; r < gc.rows; ++r) {
      const Scalar* zr = z.row(r);
      for (int j = 0; j < h; ++j) {
        const Scalar d = gc.at(r, j);
        const Scalar i = sigmoid_of(zr[j]);
        const Scalar f = sigmoid_of(zr[h + j]);
        const Scalar u = std::tanh(zr[2 * h + j]);
        if (gz != nullptr) {
          Scalar* gr = gz->row(r);
          gr[j] += d * u * i * (Scalar(1) - i);
          gr[h + j] += d * cp.at(r, j) * f * (Scalar(1) - f);
          gr[2 * h + j] += d * i * (Scalar(1) - u * u);
        }
        if (gcp != nullptr) gcp->at(r, j) += d * f;
      }
    }
  });
}

Var lstm_cell_h(Var gates, Var c) {
  Graph& g = graph_of(gates, c);
  const Matrix& z = gates.value();
  const Matrix& cv = c.value();
  require(z.rows == cv.rows && z.cols == 4 * cv.cols, "lstm_cell_h", z, cv);
  const int h = cv.cols;
  Matrix out(cv.rows, h);
  for (int r = 0; r < out.rows; ++r) {
    for (int j = 0; j < h; ++j) out.at(r, j) = sigmoid_of(z.at(r, 3 * h + j)) * std::tanh(cv.at(r, j));
  }
  const int iz = gates.id;
  const int ic = c.id;
  return g.push(std::move(out), {iz, ic}, [iz, ic](Graph& g, int self) {
    const Matrix& gh = g.grad_of(self);
    const Matrix& z = g.value_of(iz);
    const Matrix& cv = g.value_of(ic);
    const int h = cv.cols;
    Matrix* gz = g.needs_grad(iz) ? &g.grad_ref(iz) : nullptr;
    Matrix* gc = g.needs_grad(ic) ? &g.grad_ref(ic) : nullptr;
    for (int r = 0; r < gh.rows; ++r) {
      for (int j = 0; j < h; ++j) {
        const Scalar d = gh.at(r, j);
        const Scalar o = sigmoid_of(z.at(r, 3 * h + j));
        const Scalar tc = std::tanh(cv.at(r, j));
        if (gz != nullptr) gz->at(r, 3 * h + j) += d * tc * o * (Scalar(1) - o);
        if (gc != nullptr) gc->at(r, j) += d * o * (Scalar(1) - tc * tc);
      }
    }
  });
}

}  // namespace leadsheet::nn
