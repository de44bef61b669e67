#pragma once

#include <deque>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "leadsheet/rng.h"

namespace leadsheet::nn {

#ifdef LEADSHEET_FLOAT
using Scalar = float;
#else
using Scalar = double;
#endif

// Dense row-major matrix. Vectors are 1 x n.
struct Matrix {
  int rows = 0;
  int cols = 0;
  std::vector<Scalar> data;

  Matrix() = default;
  Matrix(int r, int c, Scalar fill = Scalar(0))
      : rows(r), cols(c), data(static_cast<std::size_t>(r) * static_cast<std::size_t>(c), fill) {}

  std::size_t size() const { return data.size(); }
  bool empty() const { return data.empty(); }
  Scalar& at(int r, int c) { return data[static_cast<std::size_t>(r) * cols + c]; }
  Scalar at(int r, int c) const { return data[static_cast<std::size_t>(r) * cols + c]; }
  Scalar* row(int r) { return data.data() + static_cast<std::size_t>(r) * cols; }
  const Scalar* row(int r) const { return data.data() + static_cast<std::size_t>(r) * cols; }
  friend bool operator==(const Matrix&, const Matrix&) = default;
};

// A trainable tensor and its accumulated gradient.
struct Parameter {
  std::string name;
  Matrix value;
  Matrix grad;
};

// Owns the parameters of one model in a fixed registration order.
class ParameterSet {
 public:
  Parameter& add(std::string name, int rows, int cols);
  Parameter* find(const std::string& name);
  const Parameter* find(const std::string& name) const;
  std::span<const std::unique_ptr<Parameter>> all() const { return params_; }
  std::size_t count() const;  // total number of scalars
  void zero_grad();

 private:
  std::vector<std::unique_ptr<Parameter>> params_;
  std::unordered_map<std::string, Parameter*> by_name_;
};

// While alive on a thread, graphs built on that thread record no backward
// closures. Used for inference.
class NoGradGuard {
 public:
  NoGradGuard();
  ~NoGradGuard();
  NoGradGuard(const NoGradGuard&) = delete;
  NoGradGuard& operator=(const NoGradGuard&) = delete;

 private:
  bool previous_;
};

bool grad_enabled();

class Graph;

// Handle to a node of a Graph.
struct Var {
  Graph* graph = nullptr;
  int id = -1;

  const Matrix& value() const;
  int rows() const { return value().rows; }
  int cols() const { return value().cols; }
};

// Reverse-mode tape. Nodes are appended in evaluation order, which is already
// a topological order, so backward is a single reverse sweep.
class Graph {
 public:
  Graph() = default;
  Graph(const Graph&) = delete;
  Graph& operator=(const Graph&) = delete;

  // Leaf bound to a parameter; backward adds into p.grad. Repeated calls for
  // the same parameter return the same node. The value is read in place, so
  // p must not change while the graph is alive.
  Var param(Parameter& p);
  Var constant(Matrix m);
  // Constant leaf that reads `m` in place; m must outlive the graph.
  Var view(const Matrix& m);

  const Matrix& value(Var v) const { return value_of(v.id); }
  // Gradient of the last backward() with respect to v; empty if none flowed.
  const Matrix& grad(Var v) const { return nodes_[static_cast<std::size_t>(v.id)].grad; }

  // Seeds d(loss) = seed for a 1 x 1 loss and sweeps the tape.
  void backward(Var loss, Scalar seed = Scalar(1));

  std::size_t size() const { return nodes_.size(); }

  // Building blocks for op implementations.
  using Backward = std::function<void(Graph&, int)>;
  Var push(Matrix value, std::vector<int> parents, Backward backward);
  bool needs_grad(int id) const { return nodes_[static_cast<std::size_t>(id)].needs_grad; }
  Matrix& grad_ref(int id);  // allocates a zero gradient on first use
  const Matrix& grad_of(int id) const { return nodes_[static_cast<std::size_t>(id)].grad; }
  const Matrix& value_of(int id) const {
    const Node& n = nodes_[static_cast<std::size_t>(id)];
    return n.external != nullptr ? *n.external : n.value;
  }

 private:
  struct Node {
    Matrix value;
    Matrix grad;
    const Matrix* external = nullptr;  // leaves that read storage in place
    Parameter* param = nullptr;
    bool needs_grad = false;
    Backward backward;
  };

  std::deque<Node> nodes_;
  std::unordered_map<const Parameter*, int> param_nodes_;
};

// --- operations -------------------------------------------------------------
// Shapes are checked; a mismatch throws InvalidArgument.

Var matmul(Var a, Var b);     // (m x k)(k x n)
Var matmul_nt(Var a, Var b);  // (m x k)(n x k)^T
Var add(Var a, Var b);
Var add_row(Var a, Var row);  // adds a 1 x n row to every row of a
Var sub(Var a, Var b);
Var mul(Var a, Var b);        // elementwise
Var scale(Var a, Scalar s);
Var sigmoid(Var a);
Var tanh(Var a);
Var relu(Var a);
Var sum(Var a);               // 1 x 1

// Rows of `table` selected by ids. The backward pass scatters into the table
// rows that were used and leaves every other row at exactly zero.
Var embedding(Var table, std::span<const int> ids);

Var concat_cols(std::span<const Var> parts);
Var concat_rows(std::span<const Var> parts);
Var slice_cols(Var a, int start, int count);
Var slice_rows(Var a, int start, int count);

Var layer_norm(Var x, Var gamma, Var beta, Scalar eps = Scalar(1e-5));

// Row-wise softmax. With causal set, entry (i, j) is masked for j > i.
Var softmax_rows(Var x, bool causal);

// Inverted dropout; identity when p == 0.
Var dropout(Var x, Scalar p, Rng& rng);

// Sum over rows of -log softmax(logits)[target]. Rows whose target equals
// `ignore` contribute nothing. Returns 1 x 1.
Var cross_entropy_sum(Var logits, std::span<const int> targets, int ignore);

// Fused LSTM cell on pre-activation gates laid out [i f g o] (rows x 4H):
//   c = sigmoid(f) * c_prev + sigmoid(i) * tanh(g)
//   h = sigmoid(o) * tanh(c)
Var lstm_cell_c(Var gates, Var c_prev);
Var lstm_cell_h(Var gates, Var c);

}  // namespace leadsheet::nn
