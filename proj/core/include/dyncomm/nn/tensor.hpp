// Copyright 2026 The dyncomm Authors. All rights reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef DYNCOMM_NN_TENSOR_HPP_
#define DYNCOMM_NN_TENSOR_HPP_

// Dense 2-D tensors with a dynamic reverse-mode tape.
//
// Every model in this project works on row-stacked matrices (one row per
// node or per packet), so the tensor type is a row-major Eigen matrix. A
// Tape records each operation together with its backward closure; the tape
// is rebuilt for every forward pass, which keeps data-dependent control flow
// (variable message counts per round) trivially differentiable.

#include <cstdint>
#include <deque>
#include <functional>
#include <memory>
#include <span>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include <Eigen/Dense>

namespace dyncomm::nn {

using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vector = Eigen::VectorXd;

// Shape mismatch between operands or against a layer's declared width.
class DimensionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// NaN or infinity where finite values are required.
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A trainable matrix with its gradient and AdamW moment buffers.
struct Parameter {
  std::string name;
  Matrix value;
  Matrix grad;
  Matrix m;  // first moment
  Matrix v;  // second moment

  Parameter(std::string n, Matrix init);
  void zero_grad() { grad.setZero(); }
};

// Ordered collection of named parameters. Insertion order is the
// serialization and iteration order.
class ParamSet {
 public:
  ParamSet() = default;
  ParamSet(const ParamSet& other);
  ParamSet& operator=(const ParamSet& other);
  ParamSet(ParamSet&&) noexcept = default;
  ParamSet& operator=(ParamSet&&) noexcept = default;

  Parameter& add(const std::string& name, Matrix init);
  Parameter& get(const std::string& name);
  const Parameter& get(const std::string& name) const;
  bool contains(const std::string& name) const { return index_.count(name) != 0; }

  std::size_t size() const { return params_.size(); }
  Parameter& operator[](std::size_t i) { return *params_[i]; }
  const Parameter& operator[](std::size_t i) const { return *params_[i]; }

  void zero_grad();
  std::size_t num_scalars() const;

  // Number of optimizer steps applied so far (AdamW bias correction).
  std::int64_t step_count = 0;

 private:
  std::vector<std::unique_ptr<Parameter>> params_;
  std::unordered_map<std::string, std::size_t> index_;
};

class Tape;

// Handle to a value recorded on a Tape. Cheap to copy.
class Var {
 public:
  Var() = default;
  Var(Tape* tape, int id) : tape_(tape), id_(id) {}

  const Matrix& value() const;
  // Gradient accumulated by the last Tape::backward (empty if none reached).
  const Matrix& grad() const;
  Eigen::Index rows() const { return value().rows(); }
  Eigen::Index cols() const { return value().cols(); }
  bool valid() const { return tape_ != nullptr; }
  bool requires_grad() const;

  Tape* tape() const { return tape_; }
  int id() const { return id_; }

 private:
  Tape* tape_ = nullptr;
  int id_ = -1;
};

class Tape {
 public:
  using Backward = std::function<void(Tape&, int self)>;

  // A tape built with record=false evaluates values only (inference).
  explicit Tape(bool record = true) : record_(record) {}
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  bool recording() const { return record_; }

  Var constant(Matrix value);
  // Leaf bound to a parameter; one leaf per parameter per tape.
  Var param(Parameter& p);

  // Reverse sweep from a 1x1 loss; adds d(loss)/d(param) into every
  // reachable Parameter::grad. Calling it twice accumulates twice.
  void backward(const Var& loss);

  // Used by op implementations.
  Var push(Matrix value, std::initializer_list<int> parents, Backward fn);
  Var push(Matrix value, const std::vector<int>& parents, Backward fn);
  const Matrix& value(int id) const;
  const Matrix& grad(int id) const { return nodes_[id].grad; }
  bool needs_grad(int id) const { return nodes_[id].needs_grad; }
  // Adds `delta` into the gradient buffer of node `id` (allocating it).
  template <typename Expr>
  void accumulate(int id, const Expr& delta) {
    Node& n = nodes_[id];
    if (!n.needs_grad) return;
    if (n.grad.size() == 0) {
      n.grad = delta;
    } else {
      n.grad += delta;
    }
  }
  Matrix& grad_buffer(int id);

  std::size_t size() const { return nodes_.size(); }

 private:
  struct Node {
    Matrix value;
    const Matrix* external = nullptr;
    Matrix grad;
    Backward backward;
    Parameter* param = nullptr;
    bool needs_grad = false;
  };

  Var push_impl(Matrix value, bool needs_grad, Backward fn);

  bool record_;
  std::deque<Node> nodes_;
  std::unordered_map<const Parameter*, int> param_leaf_;
};

// ---- Elementwise and linear-algebra operations ---------------------------

Var matmul(const Var& a, const Var& b);
Var add(const Var& a, const Var& b);
Var sub(const Var& a, const Var& b);
Var mul(const Var& a, const Var& b);  // Hadamard
Var scale(const Var& a, double s);
Var add_scalar(const Var& a, double s);
// a (N x C) + row (1 x C) broadcast over rows.
Var add_row(const Var& a, const Var& row);
// col (N x 1) scales each row of a (N x C).
Var mul_col(const Var& col, const Var& a);
// Constant per-row weights.
Var scale_rows(const Var& a, const Vector& w);
// a + mask .* (b - a) per row; mask entries are constants (usually 0/1).
Var blend_rows(const Var& a, const Var& b, const Vector& mask);

Var leaky_relu(const Var& a, double slope);
Var sigmoid(const Var& a);
Var tanh(const Var& a);
Var square(const Var& a);

Var concat_cols(std::span<const Var> parts);
Var slice_cols(const Var& a, Eigen::Index start, Eigen::Index width);
// Row-major reshape; rows*cols must equal the element count.
Var reshape(const Var& a, Eigen::Index rows, Eigen::Index cols);
// out.row(i * P + p) = parts[p].row(i); all parts share a shape.
Var interleave_rows(std::span<const Var> parts);

// out.row(i) = a.row(idx[i]); idx[i] < 0 yields a zero row.
Var gather_rows(const Var& a, std::span<const int> idx);
// out(i, 0) = a(rows[i], cols[i]); rows[i] < 0 yields zero.
Var gather_entries(const Var& a, std::span<const int> rows, std::span<const int> cols);
// out(i, 0) = a(i, cols[i]).
Var pick_cols(const Var& a, std::span<const int> cols);

// Softmax along axis (0: down columns, 1: across rows).
Var softmax(const Var& a, int axis);
// Row softmax restricted to entries where mask != 0; masked entries are 0.
// Rows with no unmasked entry produce all zeros.
Var masked_softmax_rows(const Var& a, const Matrix& mask);

Var sum(const Var& a);
Var mean(const Var& a);
// Mean of squared differences against a constant target.
Var mse(const Var& pred, const Matrix& target);
// Sum over entries of weights .* (pred - target)^2 with constant weights.
Var weighted_sse(const Var& pred, const Matrix& target, const Matrix& weights);

// Fused GRU update. gx = x W_ih + b_ih and gh = h W_hh + b_hh are N x 3H in
// gate order [reset | update | candidate].
Var gru_combine(const Var& gx, const Var& gh, const Var& h);

// Multi-head scaled dot-product self-attention within consecutive groups of
// `group` rows. q, k, v are (G * group) x H; returns the concatenated head
// outputs with the same shape.
Var grouped_attention(const Var& q, const Var& k, const Var& v, int group, int heads);

// Value-only helpers.
bool all_finite(const Matrix& m);

}  // namespace dyncomm::nn

#endif  // DYNCOMM_NN_TENSOR_HPP_
