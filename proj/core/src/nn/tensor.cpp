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

#include "dyncomm/nn/tensor.hpp"

#include <cmath>
#include <sstream>

namespace dyncomm::nn {
namespace {

// Vectorized forms built on Eigen's packet exp; overflow saturates to the
// correct limits.
template <typename ArrayExpr>
Matrix logistic(const ArrayExpr& x) {
  return (1.0 + (-x).exp()).inverse().matrix();
}

template <typename ArrayExpr>
Matrix fast_tanh(const ArrayExpr& x) {
  return (2.0 / (1.0 + (-2.0 * x).exp()) - 1.0).matrix();
}

std::string shape_str(const Matrix& m) {
  std::ostringstream os;
  os << "(" << m.rows() << "x" << m.cols() << ")";
  return os.str();
}

void require_same_shape(const char* op, const Var& a, const Var& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw DimensionError(std::string(op) + ": shape mismatch " + shape_str(a.value()) +
                         " vs " + shape_str(b.value()));
  }
}

void require_same_tape(const Var& a, const Var& b) {
  if (a.tape() != b.tape()) throw std::invalid_argument("operands recorded on different tapes");
}

}  // namespace

// ---- Parameter / ParamSet --------------------------------------------------

Parameter::Parameter(std::string n, Matrix init)
    : name(std::move(n)), value(std::move(init)) {
  grad = Matrix::Zero(value.rows(), value.cols());
  m = Matrix::Zero(value.rows(), value.cols());
  v = Matrix::Zero(value.rows(), value.cols());
}

ParamSet::ParamSet(const ParamSet& other) : step_count(other.step_count) {
  for (const auto& p : other.params_) {
    params_.push_back(std::make_unique<Parameter>(*p));
  }
  index_ = other.index_;
}

ParamSet& ParamSet::operator=(const ParamSet& other) {
  if (this == &other) return *this;
  ParamSet copy(other);
  *this = std::move(copy);
  return *this;
}

Parameter& ParamSet::add(const std::string& name, Matrix init) {
  if (contains(name)) throw std::invalid_argument("duplicate parameter '" + name + "'");
  index_[name] = params_.size();
  params_.push_back(std::make_unique<Parameter>(name, std::move(init)));
  return *params_.back();
}

Parameter& ParamSet::get(const std::string& name) {
  auto it = index_.find(name);
  if (it == index_.end()) throw std::out_of_range("unknown parameter '" + name + "'");
  return *params_[it->second];
}

const Parameter& ParamSet::get(const std::string& name) const {
  auto it = index_.find(name);
  if (it == index_.end()) throw std::out_of_range("unknown parameter '" + name + "'");
  return *params_[it->second];
}

void ParamSet::zero_grad() {
  for (auto& p : params_) p->zero_grad();
}

std::size_t ParamSet::num_scalars() const {
  std::size_t n = 0;
  for (const auto& p : params_) n += static_cast<std::size_t>(p->value.size());
  return n;
}

// ---- Var / Tape ------------------------------------------------------------

const Matrix& Var::value() const { return tape_->value(id_); }
const Matrix& Var::grad() const { return tape_->grad(id_); }
bool Var::requires_grad() const { return tape_->needs_grad(id_); }

const Matrix& Tape::value(int id) const {
  const Node& n = nodes_[id];
  return n.external ? *n.external : n.value;
}

Matrix& Tape::grad_buffer(int id) {
  Node& n = nodes_[id];
  if (n.grad.size() == 0) n.grad = Matrix::Zero(value(id).rows(), value(id).cols());
  return n.grad;
}

Var Tape::push_impl(Matrix value, bool needs_grad, Backward fn) {
  Node n;
  n.value = std::move(value);
  n.needs_grad = record_ && needs_grad;
  if (n.needs_grad) n.backward = std::move(fn);
  nodes_.push_back(std::move(n));
  return Var(this, static_cast<int>(nodes_.size()) - 1);
}

Var Tape::push(Matrix value, std::initializer_list<int> parents, Backward fn) {
  bool ng = false;
  for (int p : parents) ng = ng || nodes_[p].needs_grad;
  return push_impl(std::move(value), ng, std::move(fn));
}

Var Tape::push(Matrix value, const std::vector<int>& parents, Backward fn) {
  bool ng = false;
  for (int p : parents) ng = ng || nodes_[p].needs_grad;
  return push_impl(std::move(value), ng, std::move(fn));
}

Var Tape::constant(Matrix value) { return push_impl(std::move(value), false, nullptr); }

Var Tape::param(Parameter& p) {
  auto it = param_leaf_.find(&p);
  if (it != param_leaf_.end()) return Var(this, it->second);
  Node n;
  n.external = &p.value;
  n.param = &p;
  n.needs_grad = record_;
  nodes_.push_back(std::move(n));
  int id = static_cast<int>(nodes_.size()) - 1;
  param_leaf_[&p] = id;
  return Var(this, id);
}

void Tape::backward(const Var& loss) {
  if (loss.tape() != this) throw std::invalid_argument("backward: loss is not on this tape");
  if (loss.rows() != 1 || loss.cols() != 1) {
    throw std::invalid_argument("backward: loss must be a 1x1 scalar, got " +
                                shape_str(loss.value()));
  }
  if (!record_) throw std::logic_error("backward: tape was built without recording");
  for (auto& n : nodes_) n.grad.resize(0, 0);
  if (!nodes_[loss.id()].needs_grad) return;
  nodes_[loss.id()].grad = Matrix::Ones(1, 1);
  for (int id = loss.id(); id >= 0; --id) {
    Node& n = nodes_[id];
    if (n.grad.size() == 0) continue;
    if (n.param != nullptr) {
      n.param->grad += n.grad;
    } else if (n.backward) {
      n.backward(*this, id);
    }
  }
}

// ---- Operations ------------------------------------------------------------

Var matmul(const Var& a, const Var& b) {
  require_same_tape(a, b);
  if (a.cols() != b.rows()) {
    throw DimensionError("matmul: inner dimensions differ " + shape_str(a.value()) + " * " +
                         shape_str(b.value()));
  }
  Matrix out;
  out.noalias() = a.value() * b.value();
  const int ia = a.id(), ib = b.id();
  return a.tape()->push(std::move(out), {ia, ib}, [ia, ib](Tape& t, int self) {
    const Matrix& g = t.grad(self);
    if (t.needs_grad(ia)) {
      Matrix& ga = t.grad_buffer(ia);
      ga.noalias() += g * t.value(ib).transpose();
    }
    if (t.needs_grad(ib)) {
      Matrix& gb = t.grad_buffer(ib);
      gb.noalias() += t.value(ia).transpose() * g;
    }
  });
}

Var add(const Var& a, const Var& b) {
  require_same_tape(a, b);
  require_same_shape("add", a, b);
  const int ia = a.id(), ib = b.id();
  return a.tape()->push(a.value() + b.value(), {ia, ib}, [ia, ib](Tape& t, int self) {
    t.accumulate(ia, t.grad(self));
    t.accumulate(ib, t.grad(self));
  });
}

Var sub(const Var& a, const Var& b) {
  require_same_tape(a, b);
  require_same_shape("sub", a, b);
  const int ia = a.id(), ib = b.id();
  return a.tape()->push(a.value() - b.value(), {ia, ib}, [ia, ib](Tape& t, int self) {
    t.accumulate(ia, t.grad(self));
    t.accumulate(ib, -t.grad(self));
  });
}

Var mul(const Var& a, const Var& b) {
  require_same_tape(a, b);
  require_same_shape("mul", a, b);
  const int ia = a.id(), ib = b.id();
  return a.tape()->push(a.value().cwiseProduct(b.value()), {ia, ib},
                        [ia, ib](Tape& t, int self) {
                          const Matrix& g = t.grad(self);
                          t.accumulate(ia, g.cwiseProduct(t.value(ib)));
                          t.accumulate(ib, g.cwiseProduct(t.value(ia)));
                        });
}

Var scale(const Var& a, double s) {
  const int ia = a.id();
  return a.tape()->push(a.value() * s, {ia},
                        [ia, s](Tape& t, int self) { t.accumulate(ia, t.grad(self) * s); });
}

Var add_scalar(const Var& a, double s) {
  const int ia = a.id();
  return a.tape()->push(a.value().array() + s, {ia},
                        [ia](Tape& t, int self) { t.accumulate(ia, t.grad(self)); });
}

Var add_row(const Var& a, const Var& row) {
  require_same_tape(a, row);
  if (row.rows() != 1 || row.cols() != a.cols()) {
    throw DimensionError("add_row: bias " + shape_str(row.value()) + " does not fit " +
                         shape_str(a.value()));
  }
  const int ia = a.id(), ir = row.id();
  Matrix out = a.value();
  out.rowwise() += row.value().row(0);
  return a.tape()->push(std::move(out), {ia, ir}, [ia, ir](Tape& t, int self) {
    const Matrix& g = t.grad(self);
    t.accumulate(ia, g);
    if (t.needs_grad(ir)) t.accumulate(ir, g.colwise().sum());
  });
}

Var mul_col(const Var& col, const Var& a) {
  require_same_tape(col, a);
  if (col.cols() != 1 || col.rows() != a.rows()) {
    throw DimensionError("mul_col: column " + shape_str(col.value()) + " does not fit " +
                         shape_str(a.value()));
  }
  const int ic = col.id(), ia = a.id();
  Matrix out = a.value().array().colwise() * col.value().col(0).array();
  return a.tape()->push(std::move(out), {ic, ia}, [ic, ia](Tape& t, int self) {
    const Matrix& g = t.grad(self);
    if (t.needs_grad(ic)) t.accumulate(ic, g.cwiseProduct(t.value(ia)).rowwise().sum());
    if (t.needs_grad(ia)) {
      t.accumulate(ia, (g.array().colwise() * t.value(ic).col(0).array()).matrix());
    }
  });
}

Var scale_rows(const Var& a, const Vector& w) {
  if (w.size() != a.rows()) {
    throw DimensionError("scale_rows: " + std::to_string(w.size()) + " weights for " +
                         shape_str(a.value()));
  }
  const int ia = a.id();
  Matrix out = a.value().array().colwise() * w.array();
  return a.tape()->push(std::move(out), {ia}, [ia, w](Tape& t, int self) {
    t.accumulate(ia, (t.grad(self).array().colwise() * w.array()).matrix());
  });
}

Var blend_rows(const Var& a, const Var& b, const Vector& mask) {
  require_same_tape(a, b);
  require_same_shape("blend_rows", a, b);
  if (mask.size() != a.rows()) throw DimensionError("blend_rows: mask length mismatch");
  const int ia = a.id(), ib = b.id();
  Matrix out = a.value() + ((b.value() - a.value()).array().colwise() * mask.array()).matrix();
  return a.tape()->push(std::move(out), {ia, ib}, [ia, ib, mask](Tape& t, int self) {
    const Matrix& g = t.grad(self);
    if (t.needs_grad(ia)) {
      t.accumulate(ia, (g.array().colwise() * (1.0 - mask.array())).matrix());
    }
    if (t.needs_grad(ib)) t.accumulate(ib, (g.array().colwise() * mask.array()).matrix());
  });
}

Var leaky_relu(const Var& a, double slope) {
  const int ia = a.id();
  Matrix out = a.value().unaryExpr([slope](double x) { return x > 0.0 ? x : slope * x; });
  return a.tape()->push(std::move(out), {ia}, [ia, slope](Tape& t, int self) {
    const Matrix& x = t.value(ia);
    Matrix d = x.unaryExpr([slope](double v) { return v > 0.0 ? 1.0 : slope; });
    t.accumulate(ia, t.grad(self).cwiseProduct(d));
  });
}

Var sigmoid(const Var& a) {
  const int ia = a.id();
  Matrix out = logistic(a.value().array());
  return a.tape()->push(std::move(out), {ia}, [ia](Tape& t, int self) {
    const Matrix& y = t.value(self);
    t.accumulate(ia, (t.grad(self).array() * y.array() * (1.0 - y.array())).matrix());
  });
}

Var tanh(const Var& a) {
  const int ia = a.id();
  Matrix out = fast_tanh(a.value().array());
  return a.tape()->push(std::move(out), {ia}, [ia](Tape& t, int self) {
    const Matrix& y = t.value(self);
    t.accumulate(ia, (t.grad(self).array() * (1.0 - y.array().square())).matrix());
  });
}

Var square(const Var& a) {
  const int ia = a.id();
  return a.tape()->push(a.value().array().square().matrix(), {ia}, [ia](Tape& t, int self) {
    t.accumulate(ia, (2.0 * t.grad(self).array() * t.value(ia).array()).matrix());
  });
}

Var concat_cols(std::span<const Var> parts) {
  if (parts.empty()) throw std::invalid_argument("concat_cols: no inputs");
  const Eigen::Index rows = parts[0].rows();
  Eigen::Index cols = 0;
  std::vector<int> ids;
  std::vector<Eigen::Index> widths;
  for (const Var& p : parts) {
    require_same_tape(parts[0], p);
    if (p.rows() != rows) throw DimensionError("concat_cols: row counts differ");
    ids.push_back(p.id());
    widths.push_back(p.cols());
    cols += p.cols();
  }
  Matrix out(rows, cols);
  Eigen::Index off = 0;
  for (const Var& p : parts) {
    out.middleCols(off, p.cols()) = p.value();
    off += p.cols();
  }
  return parts[0].tape()->push(std::move(out), ids, [ids, widths](Tape& t, int self) {
    const Matrix& g = t.grad(self);
    Eigen::Index o = 0;
    for (std::size_t i = 0; i < ids.size(); ++i) {
      if (t.needs_grad(ids[i])) t.accumulate(ids[i], g.middleCols(o, widths[i]));
      o += widths[i];
    }
  });
}

Var slice_cols(const Var& a, Eigen::Index start, Eigen::Index width) {
  if (start < 0 || width < 0 || start + width > a.cols()) {
    throw DimensionError("slice_cols: [" + std::to_string(start) + ", " +
                         std::to_string(start + width) + ") out of " + shape_str(a.value()));
  }
  const int ia = a.id();
  return a.tape()->push(a.value().middleCols(start, width), {ia},
                        [ia, start, width](Tape& t, int self) {
                          if (!t.needs_grad(ia)) return;
                          Matrix& ga = t.grad_buffer(ia);
                          ga.middleCols(start, width) += t.grad(self);
                        });
}

Var reshape(const Var& a, Eigen::Index rows, Eigen::Index cols) {
  if (rows * cols != a.value().size()) {
    throw DimensionError("reshape: cannot view " + shape_str(a.value()) + " as (" +
                         std::to_string(rows) + "x" + std::to_string(cols) + ")");
  }
  const int ia = a.id();
  const Eigen::Index r0 = a.rows(), c0 = a.cols();
  Matrix out = Eigen::Map<const Matrix>(a.value().data(), rows, cols);
  return a.tape()->push(std::move(out), {ia}, [ia, r0, c0](Tape& t, int self) {
    t.accumulate(ia, Eigen::Map<const Matrix>(t.grad(self).data(), r0, c0));
  });
}

Var interleave_rows(std::span<const Var> parts) {
  if (parts.empty()) throw std::invalid_argument("interleave_rows: no inputs");
  const Eigen::Index n = parts[0].rows(), c = parts[0].cols();
  const Eigen::Index p = static_cast<Eigen::Index>(parts.size());
  std::vector<int> ids;
  Matrix out(n * p, c);
  for (Eigen::Index k = 0; k < p; ++k) {
    const Var& v = parts[k];
    require_same_tape(parts[0], v);
    require_same_shape("interleave_rows", parts[0], v);
    ids.push_back(v.id());
    for (Eigen::Index i = 0; i < n; ++i) out.row(i * p + k) = v.value().row(i);
  }
  return parts[0].tape()->push(std::move(out), ids, [ids, n, p](Tape& t, int self) {
    const Matrix& g = t.grad(self);
    for (Eigen::Index k = 0; k < p; ++k) {
      if (!t.needs_grad(ids[k])) continue;
      Matrix& gk = t.grad_buffer(ids[k]);
      for (Eigen::Index i = 0; i < n; ++i) gk.row(i) += g.row(i * p + k);
    }
  });
}

Var gather_rows(const Var& a, std::span<const int> idx) {
  const int ia = a.id();
  const Eigen::Index n = static_cast<Eigen::Index>(idx.size());
  Matrix out(n, a.cols());
  for (Eigen::Index i = 0; i < n; ++i) {
    const int r = idx[i];
    if (r >= a.rows()) throw DimensionError("gather_rows: index out of range");
    if (r < 0) {
      out.row(i).setZero();
    } else {
      out.row(i) = a.value().row(r);
    }
  }
  std::vector<int> index(idx.begin(), idx.end());
  return a.tape()->push(std::move(out), {ia}, [ia, index](Tape& t, int self) {
    if (!t.needs_grad(ia)) return;
    const Matrix& g = t.grad(self);
    Matrix& ga = t.grad_buffer(ia);
    for (std::size_t i = 0; i < index.size(); ++i) {
      if (index[i] >= 0) ga.row(index[i]) += g.row(static_cast<Eigen::Index>(i));
    }
  });
}

Var gather_entries(const Var& a, std::span<const int> rows, std::span<const int> cols) {
  if (rows.size() != cols.size()) throw DimensionError("gather_entries: index length mismatch");
  const int ia = a.id();
  const Eigen::Index n = static_cast<Eigen::Index>(rows.size());
  Matrix out(n, 1);
  for (Eigen::Index i = 0; i < n; ++i) {
    if (rows[i] >= a.rows() || cols[i] >= a.cols()) {
      throw DimensionError("gather_entries: index out of range");
    }
    out(i, 0) = rows[i] < 0 ? 0.0 : a.value()(rows[i], cols[i]);
  }
  std::vector<int> r(rows.begin(), rows.end()), c(cols.begin(), cols.end());
  return a.tape()->push(std::move(out), {ia}, [ia, r, c](Tape& t, int self) {
    if (!t.needs_grad(ia)) return;
    const Matrix& g = t.grad(self);
    Matrix& ga = t.grad_buffer(ia);
    for (std::size_t i = 0; i < r.size(); ++i) {
      if (r[i] >= 0) ga(r[i], c[i]) += g(static_cast<Eigen::Index>(i), 0);
    }
  });
}

Var pick_cols(const Var& a, std::span<const int> cols) {
  if (static_cast<Eigen::Index>(cols.size()) != a.rows()) {
    throw DimensionError("pick_cols: need one column index per row");
  }
  std::vector<int> rows(cols.size());
  for (std::size_t i = 0; i < rows.size(); ++i) rows[i] = static_cast<int>(i);
  return gather_entries(a, rows, cols);
}

Var masked_softmax_rows(const Var& a, const Matrix& mask) {
  if (mask.rows() != a.rows() || mask.cols() != a.cols()) {
    throw DimensionError("masked_softmax_rows: mask shape mismatch");
  }
  if (a.cols() == 0) throw std::invalid_argument("softmax over an empty axis");
  const int ia = a.id();
  const Matrix& x = a.value();
  Matrix out = Matrix::Zero(x.rows(), x.cols());
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    double mx = -std::numeric_limits<double>::infinity();
    for (Eigen::Index j = 0; j < x.cols(); ++j) {
      if (mask(i, j) != 0.0) mx = std::max(mx, x(i, j));
    }
    if (!std::isfinite(mx)) continue;
    double z = 0.0;
    for (Eigen::Index j = 0; j < x.cols(); ++j) {
      if (mask(i, j) != 0.0) {
        out(i, j) = std::exp(x(i, j) - mx);
        z += out(i, j);
      }
    }
    out.row(i) /= z;
  }
  return a.tape()->push(std::move(out), {ia}, [ia](Tape& t, int self) {
    const Matrix& y = t.value(self);
    const Matrix& g = t.grad(self);
    Vector dot = g.cwiseProduct(y).rowwise().sum();
    Matrix d = y.array() * (g.array().colwise() - dot.array());
    t.accumulate(ia, d);
  });
}

Var softmax(const Var& a, int axis) {
  if (axis != 0 && axis != 1) throw std::invalid_argument("softmax: axis must be 0 or 1");
  if ((axis == 1 && a.cols() == 0) || (axis == 0 && a.rows() == 0)) {
    throw std::invalid_argument("softmax over an empty axis");
  }
  if (axis == 1) return masked_softmax_rows(a, Matrix::Ones(a.rows(), a.cols()));
  const int ia = a.id();
  Matrix out(a.rows(), a.cols());
  for (Eigen::Index j = 0; j < a.cols(); ++j) {
    const double mx = a.value().col(j).maxCoeff();
    out.col(j) = (a.value().col(j).array() - mx).exp();
    out.col(j) /= out.col(j).sum();
  }
  return a.tape()->push(std::move(out), {ia}, [ia](Tape& t, int self) {
    const Matrix& y = t.value(self);
    const Matrix& g = t.grad(self);
    Eigen::RowVectorXd dot = g.cwiseProduct(y).colwise().sum();
    Matrix d = y.array() * (g.array().rowwise() - dot.array());
    t.accumulate(ia, d);
  });
}

Var sum(const Var& a) {
  const int ia = a.id();
  Matrix out(1, 1);
  out(0, 0) = a.value().sum();
  const Eigen::Index r = a.rows(), c = a.cols();
  return a.tape()->push(std::move(out), {ia}, [ia, r, c](Tape& t, int self) {
    t.accumulate(ia, Matrix::Constant(r, c, t.grad(self)(0, 0)));
  });
}

Var mean(const Var& a) {
  if (a.value().size() == 0) throw std::invalid_argument("mean of an empty tensor");
  return scale(sum(a), 1.0 / static_cast<double>(a.value().size()));
}

Var mse(const Var& pred, const Matrix& target) {
  if (pred.rows() != target.rows() || pred.cols() != target.cols()) {
    throw DimensionError("mse: prediction " + shape_str(pred.value()) + " vs target " +
                         shape_str(target));
  }
  if (target.size() == 0) throw std::invalid_argument("mse of empty tensors");
  const int ip = pred.id();
  Matrix diff = pred.value() - target;
  const double n = static_cast<double>(target.size());
  Matrix out(1, 1);
  out(0, 0) = diff.squaredNorm() / n;
  return pred.tape()->push(std::move(out), {ip}, [ip, diff, n](Tape& t, int self) {
    t.accumulate(ip, diff * (2.0 * t.grad(self)(0, 0) / n));
  });
}

Var weighted_sse(const Var& pred, const Matrix& target, const Matrix& weights) {
  if (pred.rows() != target.rows() || pred.cols() != target.cols() ||
      weights.rows() != target.rows() || weights.cols() != target.cols()) {
    throw DimensionError("weighted_sse: shape mismatch");
  }
  const int ip = pred.id();
  Matrix diff = pred.value() - target;
  Matrix out(1, 1);
  out(0, 0) = (weights.array() * diff.array().square()).sum();
  Matrix wd = (weights.array() * diff.array()).matrix();
  return pred.tape()->push(std::move(out), {ip}, [ip, wd](Tape& t, int self) {
    t.accumulate(ip, wd * (2.0 * t.grad(self)(0, 0)));
  });
}

Var gru_combine(const Var& gx, const Var& gh, const Var& h) {
  require_same_tape(gx, gh);
  require_same_tape(gx, h);
  const Eigen::Index n = h.rows(), hd = h.cols();
  if (gx.rows() != n || gh.rows() != n || gx.cols() != 3 * hd || gh.cols() != 3 * hd) {
    throw DimensionError("gru: gate pre-activations " + shape_str(gx.value()) + "/" +
                         shape_str(gh.value()) + " do not match state " +
                         shape_str(h.value()));
  }
  const Matrix& x = gx.value();
  const Matrix& y = gh.value();
  Matrix r = logistic(x.leftCols(hd).array() + y.leftCols(hd).array());
  Matrix z = logistic(x.middleCols(hd, hd).array() + y.middleCols(hd, hd).array());
  Matrix hn = y.rightCols(hd);
  Matrix cand = fast_tanh(x.rightCols(hd).array() + r.array() * hn.array());
  Matrix out = ((1.0 - z.array()) * cand.array() + z.array() * h.value().array()).matrix();

  const int ix = gx.id(), iy = gh.id(), ih = h.id();
  return gx.tape()->push(
      std::move(out), {ix, iy, ih},
      [ix, iy, ih, hd, r = std::move(r), z = std::move(z), hn = std::move(hn),
       cand = std::move(cand)](Tape& t, int self) {
        const Matrix& g = t.grad(self);
        const Matrix& hprev = t.value(ih);
        using RowArray = Eigen::Array<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
        RowArray dn = g.array() * (1.0 - z.array()) * (1.0 - cand.array().square());
        RowArray dr = dn * hn.array() * r.array() * (1.0 - r.array());
        RowArray dzp = g.array() * (hprev.array() - cand.array()) * z.array() * (1.0 - z.array());
        if (t.needs_grad(ix)) {
          Matrix& gx_ = t.grad_buffer(ix);
          gx_.leftCols(hd) += dr.matrix();
          gx_.middleCols(hd, hd) += dzp.matrix();
          gx_.rightCols(hd) += dn.matrix();
        }
        if (t.needs_grad(iy)) {
          Matrix& gy_ = t.grad_buffer(iy);
          gy_.leftCols(hd) += dr.matrix();
          gy_.middleCols(hd, hd) += dzp.matrix();
          gy_.rightCols(hd) += (dn * r.array()).matrix();
        }
        if (t.needs_grad(ih)) t.accumulate(ih, (g.array() * z.array()).matrix());
      });
}

Var grouped_attention(const Var& q, const Var& k, const Var& v, int group, int heads) {
  require_same_tape(q, k);
  require_same_tape(q, v);
  require_same_shape("grouped_attention", q, k);
  require_same_shape("grouped_attention", q, v);
  const Eigen::Index hdim = q.cols();
  if (group <= 0 || q.rows() % group != 0) {
    throw DimensionError("grouped_attention: rows not divisible by group size");
  }
  if (heads <= 0 || hdim % heads != 0) {
    throw DimensionError("grouped_attention: width " + std::to_string(hdim) +
                         " not divisible by " + std::to_string(heads) + " heads");
  }
  const Eigen::Index dk = hdim / heads;
  const Eigen::Index groups = q.rows() / group;
  const double inv = 1.0 / std::sqrt(static_cast<double>(dk));
  const Matrix& Q = q.value();
  const Matrix& K = k.value();
  const Matrix& V = v.value();

  Matrix out(q.rows(), hdim);
  // Attention weights, one (group x group) block per (group, head).
  auto probs = std::make_shared<std::vector<Matrix>>(groups * heads);
  for (Eigen::Index g = 0; g < groups; ++g) {
    const Eigen::Index r0 = g * group;
    for (Eigen::Index h = 0; h < heads; ++h) {
      const Eigen::Index c0 = h * dk;
      Matrix s = Q.block(r0, c0, group, dk) * K.block(r0, c0, group, dk).transpose() * inv;
      for (Eigen::Index i = 0; i < group; ++i) {
        const double mx = s.row(i).maxCoeff();
        s.row(i) = (s.row(i).array() - mx).exp();
        s.row(i) /= s.row(i).sum();
      }
      out.block(r0, c0, group, dk).noalias() = s * V.block(r0, c0, group, dk);
      (*probs)[g * heads + h] = std::move(s);
    }
  }
  const int iq = q.id(), ik = k.id(), iv = v.id();
  return q.tape()->push(
      std::move(out), {iq, ik, iv},
      [iq, ik, iv, group, heads, dk, groups, inv, probs](Tape& t, int self) {
        const Matrix& G = t.grad(self);
        const Matrix& Q = t.value(iq);
        const Matrix& K = t.value(ik);
        const Matrix& V = t.value(iv);
        Matrix dq = Matrix::Zero(Q.rows(), Q.cols());
        Matrix dk_ = Matrix::Zero(K.rows(), K.cols());
        Matrix dv = Matrix::Zero(V.rows(), V.cols());
        for (Eigen::Index g = 0; g < groups; ++g) {
          const Eigen::Index r0 = g * group;
          for (Eigen::Index h = 0; h < heads; ++h) {
            const Eigen::Index c0 = h * dk;
            const Matrix& P = (*probs)[g * heads + h];
            auto dA = G.block(r0, c0, group, dk);
            dv.block(r0, c0, group, dk).noalias() += P.transpose() * dA;
            Matrix dP = dA * V.block(r0, c0, group, dk).transpose();
            Vector dot = dP.cwiseProduct(P).rowwise().sum();
            Matrix dS = (P.array() * (dP.array().colwise() - dot.array())).matrix() * inv;
            dq.block(r0, c0, group, dk).noalias() += dS * K.block(r0, c0, group, dk);
            dk_.block(r0, c0, group, dk).noalias() += dS.transpose() * Q.block(r0, c0, group, dk);
          }
        }
        t.accumulate(iq, dq);
        t.accumulate(ik, dk_);
        t.accumulate(iv, dv);
      });
}

bool all_finite(const Matrix& m) { return m.allFinite(); }

}  // namespace dyncomm::nn
