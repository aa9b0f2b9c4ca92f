/*
 * Copyright 2026 The SANA Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

// A small tape-based reverse-mode differentiation core over dense row-major
// matrices. Every tensor in the two models is a matrix (sequence x width), so
// rank-2 is all the tape supports.
//
// A Graph is built per example. Parameters enter the graph by reference and
// their gradients accumulate directly into Parameter::grad, so a Graph must
// not outlive the ParameterStore it reads from.

#pragma once

#include <cmath>
#include <deque>
#include <functional>
#include <string>
#include <unordered_map>
#include <vector>

#include <Eigen/Dense>

#include "sana/common.hpp"

namespace sana::nn {

using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Index = Eigen::Index;

inline std::string shape_str(const Matrix& m) {
  return "[" + std::to_string(m.rows()) + "x" + std::to_string(m.cols()) + "]";
}

struct Parameter {
  std::string name;
  Matrix value;
  Matrix grad;
};

enum class Init { kXavier, kZeros, kOnes };

/// Owns parameters in creation order; names are unique.
class ParameterStore {
 public:
  ParameterStore() = default;
  ParameterStore(const ParameterStore&) = delete;
  ParameterStore& operator=(const ParameterStore&) = delete;
  // Moves keep Parameter addresses (deque storage is transferred).
  ParameterStore(ParameterStore&&) = default;
  ParameterStore& operator=(ParameterStore&&) = default;

  Parameter& create(const std::string& name, Index rows, Index cols, Init init, Rng& rng) {
    if (index_.count(name)) throw Error("duplicate parameter name: " + name);
    Parameter p{name, Matrix::Zero(rows, cols), Matrix::Zero(rows, cols)};
    switch (init) {
      case Init::kXavier: {
        const double bound = std::sqrt(6.0 / static_cast<double>(rows + cols));
        for (Index i = 0; i < p.value.size(); ++i) p.value.data()[i] = rng.uniform(-bound, bound);
        break;
      }
      case Init::kZeros:
        break;
      case Init::kOnes:
        p.value.setOnes();
        break;
    }
    index_.emplace(name, params_.size());
    params_.push_back(std::move(p));
    return params_.back();
  }

  Parameter& get(const std::string& name) {
    auto it = index_.find(name);
    if (it == index_.end()) throw Error("unknown parameter: " + name);
    return params_[it->second];
  }
  const Parameter& get(const std::string& name) const {
    return const_cast<ParameterStore*>(this)->get(name);
  }
  bool contains(const std::string& name) const { return index_.count(name) > 0; }

  std::size_t size() const { return params_.size(); }
  Parameter& operator[](std::size_t i) { return params_[i]; }
  const Parameter& operator[](std::size_t i) const { return params_[i]; }
  auto begin() { return params_.begin(); }
  auto end() { return params_.end(); }
  auto begin() const { return params_.begin(); }
  auto end() const { return params_.end(); }

  void zero_grad() {
    for (auto& p : params_) p.grad.setZero();
  }

  std::size_t scalar_count() const {
    std::size_t n = 0;
    for (const auto& p : params_) n += static_cast<std::size_t>(p.value.size());
    return n;
  }

 private:
  std::deque<Parameter> params_;
  std::unordered_map<std::string, std::size_t> index_;
};

class Graph;

/// Handle to a node on a Graph.
struct Var {
  Graph* graph = nullptr;
  int id = -1;

  const Matrix& value() const;
  Index rows() const { return value().rows(); }
  Index cols() const { return value().cols(); }
  double scalar() const { return value()(0, 0); }
};

class Graph {
 public:
  using Backward = std::function<void(Graph&, int)>;

  /// With tracking off no backward closures are recorded (inference mode).
  explicit Graph(bool tracking = true) : tracking_(tracking) {}
  Graph(const Graph&) = delete;
  Graph& operator=(const Graph&) = delete;

  bool tracking() const { return tracking_; }

  Var constant(Matrix m) {
    nodes_.push_back(Node{std::move(m), {}, nullptr, nullptr, {}, false});
    return {this, static_cast<int>(nodes_.size()) - 1};
  }

  Var param(Parameter& p) {
    auto it = param_nodes_.find(&p);
    if (it != param_nodes_.end()) return {this, it->second};
    nodes_.push_back(Node{{}, {}, &p.value, &p, {}, tracking_});
    const int id = static_cast<int>(nodes_.size()) - 1;
    param_nodes_.emplace(&p, id);
    return {this, id};
  }

  Var push(Matrix value, std::initializer_list<Var> inputs, Backward backward) {
    bool needs = false;
    if (tracking_)
      for (const auto& v : inputs) needs = needs || nodes_[static_cast<std::size_t>(v.id)].needs_grad;
    return push_impl(std::move(value), needs, std::move(backward));
  }
  Var push(Matrix value, const std::vector<Var>& inputs, Backward backward) {
    bool needs = false;
    if (tracking_)
      for (const auto& v : inputs) needs = needs || nodes_[static_cast<std::size_t>(v.id)].needs_grad;
    return push_impl(std::move(value), needs, std::move(backward));
  }

  const Matrix& value(int id) const {
    const Node& n = nodes_[static_cast<std::size_t>(id)];
    return n.ref ? *n.ref : n.value;
  }

  bool needs_grad(int id) const { return nodes_[static_cast<std::size_t>(id)].needs_grad; }
  bool needs_grad(Var v) const { return needs_grad(v.id); }

  /// Gradient buffer of a node, zero-initialized on first use.
  Matrix& grad(int id) {
    Node& n = nodes_[static_cast<std::size_t>(id)];
    if (n.param) return n.param->grad;
    if (n.grad.size() == 0) n.grad = Matrix::Zero(value(id).rows(), value(id).cols());
    return n.grad;
  }
  Matrix& grad(Var v) { return grad(v.id); }

  /// Seeds d(loss)/d(loss) = 1 and runs the tape in reverse.
  void backward(Var loss) {
    if (loss.graph != this) throw Error("backward: variable belongs to another graph");
    if (value(loss.id).size() != 1) throw ShapeError("backward: loss must be 1x1, got " + shape_str(value(loss.id)));
    if (!tracking_ || !needs_grad(loss)) return;
    grad(loss.id)(0, 0) += 1.0;
    for (int id = loss.id; id >= 0; --id) {
      Node& n = nodes_[static_cast<std::size_t>(id)];
      if (n.backward && n.grad.size() != 0) n.backward(*this, id);
    }
  }

  std::size_t size() const { return nodes_.size(); }

 private:
  struct Node {
    Matrix value;
    Matrix grad;
    const Matrix* ref;
    Parameter* param;
    Backward backward;
    bool needs_grad;
  };

  Var push_impl(Matrix value, bool needs, Backward backward) {
    for (Index i = 0; i < value.size(); ++i)
      if (!std::isfinite(value.data()[i])) throw Error("non-finite value produced on the tape");
    nodes_.push_back(Node{std::move(value), {}, nullptr, nullptr, needs ? std::move(backward) : Backward{}, needs});
    return {this, static_cast<int>(nodes_.size()) - 1};
  }

  bool tracking_;
  std::deque<Node> nodes_;
  std::unordered_map<const Parameter*, int> param_nodes_;
};

inline const Matrix& Var::value() const { return graph->value(id); }

// ---------------------------------------------------------------------------
// Operations

namespace detail {
inline void same_graph(Var a, Var b, const char* op) {
  if (a.graph != b.graph) throw Error(std::string(op) + ": operands live on different graphs");
}
[[noreturn]] inline void shape_fail(const char* op, const Matrix& a, const Matrix& b) {
  throw ShapeError(std::string(op) + ": incompatible shapes " + shape_str(a) + " and " + shape_str(b));
}
}  // namespace detail

/// a * b
inline Var matmul(Var a, Var b) {
  detail::same_graph(a, b, "matmul");
  if (a.cols() != b.rows()) detail::shape_fail("matmul", a.value(), b.value());
  Matrix out = a.value() * b.value();
  return a.graph->push(std::move(out), {a, b}, [a, b](Graph& g, int self) {
    const Matrix& d = g.grad(self);
    if (g.needs_grad(a)) g.grad(a).noalias() += d * g.value(b.id).transpose();
    if (g.needs_grad(b)) g.grad(b).noalias() += g.value(a.id).transpose() * d;
  });
}

/// a * b^T
inline Var matmul_nt(Var a, Var b) {
  detail::same_graph(a, b, "matmul_nt");
  if (a.cols() != b.cols()) detail::shape_fail("matmul_nt", a.value(), b.value());
  Matrix out = a.value() * b.value().transpose();
  return a.graph->push(std::move(out), {a, b}, [a, b](Graph& g, int self) {
    const Matrix& d = g.grad(self);
    if (g.needs_grad(a)) g.grad(a).noalias() += d * g.value(b.id);
    if (g.needs_grad(b)) g.grad(b).noalias() += d.transpose() * g.value(a.id);
  });
}

inline Var add(Var a, Var b) {
  detail::same_graph(a, b, "add");
  if (a.rows() != b.rows() || a.cols() != b.cols()) detail::shape_fail("add", a.value(), b.value());
  Matrix out = a.value() + b.value();
  return a.graph->push(std::move(out), {a, b}, [a, b](Graph& g, int self) {
    const Matrix& d = g.grad(self);
    if (g.needs_grad(a)) g.grad(a) += d;
    if (g.needs_grad(b)) g.grad(b) += d;
  });
}

/// Adds the 1 x n row `b` to every row of `a`.
inline Var add_row(Var a, Var b) {
  detail::same_graph(a, b, "add_row");
  if (b.rows() != 1 || a.cols() != b.cols()) detail::shape_fail("add_row", a.value(), b.value());
  Matrix out = a.value().rowwise() + b.value().row(0);
  return a.graph->push(std::move(out), {a, b}, [a, b](Graph& g, int self) {
    const Matrix& d = g.grad(self);
    if (g.needs_grad(a)) g.grad(a) += d;
    if (g.needs_grad(b)) g.grad(b) += d.colwise().sum();
  });
}

inline Var scale(Var a, double s) {
  Matrix out = a.value() * s;
  return a.graph->push(std::move(out), {a}, [a, s](Graph& g, int self) {
    if (g.needs_grad(a)) g.grad(a) += g.grad(self) * s;
  });
}

inline Var relu(Var a) {
  Matrix out = a.value().cwiseMax(0.0);
  return a.graph->push(std::move(out), {a}, [a](Graph& g, int self) {
    if (!g.needs_grad(a)) return;
    const Matrix& x = g.value(a.id);
    const Matrix& d = g.grad(self);
    Matrix& ga = g.grad(a);
    for (Index i = 0; i < x.size(); ++i)
      if (x.data()[i] > 0.0) ga.data()[i] += d.data()[i];
  });
}

namespace detail {
inline void softmax_rows_inplace(Matrix& m) {
  for (Index r = 0; r < m.rows(); ++r) {
    auto row = m.row(r);
    const double mx = row.maxCoeff();
    row = (row.array() - mx).exp();
    row /= row.sum();
  }
}
}  // namespace detail

/// Row-wise softmax.
inline Var softmax_rows(Var a) {
  Matrix out = a.value();
  detail::softmax_rows_inplace(out);
  return a.graph->push(std::move(out), {a}, [a](Graph& g, int self) {
    if (!g.needs_grad(a)) return;
    const Matrix& y = g.value(self);
    const Matrix& d = g.grad(self);
    Matrix& ga = g.grad(a);
    for (Index r = 0; r < y.rows(); ++r) {
      const double dot = y.row(r).dot(d.row(r));
      ga.row(r).array() += y.row(r).array() * (d.row(r).array() - dot);
    }
  });
}

inline constexpr double kLayerNormEps = 1e-9;

/// Per-row normalization to zero mean / unit variance, then gain and bias (1 x n rows).
inline Var layer_norm(Var x, Var gain, Var bias) {
  detail::same_graph(x, gain, "layer_norm");
  if (gain.rows() != 1 || bias.rows() != 1 || gain.cols() != x.cols() || bias.cols() != x.cols())
    detail::shape_fail("layer_norm", x.value(), gain.value());
  const Matrix& in = x.value();
  const Index n = in.cols();
  Matrix xhat(in.rows(), n);
  Eigen::VectorXd inv_std(in.rows());
  for (Index r = 0; r < in.rows(); ++r) {
    const double mu = in.row(r).mean();
    const double var = (in.row(r).array() - mu).square().mean();
    inv_std(r) = 1.0 / std::sqrt(var + kLayerNormEps);
    xhat.row(r) = (in.row(r).array() - mu) * inv_std(r);
  }
  Matrix out = (xhat.array().rowwise() * gain.value().row(0).array()).rowwise() + bias.value().row(0).array();
  return x.graph->push(std::move(out), {x, gain, bias},
                       [x, gain, bias, xhat = std::move(xhat), inv_std = std::move(inv_std)](Graph& g, int self) {
                         const Matrix& d = g.grad(self);
                         if (g.needs_grad(gain)) g.grad(gain) += (d.array() * xhat.array()).colwise().sum().matrix();
                         if (g.needs_grad(bias)) g.grad(bias) += d.colwise().sum();
                         if (!g.needs_grad(x)) return;
                         const auto gv = g.value(gain.id).row(0).array();
                         Matrix& gx = g.grad(x);
                         for (Index r = 0; r < d.rows(); ++r) {
                           Eigen::ArrayXd dxhat = (d.row(r).array() * gv).transpose();
                           const double m1 = dxhat.mean();
                           const double m2 = (dxhat * xhat.row(r).array().transpose()).mean();
                           gx.row(r).array() += inv_std(r) * (dxhat - m1 - xhat.row(r).array().transpose() * m2).transpose();
                         }
                       });
}

/// Rows of `table` selected by ids (out-of-range ids are an error).
inline Var embedding(Var table, const std::vector<int>& ids) {
  const Matrix& t = table.value();
  Matrix out(static_cast<Index>(ids.size()), t.cols());
  for (std::size_t i = 0; i < ids.size(); ++i) {
    if (ids[i] < 0 || ids[i] >= t.rows())
      throw ShapeError("embedding: id " + std::to_string(ids[i]) + " out of range for " + shape_str(t));
    out.row(static_cast<Index>(i)) = t.row(ids[i]);
  }
  return table.graph->push(std::move(out), {table}, [table, ids](Graph& g, int self) {
    if (!g.needs_grad(table)) return;
    const Matrix& d = g.grad(self);
    Matrix& gt = g.grad(table);
    for (std::size_t i = 0; i < ids.size(); ++i) gt.row(ids[i]) += d.row(static_cast<Index>(i));
  });
}

/// Same as embedding() but over an arbitrary matrix: out.row(i) = a.row(rows[i]).
inline Var gather_rows(Var a, const std::vector<int>& rows) { return embedding(a, rows); }

inline Var slice_rows(Var a, Index start, Index count) {
  if (start < 0 || count < 0 || start + count > a.rows())
    throw ShapeError("slice_rows: [" + std::to_string(start) + ", +" + std::to_string(count) + ") outside " +
                     shape_str(a.value()));
  Matrix out = a.value().middleRows(start, count);
  return a.graph->push(std::move(out), {a}, [a, start, count](Graph& g, int self) {
    if (g.needs_grad(a)) g.grad(a).middleRows(start, count) += g.grad(self);
  });
}

inline Var concat_cols(const std::vector<Var>& parts) {
  if (parts.empty()) throw ShapeError("concat_cols: no operands");
  const Index rows = parts[0].rows();
  Index cols = 0;
  for (const auto& p : parts) {
    detail::same_graph(parts[0], p, "concat_cols");
    if (p.rows() != rows) detail::shape_fail("concat_cols", parts[0].value(), p.value());
    cols += p.cols();
  }
  Matrix out(rows, cols);
  Index c = 0;
  for (const auto& p : parts) {
    out.middleCols(c, p.cols()) = p.value();
    c += p.cols();
  }
  return parts[0].graph->push(std::move(out), parts, [parts](Graph& g, int self) {
    const Matrix& d = g.grad(self);
    Index c = 0;
    for (const auto& p : parts) {
      const Index w = g.value(p.id).cols();
      if (g.needs_grad(p)) g.grad(p) += d.middleCols(c, w);
      c += w;
    }
  });
}

inline Var concat_rows(const std::vector<Var>& parts) {
  if (parts.empty()) throw ShapeError("concat_rows: no operands");
  const Index cols = parts[0].cols();
  Index rows = 0;
  for (const auto& p : parts) {
    detail::same_graph(parts[0], p, "concat_rows");
    if (p.cols() != cols) detail::shape_fail("concat_rows", parts[0].value(), p.value());
    rows += p.rows();
  }
  Matrix out(rows, cols);
  Index r = 0;
  for (const auto& p : parts) {
    out.middleRows(r, p.rows()) = p.value();
    r += p.rows();
  }
  return parts[0].graph->push(std::move(out), parts, [parts](Graph& g, int self) {
    const Matrix& d = g.grad(self);
    Index r = 0;
    for (const auto& p : parts) {
      const Index h = g.value(p.id).rows();
      if (g.needs_grad(p)) g.grad(p) += d.middleRows(r, h);
      r += h;
    }
  });
}

inline Var sum(Var a) {
  Matrix out(1, 1);
  out(0, 0) = a.value().sum();
  return a.graph->push(std::move(out), {a}, [a](Graph& g, int self) {
    if (g.needs_grad(a)) g.grad(a).array() += g.grad(self)(0, 0);
  });
}

/// Scaled dot-product attention with `heads` heads over column blocks.
/// q: n x d, k and v: m x d. With `causal`, query t sees keys 0..t only.
inline Var attention(Var q, Var k, Var v, int heads, bool causal) {
  detail::same_graph(q, k, "attention");
  detail::same_graph(q, v, "attention");
  const Index n = q.rows(), m = k.rows(), d = q.cols();
  if (heads <= 0 || d % heads != 0)
    throw ConfigError("attention: width " + std::to_string(d) + " not divisible by " + std::to_string(heads) + " heads");
  if (m == 0) throw ShapeError("attention: zero-length key set");
  if (k.cols() != d || v.cols() != d || v.rows() != m) detail::shape_fail("attention", k.value(), v.value());
  if (causal && n > m) throw ShapeError("attention: causal mask needs at least as many keys as queries");
  const Index dh = d / heads;
  const double inv = 1.0 / std::sqrt(static_cast<double>(dh));
  const Matrix& Q = q.value();
  const Matrix& K = k.value();
  const Matrix& V = v.value();
  std::vector<Matrix> probs(static_cast<std::size_t>(heads));
  Matrix out(n, d);
  for (int h = 0; h < heads; ++h) {
    Matrix s = (Q.middleCols(h * dh, dh) * K.middleCols(h * dh, dh).transpose()) * inv;
    if (causal)
      for (Index t = 0; t < n; ++t)
        for (Index j = t + 1; j < m; ++j) s(t, j) = -std::numeric_limits<double>::infinity();
    detail::softmax_rows_inplace(s);
    out.middleCols(h * dh, dh).noalias() = s * V.middleCols(h * dh, dh);
    probs[static_cast<std::size_t>(h)] = std::move(s);
  }
  return q.graph->push(std::move(out), {q, k, v}, [q, k, v, heads, dh, inv, probs = std::move(probs)](Graph& g, int self) {
    const Matrix& dout = g.grad(self);
    const Matrix& Q = g.value(q.id);
    const Matrix& K = g.value(k.id);
    const Matrix& V = g.value(v.id);
    const bool gq = g.needs_grad(q), gk = g.needs_grad(k), gv = g.needs_grad(v);
    for (int h = 0; h < heads; ++h) {
      const Matrix& P = probs[static_cast<std::size_t>(h)];
      const auto dO = dout.middleCols(h * dh, dh);
      if (gv) g.grad(v).middleCols(h * dh, dh).noalias() += P.transpose() * dO;
      if (!gq && !gk) continue;
      Matrix dP = dO * V.middleCols(h * dh, dh).transpose();
      Matrix dS(P.rows(), P.cols());
      for (Index r = 0; r < P.rows(); ++r) {
        const double dot = P.row(r).dot(dP.row(r));
        dS.row(r) = P.row(r).array() * (dP.row(r).array() - dot);
      }
      dS *= inv;
      if (gq) g.grad(q).middleCols(h * dh, dh).noalias() += dS * K.middleCols(h * dh, dh);
      if (gk) g.grad(k).middleCols(h * dh, dh).noalias() += dS.transpose() * Q.middleCols(h * dh, dh);
    }
  });
}

namespace detail {
inline double log_sum_exp(const Eigen::Ref<const Eigen::RowVectorXd>& row) {
  const double mx = row.maxCoeff();
  return mx + std::log((row.array() - mx).exp().sum());
}
}  // namespace detail

/// Mean over rows of -log softmax(logits_r)[targets_r].
inline Var cross_entropy(Var logits, const std::vector<int>& targets) {
  const Matrix& x = logits.value();
  if (static_cast<Index>(targets.size()) != x.rows())
    throw ShapeError("cross_entropy: " + std::to_string(targets.size()) + " targets for " + shape_str(x));
  if (x.rows() == 0) throw ShapeError("cross_entropy: empty batch");
  Matrix probs = x;
  detail::softmax_rows_inplace(probs);
  double loss = 0.0;
  for (Index r = 0; r < x.rows(); ++r) {
    const int t = targets[static_cast<std::size_t>(r)];
    if (t < 0 || t >= x.cols())
      throw ShapeError("cross_entropy: target " + std::to_string(t) + " out of range for " + std::to_string(x.cols()) +
                       " classes");
    loss += detail::log_sum_exp(x.row(r)) - x(r, t);
  }
  const double n = static_cast<double>(x.rows());
  Matrix out(1, 1);
  out(0, 0) = loss / n;
  return logits.graph->push(std::move(out), {logits},
                            [logits, targets, probs = std::move(probs), n](Graph& g, int self) {
                              if (!g.needs_grad(logits)) return;
                              const double d = g.grad(self)(0, 0) / n;
                              Matrix& gl = g.grad(logits);
                              gl += probs * d;
                              for (std::size_t r = 0; r < targets.size(); ++r)
                                gl(static_cast<Index>(r), targets[r]) -= d;
                            });
}

/// Sum over rows of -log( sum_{i in gold[r]} softmax(scores_r)_i ): the negative
/// log-likelihood when several columns share one outcome (pooled copy mass).
inline Var pooled_nll(Var scores, const std::vector<std::vector<int>>& gold) {
  const Matrix& x = scores.value();
  if (static_cast<Index>(gold.size()) != x.rows())
    throw ShapeError("pooled_nll: " + std::to_string(gold.size()) + " targets for " + shape_str(x));
  Matrix probs = x;
  detail::softmax_rows_inplace(probs);
  double loss = 0.0;
  for (Index r = 0; r < x.rows(); ++r) {
    const auto& cols = gold[static_cast<std::size_t>(r)];
    if (cols.empty()) throw ShapeError("pooled_nll: row without a gold column");
    Eigen::RowVectorXd sel(static_cast<Index>(cols.size()));
    for (std::size_t i = 0; i < cols.size(); ++i) {
      if (cols[i] < 0 || cols[i] >= x.cols()) throw ShapeError("pooled_nll: gold column out of range");
      sel(static_cast<Index>(i)) = x(r, cols[i]);
    }
    loss += detail::log_sum_exp(x.row(r)) - detail::log_sum_exp(sel);
  }
  Matrix out(1, 1);
  out(0, 0) = loss;
  return scores.graph->push(std::move(out), {scores}, [scores, gold, probs = std::move(probs)](Graph& g, int self) {
    if (!g.needs_grad(scores)) return;
    const double d = g.grad(self)(0, 0);
    Matrix& gs = g.grad(scores);
    const Matrix& x = g.value(scores.id);
    for (Index r = 0; r < probs.rows(); ++r) {
      const auto& cols = gold[static_cast<std::size_t>(r)];
      Eigen::RowVectorXd sel(static_cast<Index>(cols.size()));
      for (std::size_t i = 0; i < cols.size(); ++i) sel(static_cast<Index>(i)) = x(r, cols[i]);
      const double lse = detail::log_sum_exp(sel);
      gs.row(r) += probs.row(r) * d;
      // Posterior over the pooled columns, computed in log space.
      for (int c : cols) gs(r, c) -= d * std::exp(x(r, c) - lse);
    }
  });
}

}  // namespace sana::nn
