#pragma once

// Define-by-run reverse-mode differentiation over small dense vectors.
//
// A Graph is a tape: every builder call appends one node whose forward value
// is computed immediately. backward() walks the tape in reverse once and
// leaves d(root)/d(node) in per-graph gradient buffers; parameter gradients
// are then added into Parameter::grad by accumulate_parameter_gradients(),
// which is the only call that touches shared state.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <memory>
#include <numeric>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "srnn/errors.hpp"
#include "srnn/numerics.hpp"

namespace srnn::ad {

class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(std::vector<std::size_t> shape) : shape_(std::move(shape)) {
    std::size_t n = 1;
    for (std::size_t d : shape_) {
      if (d == 0) {
        throw ShapeError("tensor dimensions must be positive");
      }
      n *= d;
    }
    data_.assign(n, 0.0);
  }

  const std::vector<std::size_t>& shape() const { return shape_; }
  std::size_t size() const { return data_.size(); }
  std::size_t rows() const { return shape_.empty() ? 1 : shape_.front(); }
  std::size_t cols() const { return size() / rows(); }

  std::span<double> data() { return data_; }
  std::span<const double> data() const { return data_; }
  double& operator[](std::size_t i) { return data_[i]; }
  double operator[](std::size_t i) const { return data_[i]; }
  double& at(std::size_t r, std::size_t c) { return data_[r * cols() + c]; }
  double at(std::size_t r, std::size_t c) const { return data_[r * cols() + c]; }

 private:
  std::vector<std::size_t> shape_;
  std::vector<double> data_;
};

// A learnable tensor with its gradient slot and Adam moments.
struct Parameter {
  Parameter(std::string name_, std::vector<std::size_t> shape)
      : name(std::move(name_)), value(std::move(shape)) {
    grad.assign(value.size(), 0.0);
    m.assign(value.size(), 0.0);
    v.assign(value.size(), 0.0);
  }

  std::string name;
  Tensor value;
  std::vector<double> grad;
  std::vector<double> m;
  std::vector<double> v;
};

// Owns parameters at stable addresses, in creation order. That order is the
// serialization order.
class ParameterCollection {
 public:
  ParameterCollection() = default;
  ParameterCollection(const ParameterCollection&) = delete;
  ParameterCollection& operator=(const ParameterCollection&) = delete;
  ParameterCollection(ParameterCollection&&) = default;
  ParameterCollection& operator=(ParameterCollection&&) = default;

  Parameter& add(std::string name, std::vector<std::size_t> shape) {
    params_.push_back(std::make_unique<Parameter>(std::move(name), std::move(shape)));
    return *params_.back();
  }

  std::size_t size() const { return params_.size(); }
  Parameter& operator[](std::size_t i) { return *params_[i]; }
  const Parameter& operator[](std::size_t i) const { return *params_[i]; }

  Parameter* find(const std::string& name) {
    for (auto& p : params_) {
      if (p->name == name) return p.get();
    }
    return nullptr;
  }

  std::size_t coordinate_count() const {
    std::size_t n = 0;
    for (const auto& p : params_) n += p->value.size();
    return n;
  }

  void zero_grad() {
    for (auto& p : params_) std::fill(p->grad.begin(), p->grad.end(), 0.0);
  }

  std::int64_t& step() { return step_; }
  std::int64_t step() const { return step_; }

  std::vector<std::vector<double>> snapshot() const {
    std::vector<std::vector<double>> out;
    out.reserve(params_.size());
    for (const auto& p : params_) {
      out.emplace_back(p->value.data().begin(), p->value.data().end());
    }
    return out;
  }

  void restore(const std::vector<std::vector<double>>& values) {
    for (std::size_t i = 0; i < params_.size(); ++i) {
      std::copy(values[i].begin(), values[i].end(), params_[i]->value.data().begin());
    }
  }

 private:
  std::vector<std::unique_ptr<Parameter>> params_;
  std::int64_t step_ = 0;
};

class Graph;

struct Expr {
  Graph* graph = nullptr;
  std::int32_t id = -1;

  bool valid() const { return graph != nullptr && id >= 0; }
};

// One term W[:, col : col + len(x)] * x of an affine map.
struct AffineTerm {
  Expr weight;
  Expr input;
  std::size_t col = 0;
};

enum class Op : std::uint8_t {
  input,
  parameter,
  lookup,
  affine,
  add,
  sub,
  cmult,
  scale,
  add_constant,
  tanh,
  sigmoid,
  concat,
  slice,
  dot,
  sum,
  log_sum_exp,
  log_softmax,
  pick,
};

// Deliberately wrong backward rules, used as negative controls for the
// gradient checker.
enum class Fault : std::uint8_t { none, tanh_backward };

class Graph {
 public:
  Graph() = default;
  Graph(const Graph&) = delete;
  Graph& operator=(const Graph&) = delete;

  void inject_fault(Fault f) { fault_ = f; }

  std::size_t node_count() const { return nodes_.size(); }

  // --- leaves ---------------------------------------------------------------

  Expr input(std::span<const double> v) {
    if (v.empty()) throw ShapeError("input: empty vector");
    Expr e = push(Op::input, {}, v.size(), v.size());
    std::copy(v.begin(), v.end(), mutable_val(e.id));
    return e;
  }

  Expr input(std::initializer_list<double> v) {
    return input(std::span<const double>(v.begin(), v.size()));
  }

  Expr constant(double x) { return input({x}); }

  Expr zeros(std::size_t n) {
    if (n == 0) throw ShapeError("zeros: empty vector");
    return push(Op::input, {}, n, n);
  }

  // Repeated calls with the same parameter return the same node.
  Expr parameter(Parameter& p) {
    auto it = param_nodes_.find(&p);
    if (it != param_nodes_.end()) return {this, it->second};
    Node n;
    n.op = Op::parameter;
    n.size = static_cast<std::uint32_t>(p.value.size());
    n.rows = static_cast<std::uint32_t>(p.value.rows());
    n.param = &p;
    n.aux = param_grads_.size();
    param_grads_.emplace_back();
    nodes_.push_back(n);
    const auto id = static_cast<std::int32_t>(nodes_.size() - 1);
    param_nodes_.emplace(&p, id);
    return {this, id};
  }

  Expr lookup(Parameter& table, std::size_t row) {
    if (row >= table.value.rows()) {
      std::ostringstream os;
      os << "lookup: row " << row << " out of range for '" << table.name << "' with "
         << table.value.rows() << " rows";
      throw ShapeError(os.str());
    }
    const std::size_t width = table.value.cols();
    Expr e = push(Op::lookup, {}, width, width);
    nodes_[e.id].param = &table;
    nodes_[e.id].aux = row;
    const double* src = table.value.data().data() + row * width;
    std::copy(src, src + width, mutable_val(e.id));
    return e;
  }

  // --- primitives -------------------------------------------------------------

  Expr affine(std::optional<Expr> bias, std::span<const AffineTerm> terms) {
    if (terms.empty() && !bias) throw ShapeError("affine: no terms");
    std::size_t out = bias ? size(*bias) : rows(terms.front().weight);
    std::vector<std::int64_t> args;
    args.push_back(bias ? bias->id : -1);
    for (const AffineTerm& t : terms) {
      const std::size_t r = rows(t.weight);
      const std::size_t c = size(t.weight) / r;
      if (r != out || t.col + size(t.input) > c) {
        std::ostringstream os;
        os << "affine: weight " << r << "x" << c << " with column offset " << t.col
           << " cannot map input of length " << size(t.input) << " to length " << out;
        throw ShapeError(os.str());
      }
      args.push_back(t.weight.id);
      args.push_back(t.input.id);
      args.push_back(static_cast<std::int64_t>(t.col));
    }
    Expr e = push(Op::affine, args, out, out);
    double* y = mutable_val(e.id);
    if (bias) {
      const double* b = val(bias->id);
      std::copy(b, b + out, y);
    }
    for (const AffineTerm& t : terms) {
      const double* w = val(t.weight.id);
      const double* x = val(t.input.id);
      const std::size_t cols = size(t.weight) / out;
      const std::size_t n = size(t.input);
      for (std::size_t r = 0; r < out; ++r) {
        const double* wr = w + r * cols + t.col;
        double acc = 0.0;
        for (std::size_t k = 0; k < n; ++k) acc += wr[k] * x[k];
        y[r] += acc;
      }
    }
    return e;
  }

  Expr affine(std::optional<Expr> bias, std::initializer_list<AffineTerm> terms) {
    return affine(bias, std::span<const AffineTerm>(terms.begin(), terms.size()));
  }

  Expr add(Expr a, Expr b) { return binary(Op::add, "add", a, b); }
  Expr sub(Expr a, Expr b) { return binary(Op::sub, "sub", a, b); }
  Expr cmult(Expr a, Expr b) { return binary(Op::cmult, "elementwise_mul", a, b); }

  Expr scale(Expr x, double c) {
    Expr e = unary(Op::scale, x);
    nodes_[e.id].scalar = c;
    const double* in = val(x.id);
    double* y = mutable_val(e.id);
    for (std::size_t i = 0; i < size(e); ++i) y[i] = c * in[i];
    return e;
  }

  Expr add_constant(Expr x, double c) {
    Expr e = unary(Op::add_constant, x);
    nodes_[e.id].scalar = c;
    const double* in = val(x.id);
    double* y = mutable_val(e.id);
    for (std::size_t i = 0; i < size(e); ++i) y[i] = in[i] + c;
    return e;
  }

  Expr tanh(Expr x) {
    Expr e = unary(Op::tanh, x);
    const double* in = val(x.id);
    double* y = mutable_val(e.id);
    for (std::size_t i = 0; i < size(e); ++i) y[i] = std::tanh(in[i]);
    return e;
  }

  Expr sigmoid(Expr x) {
    Expr e = unary(Op::sigmoid, x);
    const double* in = val(x.id);
    double* y = mutable_val(e.id);
    for (std::size_t i = 0; i < size(e); ++i) y[i] = 1.0 / (1.0 + std::exp(-in[i]));
    return e;
  }

  Expr concat(std::span<const Expr> xs) {
    if (xs.empty()) throw ShapeError("concat: no inputs");
    std::vector<std::int64_t> args;
    std::size_t total = 0;
    for (Expr x : xs) {
      args.push_back(x.id);
      total += size(x);
    }
    Expr e = push(Op::concat, args, total, total);
    double* y = mutable_val(e.id);
    for (Expr x : xs) {
      const double* in = val(x.id);
      y = std::copy(in, in + size(x), y);
    }
    return e;
  }

  Expr concat(std::initializer_list<Expr> xs) {
    return concat(std::span<const Expr>(xs.begin(), xs.size()));
  }

  Expr slice(Expr x, std::size_t begin, std::size_t len) {
    if (len == 0 || begin + len > size(x)) {
      std::ostringstream os;
      os << "slice: [" << begin << ", " << begin + len << ") outside length " << size(x);
      throw ShapeError(os.str());
    }
    std::vector<std::int64_t> args{x.id};
    Expr e = push(Op::slice, args, len, len);
    nodes_[e.id].aux = begin;
    const double* in = val(x.id) + begin;
    std::copy(in, in + len, mutable_val(e.id));
    return e;
  }

  Expr dot(Expr a, Expr b) {
    if (size(a) != size(b)) {
      std::ostringstream os;
      os << "dot: lengths " << size(a) << " and " << size(b);
      throw ShapeError(os.str());
    }
    std::vector<std::int64_t> args{a.id, b.id};
    Expr e = push(Op::dot, args, 1, 1);
    const double* x = val(a.id);
    const double* y = val(b.id);
    double acc = 0.0;
    for (std::size_t i = 0; i < size(a); ++i) acc += x[i] * y[i];
    *mutable_val(e.id) = acc;
    return e;
  }

  // Elementwise sum of equal-length operands.
  Expr sum(std::span<const Expr> xs) {
    if (xs.empty()) throw ShapeError("sum: no inputs");
    const std::size_t n = size(xs.front());
    std::vector<std::int64_t> args;
    for (Expr x : xs) {
      if (size(x) != n) throw ShapeError("sum: operands of different lengths");
      args.push_back(x.id);
    }
    Expr e = push(Op::sum, args, n, n);
    double* y = mutable_val(e.id);
    for (Expr x : xs) {
      const double* in = val(x.id);
      for (std::size_t i = 0; i < n; ++i) y[i] += in[i];
    }
    return e;
  }

  // log of the summed exponentials of scalar operands.
  Expr log_sum_exp(std::span<const Expr> xs) {
    if (xs.empty()) throw ShapeError("log_sum_exp: no inputs");
    std::vector<std::int64_t> args;
    std::vector<double> v;
    for (Expr x : xs) {
      if (size(x) != 1) throw ShapeError("log_sum_exp: operands must be scalars");
      args.push_back(x.id);
      v.push_back(*val(x.id));
    }
    Expr e = push(Op::log_sum_exp, args, 1, 1);
    *mutable_val(e.id) = srnn::log_sum_exp(v);
    return e;
  }

  Expr log_sum_exp(std::initializer_list<Expr> xs) {
    return log_sum_exp(std::span<const Expr>(xs.begin(), xs.size()));
  }

  Expr log_softmax(Expr x) {
    Expr e = unary(Op::log_softmax, x);
    const double* in = val(x.id);
    const double z = srnn::log_sum_exp(std::span<const double>(in, size(x)));
    double* y = mutable_val(e.id);
    for (std::size_t i = 0; i < size(e); ++i) y[i] = in[i] - z;
    return e;
  }

  Expr pick(Expr x, std::size_t index) {
    if (index >= size(x)) {
      std::ostringstream os;
      os << "pick: index " << index << " outside length " << size(x);
      throw ShapeError(os.str());
    }
    std::vector<std::int64_t> args{x.id};
    Expr e = push(Op::pick, args, 1, 1);
    nodes_[e.id].aux = index;
    *mutable_val(e.id) = val(x.id)[index];
    return e;
  }

  // --- inspection --------------------------------------------------------------

  std::size_t size(Expr e) const { return nodes_.at(e.id).size; }
  std::size_t rows(Expr e) const { return nodes_.at(e.id).rows; }

  std::span<const double> value(Expr e) const { return {val(e.id), size(e)}; }
  double scalar(Expr e) const {
    if (size(e) != 1) throw ShapeError("scalar: node is not a scalar");
    return *val(e.id);
  }

  // d(root)/d(e) after backward().
  std::span<const double> gradient(Expr e) const {
    if (!backward_done_) throw std::logic_error("gradient: backward() has not run");
    return {grad(e.id), size(e)};
  }

  void backward(Expr root) {
    if (root.graph != this || root.id < 0) throw std::logic_error("backward: foreign node");
    if (size(root) != 1) {
      std::ostringstream os;
      os << "backward: root must be a scalar, got length " << size(root);
      throw ShapeError(os.str());
    }
    grads_.assign(vals_.size(), 0.0);
    for (std::size_t i = 0; i < nodes_.size(); ++i) {
      if (nodes_[i].op == Op::parameter) {
        param_grads_[nodes_[i].aux].assign(nodes_[i].size, 0.0);
      }
    }
    backward_done_ = true;
    *grad(root.id) = 1.0;
    for (std::int32_t id = root.id; id >= 0; --id) {
      backprop(id);
    }
  }

  // Adds this tape's parameter gradients into the shared Parameter::grad slots.
  void accumulate_parameter_gradients() const {
    if (!backward_done_) return;
    for (std::size_t i = 0; i < nodes_.size(); ++i) {
      const Node& n = nodes_[i];
      if (n.op == Op::parameter) {
        const auto& g = param_grads_[n.aux];
        for (std::size_t k = 0; k < g.size(); ++k) n.param->grad[k] += g[k];
      } else if (n.op == Op::lookup) {
        const double* g = grad(static_cast<std::int32_t>(i));
        double* dst = n.param->grad.data() + n.aux * n.size;
        for (std::size_t k = 0; k < n.size; ++k) dst[k] += g[k];
      }
    }
  }

 private:
  struct Node {
    Op op = Op::input;
    std::uint32_t arg_begin = 0;
    std::uint32_t arg_count = 0;
    std::size_t offset = 0;
    std::uint32_t size = 0;
    std::uint32_t rows = 0;
    Parameter* param = nullptr;
    std::size_t aux = 0;
    double scalar = 0.0;
  };

  Expr push(Op op, std::span<const std::int64_t> args, std::size_t n, std::size_t rows) {
    Node node;
    node.op = op;
    node.arg_begin = static_cast<std::uint32_t>(args_.size());
    node.arg_count = static_cast<std::uint32_t>(args.size());
    node.offset = vals_.size();
    node.size = static_cast<std::uint32_t>(n);
    node.rows = static_cast<std::uint32_t>(rows);
    args_.insert(args_.end(), args.begin(), args.end());
    vals_.resize(vals_.size() + n, 0.0);
    nodes_.push_back(node);
    backward_done_ = false;
    return {this, static_cast<std::int32_t>(nodes_.size() - 1)};
  }

  Expr push(Op op, std::initializer_list<std::int64_t> args, std::size_t n, std::size_t rows) {
    return push(op, std::span<const std::int64_t>(args.begin(), args.size()), n, rows);
  }

  Expr unary(Op op, Expr x) {
    std::vector<std::int64_t> args{x.id};
    return push(op, args, size(x), size(x));
  }

  Expr binary(Op op, const char* what, Expr a, Expr b) {
    if (size(a) != size(b)) {
      std::ostringstream os;
      os << what << ": lengths " << size(a) << " and " << size(b);
      throw ShapeError(os.str());
    }
    std::vector<std::int64_t> args{a.id, b.id};
    Expr e = push(op, args, size(a), size(a));
    const double* x = val(a.id);
    const double* y = val(b.id);
    double* out = mutable_val(e.id);
    for (std::size_t i = 0; i < size(a); ++i) {
      switch (op) {
        case Op::add: out[i] = x[i] + y[i]; break;
        case Op::sub: out[i] = x[i] - y[i]; break;
        default: out[i] = x[i] * y[i]; break;
      }
    }
    return e;
  }

  const double* val(std::int32_t id) const {
    const Node& n = nodes_[id];
    if (n.op == Op::parameter) return n.param->value.data().data();
    return vals_.data() + n.offset;
  }
  double* mutable_val(std::int32_t id) { return vals_.data() + nodes_[id].offset; }

  const double* grad(std::int32_t id) const {
    const Node& n = nodes_[id];
    if (n.op == Op::parameter) return param_grads_[n.aux].data();
    return grads_.data() + n.offset;
  }
  double* grad(std::int32_t id) { return const_cast<double*>(std::as_const(*this).grad(id)); }

  std::int64_t arg(const Node& n, std::size_t k) const { return args_[n.arg_begin + k]; }

  void backprop(std::int32_t id) {
    const Node& n = nodes_[id];
    const double* g = grad(id);
    const double* y = val(id);
    switch (n.op) {
      case Op::input:
      case Op::parameter:
      case Op::lookup:
        break;
      case Op::affine: {
        const std::int64_t bias = arg(n, 0);
        if (bias >= 0) {
          double* gb = grad(static_cast<std::int32_t>(bias));
          for (std::size_t i = 0; i < n.size; ++i) gb[i] += g[i];
        }
        const std::size_t terms = (n.arg_count - 1) / 3;
        for (std::size_t t = 0; t < terms; ++t) {
          const auto wid = static_cast<std::int32_t>(arg(n, 1 + 3 * t));
          const auto xid = static_cast<std::int32_t>(arg(n, 2 + 3 * t));
          const auto col = static_cast<std::size_t>(arg(n, 3 + 3 * t));
          const std::size_t cols = nodes_[wid].size / n.size;
          const std::size_t len = nodes_[xid].size;
          const double* w = val(wid);
          const double* x = val(xid);
          double* gw = grad(wid);
          double* gx = grad(xid);
          for (std::size_t r = 0; r < n.size; ++r) {
            const double gr = g[r];
            if (gr == 0.0) continue;
            const double* wr = w + r * cols + col;
            double* gwr = gw + r * cols + col;
            for (std::size_t k = 0; k < len; ++k) {
              gwr[k] += gr * x[k];
              gx[k] += gr * wr[k];
            }
          }
        }
        break;
      }
      case Op::add:
      case Op::sub: {
        double* ga = grad(static_cast<std::int32_t>(arg(n, 0)));
        double* gb = grad(static_cast<std::int32_t>(arg(n, 1)));
        const double sign = n.op == Op::add ? 1.0 : -1.0;
        for (std::size_t i = 0; i < n.size; ++i) {
          ga[i] += g[i];
          gb[i] += sign * g[i];
        }
        break;
      }
      case Op::cmult: {
        const auto a = static_cast<std::int32_t>(arg(n, 0));
        const auto b = static_cast<std::int32_t>(arg(n, 1));
        const double* xa = val(a);
        const double* xb = val(b);
        double* ga = grad(a);
        double* gb = grad(b);
        for (std::size_t i = 0; i < n.size; ++i) {
          ga[i] += g[i] * xb[i];
          gb[i] += g[i] * xa[i];
        }
        break;
      }
      case Op::scale: {
        double* gx = grad(static_cast<std::int32_t>(arg(n, 0)));
        for (std::size_t i = 0; i < n.size; ++i) gx[i] += n.scalar * g[i];
        break;
      }
      case Op::add_constant: {
        double* gx = grad(static_cast<std::int32_t>(arg(n, 0)));
        for (std::size_t i = 0; i < n.size; ++i) gx[i] += g[i];
        break;
      }
      case Op::tanh: {
        double* gx = grad(static_cast<std::int32_t>(arg(n, 0)));
        if (fault_ == Fault::tanh_backward) {
          for (std::size_t i = 0; i < n.size; ++i) gx[i] += g[i] * (1.0 - y[i]);
        } else {
          for (std::size_t i = 0; i < n.size; ++i) gx[i] += g[i] * (1.0 - y[i] * y[i]);
        }
        break;
      }
      case Op::sigmoid: {
        double* gx = grad(static_cast<std::int32_t>(arg(n, 0)));
        for (std::size_t i = 0; i < n.size; ++i) gx[i] += g[i] * y[i] * (1.0 - y[i]);
        break;
      }
      case Op::concat: {
        std::size_t pos = 0;
        for (std::size_t k = 0; k < n.arg_count; ++k) {
          const auto x = static_cast<std::int32_t>(arg(n, k));
          double* gx = grad(x);
          for (std::size_t i = 0; i < nodes_[x].size; ++i) gx[i] += g[pos + i];
          pos += nodes_[x].size;
        }
        break;
      }
      case Op::slice: {
        double* gx = grad(static_cast<std::int32_t>(arg(n, 0))) + n.aux;
        for (std::size_t i = 0; i < n.size; ++i) gx[i] += g[i];
        break;
      }
      case Op::dot: {
        const auto a = static_cast<std::int32_t>(arg(n, 0));
        const auto b = static_cast<std::int32_t>(arg(n, 1));
        const double* xa = val(a);
        const double* xb = val(b);
        double* ga = grad(a);
        double* gb = grad(b);
        for (std::size_t i = 0; i < nodes_[a].size; ++i) {
          ga[i] += g[0] * xb[i];
          gb[i] += g[0] * xa[i];
        }
        break;
      }
      case Op::sum: {
        for (std::size_t k = 0; k < n.arg_count; ++k) {
          double* gx = grad(static_cast<std::int32_t>(arg(n, k)));
          for (std::size_t i = 0; i < n.size; ++i) gx[i] += g[i];
        }
        break;
      }
      case Op::log_sum_exp: {
        if (g[0] == 0.0 || std::isinf(y[0])) break;
        for (std::size_t k = 0; k < n.arg_count; ++k) {
          const auto x = static_cast<std::int32_t>(arg(n, k));
          *grad(x) += g[0] * std::exp(*val(x) - y[0]);
        }
        break;
      }
      case Op::log_softmax: {
        double total = 0.0;
        for (std::size_t i = 0; i < n.size; ++i) total += g[i];
        double* gx = grad(static_cast<std::int32_t>(arg(n, 0)));
        for (std::size_t i = 0; i < n.size; ++i) gx[i] += g[i] - std::exp(y[i]) * total;
        break;
      }
      case Op::pick: {
        grad(static_cast<std::int32_t>(arg(n, 0)))[n.aux] += g[0];
        break;
      }
    }
  }

  std::vector<Node> nodes_;
  std::vector<std::int64_t> args_;
  std::vector<double> vals_;
  std::vector<double> grads_;
  std::vector<std::vector<double>> param_grads_;
  std::unordered_map<const Parameter*, std::int32_t> param_nodes_;
  bool backward_done_ = false;
  Fault fault_ = Fault::none;
};

// Free-function spellings, so model code reads as expressions.

inline Expr tanh(Expr x) { return x.graph->tanh(x); }
inline Expr sigmoid(Expr x) { return x.graph->sigmoid(x); }
inline Expr cmult(Expr a, Expr b) { return a.graph->cmult(a, b); }
inline Expr dot(Expr a, Expr b) { return a.graph->dot(a, b); }
inline Expr log_softmax(Expr x) { return x.graph->log_softmax(x); }
inline Expr pick(Expr x, std::size_t i) { return x.graph->pick(x, i); }
inline Expr slice(Expr x, std::size_t begin, std::size_t len) {
  return x.graph->slice(x, begin, len);
}
inline Expr concat(std::span<const Expr> xs) { return xs.front().graph->concat(xs); }
inline Expr concat(std::initializer_list<Expr> xs) { return xs.begin()->graph->concat(xs); }
inline Expr log_sum_exp(std::span<const Expr> xs) { return xs.front().graph->log_sum_exp(xs); }
inline Expr log_sum_exp(std::initializer_list<Expr> xs) {
  return xs.begin()->graph->log_sum_exp(xs);
}
inline Expr sum(std::span<const Expr> xs) { return xs.front().graph->sum(xs); }

inline Expr operator+(Expr a, Expr b) { return a.graph->add(a, b); }
inline Expr operator-(Expr a, Expr b) { return a.graph->sub(a, b); }
inline Expr operator*(double c, Expr x) { return x.graph->scale(x, c); }
inline Expr operator-(Expr x) { return x.graph->scale(x, -1.0); }
inline Expr operator+(Expr x, double c) { return x.graph->add_constant(x, c); }

}  // namespace srnn::ad
