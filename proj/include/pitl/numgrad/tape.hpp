#pragma once

#include <cstddef>
#include <deque>
#include <functional>
#include <vector>

#include "pitl/numgrad/param.hpp"
#include "pitl/numgrad/tensor.hpp"

namespace pitl {

class Tape;

/// Handle to a value recorded on a Tape.
class Var {
 public:
  Var() = default;
  Var(Tape* tape, std::size_t id) : tape_(tape), id_(id) {}

  const Tensor2D& value() const;
  std::size_t rows() const { return value().rows(); }
  std::size_t cols() const { return value().cols(); }
  Tape& tape() const { return *tape_; }
  std::size_t id() const noexcept { return id_; }
  bool valid() const noexcept { return tape_ != nullptr; }

 private:
  Tape* tape_ = nullptr;
  std::size_t id_ = 0;
};

/// Record of one forward pass, replayed in reverse to produce gradients.
///
/// A tape is single-use: after backward() it refuses a second sweep, and a new
/// forward pass needs a fresh tape (or clear()). Parameter leaves keep a
/// pointer to their Param, which must outlive the sweep.
class Tape {
 public:
  using Backward = std::function<void(Tape&, std::size_t self)>;

  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  Var constant(Tensor2D value);
  Var param(Param& p);
  /// When set, frozen parameters are recorded as constants: no gradient is
  /// computed for them. Off by default, so frozen flags never alter gradients.
  void set_skip_frozen(bool skip) noexcept { skip_frozen_ = skip; }
  /// Records an operation; `backward` is dropped when no parent needs a gradient.
  Var record(Tensor2D value, std::initializer_list<std::size_t> parents, Backward backward);

  /// Seeds d(root)/d(root) = 1 and sweeps in exact reverse execution order,
  /// adding leaf gradients into their Param::grad.
  void backward(Var root);

  const Tensor2D& value(std::size_t id) const { return nodes_[id].value; }
  bool requires_grad(std::size_t id) const { return nodes_[id].requires_grad; }
  /// Gradient slot of a node, zero-initialised on first access.
  Tensor2D& grad(std::size_t id);

  std::size_t size() const noexcept { return nodes_.size(); }
  bool swept() const noexcept { return swept_; }
  /// Node ids whose backward function ran, in the order they ran.
  const std::vector<std::size_t>& sweep_order() const noexcept { return sweep_order_; }
  void clear();

 private:
  struct Node {
    Tensor2D value;
    Tensor2D grad;
    Backward backward;
    Param* param = nullptr;
    bool requires_grad = false;
  };

  // deque: references returned by value() stay valid while recording.
  std::deque<Node> nodes_;
  std::vector<std::size_t> sweep_order_;
  bool swept_ = false;
  bool skip_frozen_ = false;
};

inline const Tensor2D& Var::value() const { return tape_->value(id_); }

/// Differentiable primitives. All operands must live on the same tape.
namespace ad {

Var matmul(Var a, Var b);
Var add(Var a, Var b);
Var sub(Var a, Var b);
/// Hadamard product.
Var mul(Var a, Var b);
Var div(Var a, Var b);
/// Adds a 1 x n row to every row of an m x n operand.
Var add_bias(Var x, Var bias);
Var scale(Var x, double s);
Var add_scalar(Var x, double s);
Var sigmoid(Var x);
Var tanh(Var x);
inline Var identity(Var x) { return x; }
Var square(Var x);
/// max(x, lo) element-wise; gradient passes only where x > lo.
Var clamp_min(Var x, double lo);
/// Rows [begin, end) of x.
Var slice_rows(Var x, std::size_t begin, std::size_t end);
/// 1 x 1 sum of all entries.
Var sum(Var x);
/// 1 x 1 mean of all entries.
Var mean(Var x);

}  // namespace ad

}  // namespace pitl
