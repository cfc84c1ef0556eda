// Reverse-mode automatic differentiation over dense row-major arrays.
//
// A Tape owns every intermediate value created during a forward pass.
// Nodes are appended in creation order, which is already a topological
// order, so backward() walks the tape once in reverse. Parameter leaves
// accumulate their gradient into an external Tensor owned by the caller.

#ifndef BINDERKIT_TENSOR_TAPE_HPP_
#define BINDERKIT_TENSOR_TAPE_HPP_

#include <cstdint>
#include <deque>
#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "../core/error.hpp"
#include "../core/ndarray.hpp"

namespace binderkit {

// Trainable or constant array with an optional gradient buffer.
template <typename T>
struct Tensor {
  NdArray<T> value;
  bool requires_grad = true;
  std::optional<NdArray<T>> grad;

  Tensor() = default;
  explicit Tensor(NdArray<T> v, bool rg = true) : value(std::move(v)), requires_grad(rg) {}

  const Shape& shape() const { return value.shape; }
  void zero_grad() { grad.reset(); }
};

template <typename T>
class Tape;

template <typename T>
struct Var {
  Tape<T>* tape = nullptr;
  int id = -1;

  const NdArray<T>& value() const { return tape->value(id); }
  const Shape& shape() const { return value().shape; }
  std::int64_t dim(int i) const { return value().dim(i); }
  int rank() const { return value().rank(); }
  std::int64_t numel() const { return value().numel(); }
  bool requires_grad() const { return tape->requires_grad(id); }
};

template <typename T>
class Tape {
public:
  using Backward = std::function<void(const std::vector<T>& grad_out)>;

  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  Var<T> constant(NdArray<T> v) { return push(std::move(v), false, nullptr); }

  // Leaf bound to a parameter; gradients accumulate into p.grad.
  Var<T> param(Tensor<T>& p) {
    Var<T> v = push(p.value, p.requires_grad, nullptr);
    nodes_[v.id].leaf = &p;
    return v;
  }

  // Appends a node computed from `inputs`. `bw` is only retained when some
  // input requires a gradient.
  Var<T> record(NdArray<T> v, std::initializer_list<Var<T>> inputs, Backward bw) {
    bool rg = false;
    for (const Var<T>& in : inputs)
      rg = rg || requires_grad(in.id);
    return push(std::move(v), rg, rg ? std::move(bw) : nullptr);
  }
  Var<T> record(NdArray<T> v, const std::vector<Var<T>>& inputs, Backward bw) {
    bool rg = false;
    for (const Var<T>& in : inputs)
      rg = rg || requires_grad(in.id);
    return push(std::move(v), rg, rg ? std::move(bw) : nullptr);
  }

  const NdArray<T>& value(int id) const { return nodes_[id].value; }
  bool requires_grad(int id) const { return nodes_[id].requires_grad; }
  std::size_t size() const { return nodes_.size(); }

  // Gradient buffer of node `id`, allocated on first use.
  std::vector<T>& grad(int id) {
    Node& n = nodes_[id];
    if (n.grad.empty())
      n.grad.assign(n.value.data.size(), T(0));
    return n.grad;
  }

  void backward(Var<T> loss) {
    require(loss.tape == this, "backward on a variable from another tape");
    if (loss.numel() != 1)
      fail(ErrorKind::Contract, "backward needs a scalar loss, got shape " + shape_str(loss.shape()));
    if (backward_done_)
      fail(ErrorKind::Contract, "backward already ran on this tape");
    backward_done_ = true;
    grad(loss.id)[0] = T(1);
    for (int id = loss.id; id >= 0; --id) {
      Node& n = nodes_[id];
      if (!n.requires_grad || n.grad.empty())
        continue;
      if (n.backward)
        n.backward(n.grad);
      if (n.leaf) {
        Tensor<T>& p = *n.leaf;
        if (!p.grad)
          p.grad = NdArray<T>(p.value.shape, T(0));
        for (std::size_t i = 0; i < n.grad.size(); ++i)
          p.grad->data[i] += n.grad[i];
      }
    }
  }

private:
  struct Node {
    NdArray<T> value;
    bool requires_grad = false;
    Backward backward;
    Tensor<T>* leaf = nullptr;
    std::vector<T> grad;
  };

  Var<T> push(NdArray<T> v, bool rg, Backward bw) {
    nodes_.push_back(Node{std::move(v), rg, std::move(bw), nullptr, {}});
    return Var<T>{this, static_cast<int>(nodes_.size()) - 1};
  }

  std::deque<Node> nodes_;
  bool backward_done_ = false;
};

} // namespace binderkit

#endif
