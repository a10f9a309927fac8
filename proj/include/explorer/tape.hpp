#pragma once

#include <functional>
#include <string>
#include <vector>

#include "explorer/matrix.hpp"

namespace explorer {

// One learnable tensor: value plus accumulated gradient and Adam moments.
struct Param {
  std::string name;
  Matrix value;
  Matrix grad;
  Matrix m;
  Matrix v;

  Param() = default;
  Param(std::string n, int rows, int cols)
      : name(std::move(n)), value(rows, cols), grad(rows, cols), m(rows, cols), v(rows, cols) {}

  void zero_grad() { grad.zero(); }
};

// Reverse-mode tape over dense matrices. One forward pass is recorded op by
// op; backward() replays the closures in reverse creation order and
// accumulates exact gradients into the bound Params. Deterministic: purely
// sequential, fixed order.
class Tape {
 public:
  using Ref = int;

  Ref constant(Matrix value);
  Ref param(Param& p);

  const Matrix& value(Ref r) const { return nodes_[r].value; }
  const Matrix& grad(Ref r) const { return nodes_[r].grad; }

  Ref matmul(Ref a, Ref b);     // [m x k] * [k x n]
  Ref matmul_nt(Ref a, Ref b);  // [m x k] * [n x k]^T
  Ref add(Ref a, Ref b);
  Ref sub(Ref a, Ref b);
  Ref add_row(Ref a, Ref bias);  // bias [1 x n] broadcast over rows
  Ref hadamard(Ref a, Ref b);
  Ref scale(Ref a, double s);
  Ref square(Ref a);
  Ref tanh_op(Ref a);
  Ref gelu(Ref a);
  Ref layer_norm(Ref x, Ref gamma, Ref beta);  // row-wise, eps 1e-5
  Ref gather_rows(Ref x, std::vector<int> rows);
  Ref repeat_row(Ref x, int n);  // x is [1 x d]
  Ref concat_cols(Ref a, Ref b);
  Ref softmax_row(Ref x);      // [1 x n]
  Ref log_softmax_row(Ref x);  // [1 x n]
  Ref sum(Ref x);              // -> [1 x 1]

  // Fused masked multi-head softmax attention. q/k/v are pre-projected
  // [n_q x d] / [n_kv x d]; allowed[i] lists the key indices query i may
  // attend to (unmasked). d must split evenly across heads. Throws if any
  // allowed list is empty (all-masked query row). If weights_out is given it
  // receives one [n_q x n_kv] row-stochastic matrix per head (zeros at
  // masked entries).
  Ref masked_attention(Ref q, Ref k, Ref v, const std::vector<std::vector<int>>& allowed,
                       int heads, std::vector<Matrix>* weights_out = nullptr);

  // Seeds d(loss)/d(loss) = seed and runs the reverse sweep; loss must be
  // 1x1. Gradients stay on the tape until visited or accumulated.
  void backward(Ref loss, double seed = 1.0);

  // After backward(): fn(param, grad) for every param leaf in creation
  // order. Throws std::runtime_error naming the parameter if a gradient is
  // non-finite. Lets batch workers reduce per-sample gradients into their
  // own buffers without touching shared Param state.
  void visit_param_grads(const std::function<void(Param&, const Matrix&)>& fn);

  // Convenience: param.grad += tape gradient, for every bound param.
  void accumulate_into_params();

  int size() const { return static_cast<int>(nodes_.size()); }

 private:
  struct Node {
    Matrix value;
    Matrix grad;
    Param* bound = nullptr;
    std::function<void()> back;  // reads this node's grad, accumulates parents'
  };

  Ref push(Matrix value) {
    Node n;
    n.value = std::move(value);
    nodes_.push_back(std::move(n));
    return static_cast<Ref>(nodes_.size() - 1);
  }

  Matrix& grad_mut(Ref r) { return nodes_[r].grad; }

  std::vector<Node> nodes_;
};

}  // namespace explorer
