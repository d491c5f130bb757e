#pragma once

// Dense reverse-mode automatic differentiation over 64-bit tensors.
//
// A Tensor is a shared handle to a graph node. Operations record their inputs
// and a backward closure; `backward(loss)` replays the graph in reverse
// topological order. Most operations read a tensor as a row-major matrix whose
// column count is the last dimension (`cols()`) and whose row count is the
// product of the remaining dimensions (`rows()`). Broadcasting is limited to
// the explicit bias/row/column helpers.

#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "trendfx/error.hpp"

namespace trendfx::ad {

using Shape = std::vector<std::size_t>;

std::size_t numel(const Shape& shape);
std::string to_string(const Shape& shape);

struct Node {
  Shape shape;
  std::vector<double> value;
  std::vector<double> grad;  // sized like value iff requires_grad
  bool requires_grad = false;
  std::vector<std::shared_ptr<Node>> inputs;
  std::function<void(Node&)> backward;
  const char* op = "leaf";
};

class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(std::shared_ptr<Node> node) : node_(std::move(node)) {}

  static Tensor constant(Shape shape, std::vector<double> values);
  static Tensor parameter(Shape shape, std::vector<double> values);
  static Tensor zeros(Shape shape, bool requires_grad = false);
  static Tensor scalar(double v) { return constant({1}, {v}); }

  bool defined() const { return node_ != nullptr; }
  const Shape& shape() const { return node_->shape; }
  std::size_t dim(std::size_t i) const { return node_->shape.at(i); }
  std::size_t numel() const { return node_->value.size(); }
  std::size_t cols() const { return node_->shape.empty() ? 1 : node_->shape.back(); }
  std::size_t rows() const { return cols() == 0 ? 0 : numel() / cols(); }

  std::span<const double> values() const { return node_->value; }
  std::span<double> mutable_values() { return node_->value; }
  std::span<const double> grad() const { return node_->grad; }
  std::span<double> mutable_grad() { return node_->grad; }
  bool requires_grad() const { return node_->requires_grad; }
  double item() const;
  void zero_grad();

  Node* node() const { return node_.get(); }
  const std::shared_ptr<Node>& shared() const { return node_; }

 private:
  std::shared_ptr<Node> node_;
};

/// Reverse-reachable graph of a root tensor in topological order (inputs
/// before consumers). Replaying it backwards visits each node once.
class Tape {
 public:
  explicit Tape(const Tensor& root);

  std::size_t size() const { return order_.size(); }
  const std::vector<Node*>& nodes() const { return order_; }

  // Seeds d(root)/d(root) = 1 and propagates to every requires_grad node.
  void backward();
  void clear();

 private:
  std::shared_ptr<Node> root_;
  std::vector<Node*> order_;
};

/// Accumulates d(loss)/d(leaf) into every requires_grad leaf.
void backward(const Tensor& loss);

// ---- linear algebra ----
Tensor matmul(const Tensor& a, const Tensor& b);     // [r,k] x [k,c]
Tensor matmul_nt(const Tensor& a, const Tensor& b);  // [r,k] x [c,k]^T
Tensor dense(const Tensor& x, const Tensor& w, const Tensor& b = {});  // x W^T + b, W: [out,in]
Tensor bmm(const Tensor& a, const Tensor& b);        // [g,r,k] x [g,k,c]
Tensor bmm_nt(const Tensor& a, const Tensor& b);     // [g,r,k] x [g,c,k]^T
Tensor transpose(const Tensor& a);

// ---- elementwise ----
Tensor add(const Tensor& a, const Tensor& b);
Tensor sub(const Tensor& a, const Tensor& b);
Tensor mul(const Tensor& a, const Tensor& b);
Tensor scale(const Tensor& a, double s);
Tensor add_bias(const Tensor& a, const Tensor& bias);  // bias has cols() entries, added to every row
Tensor mul_row(const Tensor& a, const Tensor& g);      // g has cols() entries
Tensor mul_col(const Tensor& a, const Tensor& s);      // s has rows() entries
Tensor sigmoid(const Tensor& a);
Tensor tanh(const Tensor& a);
Tensor relu(const Tensor& a);

// ---- normalization ----
Tensor softmax_rows(const Tensor& a);
Tensor softmax(const Tensor& a, int axis);  // axis 1: rows; axis 0: columns of a 2-D tensor
Tensor layer_norm_rows(const Tensor& a, double eps = 1e-5);

// ---- convolution ----
// x: [B, C_in, L], w: [C_out, C_in, k], b: [C_out] or undefined.
Tensor conv1d(const Tensor& x, const Tensor& w, const Tensor& b = {}, std::size_t stride = 1,
              std::size_t padding = 0);

// ---- structure ----
Tensor reshape(const Tensor& a, Shape shape);
Tensor concat_cols(const std::vector<Tensor>& parts);
Tensor concat_rows(const std::vector<Tensor>& parts);
Tensor slice_cols(const Tensor& a, std::size_t start, std::size_t len);
Tensor slice_rows(const Tensor& a, std::size_t start, std::size_t len);
Tensor repeat_rows(const Tensor& a, std::size_t times);  // row i*times+j = a[i]
// Views a as [d0, d1, d2, d3] and swaps the middle axes: [d0, d2, d1, d3].
Tensor swap_middle_axes(const Tensor& a, std::size_t d0, std::size_t d1, std::size_t d2, std::size_t d3);

// ---- reductions and losses ----
Tensor mean_cols(const Tensor& a);  // [rows, 1]
Tensor sum_all(const Tensor& a);
Tensor mean_all(const Tensor& a);
Tensor mse_loss(const Tensor& pred, const Tensor& target);

// ---- initialization ----
/// Seed for parameter `name` under a model seed; stable across builds.
std::uint64_t derive_seed(std::uint64_t seed, std::string_view name);
/// Uniform(-1/sqrt(fan_in), 1/sqrt(fan_in)) parameter.
Tensor uniform_parameter(Shape shape, std::size_t fan_in, std::uint64_t seed, std::string_view name);

}  // namespace trendfx::ad
