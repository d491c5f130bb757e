#include "trendfx/autodiff.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <unordered_set>

#include "trendfx/kernels.hpp"

namespace trendfx::ad {

std::size_t numel(const Shape& shape) {
  std::size_t n = 1;
  for (auto d : shape) n *= d;
  return n;
}

std::string to_string(const Shape& shape) {
  std::string s = "[";
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) s += ",";
    s += std::to_string(shape[i]);
  }
  return s + "]";
}

namespace {

[[noreturn]] void shape_error(const char* op, const std::string& detail) {
  throw ShapeError(std::string(op) + ": " + detail);
}

std::shared_ptr<Node> leaf(Shape shape, std::vector<double> values, bool requires_grad) {
  if (numel(shape) != values.size()) {
    shape_error("tensor", "shape " + to_string(shape) + " does not hold " + std::to_string(values.size()) + " values");
  }
  auto n = std::make_shared<Node>();
  n->shape = std::move(shape);
  n->value = std::move(values);
  n->requires_grad = requires_grad;
  if (requires_grad) n->grad.assign(n->value.size(), 0.0);
  return n;
}

// Builds a result node. Inputs and the backward closure are dropped when no
// input needs gradients.
Tensor make_result(const char* op, Shape shape, std::vector<double> value, std::vector<Tensor> inputs,
                   std::function<void(Node&)> bw) {
  auto n = std::make_shared<Node>();
  n->op = op;
  n->shape = std::move(shape);
  n->value = std::move(value);
  bool rg = false;
  for (const auto& t : inputs) rg = rg || t.requires_grad();
  n->requires_grad = rg;
  if (rg) {
    n->grad.assign(n->value.size(), 0.0);
    n->inputs.reserve(inputs.size());
    for (auto& t : inputs) n->inputs.push_back(t.shared());
    n->backward = std::move(bw);
  }
  return Tensor(std::move(n));
}

inline bool needs(const Node& n, std::size_t i) { return n.inputs[i]->requires_grad; }
inline std::vector<double>& gin(Node& n, std::size_t i) { return n.inputs[i]->grad; }
inline const std::vector<double>& vin(const Node& n, std::size_t i) { return n.inputs[i]->value; }

void require_defined(const Tensor& t, const char* op) {
  if (!t.defined()) shape_error(op, "undefined tensor");
}

void same_shape(const Tensor& a, const Tensor& b, const char* op) {
  require_defined(a, op);
  require_defined(b, op);
  if (a.shape() != b.shape()) shape_error(op, to_string(a.shape()) + " vs " + to_string(b.shape()));
}

template <class Fwd, class Bwd>
Tensor unary(const char* op, const Tensor& a, Fwd f, Bwd df) {
  require_defined(a, op);
  std::vector<double> out(a.numel());
  auto av = a.values();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = f(av[i]);
  return make_result(op, a.shape(), std::move(out), {a}, [df](Node& n) {
    auto& g = gin(n, 0);
    const auto& x = vin(n, 0);
    for (std::size_t i = 0; i < n.grad.size(); ++i) g[i] += n.grad[i] * df(x[i], n.value[i]);
  });
}

}  // namespace

Tensor Tensor::constant(Shape shape, std::vector<double> values) {
  return Tensor(leaf(std::move(shape), std::move(values), false));
}

Tensor Tensor::parameter(Shape shape, std::vector<double> values) {
  return Tensor(leaf(std::move(shape), std::move(values), true));
}

Tensor Tensor::zeros(Shape shape, bool requires_grad) {
  const std::size_t n = ad::numel(shape);
  return Tensor(leaf(std::move(shape), std::vector<double>(n, 0.0), requires_grad));
}

double Tensor::item() const {
  if (numel() != 1) throw ShapeError("item: tensor has " + std::to_string(numel()) + " elements");
  return node_->value[0];
}

void Tensor::zero_grad() { std::fill(node_->grad.begin(), node_->grad.end(), 0.0); }

Tape::Tape(const Tensor& root) : root_(root.shared()) {
  if (!root_) throw InvalidArgument("tape: undefined root");
  // Iterative post-order DFS.
  std::unordered_set<Node*> seen;
  std::vector<std::pair<Node*, std::size_t>> stack{{root_.get(), 0}};
  seen.insert(root_.get());
  while (!stack.empty()) {
    auto& [node, next] = stack.back();
    if (next < node->inputs.size()) {
      Node* child = node->inputs[next++].get();
      if (child->requires_grad && seen.insert(child).second) stack.emplace_back(child, 0);
    } else {
      order_.push_back(node);
      stack.pop_back();
    }
  }
}

void Tape::backward() {
  if (!root_->requires_grad) throw InvalidArgument("backward: loss is detached from every parameter");
  if (root_->value.size() != 1) {
    throw ShapeError("backward: loss must be scalar, got shape " + to_string(root_->shape));
  }
  root_->grad[0] += 1.0;
  for (auto it = order_.rbegin(); it != order_.rend(); ++it) {
    Node* n = *it;
    if (n->backward) n->backward(*n);
  }
}

void Tape::clear() {
  order_.clear();
  root_.reset();
}

void backward(const Tensor& loss) {
  if (!loss.defined()) throw InvalidArgument("backward: undefined loss");
  Tape tape(loss);
  tape.backward();
}

// ---------------------------------------------------------------------------

Tensor matmul(const Tensor& a, const Tensor& b) {
  require_defined(a, "matmul");
  require_defined(b, "matmul");
  if (a.shape().size() != 2 || b.shape().size() != 2 || a.dim(1) != b.dim(0)) {
    shape_error("matmul", to_string(a.shape()) + " x " + to_string(b.shape()));
  }
  const std::size_t r = a.dim(0), k = a.dim(1), c = b.dim(1);
  std::vector<double> out(r * c);
  kernels::gemm_nn(r, c, k, a.values().data(), b.values().data(), out.data());
  return make_result("matmul", {r, c}, std::move(out), {a, b}, [r, k, c](Node& n) {
    if (needs(n, 0)) kernels::gemm_nt(r, k, c, n.grad.data(), vin(n, 1).data(), gin(n, 0).data(), true);
    if (needs(n, 1)) kernels::gemm_tn(k, c, r, vin(n, 0).data(), n.grad.data(), gin(n, 1).data(), true);
  });
}

Tensor matmul_nt(const Tensor& a, const Tensor& b) {
  require_defined(a, "matmul_nt");
  require_defined(b, "matmul_nt");
  if (a.shape().size() != 2 || b.shape().size() != 2 || a.dim(1) != b.dim(1)) {
    shape_error("matmul_nt", to_string(a.shape()) + " x " + to_string(b.shape()) + "^T");
  }
  const std::size_t r = a.dim(0), k = a.dim(1), c = b.dim(0);
  std::vector<double> out(r * c);
  kernels::gemm_nt(r, c, k, a.values().data(), b.values().data(), out.data());
  return make_result("matmul_nt", {r, c}, std::move(out), {a, b}, [r, k, c](Node& n) {
    if (needs(n, 0)) kernels::gemm_nn(r, k, c, n.grad.data(), vin(n, 1).data(), gin(n, 0).data(), true);
    if (needs(n, 1)) kernels::gemm_tn(c, k, r, n.grad.data(), vin(n, 0).data(), gin(n, 1).data(), true);
  });
}

Tensor dense(const Tensor& x, const Tensor& w, const Tensor& b) {
  require_defined(x, "dense");
  require_defined(w, "dense");
  if (w.shape().size() != 2 || x.cols() != w.dim(1)) {
    shape_error("dense", "input " + to_string(x.shape()) + " vs weight " + to_string(w.shape()));
  }
  const std::size_t r = x.rows(), in = w.dim(1), out_dim = w.dim(0);
  if (b.defined() && b.numel() != out_dim) shape_error("dense", "bias size " + std::to_string(b.numel()));
  std::vector<double> out(r * out_dim);
  kernels::gemm_nt(r, out_dim, in, x.values().data(), w.values().data(), out.data());
  if (b.defined()) {
    auto bv = b.values();
    for (std::size_t i = 0; i < r; ++i)
      for (std::size_t j = 0; j < out_dim; ++j) out[i * out_dim + j] += bv[j];
  }
  Shape shape = x.shape();
  if (shape.empty()) shape = {1};
  shape.back() = out_dim;
  std::vector<Tensor> inputs{x, w};
  if (b.defined()) inputs.push_back(b);
  return make_result("dense", std::move(shape), std::move(out), std::move(inputs), [r, in, out_dim](Node& n) {
    if (needs(n, 0)) kernels::gemm_nn(r, in, out_dim, n.grad.data(), vin(n, 1).data(), gin(n, 0).data(), true);
    if (needs(n, 1)) kernels::gemm_tn(out_dim, in, r, n.grad.data(), vin(n, 0).data(), gin(n, 1).data(), true);
    if (n.inputs.size() > 2 && needs(n, 2)) {
      auto& gb = gin(n, 2);
      for (std::size_t i = 0; i < r; ++i)
        for (std::size_t j = 0; j < out_dim; ++j) gb[j] += n.grad[i * out_dim + j];
    }
  });
}

namespace {

Tensor batched(const char* op, const Tensor& a, const Tensor& b, bool transpose_b) {
  require_defined(a, op);
  require_defined(b, op);
  if (a.shape().size() != 3 || b.shape().size() != 3 || a.dim(0) != b.dim(0)) {
    shape_error(op, to_string(a.shape()) + " x " + to_string(b.shape()));
  }
  const std::size_t g = a.dim(0), r = a.dim(1), k = a.dim(2);
  const std::size_t c = transpose_b ? b.dim(1) : b.dim(2);
  if ((transpose_b ? b.dim(2) : b.dim(1)) != k) shape_error(op, to_string(a.shape()) + " x " + to_string(b.shape()));
  std::vector<double> out(g * r * c);
  for (std::size_t i = 0; i < g; ++i) {
    const double* ap = a.values().data() + i * r * k;
    const double* bp = b.values().data() + i * k * c;
    if (transpose_b) {
      kernels::gemm_nt(r, c, k, ap, bp, out.data() + i * r * c);
    } else {
      kernels::gemm_nn(r, c, k, ap, bp, out.data() + i * r * c);
    }
  }
  return make_result(op, {g, r, c}, std::move(out), {a, b}, [g, r, k, c, transpose_b](Node& n) {
    for (std::size_t i = 0; i < g; ++i) {
      const double* dy = n.grad.data() + i * r * c;
      const double* ap = vin(n, 0).data() + i * r * k;
      const double* bp = vin(n, 1).data() + i * k * c;
      if (needs(n, 0)) {
        double* da = gin(n, 0).data() + i * r * k;
        if (transpose_b) {
          kernels::gemm_nn(r, k, c, dy, bp, da, true);
        } else {
          kernels::gemm_nt(r, k, c, dy, bp, da, true);
        }
      }
      if (needs(n, 1)) {
        double* db = gin(n, 1).data() + i * k * c;
        if (transpose_b) {
          kernels::gemm_tn(c, k, r, dy, ap, db, true);
        } else {
          kernels::gemm_tn(k, c, r, ap, dy, db, true);
        }
      }
    }
  });
}

}  // namespace

Tensor bmm(const Tensor& a, const Tensor& b) { return batched("bmm", a, b, false); }
Tensor bmm_nt(const Tensor& a, const Tensor& b) { return batched("bmm_nt", a, b, true); }

Tensor transpose(const Tensor& a) {
  require_defined(a, "transpose");
  if (a.shape().size() != 2) shape_error("transpose", "expects a 2-D tensor, got " + to_string(a.shape()));
  const std::size_t r = a.dim(0), c = a.dim(1);
  std::vector<double> out(r * c);
  auto av = a.values();
  for (std::size_t i = 0; i < r; ++i)
    for (std::size_t j = 0; j < c; ++j) out[j * r + i] = av[i * c + j];
  return make_result("transpose", {c, r}, std::move(out), {a}, [r, c](Node& n) {
    auto& g = gin(n, 0);
    for (std::size_t i = 0; i < r; ++i)
      for (std::size_t j = 0; j < c; ++j) g[i * c + j] += n.grad[j * r + i];
  });
}

// ---------------------------------------------------------------------------

Tensor add(const Tensor& a, const Tensor& b) {
  same_shape(a, b, "add");
  std::vector<double> out(a.numel());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = a.values()[i] + b.values()[i];
  return make_result("add", a.shape(), std::move(out), {a, b}, [](Node& n) {
    for (std::size_t k = 0; k < 2; ++k) {
      if (!needs(n, k)) continue;
      auto& g = gin(n, k);
      for (std::size_t i = 0; i < g.size(); ++i) g[i] += n.grad[i];
    }
  });
}

Tensor sub(const Tensor& a, const Tensor& b) {
  same_shape(a, b, "sub");
  std::vector<double> out(a.numel());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = a.values()[i] - b.values()[i];
  return make_result("sub", a.shape(), std::move(out), {a, b}, [](Node& n) {
    if (needs(n, 0)) {
      auto& g = gin(n, 0);
      for (std::size_t i = 0; i < g.size(); ++i) g[i] += n.grad[i];
    }
    if (needs(n, 1)) {
      auto& g = gin(n, 1);
      for (std::size_t i = 0; i < g.size(); ++i) g[i] -= n.grad[i];
    }
  });
}

Tensor mul(const Tensor& a, const Tensor& b) {
  same_shape(a, b, "mul");
  std::vector<double> out(a.numel());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = a.values()[i] * b.values()[i];
  return make_result("mul", a.shape(), std::move(out), {a, b}, [](Node& n) {
    if (needs(n, 0)) {
      auto& g = gin(n, 0);
      const auto& o = vin(n, 1);
      for (std::size_t i = 0; i < g.size(); ++i) g[i] += n.grad[i] * o[i];
    }
    if (needs(n, 1)) {
      auto& g = gin(n, 1);
      const auto& o = vin(n, 0);
      for (std::size_t i = 0; i < g.size(); ++i) g[i] += n.grad[i] * o[i];
    }
  });
}

Tensor scale(const Tensor& a, double s) {
  return unary("scale", a, [s](double x) { return s * x; }, [s](double, double) { return s; });
}

Tensor add_bias(const Tensor& a, const Tensor& bias) {
  require_defined(a, "add_bias");
  require_defined(bias, "add_bias");
  const std::size_t r = a.rows(), c = a.cols();
  if (bias.numel() != c) shape_error("add_bias", "bias size " + std::to_string(bias.numel()) + " vs cols " + std::to_string(c));
  std::vector<double> out(a.values().begin(), a.values().end());
  for (std::size_t i = 0; i < r; ++i)
    for (std::size_t j = 0; j < c; ++j) out[i * c + j] += bias.values()[j];
  return make_result("add_bias", a.shape(), std::move(out), {a, bias}, [r, c](Node& n) {
    if (needs(n, 0)) {
      auto& g = gin(n, 0);
      for (std::size_t i = 0; i < g.size(); ++i) g[i] += n.grad[i];
    }
    if (needs(n, 1)) {
      auto& g = gin(n, 1);
      for (std::size_t i = 0; i < r; ++i)
        for (std::size_t j = 0; j < c; ++j) g[j] += n.grad[i * c + j];
    }
  });
}

Tensor mul_row(const Tensor& a, const Tensor& gvec) {
  require_defined(a, "mul_row");
  require_defined(gvec, "mul_row");
  const std::size_t r = a.rows(), c = a.cols();
  if (gvec.numel() != c) shape_error("mul_row", "gain size " + std::to_string(gvec.numel()) + " vs cols " + std::to_string(c));
  std::vector<double> out(a.numel());
  for (std::size_t i = 0; i < r; ++i)
    for (std::size_t j = 0; j < c; ++j) out[i * c + j] = a.values()[i * c + j] * gvec.values()[j];
  return make_result("mul_row", a.shape(), std::move(out), {a, gvec}, [r, c](Node& n) {
    const auto& av = vin(n, 0);
    const auto& gv = vin(n, 1);
    if (needs(n, 0)) {
      auto& g = gin(n, 0);
      for (std::size_t i = 0; i < r; ++i)
        for (std::size_t j = 0; j < c; ++j) g[i * c + j] += n.grad[i * c + j] * gv[j];
    }
    if (needs(n, 1)) {
      auto& g = gin(n, 1);
      for (std::size_t i = 0; i < r; ++i)
        for (std::size_t j = 0; j < c; ++j) g[j] += n.grad[i * c + j] * av[i * c + j];
    }
  });
}

Tensor mul_col(const Tensor& a, const Tensor& s) {
  require_defined(a, "mul_col");
  require_defined(s, "mul_col");
  const std::size_t r = a.rows(), c = a.cols();
  if (s.numel() != r) shape_error("mul_col", "scale size " + std::to_string(s.numel()) + " vs rows " + std::to_string(r));
  std::vector<double> out(a.numel());
  for (std::size_t i = 0; i < r; ++i)
    for (std::size_t j = 0; j < c; ++j) out[i * c + j] = a.values()[i * c + j] * s.values()[i];
  return make_result("mul_col", a.shape(), std::move(out), {a, s}, [r, c](Node& n) {
    const auto& av = vin(n, 0);
    const auto& sv = vin(n, 1);
    if (needs(n, 0)) {
      auto& g = gin(n, 0);
      for (std::size_t i = 0; i < r; ++i)
        for (std::size_t j = 0; j < c; ++j) g[i * c + j] += n.grad[i * c + j] * sv[i];
    }
    if (needs(n, 1)) {
      auto& g = gin(n, 1);
      for (std::size_t i = 0; i < r; ++i)
        for (std::size_t j = 0; j < c; ++j) g[i] += n.grad[i * c + j] * av[i * c + j];
    }
  });
}

Tensor sigmoid(const Tensor& a) {
  return unary(
      "sigmoid", a,
      [](double x) {
        // Split on sign so exp never overflows.
        if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
        const double e = std::exp(x);
        return e / (1.0 + e);
      },
      [](double, double y) { return y * (1.0 - y); });
}

Tensor tanh(const Tensor& a) {
  return unary("tanh", a, [](double x) { return std::tanh(x); }, [](double, double y) { return 1.0 - y * y; });
}

Tensor relu(const Tensor& a) {
  return unary("relu", a, [](double x) { return x > 0.0 ? x : 0.0; }, [](double x, double) { return x > 0.0 ? 1.0 : 0.0; });
}

// ---------------------------------------------------------------------------

Tensor softmax_rows(const Tensor& a) {
  require_defined(a, "softmax");
  const std::size_t r = a.rows(), c = a.cols();
  if (c == 0) shape_error("softmax", "empty rows");
  std::vector<double> out(a.numel());
  auto av = a.values();
  for (std::size_t i = 0; i < r; ++i) {
    const double* x = av.data() + i * c;
    double* y = out.data() + i * c;
    const double mx = *std::max_element(x, x + c);
    double s = 0.0;
    for (std::size_t j = 0; j < c; ++j) s += (y[j] = std::exp(x[j] - mx));
    for (std::size_t j = 0; j < c; ++j) y[j] /= s;
  }
  return make_result("softmax", a.shape(), std::move(out), {a}, [r, c](Node& n) {
    auto& g = gin(n, 0);
    for (std::size_t i = 0; i < r; ++i) {
      const double* y = n.value.data() + i * c;
      const double* dy = n.grad.data() + i * c;
      double dot = 0.0;
      for (std::size_t j = 0; j < c; ++j) dot += dy[j] * y[j];
      for (std::size_t j = 0; j < c; ++j) g[i * c + j] += y[j] * (dy[j] - dot);
    }
  });
}

Tensor softmax(const Tensor& a, int axis) {
  if (axis == 1 || axis == -1) return softmax_rows(a);
  if (axis == 0) return transpose(softmax_rows(transpose(a)));
  throw InvalidArgument("softmax: axis must be 0 or 1");
}

Tensor layer_norm_rows(const Tensor& a, double eps) {
  require_defined(a, "layer_norm");
  const std::size_t r = a.rows(), c = a.cols();
  if (c == 0) shape_error("layer_norm", "empty rows");
  std::vector<double> out(a.numel());
  std::vector<double> inv_std(r);
  auto av = a.values();
  for (std::size_t i = 0; i < r; ++i) {
    const double* x = av.data() + i * c;
    double mean = 0.0;
    for (std::size_t j = 0; j < c; ++j) mean += x[j];
    mean /= static_cast<double>(c);
    double var = 0.0;
    for (std::size_t j = 0; j < c; ++j) var += (x[j] - mean) * (x[j] - mean);
    var /= static_cast<double>(c);
    const double is = 1.0 / std::sqrt(var + eps);
    inv_std[i] = is;
    for (std::size_t j = 0; j < c; ++j) out[i * c + j] = (x[j] - mean) * is;
  }
  return make_result("layer_norm", a.shape(), std::move(out), {a}, [r, c, inv_std = std::move(inv_std)](Node& n) {
    auto& g = gin(n, 0);
    const double inv_c = 1.0 / static_cast<double>(c);
    for (std::size_t i = 0; i < r; ++i) {
      const double* y = n.value.data() + i * c;
      const double* dy = n.grad.data() + i * c;
      double sum_dy = 0.0, sum_dy_y = 0.0;
      for (std::size_t j = 0; j < c; ++j) {
        sum_dy += dy[j];
        sum_dy_y += dy[j] * y[j];
      }
      for (std::size_t j = 0; j < c; ++j) {
        g[i * c + j] += inv_std[i] * (dy[j] - inv_c * sum_dy - y[j] * inv_c * sum_dy_y);
      }
    }
  });
}

// ---------------------------------------------------------------------------

Tensor conv1d(const Tensor& x, const Tensor& w, const Tensor& b, std::size_t stride, std::size_t padding) {
  require_defined(x, "conv1d");
  require_defined(w, "conv1d");
  if (x.shape().size() != 3 || w.shape().size() != 3 || x.dim(1) != w.dim(1)) {
    shape_error("conv1d", "input " + to_string(x.shape()) + " vs kernel " + to_string(w.shape()));
  }
  if (stride == 0) shape_error("conv1d", "stride must be positive");
  kernels::Conv1dShape s{x.dim(0), x.dim(1), x.dim(2), w.dim(0), w.dim(2), stride, padding};
  if (s.kernel == 0 || s.length + 2 * padding < s.kernel) {
    shape_error("conv1d", "kernel " + std::to_string(s.kernel) + " longer than input " + std::to_string(s.length));
  }
  if (b.defined() && b.numel() != s.out_channels) shape_error("conv1d", "bias size mismatch");
  const std::size_t lout = s.out_length();
  std::vector<double> out(s.batch * s.out_channels * lout);
  kernels::conv1d_forward(s, x.values().data(), w.values().data(), b.defined() ? b.values().data() : nullptr,
                          out.data());
  std::vector<Tensor> inputs{x, w};
  if (b.defined()) inputs.push_back(b);
  return make_result("conv1d", {s.batch, s.out_channels, lout}, std::move(out), std::move(inputs), [s, lout](Node& n) {
    if (needs(n, 0)) kernels::conv1d_backward_input(s, n.grad.data(), vin(n, 1).data(), gin(n, 0).data());
    if (needs(n, 1)) kernels::conv1d_backward_weight(s, n.grad.data(), vin(n, 0).data(), gin(n, 1).data());
    if (n.inputs.size() > 2 && needs(n, 2)) {
      auto& gb = gin(n, 2);
      for (std::size_t bi = 0; bi < s.batch; ++bi)
        for (std::size_t co = 0; co < s.out_channels; ++co) {
          const double* dy = n.grad.data() + (bi * s.out_channels + co) * lout;
          for (std::size_t t = 0; t < lout; ++t) gb[co] += dy[t];
        }
    }
  });
}

// ---------------------------------------------------------------------------

Tensor reshape(const Tensor& a, Shape shape) {
  require_defined(a, "reshape");
  if (numel(shape) != a.numel()) {
    shape_error("reshape", to_string(a.shape()) + " -> " + to_string(shape));
  }
  std::vector<double> out(a.values().begin(), a.values().end());
  return make_result("reshape", std::move(shape), std::move(out), {a}, [](Node& n) {
    auto& g = gin(n, 0);
    for (std::size_t i = 0; i < g.size(); ++i) g[i] += n.grad[i];
  });
}

Tensor concat_cols(const std::vector<Tensor>& parts) {
  if (parts.empty()) shape_error("concat_cols", "no inputs");
  const std::size_t r = parts.front().rows();
  std::vector<std::size_t> widths;
  std::size_t total = 0;
  for (const auto& p : parts) {
    require_defined(p, "concat_cols");
    if (p.rows() != r) shape_error("concat_cols", "row counts differ");
    widths.push_back(p.cols());
    total += p.cols();
  }
  std::vector<double> out(r * total);
  std::size_t off = 0;
  for (std::size_t k = 0; k < parts.size(); ++k) {
    auto pv = parts[k].values();
    for (std::size_t i = 0; i < r; ++i)
      std::copy_n(pv.data() + i * widths[k], widths[k], out.data() + i * total + off);
    off += widths[k];
  }
  return make_result("concat_cols", {r, total}, std::move(out), parts, [r, total, widths](Node& n) {
    std::size_t o = 0;
    for (std::size_t k = 0; k < widths.size(); ++k) {
      if (needs(n, k)) {
        auto& g = gin(n, k);
        for (std::size_t i = 0; i < r; ++i)
          for (std::size_t j = 0; j < widths[k]; ++j) g[i * widths[k] + j] += n.grad[i * total + o + j];
      }
      o += widths[k];
    }
  });
}

Tensor concat_rows(const std::vector<Tensor>& parts) {
  if (parts.empty()) shape_error("concat_rows", "no inputs");
  const std::size_t c = parts.front().cols();
  std::size_t r = 0;
  for (const auto& p : parts) {
    require_defined(p, "concat_rows");
    if (p.cols() != c) shape_error("concat_rows", "column counts differ");
    r += p.rows();
  }
  std::vector<double> out;
  out.reserve(r * c);
  for (const auto& p : parts) out.insert(out.end(), p.values().begin(), p.values().end());
  return make_result("concat_rows", {r, c}, std::move(out), parts, [](Node& n) {
    std::size_t o = 0;
    for (std::size_t k = 0; k < n.inputs.size(); ++k) {
      const std::size_t len = n.inputs[k]->value.size();
      if (needs(n, k)) {
        auto& g = gin(n, k);
        for (std::size_t i = 0; i < len; ++i) g[i] += n.grad[o + i];
      }
      o += len;
    }
  });
}

Tensor slice_cols(const Tensor& a, std::size_t start, std::size_t len) {
  require_defined(a, "slice_cols");
  const std::size_t r = a.rows(), c = a.cols();
  if (start + len > c || len == 0) shape_error("slice_cols", "range out of bounds for " + to_string(a.shape()));
  std::vector<double> out(r * len);
  for (std::size_t i = 0; i < r; ++i) std::copy_n(a.values().data() + i * c + start, len, out.data() + i * len);
  return make_result("slice_cols", {r, len}, std::move(out), {a}, [r, c, start, len](Node& n) {
    auto& g = gin(n, 0);
    for (std::size_t i = 0; i < r; ++i)
      for (std::size_t j = 0; j < len; ++j) g[i * c + start + j] += n.grad[i * len + j];
  });
}

Tensor slice_rows(const Tensor& a, std::size_t start, std::size_t len) {
  require_defined(a, "slice_rows");
  const std::size_t r = a.rows(), c = a.cols();
  if (start + len > r || len == 0) shape_error("slice_rows", "range out of bounds for " + to_string(a.shape()));
  std::vector<double> out(a.values().begin() + static_cast<std::ptrdiff_t>(start * c),
                          a.values().begin() + static_cast<std::ptrdiff_t>((start + len) * c));
  return make_result("slice_rows", {len, c}, std::move(out), {a}, [c, start](Node& n) {
    auto& g = gin(n, 0);
    for (std::size_t i = 0; i < n.grad.size(); ++i) g[start * c + i] += n.grad[i];
  });
}

Tensor repeat_rows(const Tensor& a, std::size_t times) {
  require_defined(a, "repeat_rows");
  if (times == 0) shape_error("repeat_rows", "times must be positive");
  const std::size_t r = a.rows(), c = a.cols();
  std::vector<double> out(r * times * c);
  for (std::size_t i = 0; i < r; ++i)
    for (std::size_t t = 0; t < times; ++t) std::copy_n(a.values().data() + i * c, c, out.data() + (i * times + t) * c);
  return make_result("repeat_rows", {r * times, c}, std::move(out), {a}, [r, c, times](Node& n) {
    auto& g = gin(n, 0);
    for (std::size_t i = 0; i < r; ++i)
      for (std::size_t t = 0; t < times; ++t)
        for (std::size_t j = 0; j < c; ++j) g[i * c + j] += n.grad[(i * times + t) * c + j];
  });
}

Tensor swap_middle_axes(const Tensor& a, std::size_t d0, std::size_t d1, std::size_t d2, std::size_t d3) {
  require_defined(a, "swap_middle_axes");
  if (d0 * d1 * d2 * d3 != a.numel()) shape_error("swap_middle_axes", "dimensions do not match " + to_string(a.shape()));
  std::vector<double> out(a.numel());
  auto src = [=](std::size_t i, std::size_t j, std::size_t k) { return ((i * d1 + j) * d2 + k) * d3; };
  auto dst = [=](std::size_t i, std::size_t j, std::size_t k) { return ((i * d2 + k) * d1 + j) * d3; };
  for (std::size_t i = 0; i < d0; ++i)
    for (std::size_t j = 0; j < d1; ++j)
      for (std::size_t k = 0; k < d2; ++k) std::copy_n(a.values().data() + src(i, j, k), d3, out.data() + dst(i, j, k));
  return make_result("swap_middle_axes", {d0, d2, d1, d3}, std::move(out), {a}, [=](Node& n) {
    auto& g = gin(n, 0);
    for (std::size_t i = 0; i < d0; ++i)
      for (std::size_t j = 0; j < d1; ++j)
        for (std::size_t k = 0; k < d2; ++k)
          for (std::size_t l = 0; l < d3; ++l) g[src(i, j, k) + l] += n.grad[dst(i, j, k) + l];
  });
}

// ---------------------------------------------------------------------------

Tensor mean_cols(const Tensor& a) {
  require_defined(a, "mean_cols");
  const std::size_t r = a.rows(), c = a.cols();
  std::vector<double> out(r, 0.0);
  for (std::size_t i = 0; i < r; ++i) {
    double s = 0.0;
    for (std::size_t j = 0; j < c; ++j) s += a.values()[i * c + j];
    out[i] = s / static_cast<double>(c);
  }
  return make_result("mean_cols", {r, 1}, std::move(out), {a}, [r, c](Node& n) {
    auto& g = gin(n, 0);
    const double inv = 1.0 / static_cast<double>(c);
    for (std::size_t i = 0; i < r; ++i)
      for (std::size_t j = 0; j < c; ++j) g[i * c + j] += n.grad[i] * inv;
  });
}

Tensor sum_all(const Tensor& a) {
  require_defined(a, "sum_all");
  double s = 0.0;
  for (double v : a.values()) s += v;
  return make_result("sum_all", {1}, {s}, {a}, [](Node& n) {
    auto& g = gin(n, 0);
    for (auto& v : g) v += n.grad[0];
  });
}

Tensor mean_all(const Tensor& a) { return scale(sum_all(a), 1.0 / static_cast<double>(a.numel())); }

Tensor mse_loss(const Tensor& pred, const Tensor& target) {
  same_shape(pred, target, "mse_loss");
  const std::size_t n = pred.numel();
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double d = pred.values()[i] - target.values()[i];
    s += d * d;
  }
  return make_result("mse_loss", {1}, {s / static_cast<double>(n)}, {pred, target}, [n](Node& node) {
    const double k = 2.0 * node.grad[0] / static_cast<double>(n);
    const auto& p = vin(node, 0);
    const auto& t = vin(node, 1);
    if (needs(node, 0)) {
      auto& g = gin(node, 0);
      for (std::size_t i = 0; i < n; ++i) g[i] += k * (p[i] - t[i]);
    }
    if (needs(node, 1)) {
      auto& g = gin(node, 1);
      for (std::size_t i = 0; i < n; ++i) g[i] -= k * (p[i] - t[i]);
    }
  });
}

// ---------------------------------------------------------------------------

std::uint64_t derive_seed(std::uint64_t seed, std::string_view name) {
  std::uint64_t h = 1469598103934665603ull;  // FNV-1a
  for (unsigned char ch : name) {
    h ^= ch;
    h *= 1099511628211ull;
  }
  // splitmix64 finalizer
  std::uint64_t z = h ^ (seed + 0x9e3779b97f4a7c15ull);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

Tensor uniform_parameter(Shape shape, std::size_t fan_in, std::uint64_t seed, std::string_view name) {
  const double bound = 1.0 / std::sqrt(static_cast<double>(std::max<std::size_t>(fan_in, 1)));
  std::mt19937_64 rng(derive_seed(seed, name));
  std::uniform_real_distribution<double> dist(-bound, bound);
  std::vector<double> v(numel(shape));
  for (auto& x : v) x = dist(rng);
  return Tensor::parameter(std::move(shape), std::move(v));
}

}  // namespace trendfx::ad
