#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "unmix/types.hpp"

namespace unmix::diff {

// Dense tensor of rank 0..4, row-major. Rank-0 is a scalar with numel 1.
struct Shape {
  std::array<int, 4> dims{1, 1, 1, 1};
  int rank = 0;

  Shape() = default;
  Shape(std::initializer_list<int> d) {
    rank = static_cast<int>(d.size());
    if (rank > 4) fail(ErrorKind::Param, "tensor rank above 4");
    int i = 0;
    for (int v : d) dims[static_cast<size_t>(i++)] = v;
  }
  long numel() const {
    long n = 1;
    for (int i = 0; i < rank; ++i) n *= dims[static_cast<size_t>(i)];
    return n;
  }
  int operator[](int i) const { return dims[static_cast<size_t>(i)]; }
  bool operator==(const Shape& o) const { return rank == o.rank && dims == o.dims; }
  bool operator!=(const Shape& o) const { return !(*this == o); }
  std::string str() const;
};

struct Tensor {
  Shape shape;
  std::vector<double> v;

  Tensor() = default;
  explicit Tensor(Shape s) : shape(s), v(static_cast<size_t>(s.numel()), 0.0) {}
  static Tensor scalar(double x) {
    Tensor t{Shape{}};
    t.v[0] = x;
    return t;
  }
  long numel() const { return shape.numel(); }
  double& operator[](long i) { return v[static_cast<size_t>(i)]; }
  double operator[](long i) const { return v[static_cast<size_t>(i)]; }

  // rank-3 (c,h,w) and rank-4 (o,i,h,w) indexers
  double& at3(int c, int h, int w) {
    return v[(static_cast<size_t>(c) * shape[1] + h) * shape[2] + w];
  }
  double at3(int c, int h, int w) const {
    return v[(static_cast<size_t>(c) * shape[1] + h) * shape[2] + w];
  }
  double& at4(int o, int i, int h, int w) {
    return v[((static_cast<size_t>(o) * shape[1] + i) * static_cast<size_t>(shape[2]) + h) *
                 shape[3] +
             w];
  }
  double at4(int o, int i, int h, int w) const {
    return v[((static_cast<size_t>(o) * shape[1] + i) * static_cast<size_t>(shape[2]) + h) *
                 shape[3] +
             w];
  }
};

class Node;
using NodePtr = std::shared_ptr<Node>;

// One value in the differentiation graph. Values are computed eagerly when
// an operation node is built; backward() fills `grad` for every node that
// requires it, visiting each node exactly once in reverse topological order.
class Node {
public:
  Tensor value;
  Tensor grad;  // same shape as value, allocated by backward()
  bool requires_grad = false;
  std::vector<NodePtr> parents;
  std::function<void(Node&)> backward_fn;  // accumulates into parents' grads
  std::string label;

  const Shape& shape() const { return value.shape; }
};

NodePtr constant(Tensor value, std::string label = "");
NodePtr leaf(Tensor value, std::string label = "");  // requires_grad = true

// --- primitive operator set -------------------------------------------------
NodePtr add(const NodePtr& a, const NodePtr& b);
NodePtr sub(const NodePtr& a, const NodePtr& b);
NodePtr mul(const NodePtr& a, const NodePtr& b);            // elementwise, same shape
NodePtr mul_planes(const NodePtr& x, const NodePtr& m);     // x (...,h,w) * m (h,w) broadcast
NodePtr scale(const NodePtr& s, const NodePtr& x);          // scalar node * tensor
NodePtr scale_const(double c, const NodePtr& x);
NodePtr relu(const NodePtr& x);
NodePtr matmul(const NodePtr& a, const NodePtr& b);         // (m,n) x (n,p)
NodePtr fully_connected(const NodePtr& w, const NodePtr& x);  // (out,in) x (in)
// multi-channel 2D convolution, odd square kernel, reflect padding, stride 1
NodePtr conv2d(const NodePtr& x, const NodePtr& kernel);    // x (Ci,H,W), k (Co,Ci,S,S)
NodePtr softmax_channels(const NodePtr& x);                 // softmax over dim 0 of (C,H,W)
NodePtr global_avg_pool(const NodePtr& x);                  // (C,H,W) -> (C)
NodePtr zero_pad_center(const NodePtr& x, int target);      // (...,k,k) -> (...,S,S)
NodePtr reshape(const NodePtr& x, Shape target);            // same numel
NodePtr slice_plane(const NodePtr& x, int index);           // (L,S,S) -> (S,S)
NodePtr mse_scalar(const NodePtr& a, const NodePtr& b);     // mean squared difference

// Positional softmax over kernel branches: canvases[l] is (S,S); live[l]
// marks the centered k_l x k_l region. At each position the weights of the
// live branches sum to 1; dead positions are exactly 0. Output is (L,S,S).
NodePtr softmaxpro(const std::vector<NodePtr>& canvases, const std::vector<Tensor>& live);

Tensor live_mask(int kernel_size, int canvas_size);

// Reverse-mode sweep from a scalar root.
void backward(const NodePtr& root);

// --- finite-difference verification ------------------------------------------
struct GradCheckEntry {
  std::string name;
  double max_rel_error = 0.0;
};

struct GradCheckReport {
  std::vector<GradCheckEntry> entries;
  double max_rel_error() const;
  bool pass(double tolerance) const;
};

// Builds the loss twice per probed coordinate; `build` must be a pure
// function of `values` and, when `params` is non-null, report its leaf nodes
// there in the same order as `values`.
using LossBuilder =
    std::function<NodePtr(const std::vector<Tensor>& values, std::vector<NodePtr>* params)>;

GradCheckReport grad_check(const std::vector<Tensor>& values, const std::vector<std::string>& names,
                           const LossBuilder& build, double step = 1e-6,
                           int max_coords_per_tensor = 200);

}  // namespace unmix::diff
