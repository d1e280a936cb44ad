#include "unmix/diff.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <unordered_set>

#include <Eigen/Dense>

#include "unmix/threads.hpp"

namespace unmix::diff {

std::string Shape::str() const {
  std::ostringstream os;
  os << "(";
  for (int i = 0; i < rank; ++i) os << (i ? "," : "") << dims[static_cast<size_t>(i)];
  os << ")";
  return os.str();
}

namespace {

using RowMajor = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MapRM = Eigen::Map<RowMajor>;
using MapCRM = Eigen::Map<const RowMajor>;

int reflect(int i, int n) {
  if (n == 1) return 0;
  while (i < 0 || i >= n) {
    if (i < 0) i = -i - 1;
    if (i >= n) i = 2 * n - 1 - i;
  }
  return i;
}

NodePtr make_node(Tensor value, std::vector<NodePtr> parents,
                  std::function<void(Node&)> backward_fn) {
  auto node = std::make_shared<Node>();
  node->value = std::move(value);
  node->parents = std::move(parents);
  for (const NodePtr& p : node->parents)
    if (p->requires_grad) node->requires_grad = true;
  if (node->requires_grad) node->backward_fn = std::move(backward_fn);
  return node;
}

void require_same_shape(const NodePtr& a, const NodePtr& b, const char* op) {
  if (a->shape() != b->shape())
    fail(ErrorKind::Param, std::string(op) + ": shape mismatch " + a->shape().str() + " vs " +
                               b->shape().str());
}

void add_into(Tensor& grad, const Tensor& delta) {
  for (long i = 0; i < delta.numel(); ++i) grad[i] += delta[i];
}

}  // namespace

NodePtr constant(Tensor value, std::string label) {
  auto node = std::make_shared<Node>();
  node->value = std::move(value);
  node->label = std::move(label);
  return node;
}

NodePtr leaf(Tensor value, std::string label) {
  auto node = std::make_shared<Node>();
  node->value = std::move(value);
  // pre-sized so leaves cut off from the loss read as zero gradient
  node->grad = Tensor{node->value.shape};
  node->requires_grad = true;
  node->label = std::move(label);
  return node;
}

NodePtr add(const NodePtr& a, const NodePtr& b) {
  require_same_shape(a, b, "add");
  Tensor out = a->value;
  add_into(out, b->value);
  return make_node(std::move(out), {a, b}, [](Node& n) {
    if (n.parents[0]->requires_grad) add_into(n.parents[0]->grad, n.grad);
    if (n.parents[1]->requires_grad) add_into(n.parents[1]->grad, n.grad);
  });
}

NodePtr sub(const NodePtr& a, const NodePtr& b) {
  require_same_shape(a, b, "sub");
  Tensor out = a->value;
  for (long i = 0; i < out.numel(); ++i) out[i] -= b->value[i];
  return make_node(std::move(out), {a, b}, [](Node& n) {
    if (n.parents[0]->requires_grad) add_into(n.parents[0]->grad, n.grad);
    if (n.parents[1]->requires_grad)
      for (long i = 0; i < n.grad.numel(); ++i) n.parents[1]->grad[i] -= n.grad[i];
  });
}

NodePtr mul(const NodePtr& a, const NodePtr& b) {
  require_same_shape(a, b, "mul");
  Tensor out = a->value;
  for (long i = 0; i < out.numel(); ++i) out[i] *= b->value[i];
  return make_node(std::move(out), {a, b}, [](Node& n) {
    Node& a = *n.parents[0];
    Node& b = *n.parents[1];
    if (a.requires_grad)
      for (long i = 0; i < n.grad.numel(); ++i) a.grad[i] += n.grad[i] * b.value[i];
    if (b.requires_grad)
      for (long i = 0; i < n.grad.numel(); ++i) b.grad[i] += n.grad[i] * a.value[i];
  });
}

NodePtr mul_planes(const NodePtr& x, const NodePtr& m) {
  const Shape& xs = x->shape();
  const Shape& ms = m->shape();
  if (ms.rank != 2 || xs.rank < 2 || xs[xs.rank - 2] != ms[0] || xs[xs.rank - 1] != ms[1])
    fail(ErrorKind::Param, "mul_planes: trailing dims of " + xs.str() + " must match " + ms.str());
  const long plane = static_cast<long>(ms[0]) * ms[1];
  const long planes = xs.numel() / plane;
  Tensor out = x->value;
  for (long p = 0; p < planes; ++p)
    for (long i = 0; i < plane; ++i) out[p * plane + i] *= m->value[i];
  return make_node(std::move(out), {x, m}, [plane, planes](Node& n) {
    Node& x = *n.parents[0];
    Node& m = *n.parents[1];
    if (x.requires_grad)
      for (long p = 0; p < planes; ++p)
        for (long i = 0; i < plane; ++i) x.grad[p * plane + i] += n.grad[p * plane + i] * m.value[i];
    if (m.requires_grad)
      for (long p = 0; p < planes; ++p)
        for (long i = 0; i < plane; ++i) m.grad[i] += n.grad[p * plane + i] * x.value[p * plane + i];
  });
}

NodePtr scale(const NodePtr& s, const NodePtr& x) {
  if (s->shape().rank != 0) fail(ErrorKind::Param, "scale: first operand must be scalar");
  Tensor out = x->value;
  const double c = s->value[0];
  for (long i = 0; i < out.numel(); ++i) out[i] *= c;
  return make_node(std::move(out), {s, x}, [](Node& n) {
    Node& s = *n.parents[0];
    Node& x = *n.parents[1];
    if (s.requires_grad) {
      double acc = 0.0;
      for (long i = 0; i < n.grad.numel(); ++i) acc += n.grad[i] * x.value[i];
      s.grad[0] += acc;
    }
    if (x.requires_grad) {
      const double c = s.value[0];
      for (long i = 0; i < n.grad.numel(); ++i) x.grad[i] += c * n.grad[i];
    }
  });
}

NodePtr scale_const(double c, const NodePtr& x) {
  Tensor out = x->value;
  for (long i = 0; i < out.numel(); ++i) out[i] *= c;
  return make_node(std::move(out), {x}, [c](Node& n) {
    if (n.parents[0]->requires_grad)
      for (long i = 0; i < n.grad.numel(); ++i) n.parents[0]->grad[i] += c * n.grad[i];
  });
}

NodePtr relu(const NodePtr& x) {
  Tensor out = x->value;
  for (long i = 0; i < out.numel(); ++i) out[i] = std::max(out[i], 0.0);
  return make_node(std::move(out), {x}, [](Node& n) {
    Node& x = *n.parents[0];
    if (!x.requires_grad) return;
    for (long i = 0; i < n.grad.numel(); ++i)
      if (x.value[i] > 0.0) x.grad[i] += n.grad[i];
  });
}

NodePtr matmul(const NodePtr& a, const NodePtr& b) {
  const Shape& as = a->shape();
  const Shape& bs = b->shape();
  if (as.rank != 2 || bs.rank != 2 || as[1] != bs[0])
    fail(ErrorKind::Param, "matmul: incompatible shapes " + as.str() + " x " + bs.str());
  const int m = as[0], k = as[1], p = bs[1];
  Tensor out{Shape{m, p}};
  MapRM(out.v.data(), m, p) =
      MapCRM(a->value.v.data(), m, k) * MapCRM(b->value.v.data(), k, p);
  return make_node(std::move(out), {a, b}, [m, k, p](Node& n) {
    Node& a = *n.parents[0];
    Node& b = *n.parents[1];
    MapCRM g(n.grad.v.data(), m, p);
    if (a.requires_grad)
      MapRM(a.grad.v.data(), m, k) += g * MapCRM(b.value.v.data(), k, p).transpose();
    if (b.requires_grad)
      MapRM(b.grad.v.data(), k, p) += MapCRM(a.value.v.data(), m, k).transpose() * g;
  });
}

NodePtr fully_connected(const NodePtr& w, const NodePtr& x) {
  const Shape& ws = w->shape();
  const Shape& xs = x->shape();
  if (ws.rank != 2 || xs.rank != 1 || ws[1] != xs[0])
    fail(ErrorKind::Param, "fully_connected: incompatible shapes " + ws.str() + " x " + xs.str());
  const int out_n = ws[0], in_n = ws[1];
  Tensor out{Shape{out_n}};
  Eigen::Map<Eigen::VectorXd>(out.v.data(), out_n) =
      MapCRM(w->value.v.data(), out_n, in_n) *
      Eigen::Map<const Eigen::VectorXd>(x->value.v.data(), in_n);
  return make_node(std::move(out), {w, x}, [out_n, in_n](Node& n) {
    Node& w = *n.parents[0];
    Node& x = *n.parents[1];
    Eigen::Map<const Eigen::VectorXd> g(n.grad.v.data(), out_n);
    if (w.requires_grad)
      MapRM(w.grad.v.data(), out_n, in_n) +=
          g * Eigen::Map<const Eigen::VectorXd>(x.value.v.data(), in_n).transpose();
    if (x.requires_grad)
      Eigen::Map<Eigen::VectorXd>(x.grad.v.data(), in_n) +=
          MapCRM(w.value.v.data(), out_n, in_n).transpose() * g;
  });
}

namespace {

void conv2d_forward(const Tensor& x, const Tensor& k, Tensor& y) {
  const int ci_n = x.shape[0], h = x.shape[1], w = x.shape[2];
  const int co_n = k.shape[0], s = k.shape[2], r = s / 2;
#pragma omp parallel for collapse(2) schedule(static) num_threads(worker_threads())
  for (int co = 0; co < co_n; ++co)
    for (int i = 0; i < h; ++i) {
      double* yrow = &y.v[(static_cast<size_t>(co) * h + i) * w];
      for (int ci = 0; ci < ci_n; ++ci) {
        const double* xch = &x.v[static_cast<size_t>(ci) * h * w];
        const double* kbase = &k.v[(static_cast<size_t>(co) * ci_n + ci) * s * s];
        for (int u = 0; u < s; ++u) {
          const double* xrow = xch + static_cast<size_t>(reflect(i + u - r, h)) * w;
          const double* krow = kbase + static_cast<size_t>(u) * s;
          for (int v = 0; v < s; ++v) {
            const double wgt = krow[v];
            if (wgt == 0.0) continue;
            const int off = v - r;
            const int jlo = std::max(0, -off);
            const int jhi = std::min(w, w - off);
            for (int j = 0; j < jlo; ++j) yrow[j] += wgt * xrow[reflect(j + off, w)];
            const double* xs = xrow + off;
            for (int j = jlo; j < jhi; ++j) yrow[j] += wgt * xs[j];
            for (int j = jhi; j < w; ++j) yrow[j] += wgt * xrow[reflect(j + off, w)];
          }
        }
      }
    }
}

void conv2d_grad_kernel(const Tensor& x, const Tensor& gy, Tensor& gk, int s) {
  const int ci_n = x.shape[0], h = x.shape[1], w = x.shape[2];
  const int co_n = gy.shape[0], r = s / 2;
#pragma omp parallel for collapse(2) schedule(static) num_threads(worker_threads())
  for (int co = 0; co < co_n; ++co)
    for (int ci = 0; ci < ci_n; ++ci) {
      double* gkbase = &gk.v[(static_cast<size_t>(co) * ci_n + ci) * s * s];
      const double* xch = &x.v[static_cast<size_t>(ci) * h * w];
      for (int u = 0; u < s; ++u)
        for (int v = 0; v < s; ++v) {
          const int off = v - r;
          const int jlo = std::max(0, -off);
          const int jhi = std::min(w, w - off);
          double acc = 0.0;
          for (int i = 0; i < h; ++i) {
            const double* gyrow = &gy.v[(static_cast<size_t>(co) * h + i) * w];
            const double* xrow = xch + static_cast<size_t>(reflect(i + u - r, h)) * w;
            for (int j = 0; j < jlo; ++j) acc += gyrow[j] * xrow[reflect(j + off, w)];
            const double* xs = xrow + off;
            double inner = 0.0;
            for (int j = jlo; j < jhi; ++j) inner += gyrow[j] * xs[j];
            acc += inner;
            for (int j = jhi; j < w; ++j) acc += gyrow[j] * xrow[reflect(j + off, w)];
          }
          gkbase[static_cast<size_t>(u) * s + v] += acc;
        }
    }
}

void conv2d_grad_input(const Tensor& k, const Tensor& gy, Tensor& gx) {
  const int ci_n = gx.shape[0], h = gx.shape[1], w = gx.shape[2];
  const int co_n = k.shape[0], s = k.shape[2], r = s / 2;
#pragma omp parallel for schedule(static) num_threads(worker_threads())
  for (int ci = 0; ci < ci_n; ++ci) {
    double* gxch = &gx.v[static_cast<size_t>(ci) * h * w];
    for (int co = 0; co < co_n; ++co) {
      const double* kbase = &k.v[(static_cast<size_t>(co) * ci_n + ci) * s * s];
      for (int i = 0; i < h; ++i) {
        const double* gyrow = &gy.v[(static_cast<size_t>(co) * h + i) * w];
        for (int u = 0; u < s; ++u) {
          double* gxrow = gxch + static_cast<size_t>(reflect(i + u - r, h)) * w;
          const double* krow = kbase + static_cast<size_t>(u) * s;
          for (int v = 0; v < s; ++v) {
            const double wgt = krow[v];
            if (wgt == 0.0) continue;
            const int off = v - r;
            const int jlo = std::max(0, -off);
            const int jhi = std::min(w, w - off);
            for (int j = 0; j < jlo; ++j) gxrow[reflect(j + off, w)] += wgt * gyrow[j];
            double* gs = gxrow + off;
            for (int j = jlo; j < jhi; ++j) gs[j] += wgt * gyrow[j];
            for (int j = jhi; j < w; ++j) gxrow[reflect(j + off, w)] += wgt * gyrow[j];
          }
        }
      }
    }
  }
}

}  // namespace

NodePtr conv2d(const NodePtr& x, const NodePtr& kernel) {
  const Shape& xs = x->shape();
  const Shape& ks = kernel->shape();
  if (xs.rank != 3 || ks.rank != 4)
    fail(ErrorKind::Param, "conv2d: need input (Ci,H,W) and kernel (Co,Ci,S,S)");
  if (ks[1] != xs[0])
    fail(ErrorKind::Param, "conv2d: kernel expects " + std::to_string(ks[1]) +
                               " input channels, got " + std::to_string(xs[0]));
  if (ks[2] != ks[3] || ks[2] % 2 == 0) fail(ErrorKind::Param, "conv2d: kernel must be odd square");

  Tensor out{Shape{ks[0], xs[1], xs[2]}};
  conv2d_forward(x->value, kernel->value, out);
  const int s = ks[2];
  return make_node(std::move(out), {x, kernel}, [s](Node& n) {
    Node& x = *n.parents[0];
    Node& k = *n.parents[1];
    if (k.requires_grad) conv2d_grad_kernel(x.value, n.grad, k.grad, s);
    if (x.requires_grad) conv2d_grad_input(k.value, n.grad, x.grad);
  });
}

NodePtr softmax_channels(const NodePtr& x) {
  const Shape& xs = x->shape();
  if (xs.rank != 3) fail(ErrorKind::Param, "softmax_channels: need (C,H,W)");
  const int c = xs[0];
  const long plane = static_cast<long>(xs[1]) * xs[2];
  Tensor out = x->value;
  for (long p = 0; p < plane; ++p) {
    double mx = out[p];
    for (int ch = 1; ch < c; ++ch) mx = std::max(mx, out[ch * plane + p]);
    double sum = 0.0;
    for (int ch = 0; ch < c; ++ch) {
      double e = std::exp(out[ch * plane + p] - mx);
      out[ch * plane + p] = e;
      sum += e;
    }
    for (int ch = 0; ch < c; ++ch) out[ch * plane + p] /= sum;
  }
  return make_node(std::move(out), {x}, [c, plane](Node& n) {
    Node& x = *n.parents[0];
    if (!x.requires_grad) return;
    for (long p = 0; p < plane; ++p) {
      double dot = 0.0;
      for (int ch = 0; ch < c; ++ch) dot += n.value[ch * plane + p] * n.grad[ch * plane + p];
      for (int ch = 0; ch < c; ++ch)
        x.grad[ch * plane + p] += n.value[ch * plane + p] * (n.grad[ch * plane + p] - dot);
    }
  });
}

NodePtr global_avg_pool(const NodePtr& x) {
  const Shape& xs = x->shape();
  if (xs.rank != 3) fail(ErrorKind::Param, "global_avg_pool: need (C,H,W)");
  const int c = xs[0];
  const long plane = static_cast<long>(xs[1]) * xs[2];
  Tensor out{Shape{c}};
  for (int ch = 0; ch < c; ++ch) {
    double acc = 0.0;
    for (long p = 0; p < plane; ++p) acc += x->value[ch * plane + p];
    out[ch] = acc / static_cast<double>(plane);
  }
  return make_node(std::move(out), {x}, [c, plane](Node& n) {
    Node& x = *n.parents[0];
    if (!x.requires_grad) return;
    const double inv = 1.0 / static_cast<double>(plane);
    for (int ch = 0; ch < c; ++ch) {
      const double g = n.grad[ch] * inv;
      for (long p = 0; p < plane; ++p) x.grad[ch * plane + p] += g;
    }
  });
}

NodePtr zero_pad_center(const NodePtr& x, int target) {
  const Shape& xs = x->shape();
  if (xs.rank < 2) fail(ErrorKind::Param, "zero_pad_center: need trailing (k,k) dims");
  const int k = xs[xs.rank - 1];
  if (xs[xs.rank - 2] != k) fail(ErrorKind::Param, "zero_pad_center: trailing dims must be square");
  if (target < k || (target - k) % 2 != 0)
    fail(ErrorKind::Param, "zero_pad_center: target must be k plus an even margin");
  Shape os = xs;
  os.dims[static_cast<size_t>(os.rank - 2)] = target;
  os.dims[static_cast<size_t>(os.rank - 1)] = target;
  const long planes = xs.numel() / (static_cast<long>(k) * k);
  const int margin = (target - k) / 2;
  Tensor out{os};
  for (long p = 0; p < planes; ++p)
    for (int a = 0; a < k; ++a)
      for (int b = 0; b < k; ++b)
        out[(p * target + (a + margin)) * target + (b + margin)] = x->value[(p * k + a) * k + b];
  return make_node(std::move(out), {x}, [k, target, margin, planes](Node& n) {
    Node& x = *n.parents[0];
    if (!x.requires_grad) return;
    for (long p = 0; p < planes; ++p)
      for (int a = 0; a < k; ++a)
        for (int b = 0; b < k; ++b)
          x.grad[(p * k + a) * k + b] +=
              n.grad[(p * target + (a + margin)) * target + (b + margin)];
  });
}

NodePtr reshape(const NodePtr& x, Shape target) {
  if (target.numel() != x->value.numel())
    fail(ErrorKind::Param,
         "reshape: element count mismatch " + x->shape().str() + " -> " + target.str());
  Tensor out = x->value;
  out.shape = target;
  return make_node(std::move(out), {x}, [](Node& n) {
    if (n.parents[0]->requires_grad) add_into(n.parents[0]->grad, n.grad);
  });
}

NodePtr slice_plane(const NodePtr& x, int index) {
  const Shape& xs = x->shape();
  if (xs.rank != 3) fail(ErrorKind::Param, "slice_plane: need (L,S,S)");
  if (index < 0 || index >= xs[0]) fail(ErrorKind::Param, "slice_plane: index out of range");
  const long plane = static_cast<long>(xs[1]) * xs[2];
  Tensor out{Shape{xs[1], xs[2]}};
  for (long i = 0; i < plane; ++i) out[i] = x->value[index * plane + i];
  return make_node(std::move(out), {x}, [index, plane](Node& n) {
    Node& x = *n.parents[0];
    if (!x.requires_grad) return;
    for (long i = 0; i < plane; ++i) x.grad[index * plane + i] += n.grad[i];
  });
}

NodePtr mse_scalar(const NodePtr& a, const NodePtr& b) {
  require_same_shape(a, b, "mse_scalar");
  const long n = a->value.numel();
  double acc = 0.0;
  for (long i = 0; i < n; ++i) {
    double d = a->value[i] - b->value[i];
    acc += d * d;
  }
  Tensor out = Tensor::scalar(acc / static_cast<double>(n));
  return make_node(std::move(out), {a, b}, [n](Node& node) {
    Node& a = *node.parents[0];
    Node& b = *node.parents[1];
    const double g = node.grad[0] * 2.0 / static_cast<double>(n);
    if (a.requires_grad)
      for (long i = 0; i < n; ++i) a.grad[i] += g * (a.value[i] - b.value[i]);
    if (b.requires_grad)
      for (long i = 0; i < n; ++i) b.grad[i] -= g * (a.value[i] - b.value[i]);
  });
}

Tensor live_mask(int kernel_size, int canvas_size) {
  Tensor mask{Shape{canvas_size, canvas_size}};
  const int margin = (canvas_size - kernel_size) / 2;
  for (int a = 0; a < kernel_size; ++a)
    for (int b = 0; b < kernel_size; ++b)
      mask[(a + margin) * canvas_size + (b + margin)] = 1.0;
  return mask;
}

NodePtr softmaxpro(const std::vector<NodePtr>& canvases, const std::vector<Tensor>& live) {
  const int l_n = static_cast<int>(canvases.size());
  if (l_n == 0 || live.size() != canvases.size())
    fail(ErrorKind::Param, "softmaxpro: need one live mask per branch");
  const Shape cs = canvases[0]->shape();
  if (cs.rank != 2 || cs[0] != cs[1]) fail(ErrorKind::Param, "softmaxpro: canvases must be (S,S)");
  for (const NodePtr& c : canvases)
    if (c->shape() != cs) fail(ErrorKind::Param, "softmaxpro: canvas shapes differ");
  const long plane = static_cast<long>(cs[0]) * cs[1];
  for (long p = 0; p < plane; ++p) {
    bool any = false;
    for (int l = 0; l < l_n; ++l) any = any || live[static_cast<size_t>(l)][p] != 0.0;
    if (!any) fail(ErrorKind::Param, "softmaxpro: position with no live branch");
  }

  Tensor out{Shape{l_n, cs[0], cs[1]}};
  std::vector<Tensor> masks = live;
  for (long p = 0; p < plane; ++p) {
    double mx = -std::numeric_limits<double>::infinity();
    for (int l = 0; l < l_n; ++l)
      if (masks[static_cast<size_t>(l)][p] != 0.0)
        mx = std::max(mx, canvases[static_cast<size_t>(l)]->value[p]);
    double sum = 0.0;
    for (int l = 0; l < l_n; ++l) {
      if (masks[static_cast<size_t>(l)][p] == 0.0) continue;
      double e = std::exp(canvases[static_cast<size_t>(l)]->value[p] - mx);
      out[l * plane + p] = e;
      sum += e;
    }
    for (int l = 0; l < l_n; ++l)
      if (masks[static_cast<size_t>(l)][p] != 0.0) out[l * plane + p] /= sum;
  }

  return make_node(std::move(out), canvases, [l_n, plane, masks](Node& n) {
    for (long p = 0; p < plane; ++p) {
      double dot = 0.0;
      for (int l = 0; l < l_n; ++l)
        if (masks[static_cast<size_t>(l)][p] != 0.0)
          dot += n.value[l * plane + p] * n.grad[l * plane + p];
      for (int l = 0; l < l_n; ++l) {
        Node& parent = *n.parents[static_cast<size_t>(l)];
        if (!parent.requires_grad || masks[static_cast<size_t>(l)][p] == 0.0) continue;
        parent.grad[p] += n.value[l * plane + p] * (n.grad[l * plane + p] - dot);
      }
    }
  });
}

void backward(const NodePtr& root) {
  if (!root) fail(ErrorKind::Param, "backward: null root");
  if (root->shape().rank != 0 || root->value.numel() != 1)
    fail(ErrorKind::Param, "backward: root must be scalar, got " + root->shape().str());

  // reverse topological order via iterative post-order DFS
  std::vector<Node*> order;
  std::unordered_set<Node*> visited;
  std::vector<std::pair<Node*, size_t>> stack;
  stack.emplace_back(root.get(), 0);
  visited.insert(root.get());
  while (!stack.empty()) {
    auto& [node, next] = stack.back();
    if (next < node->parents.size()) {
      Node* parent = node->parents[next++].get();
      if (visited.insert(parent).second) stack.emplace_back(parent, 0);
    } else {
      order.push_back(node);
      stack.pop_back();
    }
  }

  for (Node* node : order) {
    if (node->requires_grad) {
      node->grad = Tensor{node->value.shape};
    }
  }
  if (!root->requires_grad) return;
  root->grad[0] = 1.0;
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    Node* node = *it;
    if (node->requires_grad && node->backward_fn) node->backward_fn(*node);
  }
}

double GradCheckReport::max_rel_error() const {
  double mx = 0.0;
  for (const auto& e : entries) mx = std::max(mx, e.max_rel_error);
  return mx;
}

bool GradCheckReport::pass(double tolerance) const { return max_rel_error() < tolerance; }

GradCheckReport grad_check(const std::vector<Tensor>& values, const std::vector<std::string>& names,
                           const LossBuilder& build, double step, int max_coords_per_tensor) {
  if (values.size() != names.size()) fail(ErrorKind::Param, "grad_check: one name per tensor");

  std::vector<NodePtr> params;
  NodePtr loss = build(values, &params);
  if (params.size() != values.size())
    fail(ErrorKind::Param, "grad_check: builder must report one leaf per value");
  backward(loss);

  GradCheckReport report;
  for (size_t p = 0; p < values.size(); ++p) {
    const long n = values[p].numel();
    std::vector<long> coords;
    if (n <= max_coords_per_tensor) {
      for (long i = 0; i < n; ++i) coords.push_back(i);
    } else {
      for (int i = 0; i < max_coords_per_tensor; ++i)
        coords.push_back(static_cast<long>((static_cast<double>(i) + 0.5) * n /
                                           max_coords_per_tensor));
    }
    GradCheckEntry entry;
    entry.name = names[p];
    for (long c : coords) {
      std::vector<Tensor> probe = values;
      probe[p][c] += step;
      double up = build(probe, nullptr)->value[0];
      probe[p][c] -= 2.0 * step;
      double down = build(probe, nullptr)->value[0];
      double fd = (up - down) / (2.0 * step);
      double an = params[p]->grad[c];
      double rel = std::abs(fd - an) / std::max({std::abs(fd), std::abs(an), 1e-4});
      entry.max_rel_error = std::max(entry.max_rel_error, rel);
    }
    report.entries.push_back(std::move(entry));
  }
  return report;
}

}  // namespace unmix::diff
