#include "unmix/net.hpp"

#include <cmath>
#include <cstring>
#include <fstream>

#include <nlohmann/json.hpp>

#include "unmix/denoise_json.hpp"
#include "unmix/rng.hpp"

namespace unmix {

using diff::NodePtr;
using diff::Shape;
using diff::Tensor;

void check_net_config(const NetConfig& config) {
  if (config.blocks < 1) fail(ErrorKind::Param, "block count must be >= 1");
  if (config.kernel_sizes.empty()) fail(ErrorKind::Param, "need at least one kernel size");
  for (size_t i = 0; i < config.kernel_sizes.size(); ++i) {
    int k = config.kernel_sizes[i];
    if (k < 1 || k % 2 == 0) fail(ErrorKind::Param, "kernel sizes must be odd and positive");
    if (i > 0 && k <= config.kernel_sizes[i - 1])
      fail(ErrorKind::Param, "kernel sizes must be strictly ascending");
  }
  if (static_cast<int>(config.beta_k.size()) != config.blocks)
    fail(ErrorKind::Param, "need one beta_k weight per block");
  if (config.lr <= 0.0) fail(ErrorKind::Param, "learning rate must be positive");
  if (config.epochs < 1) fail(ErrorKind::Param, "epoch cap must be >= 1");
  if (config.alpha < 0.0 || config.beta < 0.0)
    fail(ErrorKind::Param, "initializer penalties must be nonnegative");
  check_denoiser(config.denoiser);
}

// --- tensor <-> Eigen conversions --------------------------------------------

namespace {

Tensor tensor_from_matrix(const Eigen::MatrixXd& m) {
  Tensor t{Shape{static_cast<int>(m.rows()), static_cast<int>(m.cols())}};
  for (long r = 0; r < m.rows(); ++r)
    for (long c = 0; c < m.cols(); ++c) t[r * m.cols() + c] = m(r, c);
  return t;
}

Eigen::MatrixXd matrix_from_tensor(const Tensor& t) {
  Eigen::MatrixXd m(t.shape[0], t.shape[1]);
  for (long r = 0; r < m.rows(); ++r)
    for (long c = 0; c < m.cols(); ++c) m(r, c) = t[r * m.cols() + c];
  return m;
}

// (C,H,W) tensor; channel plane is the row-major pixel order of the field
Tensor tensor_from_field(const AbundanceField& f) {
  Tensor t{Shape{f.count, f.height, f.width}};
  const long n = f.pixels();
  for (int c = 0; c < f.count; ++c)
    for (long i = 0; i < n; ++i) t[c * n + i] = f.data(c, i);
  return t;
}

AbundanceField field_from_tensor(const Tensor& t) {
  AbundanceField f(t.shape[0], t.shape[1], t.shape[2]);
  const long n = f.pixels();
  for (int c = 0; c < f.count; ++c)
    for (long i = 0; i < n; ++i) f.data(c, i) = t[c * n + i];
  return f;
}

Tensor tensor_from_cube(const HyperCube& cube, bool as_matrix) {
  Tensor t{as_matrix ? Shape{cube.bands, static_cast<int>(cube.pixels())}
                     : Shape{cube.bands, cube.height, cube.width}};
  const long n = cube.pixels();
  for (int b = 0; b < cube.bands; ++b)
    for (long i = 0; i < n; ++i) t[b * n + i] = cube.data(b, i);
  return t;
}

// --- parameter bookkeeping ----------------------------------------------------

using ParamSlot = PnpNet::ParamSlot;

void collect_dcl(DclParams& p, const std::string& prefix, std::vector<ParamSlot>& out) {
  for (size_t l = 0; l < p.kernels.size(); ++l)
    out.push_back({prefix + "/kernel" + std::to_string(l), &p.kernels[l]});
  out.push_back({prefix + "/fc1", &p.fc1});
  out.push_back({prefix + "/fc2", &p.fc2});
  for (size_t l = 0; l < p.heads.size(); ++l)
    out.push_back({prefix + "/head" + std::to_string(l), &p.heads[l]});
}

std::vector<ParamSlot> collect_params(std::vector<BlockParams>& blocks) {
  std::vector<ParamSlot> out;
  for (size_t b = 0; b < blocks.size(); ++b) {
    const std::string prefix = "block" + std::to_string(b);
    collect_dcl(blocks[b].w1, prefix + "/w1", out);
    collect_dcl(blocks[b].q1, prefix + "/q1", out);
    out.push_back({prefix + "/theta1", &blocks[b].theta1});
    out.push_back({prefix + "/theta2", &blocks[b].theta2});
    out.push_back({prefix + "/theta3", &blocks[b].theta3});
    out.push_back({prefix + "/theta4", &blocks[b].theta4});
    out.push_back({prefix + "/w2", &blocks[b].w2});
    out.push_back({prefix + "/q2", &blocks[b].q2});
  }
  return out;
}

void check_dcl(const DclParams& p, int ci, int co, const char* what) {
  if (p.kernels.empty()) fail(ErrorKind::Param, std::string(what) + ": no kernels");
  int prev = 0;
  for (const Tensor& k : p.kernels) {
    if (k.shape.rank != 4 || k.shape[0] != co || k.shape[1] != ci || k.shape[2] != k.shape[3] ||
        k.shape[2] % 2 == 0)
      fail(ErrorKind::Param, std::string(what) + ": bad kernel shape " + k.shape.str());
    if (k.shape[2] <= prev) fail(ErrorKind::Param, std::string(what) + ": kernel sizes must ascend");
    prev = k.shape[2];
  }
  if (p.fc1.shape.rank != 2 || p.fc1.shape[1] != ci)
    fail(ErrorKind::Param, std::string(what) + ": fc1 shape mismatch");
  const int hidden = p.fc1.shape[0];
  if (p.fc2.shape.rank != 2 || p.fc2.shape[0] != hidden || p.fc2.shape[1] != hidden)
    fail(ErrorKind::Param, std::string(what) + ": fc2 shape mismatch");
  if (p.heads.size() != p.kernels.size())
    fail(ErrorKind::Param, std::string(what) + ": one attention head per kernel");
  for (size_t l = 0; l < p.heads.size(); ++l) {
    int k = p.kernels[l].shape[2];
    if (p.heads[l].shape.rank != 2 || p.heads[l].shape[0] != k * k ||
        p.heads[l].shape[1] != hidden)
      fail(ErrorKind::Param, std::string(what) + ": head shape mismatch");
  }
}

void check_block(const BlockParams& bp, int bands, int count, long pixels) {
  check_dcl(bp.w1, bands, count, "w1");
  check_dcl(bp.q1, count, count, "q1");
  if (bp.w2.shape.rank != 2 || bp.w2.shape[0] != pixels || bp.w2.shape[1] != count)
    fail(ErrorKind::Param, "w2 must be (pixels, endmembers)");
  if (bp.q2.shape.rank != 2 || bp.q2.shape[0] != count || bp.q2.shape[1] != count)
    fail(ErrorKind::Param, "q2 must be (endmembers, endmembers)");
  for (const Tensor* t : {&bp.theta1, &bp.theta2, &bp.theta3, &bp.theta4})
    if (t->shape.rank != 0) fail(ErrorKind::Param, "theta parameters must be scalars");
}

// node set for one DCL inside a graph
struct DclNodes {
  std::vector<NodePtr> kernels;
  NodePtr fc1, fc2;
  std::vector<NodePtr> heads;
  std::vector<int> sizes;
};

NodePtr build_dcl(const NodePtr& x, const DclNodes& p, const ForwardHooks& hooks) {
  const int branches = static_cast<int>(p.kernels.size());
  const int canvas = p.sizes.back();

  std::vector<NodePtr> weights(static_cast<size_t>(branches));
  if (hooks.identity_attention) {
    for (int l = 0; l < branches; ++l)
      weights[static_cast<size_t>(l)] = diff::constant(diff::live_mask(p.sizes[static_cast<size_t>(l)], canvas));
  } else {
    std::vector<NodePtr> canvases(static_cast<size_t>(branches));
    std::vector<Tensor> masks(static_cast<size_t>(branches));
    if (hooks.fixed_logits) {
      const auto& fixed = *hooks.fixed_logits;
      if (fixed.size() != static_cast<size_t>(branches))
        fail(ErrorKind::Param, "fixed_logits: one vector per branch");
      for (int l = 0; l < branches; ++l) {
        const int k = p.sizes[static_cast<size_t>(l)];
        if (fixed[static_cast<size_t>(l)].size() != k * k)
          fail(ErrorKind::Param, "fixed_logits: branch size mismatch");
        Tensor t{Shape{k, k}};
        for (long i = 0; i < t.numel(); ++i) t[i] = fixed[static_cast<size_t>(l)](i);
        canvases[static_cast<size_t>(l)] = diff::zero_pad_center(diff::constant(std::move(t)), canvas);
        masks[static_cast<size_t>(l)] = diff::live_mask(k, canvas);
      }
    } else {
      NodePtr squeezed = diff::global_avg_pool(x);
      NodePtr features = diff::fully_connected(p.fc2, diff::relu(diff::fully_connected(p.fc1, squeezed)));
      for (int l = 0; l < branches; ++l) {
        const int k = p.sizes[static_cast<size_t>(l)];
        NodePtr logits = diff::fully_connected(p.heads[static_cast<size_t>(l)], features);
        canvases[static_cast<size_t>(l)] =
            diff::zero_pad_center(diff::reshape(logits, Shape{k, k}), canvas);
        masks[static_cast<size_t>(l)] = diff::live_mask(k, canvas);
      }
    }
    NodePtr attention = diff::softmaxpro(canvases, masks);
    for (int l = 0; l < branches; ++l)
      weights[static_cast<size_t>(l)] = diff::slice_plane(attention, l);
  }

  NodePtr fused;
  for (int l = 0; l < branches; ++l) {
    NodePtr masked = diff::mul_planes(diff::zero_pad_center(p.kernels[static_cast<size_t>(l)], canvas),
                                      weights[static_cast<size_t>(l)]);
    fused = fused ? diff::add(fused, masked) : masked;
  }
  return diff::conv2d(x, fused);
}

DclNodes dcl_nodes(const DclParams& p, const std::string& prefix, bool trainable,
                   std::vector<NodePtr>* params) {
  DclNodes nodes;
  auto wrap = [&](const Tensor& t, const std::string& name) {
    NodePtr n = trainable ? diff::leaf(t, name) : diff::constant(t, name);
    if (params) params->push_back(n);
    return n;
  };
  for (size_t l = 0; l < p.kernels.size(); ++l) {
    nodes.kernels.push_back(wrap(p.kernels[l], prefix + "/kernel" + std::to_string(l)));
    nodes.sizes.push_back(p.kernels[l].shape[2]);
  }
  nodes.fc1 = wrap(p.fc1, prefix + "/fc1");
  nodes.fc2 = wrap(p.fc2, prefix + "/fc2");
  for (size_t l = 0; l < p.heads.size(); ++l)
    nodes.heads.push_back(wrap(p.heads[l], prefix + "/head" + std::to_string(l)));
  return nodes;
}

}  // namespace

// --- PnpNet -------------------------------------------------------------------

PnpNet::PnpNet(const NetConfig& config, int bands, int count, int height, int width)
    : config_(config), bands_(bands), count_(count), height_(height), width_(width) {
  check_net_config(config_);
  if (bands < 1 || count < 1 || height < 1 || width < 1)
    fail(ErrorKind::Param, "network dimensions must be positive");
  const long n = static_cast<long>(height) * width;
  const int hid_w1 = std::max(4, bands / 4);
  const int hid_q1 = std::max(4, count / 4);

  auto make_dcl = [&](int ci, int co, int hidden) {
    DclParams p;
    for (int k : config_.kernel_sizes) p.kernels.emplace_back(Shape{co, ci, k, k});
    p.fc1 = Tensor{Shape{hidden, ci}};
    p.fc2 = Tensor{Shape{hidden, hidden}};
    for (int k : config_.kernel_sizes) p.heads.emplace_back(Shape{k * k, hidden});
    return p;
  };

  blocks_.resize(static_cast<size_t>(config_.blocks));
  for (BlockParams& bp : blocks_) {
    bp.w1 = make_dcl(bands, count, hid_w1);
    bp.q1 = make_dcl(count, count, hid_q1);
    bp.theta1 = Tensor::scalar(0.0);
    bp.theta2 = Tensor::scalar(0.0);
    bp.theta3 = Tensor::scalar(0.0);
    bp.theta4 = Tensor::scalar(0.0);
    bp.w2 = Tensor{Shape{static_cast<int>(n), count}};
    bp.q2 = Tensor{Shape{count, count}};
  }
  v1_seed_ = AbundanceField(count, height, width);
  v2_seed_ = Eigen::MatrixXd::Zero(bands, count);
}

PnpNet PnpNet::initialized(const HyperCube& cube, const InitResult& init,
                           const NetConfig& config) {
  check_cube(cube);
  check_endmembers(init.endmembers);
  check_field(init.abundances);
  const int r = init.endmembers.count;
  if (init.endmembers.bands != cube.bands || init.abundances.pixels() != cube.pixels())
    fail(ErrorKind::Param, "initialization shapes do not match the cube");

  PnpNet net(config, cube.bands, r, cube.height, cube.width);
  const Eigen::MatrixXd& m0 = init.endmembers.data;
  const Eigen::MatrixXd& a0 = init.abundances.data;

  Eigen::MatrixXd gram_m = m0.transpose() * m0;
  gram_m.diagonal().array() += config.alpha;
  Eigen::LDLT<Eigen::MatrixXd> ldlt_m(gram_m);
  Eigen::MatrixXd w1_eq = ldlt_m.solve(m0.transpose());                       // R x B
  Eigen::MatrixXd q1_eq = ldlt_m.solve(config.alpha * Eigen::MatrixXd::Identity(r, r));

  Eigen::MatrixXd gram_a = a0 * a0.transpose();
  gram_a.diagonal().array() += config.beta;
  Eigen::LDLT<Eigen::MatrixXd> ldlt_a(gram_a);
  Eigen::MatrixXd w2_eq = ldlt_a.solve(a0).transpose();                       // N x R
  Eigen::MatrixXd q2_eq = ldlt_a.solve(-config.beta * Eigen::MatrixXd::Identity(r, r));

  Rng rng(config.seed);
  auto fill_uniform = [&rng](Tensor& t) {
    for (long i = 0; i < t.numel(); ++i) t[i] = rng.uniform(-0.01, 0.01);
  };

  for (BlockParams& bp : net.blocks_) {
    // 1x1 kernels carry the closed-form maps; larger scales start silent
    for (int row = 0; row < r; ++row)
      for (int col = 0; col < cube.bands; ++col) bp.w1.kernels[0].at4(row, col, 0, 0) = w1_eq(row, col);
    for (int row = 0; row < r; ++row)
      for (int col = 0; col < r; ++col) bp.q1.kernels[0].at4(row, col, 0, 0) = q1_eq(row, col);
    fill_uniform(bp.w1.fc1);
    fill_uniform(bp.w1.fc2);
    for (Tensor& h : bp.w1.heads) fill_uniform(h);
    fill_uniform(bp.q1.fc1);
    fill_uniform(bp.q1.fc2);
    for (Tensor& h : bp.q1.heads) fill_uniform(h);
    bp.theta1 = Tensor::scalar(0.5);
    bp.theta2 = Tensor::scalar(0.5);
    bp.theta3 = Tensor::scalar(0.1);
    bp.theta4 = Tensor::scalar(0.1);
    bp.w2 = tensor_from_matrix(w2_eq);
    bp.q2 = tensor_from_matrix(q2_eq);
  }
  net.v1_seed_ = init.abundances;
  net.v2_seed_ = m0;
  return net;
}

std::vector<PnpNet::ParamSlot> PnpNet::parameter_slots() { return collect_params(blocks_); }

struct PnpNet::Graph {
  NodePtr loss;
  std::vector<NodePtr> params;
  std::vector<NodePtr> m_nodes, a_nodes, xhat_nodes;
};

PnpNet::LossGraph PnpNet::loss_graph(const HyperCube& cube, const ForwardHooks& hooks) const {
  Graph g = build_graph(cube, hooks, true);
  return LossGraph{std::move(g.loss), std::move(g.params)};
}

PnpNet::Graph PnpNet::build_graph(const HyperCube& cube, const ForwardHooks& hooks,
                                  bool trainable) const {
  check_cube(cube);
  if (cube.bands != bands_ || cube.height != height_ || cube.width != width_)
    fail(ErrorKind::Param, "cube dimensions do not match the network");
  const long n = cube.pixels();
  for (const BlockParams& bp : blocks_) check_block(bp, bands_, count_, n);

  Graph g;
  NodePtr x_field = diff::constant(tensor_from_cube(cube, false), "x");
  NodePtr x_mat = diff::reshape(x_field, Shape{bands_, static_cast<int>(n)});

  NodePtr v1 = diff::constant(tensor_from_field(v1_seed_), "v1_seed");
  NodePtr g1 = diff::constant(Tensor{Shape{count_, height_, width_}}, "g1_seed");
  NodePtr v2 = diff::constant(tensor_from_matrix(v2_seed_), "v2_seed");
  NodePtr g2 = diff::constant(Tensor{Shape{bands_, count_}}, "g2_seed");

  for (size_t b = 0; b < blocks_.size(); ++b) {
    const BlockParams& bp = blocks_[b];
    const std::string prefix = "block" + std::to_string(b);
    // node creation order must match collect_params
    DclNodes w1 = dcl_nodes(bp.w1, prefix + "/w1", trainable, &g.params);
    DclNodes q1 = dcl_nodes(bp.q1, prefix + "/q1", trainable, &g.params);
    auto wrap = [&](const Tensor& t, const char* name) {
      NodePtr node = trainable ? diff::leaf(t, prefix + name) : diff::constant(t, prefix + name);
      g.params.push_back(node);
      return node;
    };
    NodePtr th1 = wrap(bp.theta1, "/theta1");
    NodePtr th2 = wrap(bp.theta2, "/theta2");
    NodePtr th3 = wrap(bp.theta3, "/theta3");
    NodePtr th4 = wrap(bp.theta4, "/theta4");
    NodePtr w2 = wrap(bp.w2, "/w2");
    NodePtr q2 = wrap(bp.q2, "/q2");

    // abundance chain: A -> V1 -> G1
    NodePtr logits = diff::add(build_dcl(x_field, w1, hooks), build_dcl(diff::sub(v1, g1), q1, hooks));
    NodePtr a = hooks.skip_abundance_softmax ? logits : diff::softmax_channels(logits);

    // denoiser applied to the previous V1 value, constant to the tape
    NodePtr denoised = diff::constant(
        tensor_from_field(denoise(field_from_tensor(v1->value), config_.denoiser)), "stopgrad_c");
    NodePtr v1_next = diff::add(diff::scale(th1, denoised), diff::scale(th2, diff::add(a, g1)));
    NodePtr g1_next = diff::add(g1, diff::scale(th3, diff::sub(a, v1_next)));

    // endmember chain: M -> V2 -> G2
    NodePtr m = diff::add(diff::matmul(x_mat, w2), diff::matmul(diff::sub(g2, v2), q2));
    NodePtr v2_next = diff::relu(diff::add(m, g2));
    NodePtr g2_next = diff::add(g2, diff::scale(th4, diff::sub(m, v2_next)));

    NodePtr a_mat = diff::reshape(a, Shape{count_, static_cast<int>(n)});
    NodePtr xhat = diff::matmul(m, a_mat);
    NodePtr term = diff::scale_const(config_.beta_k[b] * bands_ / 2.0, diff::mse_scalar(x_mat, xhat));
    g.loss = g.loss ? diff::add(g.loss, term) : term;

    g.m_nodes.push_back(m);
    g.a_nodes.push_back(a);
    g.xhat_nodes.push_back(xhat);
    v1 = v1_next;
    g1 = g1_next;
    v2 = v2_next;
    g2 = g2_next;
  }
  return g;
}

ForwardValues PnpNet::forward(const HyperCube& cube, const ForwardHooks& hooks) const {
  Graph g = build_graph(cube, hooks, false);
  ForwardValues out;
  out.loss = g.loss->value[0];
  for (size_t b = 0; b < g.m_nodes.size(); ++b) {
    BlockOutput block;
    block.m = matrix_from_tensor(g.m_nodes[b]->value);
    block.a = field_from_tensor(g.a_nodes[b]->value);
    block.xhat = matrix_from_tensor(g.xhat_nodes[b]->value);
    out.blocks.push_back(std::move(block));
  }
  return out;
}

TrainResult PnpNet::train(const HyperCube& cube) {
  std::vector<ParamSlot> slots = parameter_slots();
  std::vector<Tensor> m_state, v_state;
  m_state.reserve(slots.size());
  v_state.reserve(slots.size());
  for (const ParamSlot& s : slots) {
    m_state.emplace_back(s.tensor->shape);
    v_state.emplace_back(s.tensor->shape);
  }

  const double b1 = 0.9, b2 = 0.999, eps = 1e-8;
  TrainHistory history;
  double initial_loss = 0.0;

  // loss of the all-zero reconstruction; 1% of it is the slack that keeps a
  // near-perfect initialization from tripping the divergence bound on the
  // optimizer's noise floor
  double zero_loss = 0.0;
  for (double bk : config_.beta_k) zero_loss += bk;
  zero_loss *= cube.data.squaredNorm() / (2.0 * static_cast<double>(cube.pixels()));

  for (int epoch = 0; epoch < config_.epochs; ++epoch) {
    LossGraph g = loss_graph(cube);
    const double loss = g.loss->value[0];
    history.loss.push_back(loss);
    if (epoch == 0) initial_loss = loss;
    if (!std::isfinite(loss) ||
        loss > config_.divergence_factor * initial_loss + 0.01 * zero_loss)
      fail(ErrorKind::Numeric, "training diverged: loss " + std::to_string(loss) +
                                   " exceeded bound at epoch " + std::to_string(epoch));
    if (epoch >= config_.early_stop_window) {
      double past = history.loss[history.loss.size() - 1 - config_.early_stop_window];
      if (past - loss < config_.early_stop_delta) {
        history.early_stopped = true;
        break;
      }
    }

    diff::backward(g.loss);
    const double t = static_cast<double>(epoch + 1);
    const double bc1 = 1.0 - std::pow(b1, t);
    const double bc2 = 1.0 - std::pow(b2, t);
    for (size_t p = 0; p < slots.size(); ++p) {
      const Tensor& grad = g.params[p]->grad;
      Tensor& mom = m_state[p];
      Tensor& vel = v_state[p];
      Tensor& value = *slots[p].tensor;
      for (long i = 0; i < value.numel(); ++i) {
        mom[i] = b1 * mom[i] + (1.0 - b1) * grad[i];
        vel[i] = b2 * vel[i] + (1.0 - b2) * grad[i] * grad[i];
        value[i] -= config_.lr * (mom[i] / bc1) / (std::sqrt(vel[i] / bc2) + eps);
      }
    }
  }

  ForwardValues final_pass = forward(cube);
  TrainResult result;
  result.history = std::move(history);
  result.m = final_pass.blocks.back().m;
  result.a = final_pass.blocks.back().a;
  return result;
}

// --- checkpoint ----------------------------------------------------------------

namespace {

void write_f64le(std::ostream& out, const Tensor& t) {
  std::vector<unsigned char> buf(static_cast<size_t>(t.numel()) * 8);
  for (long i = 0; i < t.numel(); ++i) {
    std::uint64_t u;
    std::memcpy(&u, &t.v[static_cast<size_t>(i)], 8);
    for (int byte = 0; byte < 8; ++byte)
      buf[static_cast<size_t>(8 * i + byte)] = static_cast<unsigned char>((u >> (8 * byte)) & 0xff);
  }
  out.write(reinterpret_cast<const char*>(buf.data()), static_cast<std::streamsize>(buf.size()));
}

void read_f64le(std::istream& in, Tensor& t) {
  std::vector<unsigned char> buf(static_cast<size_t>(t.numel()) * 8);
  in.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(buf.size()));
  if (in.gcount() != static_cast<std::streamsize>(buf.size()))
    fail(ErrorKind::Format, "checkpoint payload truncated");
  for (long i = 0; i < t.numel(); ++i) {
    std::uint64_t u = 0;
    for (int byte = 0; byte < 8; ++byte)
      u |= static_cast<std::uint64_t>(buf[static_cast<size_t>(8 * i + byte)]) << (8 * byte);
    std::memcpy(&t.v[static_cast<size_t>(i)], &u, 8);
  }
}

}  // namespace

void PnpNet::save_checkpoint(const std::string& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorKind::Io, "cannot open for writing: " + path);

  auto& self = const_cast<PnpNet&>(*this);
  std::vector<ParamSlot> slots = collect_params(self.blocks_);
  Tensor v1_tensor = tensor_from_field(v1_seed_);
  Tensor v2_tensor = tensor_from_matrix(v2_seed_);
  slots.push_back({"v1_seed", &v1_tensor});
  slots.push_back({"v2_seed", &v2_tensor});

  nlohmann::ordered_json header;
  header["format"] = "unmix-pnp-net";
  header["version"] = 1;
  header["bands"] = bands_;
  header["endmembers"] = count_;
  header["height"] = height_;
  header["width"] = width_;
  nlohmann::ordered_json cfg;
  cfg["blocks"] = config_.blocks;
  cfg["kernel_sizes"] = config_.kernel_sizes;
  cfg["lr"] = config_.lr;
  cfg["beta_k"] = config_.beta_k;
  cfg["epochs"] = config_.epochs;
  cfg["seed"] = config_.seed;
  cfg["alpha"] = config_.alpha;
  cfg["beta"] = config_.beta;
  cfg["denoiser"] = denoiser_to_json(config_.denoiser);
  cfg["early_stop_delta"] = config_.early_stop_delta;
  cfg["early_stop_window"] = config_.early_stop_window;
  cfg["divergence_factor"] = config_.divergence_factor;
  header["config"] = cfg;
  nlohmann::ordered_json tensors = nlohmann::ordered_json::array();
  for (const ParamSlot& s : slots) {
    nlohmann::ordered_json t;
    t["name"] = s.name;
    std::vector<int> shape;
    for (int i = 0; i < s.tensor->shape.rank; ++i) shape.push_back(s.tensor->shape[i]);
    t["shape"] = shape;
    tensors.push_back(t);
  }
  header["tensors"] = tensors;
  out << header.dump() << "\n";
  for (const ParamSlot& s : slots) write_f64le(out, *s.tensor);
  if (!out) fail(ErrorKind::Io, "write failed: " + path);
}

PnpNet PnpNet::load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorKind::Io, "cannot open for reading: " + path);
  std::string line;
  if (!std::getline(in, line)) fail(ErrorKind::Format, "missing checkpoint header");
  nlohmann::json header = nlohmann::json::parse(line, nullptr, false);
  if (header.is_discarded() || header.value("format", "") != "unmix-pnp-net")
    fail(ErrorKind::Format, "not a network checkpoint: " + path);

  const auto& cfg = header.at("config");
  NetConfig config;
  config.blocks = cfg.at("blocks").get<int>();
  config.kernel_sizes = cfg.at("kernel_sizes").get<std::vector<int>>();
  config.lr = cfg.at("lr").get<double>();
  config.beta_k = cfg.at("beta_k").get<std::vector<double>>();
  config.epochs = cfg.at("epochs").get<int>();
  config.seed = cfg.at("seed").get<std::uint64_t>();
  config.alpha = cfg.at("alpha").get<double>();
  config.beta = cfg.at("beta").get<double>();
  config.denoiser = denoiser_from_json(cfg.at("denoiser"));
  config.early_stop_delta = cfg.at("early_stop_delta").get<double>();
  config.early_stop_window = cfg.at("early_stop_window").get<int>();
  config.divergence_factor = cfg.at("divergence_factor").get<double>();

  PnpNet net(config, header.at("bands").get<int>(), header.at("endmembers").get<int>(),
             header.at("height").get<int>(), header.at("width").get<int>());

  std::vector<ParamSlot> slots = collect_params(net.blocks_);
  Tensor v1_tensor = tensor_from_field(net.v1_seed_);
  Tensor v2_tensor = tensor_from_matrix(net.v2_seed_);
  slots.push_back({"v1_seed", &v1_tensor});
  slots.push_back({"v2_seed", &v2_tensor});

  const auto& tensors = header.at("tensors");
  if (tensors.size() != slots.size()) fail(ErrorKind::Format, "checkpoint tensor list mismatch");
  for (size_t i = 0; i < slots.size(); ++i) {
    if (tensors[i].at("name").get<std::string>() != slots[i].name)
      fail(ErrorKind::Format, "checkpoint tensor order mismatch at " + slots[i].name);
    auto shape = tensors[i].at("shape").get<std::vector<int>>();
    if (static_cast<int>(shape.size()) != slots[i].tensor->shape.rank)
      fail(ErrorKind::Format, "checkpoint shape mismatch at " + slots[i].name);
    for (int d = 0; d < slots[i].tensor->shape.rank; ++d)
      if (shape[static_cast<size_t>(d)] != slots[i].tensor->shape[d])
        fail(ErrorKind::Format, "checkpoint shape mismatch at " + slots[i].name);
    read_f64le(in, *slots[i].tensor);
  }
  net.v1_seed_ = field_from_tensor(v1_tensor);
  net.v2_seed_ = matrix_from_tensor(v2_tensor);
  return net;
}

// --- standalone layer evaluations ----------------------------------------------

diff::Tensor softmaxpro_weights(const std::vector<Eigen::VectorXd>& logits,
                                const std::vector<int>& kernel_sizes) {
  if (logits.size() != kernel_sizes.size() || logits.empty())
    fail(ErrorKind::Param, "need one logit vector per branch");
  const int canvas = kernel_sizes.back();
  std::vector<NodePtr> canvases;
  std::vector<Tensor> masks;
  for (size_t l = 0; l < logits.size(); ++l) {
    const int k = kernel_sizes[l];
    if (logits[l].size() != k * k) fail(ErrorKind::Param, "logit vector size must be k^2");
    Tensor t{Shape{k, k}};
    for (long i = 0; i < t.numel(); ++i) t[i] = logits[l](i);
    canvases.push_back(diff::zero_pad_center(diff::constant(std::move(t)), canvas));
    masks.push_back(diff::live_mask(k, canvas));
  }
  return diff::softmaxpro(canvases, masks)->value;
}

AbundanceField dcl_forward(const AbundanceField& input, const DclParams& params,
                           const ForwardHooks& hooks) {
  check_field(input);
  check_dcl(params, input.count, params.kernels[0].shape[0], "dcl");
  DclNodes nodes = dcl_nodes(params, "dcl", false, nullptr);
  NodePtr x = diff::constant(tensor_from_field(input), "x");
  return field_from_tensor(build_dcl(x, nodes, hooks)->value);
}

AbundanceField layer_a(const AbundanceField& v1, const AbundanceField& g1, const HyperCube& cube,
                       const BlockParams& block, const ForwardHooks& hooks) {
  check_cube(cube);
  check_field(v1);
  check_field(g1);
  check_block(block, cube.bands, v1.count, cube.pixels());
  DclNodes w1 = dcl_nodes(block.w1, "w1", false, nullptr);
  DclNodes q1 = dcl_nodes(block.q1, "q1", false, nullptr);
  NodePtr x = diff::constant(tensor_from_cube(cube, false), "x");
  NodePtr diffv = diff::sub(diff::constant(tensor_from_field(v1)), diff::constant(tensor_from_field(g1)));
  NodePtr logits = diff::add(build_dcl(x, w1, hooks), build_dcl(diffv, q1, hooks));
  NodePtr a = hooks.skip_abundance_softmax ? logits : diff::softmax_channels(logits);
  return field_from_tensor(a->value);
}

AbundanceField layer_v1(const AbundanceField& a, const AbundanceField& g1,
                        const AbundanceField& v1_prev, double theta1, double theta2,
                        const DenoiserSpec& denoiser) {
  AbundanceField out = denoise(v1_prev, denoiser);
  out.data = theta1 * out.data + theta2 * (a.data + g1.data);
  return out;
}

Eigen::MatrixXd layer_m(const Eigen::MatrixXd& v2, const Eigen::MatrixXd& g2,
                        const Eigen::MatrixXd& X, const Eigen::MatrixXd& w2,
                        const Eigen::MatrixXd& q2) {
  return X * w2 + (g2 - v2) * q2;
}

Eigen::MatrixXd layer_v2(const Eigen::MatrixXd& m, const Eigen::MatrixXd& g2) {
  return (m + g2).cwiseMax(0.0);
}

AbundanceField layer_g1(const AbundanceField& a, const AbundanceField& v1,
                        const AbundanceField& g1, double theta3) {
  AbundanceField out = g1;
  out.data += theta3 * (a.data - v1.data);
  return out;
}

Eigen::MatrixXd layer_g2(const Eigen::MatrixXd& m, const Eigen::MatrixXd& v2,
                         const Eigen::MatrixXd& g2, double theta4) {
  return g2 + theta4 * (m - v2);
}

double weighted_reconstruction_loss(const Eigen::MatrixXd& X,
                                    const std::vector<Eigen::MatrixXd>& xhat,
                                    const std::vector<double>& beta_k) {
  if (xhat.size() != beta_k.size()) fail(ErrorKind::Param, "one weight per reconstruction");
  double acc = 0.0;
  for (size_t k = 0; k < xhat.size(); ++k) acc += beta_k[k] * (X - xhat[k]).squaredNorm();
  return acc / (2.0 * static_cast<double>(X.cols()));
}

void save_history_csv(const TrainHistory& history, const std::string& path) {
  std::ofstream out(path);
  if (!out) fail(ErrorKind::Io, "cannot open for writing: " + path);
  out << "epoch,loss\n";
  out.precision(17);
  for (size_t e = 0; e < history.loss.size(); ++e) out << e << "," << history.loss[e] << "\n";
}

}  // namespace unmix
