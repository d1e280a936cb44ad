#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "unmix/denoise.hpp"
#include "unmix/diff.hpp"
#include "unmix/init.hpp"
#include "unmix/types.hpp"

namespace unmix {

// Dynamic convolution layer parameters: parallel odd-size kernels fused by a
// positional attention computed from the input (squeeze-excitation: global
// average pool, two shared fully connected layers with a ReLU between, then
// one head per branch sized k_l^2, zero-padded onto the largest canvas and
// normalized by the positional softmax).
struct DclParams {
  std::vector<diff::Tensor> kernels;  // (Co,Ci,k_l,k_l), odd ascending sizes
  diff::Tensor fc1;                   // (hidden, Ci)
  diff::Tensor fc2;                   // (hidden, hidden)
  std::vector<diff::Tensor> heads;    // (k_l^2, hidden)

  int branches() const { return static_cast<int>(kernels.size()); }
  int canvas() const { return kernels.back().shape[2]; }
  int kernel_size(int l) const { return kernels[static_cast<size_t>(l)].shape[2]; }
};

// Learnable parameters of one unrolled block.
struct BlockParams {
  DclParams w1;  // cube bands -> abundance channels
  DclParams q1;  // abundance channels -> abundance channels
  diff::Tensor theta1, theta2;  // scalars of the V1 layer
  diff::Tensor theta3, theta4;  // scalar dual steps
  diff::Tensor w2;              // (N, R)
  diff::Tensor q2;              // (R, R)
};

struct NetConfig {
  int blocks = 5;  // K
  std::vector<int> kernel_sizes{1, 3, 5};
  double lr = 5e-4;
  std::vector<double> beta_k{1e-4, 1e-3, 1e-2, 1e-1, 1.0};  // per-block loss weights
  int epochs = 1000;
  std::uint64_t seed = 1;
  double alpha = 0.1;  // penalties behind the closed-form initializers,
  double beta = 0.1;   // shared with the iterative solver defaults
  DenoiserSpec denoiser;
  double early_stop_delta = 1e-8;
  int early_stop_window = 100;
  double divergence_factor = 10.0;
};

void check_net_config(const NetConfig& config);

// Test hooks. Identity attention pins every branch weight to 1 on its live
// region; fixed_logits bypasses the squeeze-excitation path with constant
// per-branch logits (flattened k_l x k_l).
struct ForwardHooks {
  bool skip_abundance_softmax = false;
  bool identity_attention = false;
  std::optional<std::vector<Eigen::VectorXd>> fixed_logits;
};

struct BlockOutput {
  Eigen::MatrixXd m;     // B x R
  AbundanceField a;      // R x N
  Eigen::MatrixXd xhat;  // B x N, M A
};

struct ForwardValues {
  std::vector<BlockOutput> blocks;
  double loss = 0.0;
};

struct TrainHistory {
  std::vector<double> loss;  // one entry per epoch, before that epoch's update
  bool early_stopped = false;
};

struct TrainResult {
  TrainHistory history;
  Eigen::MatrixXd m;  // last block, after training
  AbundanceField a;
};

class PnpNet {
public:
  PnpNet(const NetConfig& config, int bands, int count, int height, int width);

  // Closed-form initialization: the 1x1 kernels carry the regularized
  // least-squares maps at (M0, A0), larger kernels start at zero, W2/Q2 come
  // from the endmember update at A0 (Q2 carries the minus sign so that
  // X W2 + (G2 - V2) Q2 reproduces the closed form), attention weights are
  // small seeded uniforms, theta1 = theta2 = 0.5, theta3 = theta4 = 0.1.
  static PnpNet initialized(const HyperCube& cube, const InitResult& init,
                            const NetConfig& config);

  ForwardValues forward(const HyperCube& cube, const ForwardHooks& hooks = {}) const;

  // Differentiable loss graph with one leaf per learnable tensor, in
  // parameter_slots() order. Used by train() and by the gradient checks.
  struct LossGraph {
    diff::NodePtr loss;
    std::vector<diff::NodePtr> params;
  };
  LossGraph loss_graph(const HyperCube& cube, const ForwardHooks& hooks = {}) const;

  // Ordered view over every learnable tensor.
  struct ParamSlot {
    std::string name;
    diff::Tensor* tensor;
  };
  std::vector<ParamSlot> parameter_slots();

  // Full-image first-order training on the weighted multi-block
  // reconstruction loss. Aborts with a numeric error when the loss exceeds
  // divergence_factor times its initial value.
  TrainResult train(const HyperCube& cube);

  void save_checkpoint(const std::string& path) const;
  static PnpNet load_checkpoint(const std::string& path);

  const NetConfig& config() const { return config_; }
  int bands() const { return bands_; }
  int endmembers() const { return count_; }
  std::vector<BlockParams>& block_params() { return blocks_; }
  const std::vector<BlockParams>& block_params() const { return blocks_; }
  AbundanceField& v1_seed() { return v1_seed_; }
  Eigen::MatrixXd& v2_seed() { return v2_seed_; }

private:
  struct Graph;
  Graph build_graph(const HyperCube& cube, const ForwardHooks& hooks, bool trainable) const;

  NetConfig config_;
  int bands_ = 0, count_ = 0, height_ = 0, width_ = 0;
  std::vector<BlockParams> blocks_;
  AbundanceField v1_seed_;   // V1 entering block 1 (A0)
  Eigen::MatrixXd v2_seed_;  // V2 entering block 1 (M0)
};

// --- standalone layer evaluations (shared with the tests) -------------------

// positional softmax weights for given per-branch logits; returns (L,S,S)
diff::Tensor softmaxpro_weights(const std::vector<Eigen::VectorXd>& logits,
                                const std::vector<int>& kernel_sizes);

// one dynamic convolution on a value field
AbundanceField dcl_forward(const AbundanceField& input, const DclParams& params,
                           const ForwardHooks& hooks = {});

AbundanceField layer_a(const AbundanceField& v1, const AbundanceField& g1, const HyperCube& cube,
                       const BlockParams& block, const ForwardHooks& hooks = {});
AbundanceField layer_v1(const AbundanceField& a, const AbundanceField& g1,
                        const AbundanceField& v1_prev, double theta1, double theta2,
                        const DenoiserSpec& denoiser);
Eigen::MatrixXd layer_m(const Eigen::MatrixXd& v2, const Eigen::MatrixXd& g2,
                        const Eigen::MatrixXd& X, const Eigen::MatrixXd& w2,
                        const Eigen::MatrixXd& q2);
Eigen::MatrixXd layer_v2(const Eigen::MatrixXd& m, const Eigen::MatrixXd& g2);
AbundanceField layer_g1(const AbundanceField& a, const AbundanceField& v1,
                        const AbundanceField& g1, double theta3);
Eigen::MatrixXd layer_g2(const Eigen::MatrixXd& m, const Eigen::MatrixXd& v2,
                         const Eigen::MatrixXd& g2, double theta4);

// (1/2N) sum_k beta_k ||X - Xhat_k||_F^2
double weighted_reconstruction_loss(const Eigen::MatrixXd& X,
                                    const std::vector<Eigen::MatrixXd>& xhat,
                                    const std::vector<double>& beta_k);

void save_history_csv(const TrainHistory& history, const std::string& path);

}  // namespace unmix
