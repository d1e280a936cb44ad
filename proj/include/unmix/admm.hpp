#pragma once

#include <string>
#include <vector>

#include "unmix/denoise.hpp"
#include "unmix/init.hpp"
#include "unmix/types.hpp"

namespace unmix {

// Feasibility projection applied to the closed-form abundance update inside
// solve(). Simplex is the default: it is exact on already-feasible inputs,
// which the softmax map is not (softmax contracts toward the uniform pixel
// and cannot return near-pure abundances for bounded inputs).
enum class AbundanceProjection { Simplex, Softmax };

struct AdmmConfig {
  double alpha = 0.1;   // abundance split penalty
  double beta = 0.1;    // endmember split penalty
  double lambda = 0.05; // denoising regularization weight
  double eta1 = 1.0;    // abundance dual step
  double eta2 = 1.0;    // endmember dual step
  int max_outer = 200;
  int inner_v1 = 1;     // fixed-point sweeps per outer iteration
  double tol_primal = 1e-6;
  double tol_dual = 1e-6;
  DenoiserSpec denoiser;
  AbundanceProjection projection = AbundanceProjection::Simplex;
  bool freeze_endmembers = false;  // test hook: keep M at its initial value
};

void check_admm_config(const AdmmConfig& config);

struct IterStats {
  int iteration = 0;
  double objective = 0.0;  // augmented Lagrangian value
  double primal_a = 0.0;   // ||A - V1||_F / sqrt(R N)
  double primal_m = 0.0;   // ||M - V2||_F / sqrt(B R)
  double dual_a = 0.0;     // ||V1 - V1_prev||_F / sqrt(R N)
  double dual_m = 0.0;     // ||V2 - V2_prev||_F / sqrt(B R)
};

struct AdmmState {
  Eigen::MatrixXd m, v2, g2;      // B x R
  AbundanceField a, v1, g1;       // R x N
  std::vector<IterStats> history;
  int iterations = 0;
  bool converged = false;
};

// A = (M^T M + alpha I)^{-1} [M^T X + alpha (V1 - G1)]
Eigen::MatrixXd update_a(const Eigen::MatrixXd& X, const Eigen::MatrixXd& m,
                         const Eigen::MatrixXd& v1, const Eigen::MatrixXd& g1, double alpha);

// fixed-point sweeps of V1 <- (lambda C(V1) + alpha (A + G1)) / (lambda + alpha)
AbundanceField update_v1(const AbundanceField& a, const AbundanceField& g1,
                         const AbundanceField& v1_prev, double lambda, double alpha,
                         const DenoiserSpec& denoiser, int inner_iters);

// M = (X A^T + beta (V2 - G2)) (A A^T + beta I)^{-1}
Eigen::MatrixXd update_m(const Eigen::MatrixXd& X, const Eigen::MatrixXd& a,
                         const Eigen::MatrixXd& v2, const Eigen::MatrixXd& g2, double beta);

// V2 = max(M + G2, 0)
Eigen::MatrixXd update_v2(const Eigen::MatrixXd& m, const Eigen::MatrixXd& g2);

// G1 += eta1 (A - V1); G2 += eta2 (M - V2)
void update_duals(const Eigen::MatrixXd& a, const Eigen::MatrixXd& v1, Eigen::MatrixXd& g1,
                  const Eigen::MatrixXd& m, const Eigen::MatrixXd& v2, Eigen::MatrixXd& g2,
                  double eta1, double eta2);

// Full loop: update_a -> projection -> update_v1 -> G1 -> update_m ->
// update_v2 -> G2, with per-iteration diagnostics. Stops when both scaled
// primal residuals drop below tol_primal and both dual analogs below
// tol_dual, or at max_outer.
AdmmState solve(const HyperCube& cube, const AdmmConfig& config, const InitResult& init);

void save_diagnostics_csv(const std::vector<IterStats>& history, const std::string& path);

}  // namespace unmix
