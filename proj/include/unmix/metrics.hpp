#pragma once

#include <string>
#include <vector>

#include "unmix/types.hpp"

namespace unmix {

struct EvalReport {
  double armse = 0.0;
  double mrmse = 0.0;
  double sad_mean = 0.0;  // degrees, per-pixel spectra
  double msad = 0.0;      // degrees, endmembers
  double psnr = 0.0;      // +inf when the reconstruction is exact
  std::vector<int> permutation;  // permutation[r] = estimated column matched to true column r

  std::string csv_row() const;
  static std::string csv_header();
};

// Endmember alignment: bijection minimizing total pairwise spectral angle,
// solved as an optimal assignment (O(R^3), exhaustive search cross-checks it
// for small R in the tests).
std::vector<int> align(const EndmemberMatrix& est, const EndmemberMatrix& truth);

// sqrt( sum_i ||a_i - a_hat_i||^2 / (N R) ); rows of est are permuted by
// `permutation` before comparison when provided.
double armse(const AbundanceField& est, const AbundanceField& truth,
             const std::vector<int>& permutation = {});
double mrmse(const EndmemberMatrix& est, const EndmemberMatrix& truth,
             const std::vector<int>& permutation = {});

// spectral angle in degrees
double sad_degrees(const Eigen::VectorXd& a, const Eigen::VectorXd& b);
// mean per-pixel angle between two B x N spectra sets
double sad_mean_degrees(const Eigen::MatrixXd& y, const Eigen::MatrixXd& y_hat);
double msad_degrees(const EndmemberMatrix& est, const EndmemberMatrix& truth,
                    const std::vector<int>& permutation = {});

// 10 log10(max^2 / MSE) with max the largest reconstructed value and MSE the
// global mean over all B*N entries; exact reconstruction gives +inf.
double psnr_db(const Eigen::MatrixXd& x, const Eigen::MatrixXd& x_hat);

// Aligned full report for an estimated (M, A, Xhat) against the truth.
EvalReport evaluate(const EndmemberMatrix& est_m, const AbundanceField& est_a,
                    const Eigen::MatrixXd& x_hat, const EndmemberMatrix& true_m,
                    const AbundanceField& true_a, const Eigen::MatrixXd& x);

}  // namespace unmix
