#include "unmix/metrics.hpp"

#include <cmath>
#include <limits>
#include <sstream>

namespace unmix {

double sad_degrees(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  double na = a.norm(), nb = b.norm();
  if (na == 0.0 || nb == 0.0) fail(ErrorKind::Param, "spectral angle of a zero vector");
  // chord form 2 asin(||a/|a| - b/|b||/2): exact at zero angle, where the
  // arccos of the normalized inner product loses half the digits
  double chord = (a / na - b / nb).norm();
  if (chord >= 2.0) return 180.0;
  return 2.0 * std::asin(0.5 * chord) * 180.0 / M_PI;
}

namespace {

// O(n^3) optimal assignment on a square cost matrix (potentials method).
// Returns row -> column.
std::vector<int> hungarian(const Eigen::MatrixXd& cost) {
  const int n = static_cast<int>(cost.rows());
  std::vector<double> u(static_cast<size_t>(n + 1)), v(static_cast<size_t>(n + 1));
  std::vector<int> match(static_cast<size_t>(n + 1), 0);  // column -> row (1-based)
  std::vector<int> way(static_cast<size_t>(n + 1), 0);
  const double inf = std::numeric_limits<double>::infinity();

  for (int i = 1; i <= n; ++i) {
    match[0] = i;
    int j0 = 0;
    std::vector<double> minv(static_cast<size_t>(n + 1), inf);
    std::vector<bool> used(static_cast<size_t>(n + 1), false);
    do {
      used[static_cast<size_t>(j0)] = true;
      int i0 = match[static_cast<size_t>(j0)], j1 = 0;
      double delta = inf;
      for (int j = 1; j <= n; ++j) {
        if (used[static_cast<size_t>(j)]) continue;
        double cur = cost(i0 - 1, j - 1) - u[static_cast<size_t>(i0)] - v[static_cast<size_t>(j)];
        if (cur < minv[static_cast<size_t>(j)]) {
          minv[static_cast<size_t>(j)] = cur;
          way[static_cast<size_t>(j)] = j0;
        }
        if (minv[static_cast<size_t>(j)] < delta) {
          delta = minv[static_cast<size_t>(j)];
          j1 = j;
        }
      }
      for (int j = 0; j <= n; ++j) {
        if (used[static_cast<size_t>(j)]) {
          u[static_cast<size_t>(match[static_cast<size_t>(j)])] += delta;
          v[static_cast<size_t>(j)] -= delta;
        } else {
          minv[static_cast<size_t>(j)] -= delta;
        }
      }
      j0 = j1;
    } while (match[static_cast<size_t>(j0)] != 0);
    do {
      int j1 = way[static_cast<size_t>(j0)];
      match[static_cast<size_t>(j0)] = match[static_cast<size_t>(j1)];
      j0 = j1;
    } while (j0);
  }

  std::vector<int> row_to_col(static_cast<size_t>(n), -1);
  for (int j = 1; j <= n; ++j)
    if (match[static_cast<size_t>(j)] > 0) row_to_col[static_cast<size_t>(match[static_cast<size_t>(j)] - 1)] = j - 1;
  return row_to_col;
}

void check_permutation(const std::vector<int>& perm, int r) {
  if (perm.empty()) return;
  if (static_cast<int>(perm.size()) != r) fail(ErrorKind::Param, "permutation size mismatch");
  std::vector<bool> seen(static_cast<size_t>(r), false);
  for (int p : perm) {
    if (p < 0 || p >= r || seen[static_cast<size_t>(p)])
      fail(ErrorKind::Param, "permutation is not a bijection");
    seen[static_cast<size_t>(p)] = true;
  }
}

}  // namespace

std::vector<int> align(const EndmemberMatrix& est, const EndmemberMatrix& truth) {
  check_endmembers(est);
  check_endmembers(truth);
  if (est.count != truth.count || est.bands != truth.bands)
    fail(ErrorKind::Param, "endmember sets differ in shape");
  const int r = truth.count;
  Eigen::MatrixXd cost(r, r);
  for (int i = 0; i < r; ++i)
    for (int j = 0; j < r; ++j) cost(i, j) = sad_degrees(truth.data.col(i), est.data.col(j));
  return hungarian(cost);
}

double armse(const AbundanceField& est, const AbundanceField& truth,
             const std::vector<int>& permutation) {
  check_field(est);
  check_field(truth);
  if (est.count != truth.count || est.pixels() != truth.pixels())
    fail(ErrorKind::Param, "abundance fields differ in shape");
  check_permutation(permutation, truth.count);
  double acc = 0.0;
  for (int ch = 0; ch < truth.count; ++ch) {
    int e = permutation.empty() ? ch : permutation[static_cast<size_t>(ch)];
    acc += (truth.data.row(ch) - est.data.row(e)).squaredNorm();
  }
  return std::sqrt(acc / (static_cast<double>(truth.count) * truth.pixels()));
}

double mrmse(const EndmemberMatrix& est, const EndmemberMatrix& truth,
             const std::vector<int>& permutation) {
  check_endmembers(est);
  check_endmembers(truth);
  if (est.count != truth.count || est.bands != truth.bands)
    fail(ErrorKind::Param, "endmember sets differ in shape");
  check_permutation(permutation, truth.count);
  double acc = 0.0;
  for (int r = 0; r < truth.count; ++r) {
    int e = permutation.empty() ? r : permutation[static_cast<size_t>(r)];
    acc += (truth.data.col(r) - est.data.col(e)).squaredNorm();
  }
  return std::sqrt(acc / (static_cast<double>(truth.bands) * truth.count));
}

double sad_mean_degrees(const Eigen::MatrixXd& y, const Eigen::MatrixXd& y_hat) {
  if (y.rows() != y_hat.rows() || y.cols() != y_hat.cols())
    fail(ErrorKind::Param, "spectra sets differ in shape");
  double acc = 0.0;
  for (long j = 0; j < y.cols(); ++j) acc += sad_degrees(y.col(j), y_hat.col(j));
  return acc / static_cast<double>(y.cols());
}

double msad_degrees(const EndmemberMatrix& est, const EndmemberMatrix& truth,
                    const std::vector<int>& permutation) {
  check_permutation(permutation, truth.count);
  double acc = 0.0;
  for (int r = 0; r < truth.count; ++r) {
    int e = permutation.empty() ? r : permutation[static_cast<size_t>(r)];
    acc += sad_degrees(truth.data.col(r), est.data.col(e));
  }
  return acc / truth.count;
}

double psnr_db(const Eigen::MatrixXd& x, const Eigen::MatrixXd& x_hat) {
  if (x.rows() != x_hat.rows() || x.cols() != x_hat.cols())
    fail(ErrorKind::Param, "images differ in shape");
  double peak = x_hat.maxCoeff();
  if (peak <= 0.0) fail(ErrorKind::Param, "reconstruction has no positive values");
  double mse = (x - x_hat).squaredNorm() / static_cast<double>(x.size());
  if (mse == 0.0) return std::numeric_limits<double>::infinity();
  return 10.0 * std::log10(peak * peak / mse);
}

EvalReport evaluate(const EndmemberMatrix& est_m, const AbundanceField& est_a,
                    const Eigen::MatrixXd& x_hat, const EndmemberMatrix& true_m,
                    const AbundanceField& true_a, const Eigen::MatrixXd& x) {
  EvalReport report;
  report.permutation = align(est_m, true_m);
  report.armse = armse(est_a, true_a, report.permutation);
  report.mrmse = mrmse(est_m, true_m, report.permutation);
  report.msad = msad_degrees(est_m, true_m, report.permutation);
  report.sad_mean = sad_mean_degrees(x, x_hat);
  report.psnr = psnr_db(x, x_hat);
  return report;
}

std::string EvalReport::csv_header() { return "armse,mrmse,sad,msad,psnr,permutation"; }

std::string EvalReport::csv_row() const {
  std::ostringstream os;
  os.precision(10);
  os << armse << "," << mrmse << "," << sad_mean << "," << msad << ",";
  if (std::isinf(psnr))
    os << "inf";
  else
    os << psnr;
  os << ",";
  for (size_t i = 0; i < permutation.size(); ++i) os << (i ? " " : "") << permutation[i];
  return os.str();
}

}  // namespace unmix
