#include "unmix/init.hpp"

#include <cmath>
#include <vector>

#include "unmix/rng.hpp"
#include "unmix/threads.hpp"

namespace unmix {

namespace {

// top `count` eigenvectors of S (symmetric PSD), descending eigenvalue order
Eigen::MatrixXd top_eigenvectors(const Eigen::MatrixXd& s, int count) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(s);
  const long n = s.rows();
  Eigen::MatrixXd u(n, count);
  for (int i = 0; i < count; ++i) u.col(i) = eig.eigenvectors().col(n - 1 - i);
  return u;
}

long argmax_abs(const Eigen::RowVectorXd& v) {
  long best = 0;
  double best_val = std::abs(v(0));
  for (long j = 1; j < v.cols(); ++j) {
    double a = std::abs(v(j));
    if (a > best_val) {  // strict: ties keep the lowest index
      best_val = a;
      best = j;
    }
  }
  return best;
}

}  // namespace

EndmemberMatrix vca(const Eigen::MatrixXd& X, int count, std::uint64_t seed) {
  const long bands = X.rows(), n = X.cols();
  if (count < 1 || count > std::min(bands, n))
    fail(ErrorKind::Param, "endmember count out of range for the data");
  check_finite(X, "vca input");

  const double inv_n = 1.0 / static_cast<double>(n);
  const Eigen::MatrixXd gram = X * X.transpose() * inv_n;
  {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(gram, Eigen::EigenvaluesOnly);
    const auto& ev = eig.eigenvalues();  // ascending
    double top = ev(bands - 1);
    if (top <= 0.0 || ev(bands - count) <= 1e-14 * top)
      fail(ErrorKind::Degenerate, "input rank below requested endmember count");
  }

  Eigen::VectorXd mean = X.rowwise().mean();
  Eigen::MatrixXd centered = X.colwise() - mean;

  // SNR estimate from the R-dimensional PCA projection
  Eigen::MatrixXd u_pca = top_eigenvectors(centered * centered.transpose() * inv_n, count);
  Eigen::MatrixXd proj = u_pca.transpose() * centered;
  double p_y = X.squaredNorm() * inv_n;
  double p_x = proj.squaredNorm() * inv_n + mean.squaredNorm();
  double snr_db;
  if (p_y - p_x <= 1e-12 * p_y) {
    snr_db = std::numeric_limits<double>::infinity();
  } else {
    double num = p_x - (static_cast<double>(count) / static_cast<double>(bands)) * p_y;
    snr_db = num <= 0.0 ? -std::numeric_limits<double>::infinity()
                        : 10.0 * std::log10(num / (p_y - p_x));
  }
  const double snr_threshold = 15.0 + 10.0 * std::log10(static_cast<double>(count));

  Eigen::MatrixXd subspace;  // bands x d
  Eigen::MatrixXd y;         // count x n, data lifted onto the simplex/hyperplane
  Eigen::MatrixXd projected;
  const bool projective = snr_db > snr_threshold;
  if (projective) {
    subspace = top_eigenvectors(gram, count);
    projected = subspace.transpose() * X;
    Eigen::VectorXd u = projected.rowwise().mean();
    y = projected;
    for (long j = 0; j < n; ++j) {
      double d = projected.col(j).dot(u);
      if (std::abs(d) < 1e-300) d = d < 0.0 ? -1e-300 : 1e-300;
      y.col(j) /= d;
    }
  } else {
    subspace = top_eigenvectors(centered * centered.transpose() * inv_n, count - 1);
    projected = subspace.transpose() * centered;
    double c = 0.0;
    for (long j = 0; j < n; ++j) c = std::max(c, projected.col(j).norm());
    y.resize(count, n);
    y.topRows(count - 1) = projected;
    y.row(count - 1).setConstant(c);
  }

  std::vector<long> picked(static_cast<size_t>(count));
  if (count == 1) {
    // single endmember: strongest projection onto the principal direction
    picked[0] = argmax_abs(projected.row(0));
  } else {
    Rng rng(seed);
    Eigen::MatrixXd basis = Eigen::MatrixXd::Zero(count, count);
    basis(count - 1, 0) = 1.0;
    Eigen::VectorXd w(count), f(count);
    for (int i = 0; i < count; ++i) {
      for (int r = 0; r < count; ++r) w(r) = rng.normal();
      f = w - basis * basis.completeOrthogonalDecomposition().solve(w);
      double norm = f.norm();
      if (norm < 1e-12)
        f = w / w.norm();
      else
        f /= norm;
      Eigen::RowVectorXd v = f.transpose() * y;
      long k = argmax_abs(v);
      basis.col(i) = y.col(k);
      picked[static_cast<size_t>(i)] = k;
    }
  }

  // pure-pixel candidates returned as the original full-band columns
  EndmemberMatrix m(static_cast<int>(bands), count);
  for (int i = 0; i < count; ++i) m.data.col(i) = X.col(picked[static_cast<size_t>(i)]);
  return m;
}

namespace {

// Active-set nonnegative least squares on the normal equations:
// min 0.5 x^T G x - b^T x  s.t. x >= 0, with G = A^T A, b = A^T y.
void nnls_normal(const Eigen::MatrixXd& g, const Eigen::VectorXd& b, Eigen::VectorXd& x) {
  const int n = static_cast<int>(b.size());
  x.setZero(n);
  std::vector<bool> passive(static_cast<size_t>(n), false);
  Eigen::VectorXd w = b;
  const double tol = 1e-12 * std::max(1.0, b.cwiseAbs().maxCoeff());

  auto solve_passive = [&](Eigen::VectorXd& z) {
    std::vector<int> idx;
    for (int i = 0; i < n; ++i)
      if (passive[static_cast<size_t>(i)]) idx.push_back(i);
    const int m = static_cast<int>(idx.size());
    Eigen::MatrixXd gp(m, m);
    Eigen::VectorXd bp(m);
    for (int a = 0; a < m; ++a) {
      bp(a) = b(idx[static_cast<size_t>(a)]);
      for (int c = 0; c < m; ++c) gp(a, c) = g(idx[static_cast<size_t>(a)], idx[static_cast<size_t>(c)]);
    }
    Eigen::VectorXd zp = gp.ldlt().solve(bp);
    z.setZero(n);
    for (int a = 0; a < m; ++a) z(idx[static_cast<size_t>(a)]) = zp(a);
  };

  for (int outer = 0; outer < 30 * n; ++outer) {
    int best = -1;
    double best_w = tol;
    for (int i = 0; i < n; ++i)
      if (!passive[static_cast<size_t>(i)] && w(i) > best_w) {
        best_w = w(i);
        best = i;
      }
    if (best < 0) break;
    passive[static_cast<size_t>(best)] = true;

    Eigen::VectorXd z(n);
    for (int inner = 0; inner < 30 * n; ++inner) {
      solve_passive(z);
      double alpha = 1.0;
      int drop = -1;
      for (int i = 0; i < n; ++i) {
        if (!passive[static_cast<size_t>(i)] || z(i) > 0.0) continue;
        double step = x(i) / (x(i) - z(i));
        if (step < alpha) {
          alpha = step;
          drop = i;
        }
      }
      if (drop < 0) {
        x = z;
        break;
      }
      x += alpha * (z - x);
      x(drop) = 0.0;
      passive[static_cast<size_t>(drop)] = false;
      for (int i = 0; i < n; ++i)
        if (passive[static_cast<size_t>(i)] && x(i) <= 0.0) {
          x(i) = 0.0;
          passive[static_cast<size_t>(i)] = false;
        }
    }
    w = b - g * x;
  }
}

}  // namespace

AbundanceField fcls(const Eigen::MatrixXd& X, const EndmemberMatrix& m, int height, int width) {
  check_endmembers(m);
  check_finite(X, "fcls input");
  if (X.rows() != m.bands) fail(ErrorKind::Param, "band count mismatch between data and endmembers");
  if (X.cols() != static_cast<long>(height) * width)
    fail(ErrorKind::Param, "pixel count mismatch with declared height/width");

  const double scale = m.data.cwiseAbs().maxCoeff();
  if (scale <= 0.0) fail(ErrorKind::Degenerate, "all-zero endmember matrix");
  const double delta = 1e3 * scale;
  const int r = m.count;

  // normal equations of the sum-to-one augmented system
  Eigen::MatrixXd g = m.data.transpose() * m.data;
  g += delta * delta * Eigen::MatrixXd::Ones(r, r);
  g += (1e-12 * g.trace() / r) * Eigen::MatrixXd::Identity(r, r);  // ridge for near-singular M
  Eigen::MatrixXd bs = m.data.transpose() * X;  // r x n
  bs.array() += delta * delta;                  // + delta * (delta * 1)

  // unaugmented normal equations, used to polish the active set
  const Eigen::MatrixXd g0 = m.data.transpose() * m.data;
  const Eigen::MatrixXd bs0 = m.data.transpose() * X;

  AbundanceField field(r, height, width);
  const long n = field.pixels();
#pragma omp parallel for schedule(static) num_threads(worker_threads())
  for (long j = 0; j < n; ++j) {
    Eigen::VectorXd a(r);
    nnls_normal(g, bs.col(j), a);
    double sum = a.sum();
    if (sum > 0.0)
      a /= sum;
    else
      a.setConstant(1.0 / r);

    // exact equality-constrained solve on the support removes the bias of
    // the soft sum-to-one row
    std::vector<int> support;
    for (int i = 0; i < r; ++i)
      if (a(i) > 0.0) support.push_back(i);
    const int s = static_cast<int>(support.size());
    if (s > 0) {
      Eigen::MatrixXd kkt = Eigen::MatrixXd::Zero(s + 1, s + 1);
      Eigen::VectorXd rhs(s + 1);
      for (int p = 0; p < s; ++p) {
        rhs(p) = bs0(support[static_cast<size_t>(p)], j);
        kkt(p, s) = kkt(s, p) = 1.0;
        for (int q = 0; q < s; ++q)
          kkt(p, q) = g0(support[static_cast<size_t>(p)], support[static_cast<size_t>(q)]);
      }
      rhs(s) = 1.0;
      Eigen::VectorXd z = kkt.fullPivLu().solve(rhs);
      bool feasible = true;
      for (int p = 0; p < s; ++p) feasible = feasible && z(p) >= -1e-12;
      if (feasible) {
        a.setZero();
        for (int p = 0; p < s; ++p) a(support[static_cast<size_t>(p)]) = std::max(z(p), 0.0);
        double polished_sum = a.sum();
        if (polished_sum > 0.0) a /= polished_sum;
      }
    }
    field.data.col(j) = a;
  }
  return field;
}

InitResult initialize(const HyperCube& cube, int count, std::uint64_t seed) {
  check_cube(cube);
  InitResult out;
  out.endmembers = vca(cube.data, count, seed);
  out.abundances = fcls(cube.data, out.endmembers, cube.height, cube.width);
  return out;
}

}  // namespace unmix
