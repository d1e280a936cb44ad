#include "unmix/admm.hpp"

#include <cmath>
#include <fstream>

#include "unmix/simplex.hpp"

namespace unmix {

void check_admm_config(const AdmmConfig& config) {
  if (config.alpha < 0 || config.beta < 0 || config.lambda < 0 || config.eta1 < 0 ||
      config.eta2 < 0)
    fail(ErrorKind::Param, "penalties and dual steps must be nonnegative");
  if (config.max_outer < 1) fail(ErrorKind::Param, "max_outer must be >= 1");
  if (config.inner_v1 < 1) fail(ErrorKind::Param, "inner_v1 must be >= 1");
  if (config.lambda + config.alpha <= 0.0)
    fail(ErrorKind::Param, "lambda + alpha must be positive");
  check_denoiser(config.denoiser);
}

namespace {

void require_invertible(const Eigen::MatrixXd& sym, double shift, const char* what) {
  if (shift > 0.0) return;  // positive shift makes the system definite
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(sym, Eigen::EigenvaluesOnly);
  double lo = eig.eigenvalues()(0), hi = eig.eigenvalues()(sym.rows() - 1);
  if (hi <= 0.0 || lo <= 1e-12 * hi)
    fail(ErrorKind::Numeric, std::string("singular system in ") + what +
                                 " (zero penalty with rank-deficient factor)");
}

}  // namespace

Eigen::MatrixXd update_a(const Eigen::MatrixXd& X, const Eigen::MatrixXd& m,
                         const Eigen::MatrixXd& v1, const Eigen::MatrixXd& g1, double alpha) {
  Eigen::MatrixXd gram = m.transpose() * m;
  require_invertible(gram, alpha, "update_a");
  gram.diagonal().array() += alpha;
  Eigen::MatrixXd rhs = m.transpose() * X + alpha * (v1 - g1);
  return gram.ldlt().solve(rhs);
}

AbundanceField update_v1(const AbundanceField& a, const AbundanceField& g1,
                         const AbundanceField& v1_prev, double lambda, double alpha,
                         const DenoiserSpec& denoiser, int inner_iters) {
  if (lambda + alpha <= 0.0) fail(ErrorKind::Param, "lambda + alpha must be positive");
  AbundanceField v1 = v1_prev;
  // lambda = 0 and the identity denoiser share the exact stationary point
  if (lambda == 0.0 || denoiser.kind == DenoiserKind::Identity) {
    v1.data = a.data + g1.data;
    return v1;
  }
  const double inv = 1.0 / (lambda + alpha);
  for (int t = 0; t < inner_iters; ++t) {
    AbundanceField denoised = denoise(v1, denoiser);
    v1.data = inv * (lambda * denoised.data + alpha * (a.data + g1.data));
  }
  return v1;
}

Eigen::MatrixXd update_m(const Eigen::MatrixXd& X, const Eigen::MatrixXd& a,
                         const Eigen::MatrixXd& v2, const Eigen::MatrixXd& g2, double beta) {
  Eigen::MatrixXd gram = a * a.transpose();
  require_invertible(gram, beta, "update_m");
  gram.diagonal().array() += beta;
  Eigen::MatrixXd rhs = X * a.transpose() + beta * (v2 - g2);
  // M (A A^T + beta I) = rhs, solved through the transposed system
  return gram.ldlt().solve(rhs.transpose()).transpose();
}

Eigen::MatrixXd update_v2(const Eigen::MatrixXd& m, const Eigen::MatrixXd& g2) {
  return (m + g2).cwiseMax(0.0);
}

void update_duals(const Eigen::MatrixXd& a, const Eigen::MatrixXd& v1, Eigen::MatrixXd& g1,
                  const Eigen::MatrixXd& m, const Eigen::MatrixXd& v2, Eigen::MatrixXd& g2,
                  double eta1, double eta2) {
  g1 += eta1 * (a - v1);
  g2 += eta2 * (m - v2);
}

namespace {

// memoizes the last denoiser evaluation; solve() needs C(V1) both for the
// V1 sweep and for the objective at the same iterate
struct DenoiseCache {
  const DenoiserSpec& spec;
  AbundanceField input;
  AbundanceField output;
  bool valid = false;

  explicit DenoiseCache(const DenoiserSpec& s) : spec(s) {}

  const AbundanceField& eval(const AbundanceField& field) {
    if (valid && field.data.rows() == input.data.rows() &&
        field.data.cols() == input.data.cols() &&
        (field.data.array() == input.data.array()).all())
      return output;
    input = field;
    output = denoise(field, spec);
    valid = true;
    return output;
  }
};

}  // namespace

AdmmState solve(const HyperCube& cube, const AdmmConfig& config, const InitResult& init) {
  check_cube(cube);
  check_admm_config(config);
  check_endmembers(init.endmembers);
  check_field(init.abundances);
  const int r = init.endmembers.count;
  const long n = cube.pixels();
  if (init.endmembers.bands != cube.bands || init.abundances.count != r ||
      init.abundances.pixels() != n)
    fail(ErrorKind::Param, "initialization shapes do not match the cube");

  const Eigen::MatrixXd& X = cube.data;
  const double scale_a = std::sqrt(static_cast<double>(r) * n);
  const double scale_m = std::sqrt(static_cast<double>(cube.bands) * r);

  AdmmState st;
  st.m = init.endmembers.data;
  st.a = init.abundances;
  st.v1 = st.a;
  st.g1 = AbundanceField(r, cube.height, cube.width);
  st.v2 = st.m.cwiseMax(0.0);
  st.g2 = Eigen::MatrixXd::Zero(cube.bands, r);

  DenoiseCache cache(config.denoiser);
  const double inv_la = 1.0 / (config.lambda + config.alpha);

  for (int it = 0; it < config.max_outer; ++it) {
    // abundance block
    st.a.data = update_a(X, st.m, st.v1.data, st.g1.data, config.alpha);
    if (config.projection == AbundanceProjection::Simplex)
      project_columns_to_simplex(st.a.data);
    else
      softmax_columns(st.a.data);

    AbundanceField v1_prev = st.v1;
    if (config.lambda == 0.0 || config.denoiser.kind == DenoiserKind::Identity) {
      st.v1.data = st.a.data + st.g1.data;
    } else {
      for (int t = 0; t < config.inner_v1; ++t) {
        const AbundanceField& denoised = cache.eval(st.v1);
        st.v1.data = inv_la * (config.lambda * denoised.data +
                               config.alpha * (st.a.data + st.g1.data));
      }
    }
    st.g1.data += config.eta1 * (st.a.data - st.v1.data);

    // endmember block
    if (!config.freeze_endmembers) st.m = update_m(X, st.a.data, st.v2, st.g2, config.beta);
    Eigen::MatrixXd v2_prev = st.v2;
    st.v2 = update_v2(st.m, st.g2);
    st.g2 += config.eta2 * (st.m - st.v2);

    IterStats s;
    s.iteration = it;
    s.primal_a = (st.a.data - st.v1.data).norm() / scale_a;
    s.primal_m = (st.m - st.v2).norm() / scale_m;
    s.dual_a = (st.v1.data - v1_prev.data).norm() / scale_a;
    s.dual_m = (st.v2 - v2_prev).norm() / scale_m;
    double red = 0.0;
    if (config.lambda > 0.0) {
      const AbundanceField& denoised = cache.eval(st.v1);
      red = 0.5 * (st.v1.data.array() * (st.v1.data - denoised.data).array()).sum();
    }
    s.objective = 0.5 * (X - st.m * st.a.data).squaredNorm() + config.lambda * red +
                  0.5 * config.alpha * (st.a.data - st.v1.data + st.g1.data).squaredNorm() +
                  0.5 * config.beta * (st.m - st.v2 + st.g2).squaredNorm();
    st.history.push_back(s);
    st.iterations = it + 1;

    if (std::max(s.primal_a, s.primal_m) < config.tol_primal &&
        std::max(s.dual_a, s.dual_m) < config.tol_dual) {
      st.converged = true;
      break;
    }
  }
  return st;
}

void save_diagnostics_csv(const std::vector<IterStats>& history, const std::string& path) {
  std::ofstream out(path);
  if (!out) fail(ErrorKind::Io, "cannot open for writing: " + path);
  out << "iteration,objective,primal_a,primal_m,dual_a,dual_m\n";
  out.precision(17);
  for (const IterStats& s : history)
    out << s.iteration << "," << s.objective << "," << s.primal_a << "," << s.primal_m << ","
        << s.dual_a << "," << s.dual_m << "\n";
}

}  // namespace unmix
