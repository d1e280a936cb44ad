#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "unmix/admm.hpp"
#include "unmix/metrics.hpp"
#include "unmix/rng.hpp"
#include "unmix/synth.hpp"

using namespace unmix;

namespace {

Eigen::MatrixXd random_matrix(int rows, int cols, Rng& rng) {
  Eigen::MatrixXd m(rows, cols);
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j) m(i, j) = rng.normal();
  return m;
}

AbundanceField field_of(const Eigen::MatrixXd& data, int h, int w) {
  AbundanceField f(static_cast<int>(data.rows()), h, w);
  f.data = data;
  return f;
}

}  // namespace

TEST_CASE("abundance update matches an independent dense solve") {
  Rng rng(1);
  for (int trial = 0; trial < 20; ++trial) {
    int b = 3 + static_cast<int>(rng.below(6));
    int r = 2 + static_cast<int>(rng.below(3));
    int n = 4 + static_cast<int>(rng.below(13));
    double alpha = 0.5;
    Eigen::MatrixXd m = random_matrix(b, r, rng);
    Eigen::MatrixXd x = random_matrix(b, n, rng);
    Eigen::MatrixXd v1 = random_matrix(r, n, rng);
    Eigen::MatrixXd g1 = random_matrix(r, n, rng);

    Eigen::MatrixXd a = update_a(x, m, v1, g1, alpha);
    Eigen::MatrixXd lhs = m.transpose() * m + alpha * Eigen::MatrixXd::Identity(r, r);
    Eigen::MatrixXd rhs = m.transpose() * x + alpha * (v1 - g1);
    Eigen::MatrixXd oracle = lhs.fullPivLu().solve(rhs);
    CHECK((a - oracle).norm() / oracle.norm() < 1e-10);
    // normal equations hold
    CHECK((lhs * a - rhs).norm() / rhs.norm() < 1e-10);
  }
}

TEST_CASE("abundance update reduces to the data when the model is trivial") {
  Rng rng(2);
  Eigen::MatrixXd x = random_matrix(4, 6, rng);
  Eigen::MatrixXd zero = Eigen::MatrixXd::Zero(4, 6);
  Eigen::MatrixXd a = update_a(x, Eigen::MatrixXd::Identity(4, 4), zero, zero, 0.0);
  CHECK((a - x).norm() < 1e-12);
}

TEST_CASE("huge penalty pins the abundance update to V1 - G1") {
  Rng rng(3);
  Eigen::MatrixXd m = random_matrix(5, 3, rng);
  Eigen::MatrixXd x = random_matrix(5, 8, rng);
  Eigen::MatrixXd v1 = random_matrix(3, 8, rng);
  Eigen::MatrixXd g1 = random_matrix(3, 8, rng);
  Eigen::MatrixXd a = update_a(x, m, v1, g1, 1e12);
  CHECK((a - (v1 - g1)).norm() / (v1 - g1).norm() < 1e-6);
}

TEST_CASE("zero penalty with rank-deficient factor is a numeric error") {
  Eigen::MatrixXd m(4, 2);
  m.col(0) << 1, 2, 3, 4;
  m.col(1) = 2.0 * m.col(0);
  Eigen::MatrixXd x = Eigen::MatrixXd::Ones(4, 3);
  Eigen::MatrixXd z = Eigen::MatrixXd::Zero(2, 3);
  try {
    update_a(x, m, z, z, 0.0);
    FAIL("expected singular-system error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::Numeric);
  }
}

TEST_CASE("v1 update: no regularization or identity denoiser lands on A + G1") {
  Rng rng(4);
  AbundanceField a = field_of(random_matrix(3, 12, rng), 3, 4);
  AbundanceField g1 = field_of(random_matrix(3, 12, rng), 3, 4);
  AbundanceField v1_prev = field_of(random_matrix(3, 12, rng), 3, 4);

  AbundanceField lam0 = update_v1(a, g1, v1_prev, 0.0, 0.7, DenoiserSpec::gaussian(1.0), 3);
  CHECK((lam0.data - (a.data + g1.data)).cwiseAbs().maxCoeff() < 1e-14);

  AbundanceField ident = update_v1(a, g1, v1_prev, 0.3, 0.7, DenoiserSpec::identity(), 1);
  CHECK((ident.data - (a.data + g1.data)).cwiseAbs().maxCoeff() < 1e-14);
}

TEST_CASE("v1 update converges to the linear-scale fixed point") {
  Rng rng(5);
  const double lambda = 0.4, alpha = 0.25, c = 0.5;
  AbundanceField a = field_of(random_matrix(2, 20, rng), 4, 5);
  AbundanceField g1 = field_of(random_matrix(2, 20, rng), 4, 5);
  AbundanceField v1_prev = field_of(random_matrix(2, 20, rng), 4, 5);

  AbundanceField v1 = update_v1(a, g1, v1_prev, lambda, alpha, DenoiserSpec::linear_scale(c), 50);
  // stationarity: lambda (V - cV) + alpha (V - A - G1) = 0
  Eigen::MatrixXd analytic = alpha * (a.data + g1.data) / (lambda * (1.0 - c) + alpha);
  CHECK((v1.data - analytic).cwiseAbs().maxCoeff() < 1e-8);
}

TEST_CASE("endmember update matches an independent dense solve") {
  Rng rng(6);
  for (int trial = 0; trial < 20; ++trial) {
    int b = 3 + static_cast<int>(rng.below(6));
    int r = 2 + static_cast<int>(rng.below(3));
    int n = 4 + static_cast<int>(rng.below(13));
    double beta = 0.8;
    Eigen::MatrixXd a = random_matrix(r, n, rng);
    Eigen::MatrixXd x = random_matrix(b, n, rng);
    Eigen::MatrixXd v2 = random_matrix(b, r, rng);
    Eigen::MatrixXd g2 = random_matrix(b, r, rng);

    Eigen::MatrixXd m = update_m(x, a, v2, g2, beta);
    Eigen::MatrixXd lhs = a * a.transpose() + beta * Eigen::MatrixXd::Identity(r, r);
    Eigen::MatrixXd rhs = x * a.transpose() + beta * (v2 - g2);
    Eigen::MatrixXd oracle = lhs.fullPivLu().solve(rhs.transpose()).transpose();
    CHECK((m - oracle).norm() / oracle.norm() < 1e-10);
    CHECK((m * lhs - rhs).norm() / rhs.norm() < 1e-10);
  }
}

TEST_CASE("endmember update trivial and saturated regimes") {
  Rng rng(7);
  Eigen::MatrixXd x = random_matrix(5, 4, rng);
  Eigen::MatrixXd zero = Eigen::MatrixXd::Zero(5, 4);
  Eigen::MatrixXd m = update_m(x, Eigen::MatrixXd::Identity(4, 4), zero, zero, 0.0);
  CHECK((m - x).norm() < 1e-12);

  Eigen::MatrixXd a = random_matrix(3, 9, rng);
  Eigen::MatrixXd v2 = random_matrix(5, 3, rng);
  Eigen::MatrixXd g2 = random_matrix(5, 3, rng);
  Eigen::MatrixXd sat = update_m(random_matrix(5, 9, rng), a, v2, g2, 1e12);
  CHECK((sat - (v2 - g2)).norm() / (v2 - g2).norm() < 1e-6);
}

TEST_CASE("v2 update is an elementwise clamp") {
  Eigen::MatrixXd m(2, 2), g2(2, 2);
  m << 1.0, -2.0, -1.0, 0.25;
  g2 << 0.0, 0.0, 0.0, 0.25;
  Eigen::MatrixXd v2 = update_v2(m, g2);
  CHECK(v2(0, 0) == 1.0);
  CHECK(v2(0, 1) == 0.0);
  CHECK(v2(1, 0) == 0.0);
  CHECK(v2(1, 1) == 0.5);

  Eigen::MatrixXd neg = Eigen::MatrixXd::Constant(3, 3, -1.0);
  CHECK((update_v2(neg, Eigen::MatrixXd::Zero(3, 3)).array() == 0.0).all());
  Eigen::MatrixXd pos = Eigen::MatrixXd::Constant(3, 3, 0.7);
  CHECK((update_v2(pos, Eigen::MatrixXd::Zero(3, 3)).array() == 0.7).all());
}

TEST_CASE("dual updates accumulate the scaled residual") {
  Rng rng(8);
  Eigen::MatrixXd a = random_matrix(3, 5, rng);
  Eigen::MatrixXd m = random_matrix(4, 3, rng);

  // zero residual leaves the duals unchanged
  Eigen::MatrixXd g1 = random_matrix(3, 5, rng);
  Eigen::MatrixXd g2 = random_matrix(4, 3, rng);
  Eigen::MatrixXd g1_before = g1, g2_before = g2;
  update_duals(a, a, g1, m, m, g2, 1.0, 1.0);
  CHECK((g1 - g1_before).norm() == 0.0);
  CHECK((g2 - g2_before).norm() == 0.0);

  // unit step from zero captures the residual
  Eigen::MatrixXd v1 = random_matrix(3, 5, rng);
  g1.setZero();
  g2.setZero();
  update_duals(a, v1, g1, m, m, g2, 1.0, 1.0);
  CHECK((g1 - (a - v1)).norm() < 1e-15);

  // two half steps against a constant residual reach the full residual
  g1.setZero();
  g2.setZero();
  update_duals(a, v1, g1, m, m, g2, 0.5, 0.5);
  update_duals(a, v1, g1, m, m, g2, 0.5, 0.5);
  CHECK((g1 - (a - v1)).cwiseAbs().maxCoeff() < 1e-15);
}

namespace {

InitResult truth_init(const EndmemberMatrix& m, int r, int h, int w) {
  InitResult init;
  init.endmembers = m;
  init.abundances = AbundanceField(r, h, w);
  init.abundances.data.setConstant(1.0 / r);
  return init;
}

}  // namespace

TEST_CASE("solve with frozen true endmembers recovers the abundances") {
  SynthSpec spec;
  spec.height = 16;
  spec.width = 16;
  spec.endmember_count = 3;
  spec.band_count = 12;
  spec.seed = 5;
  auto [cube, m_true, a_true] = generate_synthetic(spec);

  AdmmConfig config;
  config.alpha = 0.1;
  config.lambda = 0.0;
  config.denoiser = DenoiserSpec::identity();
  config.freeze_endmembers = true;
  config.max_outer = 400;
  config.tol_primal = 1e-12;
  config.tol_dual = 1e-12;

  AdmmState st = solve(cube, config, truth_init(m_true, 3, 16, 16));
  CHECK(armse(st.a, a_true) < 1e-4);
}

TEST_CASE("plain split converges to tiny primal residuals") {
  SynthSpec spec;
  spec.height = 12;
  spec.width = 12;
  spec.endmember_count = 3;
  spec.band_count = 16;
  spec.seed = 9;
  auto [cube, m_true, a_true] = generate_synthetic(spec);

  AdmmConfig config;
  config.lambda = 0.0;
  config.denoiser = DenoiserSpec::identity();
  config.eta1 = config.eta2 = 1.0;
  config.max_outer = 200;
  AdmmState st = solve(cube, config, truth_init(m_true, 3, 12, 12));
  CHECK(st.history.back().primal_a < 1e-6);
  CHECK(st.history.back().primal_m < 1e-6);

  // with a longer budget the dual residuals settle as well
  config.max_outer = 400;
  AdmmState longer = solve(cube, config, truth_init(m_true, 3, 12, 12));
  CHECK(longer.converged);
}

TEST_CASE("feasibility holds after every iteration") {
  SynthSpec spec;
  spec.height = 10;
  spec.width = 10;
  spec.endmember_count = 3;
  spec.band_count = 14;
  auto [clean, m_true, a_true] = generate_synthetic(spec);
  HyperCube cube = add_noise(clean, 20.0, 2);

  for (AbundanceProjection proj : {AbundanceProjection::Simplex, AbundanceProjection::Softmax}) {
    AdmmConfig config;
    config.denoiser = DenoiserSpec::gaussian(1.0);
    config.lambda = 0.05;
    config.max_outer = 5;
    config.projection = proj;
    AdmmState st = solve(cube, config, truth_init(m_true, 3, 10, 10));
    CHECK((st.a.data.array() >= 0.0).all());
    for (long n = 0; n < st.a.pixels(); ++n) CHECK(std::abs(st.a.data.col(n).sum() - 1.0) < 1e-9);
    CHECK((st.v2.array() >= 0.0).all());
  }
}

TEST_CASE("each closed-form sub-update weakly decreases its subproblem") {
  Rng rng(10);
  for (int trial = 0; trial < 8; ++trial) {
    int b = 5, r = 3, n = 11;
    double alpha = 0.2, beta = 0.3;
    Eigen::MatrixXd x = random_matrix(b, n, rng);
    Eigen::MatrixXd m = random_matrix(b, r, rng);
    Eigen::MatrixXd a_prev = random_matrix(r, n, rng);
    Eigen::MatrixXd v1 = random_matrix(r, n, rng);
    Eigen::MatrixXd g1 = random_matrix(r, n, rng);
    Eigen::MatrixXd v2 = random_matrix(b, r, rng);
    Eigen::MatrixXd g2 = random_matrix(b, r, rng);

    auto f_a = [&](const Eigen::MatrixXd& a) {
      return 0.5 * (x - m * a).squaredNorm() + 0.5 * alpha * (a - v1 + g1).squaredNorm();
    };
    Eigen::MatrixXd a_new = update_a(x, m, v1, g1, alpha);
    CHECK(f_a(a_new) <= f_a(a_prev) + 1e-12);

    auto f_m = [&](const Eigen::MatrixXd& mm) {
      return 0.5 * (x - mm * a_new).squaredNorm() + 0.5 * beta * (mm - v2 + g2).squaredNorm();
    };
    Eigen::MatrixXd m_new = update_m(x, a_new, v2, g2, beta);
    CHECK(f_m(m_new) <= f_m(m) + 1e-12);

    auto f_v2 = [&](const Eigen::MatrixXd& vv) { return 0.5 * beta * (m_new - vv + g2).squaredNorm(); };
    Eigen::MatrixXd v2_new = update_v2(m_new, g2);
    Eigen::MatrixXd v2_feasible = v2.cwiseMax(0.0);
    CHECK(f_v2(v2_new) <= f_v2(v2_feasible) + 1e-12);
  }
}

TEST_CASE("solve follows the analytic linear-scale trajectory") {
  SynthSpec spec;
  spec.height = 8;
  spec.width = 8;
  spec.endmember_count = 2;
  spec.band_count = 6;
  auto [cube, m_true, a_true] = generate_synthetic(spec);
  InitResult init = truth_init(m_true, 2, 8, 8);

  const double c = 0.5;
  AdmmConfig config;
  config.lambda = 0.3;
  config.alpha = 0.4;
  config.beta = 0.2;
  config.denoiser = DenoiserSpec::linear_scale(c);
  config.tol_primal = 0.0;  // run exactly max_outer iterations
  config.tol_dual = 0.0;

  // independent transcription of the loop recurrences
  Eigen::MatrixXd m = init.endmembers.data;
  Eigen::MatrixXd a = init.abundances.data;
  Eigen::MatrixXd v1 = a, g1 = Eigen::MatrixXd::Zero(2, 64);
  Eigen::MatrixXd v2 = m.cwiseMax(0.0), g2 = Eigen::MatrixXd::Zero(6, 2);
  const Eigen::MatrixXd& x = cube.data;
  for (int it = 0; it < 6; ++it) {
    Eigen::MatrixXd lhs = m.transpose() * m + config.alpha * Eigen::MatrixXd::Identity(2, 2);
    a = lhs.fullPivLu().solve(m.transpose() * x + config.alpha * (v1 - g1));
    {
      // hand-written simplex projection per column
      for (long col = 0; col < a.cols(); ++col) {
        Eigen::VectorXd u = a.col(col);
        std::sort(u.data(), u.data() + u.size(), std::greater<double>());
        double cssv = 0.0, theta = 0.0;
        for (long j = 0; j < u.size(); ++j) {
          cssv += u(j);
          double t = (cssv - 1.0) / static_cast<double>(j + 1);
          if (u(j) > t) theta = t;
        }
        for (long row = 0; row < a.rows(); ++row)
          a(row, col) = std::max(a(row, col) - theta, 0.0);
      }
    }
    v1 = (config.lambda * c * v1 + config.alpha * (a + g1)) / (config.lambda + config.alpha);
    g1 += a - v1;
    Eigen::MatrixXd lhs_m = a * a.transpose() + config.beta * Eigen::MatrixXd::Identity(2, 2);
    m = lhs_m.fullPivLu().solve((x * a.transpose() + config.beta * (v2 - g2)).transpose()).transpose();
    v2 = (m + g2).cwiseMax(0.0);
    g2 += m - v2;
  }

  config.max_outer = 6;
  AdmmState st = solve(cube, config, init);
  CHECK((st.v1.data - v1).cwiseAbs().maxCoeff() < 1e-8);
  CHECK((st.a.data - a).cwiseAbs().maxCoeff() < 1e-8);
  CHECK((st.m - m).cwiseAbs().maxCoeff() < 1e-8);
}

TEST_CASE("diagnostics are recorded every iteration") {
  SynthSpec spec;
  spec.height = 8;
  spec.width = 8;
  spec.endmember_count = 2;
  spec.band_count = 6;
  auto [cube, m_true, a_true] = generate_synthetic(spec);
  AdmmConfig config;
  config.max_outer = 7;
  config.tol_primal = 0.0;
  config.tol_dual = 0.0;
  config.denoiser = DenoiserSpec::gaussian(1.0);
  AdmmState st = solve(cube, config, truth_init(m_true, 2, 8, 8));
  CHECK(st.history.size() == 7);
  for (const IterStats& s : st.history) CHECK(std::isfinite(s.objective));
}
