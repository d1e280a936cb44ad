#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "unmix/metrics.hpp"
#include "unmix/rng.hpp"

using namespace unmix;

namespace {

EndmemberMatrix random_endmembers(int b, int r, std::uint64_t seed) {
  EndmemberMatrix m(b, r);
  Rng rng(seed);
  for (int i = 0; i < b; ++i)
    for (int j = 0; j < r; ++j) m.data(i, j) = 0.05 + rng.uniform();
  return m;
}

double permutation_cost(const EndmemberMatrix& est, const EndmemberMatrix& truth,
                        const std::vector<int>& perm) {
  double acc = 0.0;
  for (int r = 0; r < truth.count; ++r)
    acc += sad_degrees(truth.data.col(r), est.data.col(perm[static_cast<size_t>(r)]));
  return acc;
}

}  // namespace

TEST_CASE("alignment of identical sets is the identity") {
  EndmemberMatrix m = random_endmembers(8, 4, 1);
  std::vector<int> perm = align(m, m);
  for (int r = 0; r < 4; ++r) CHECK(perm[static_cast<size_t>(r)] == r);
}

TEST_CASE("alignment undoes a column swap") {
  EndmemberMatrix truth = random_endmembers(8, 3, 2);
  EndmemberMatrix est = truth;
  est.data.col(0).swap(est.data.col(2));
  std::vector<int> perm = align(est, truth);
  CHECK(perm[0] == 2);
  CHECK(perm[1] == 1);
  CHECK(perm[2] == 0);
}

TEST_CASE("alignment matches exhaustive search on random instances") {
  for (std::uint64_t seed = 10; seed < 18; ++seed) {
    EndmemberMatrix truth = random_endmembers(6, 3, seed);
    EndmemberMatrix est = random_endmembers(6, 3, seed + 100);
    std::vector<int> perm = align(est, truth);

    std::vector<int> cand = {0, 1, 2};
    double best_cost = 1e300;
    do {
      best_cost = std::min(best_cost, permutation_cost(est, truth, cand));
    } while (std::next_permutation(cand.begin(), cand.end()));
    CHECK(permutation_cost(est, truth, perm) == doctest::Approx(best_cost).epsilon(1e-12));
  }
}

TEST_CASE("abundance rmse evaluates its closed form") {
  AbundanceField truth(2, 1, 1), est(2, 1, 1);
  truth.data << 1.0, 0.0;
  est.data << 0.9, 0.1;
  CHECK(armse(est, truth) == doctest::Approx(0.1).epsilon(1e-12));

  CHECK(armse(truth, truth) == 0.0);
  CHECK(armse(est, truth) == armse(truth, est));
}

TEST_CASE("rms metrics satisfy a triangle-style bound") {
  Rng rng(5);
  for (int trial = 0; trial < 20; ++trial) {
    AbundanceField a(3, 2, 2), b(3, 2, 2), c(3, 2, 2);
    for (int ch = 0; ch < 3; ++ch)
      for (long n = 0; n < 4; ++n) {
        a.data(ch, n) = rng.normal();
        b.data(ch, n) = rng.normal();
        c.data(ch, n) = rng.normal();
      }
    CHECK(armse(a, c) <= armse(a, b) + armse(b, c) + 1e-12);
  }
}

TEST_CASE("endmember rmse averages over bands and columns") {
  EndmemberMatrix truth = random_endmembers(5, 2, 7);
  EndmemberMatrix est = truth;
  est.data.array() += 0.1;
  CHECK(mrmse(est, truth) == doctest::Approx(0.1).epsilon(1e-12));
}

TEST_CASE("spectral angle endpoints") {
  Eigen::VectorXd a(3), b(3);
  a << 1, 0, 0;
  b << 0, 1, 0;
  CHECK(sad_degrees(a, a) == 0.0);
  CHECK(sad_degrees(a, b) == doctest::Approx(90.0).epsilon(1e-12));
  CHECK(sad_degrees(a, 3.5 * a) == doctest::Approx(0.0).epsilon(1e-12));

  Eigen::VectorXd zero = Eigen::VectorXd::Zero(3);
  CHECK_THROWS_AS(sad_degrees(a, zero), Error);
}

TEST_CASE("angles are invariant to positive scaling") {
  Rng rng(9);
  for (int trial = 0; trial < 10; ++trial) {
    Eigen::VectorXd a(6), b(6);
    for (int i = 0; i < 6; ++i) {
      a(i) = rng.uniform(0.1, 1.0);
      b(i) = rng.uniform(0.1, 1.0);
    }
    double base = sad_degrees(a, b);
    CHECK(sad_degrees(2.0 * a, b) == doctest::Approx(base).epsilon(1e-10));
    CHECK(sad_degrees(a, 0.3 * b) == doctest::Approx(base).epsilon(1e-10));
  }
}

TEST_CASE("psnr evaluates its closed form and the exact sentinel") {
  Eigen::MatrixXd xhat = Eigen::MatrixXd::Ones(4, 5);
  Eigen::MatrixXd x = xhat.array() - 0.1;  // mse 0.01, peak 1
  CHECK(psnr_db(x, xhat) == doctest::Approx(20.0).epsilon(1e-12));
  CHECK(std::isinf(psnr_db(xhat, xhat)));
}

TEST_CASE("metrics are invariant under a consistent relabeling after alignment") {
  Rng rng(20);
  EndmemberMatrix truth = random_endmembers(7, 4, 21);
  AbundanceField truth_a(4, 3, 3);
  for (int ch = 0; ch < 4; ++ch)
    for (long n = 0; n < 9; ++n) truth_a.data(ch, n) = rng.uniform();

  EndmemberMatrix est = truth;
  est.data.array() += 0.01;  // small perturbation keeps the matching unique
  AbundanceField est_a = truth_a;
  est_a.data.array() += 0.005;

  // scramble the estimated labels
  std::vector<int> scramble = {2, 0, 3, 1};
  EndmemberMatrix est_p(7, 4);
  AbundanceField est_ap(4, 3, 3);
  for (int r = 0; r < 4; ++r) {
    est_p.data.col(scramble[static_cast<size_t>(r)]) = est.data.col(r);
    est_ap.data.row(scramble[static_cast<size_t>(r)]) = est_a.data.row(r);
  }

  std::vector<int> perm = align(est_p, truth);
  CHECK(armse(est_ap, truth_a, perm) == doctest::Approx(armse(est_a, truth_a)).epsilon(1e-12));
  CHECK(mrmse(est_p, truth, perm) == doctest::Approx(mrmse(est, truth)).epsilon(1e-12));
  CHECK(msad_degrees(est_p, truth, perm) ==
        doctest::Approx(msad_degrees(est, truth)).epsilon(1e-10));
}

TEST_CASE("full evaluation produces a csv row with five metrics") {
  EndmemberMatrix truth = random_endmembers(6, 3, 30);
  AbundanceField truth_a(3, 2, 2);
  truth_a.data.setConstant(1.0 / 3);
  Eigen::MatrixXd x = truth.data * truth_a.data;

  EvalReport report = evaluate(truth, truth_a, x, truth, truth_a, x);
  CHECK(report.armse == 0.0);
  CHECK(report.mrmse == 0.0);
  CHECK(std::isinf(report.psnr));

  std::string row = report.csv_row();
  CHECK(std::count(row.begin(), row.end(), ',') == 5);
  CHECK(row.find("inf") != std::string::npos);
  CHECK(EvalReport::csv_header() == "armse,mrmse,sad,msad,psnr,permutation");
}

TEST_CASE("mismatched shapes are rejected") {
  EndmemberMatrix a = random_endmembers(6, 3, 40);
  EndmemberMatrix b = random_endmembers(6, 4, 41);
  CHECK_THROWS_AS(align(a, b), Error);
  CHECK_THROWS_AS(mrmse(a, b), Error);
}
