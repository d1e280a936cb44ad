#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "unmix/denoise.hpp"
#include "unmix/rng.hpp"

using namespace unmix;

namespace {

AbundanceField random_field(int r, int h, int w, std::uint64_t seed) {
  AbundanceField f(r, h, w);
  Rng rng(seed);
  for (int c = 0; c < r; ++c)
    for (long n = 0; n < f.pixels(); ++n) f.data(c, n) = rng.uniform();
  return f;
}

}  // namespace

TEST_CASE("identity returns the input unchanged") {
  AbundanceField f = random_field(3, 9, 7, 1);
  AbundanceField out = denoise(f, DenoiserSpec::identity());
  CHECK((out.data.array() == f.data.array()).all());
  AbundanceField res = residual(f, DenoiserSpec::identity());
  CHECK((res.data.array() == 0.0).all());
}

TEST_CASE("constant fields pass through every kind") {
  AbundanceField f(2, 10, 10);
  f.data.row(0).setConstant(0.4);
  f.data.row(1).setConstant(0.6);
  for (const DenoiserSpec& spec :
       {DenoiserSpec::gaussian(1.5), DenoiserSpec::median(1), DenoiserSpec::nlm(1, 3, 0.2)}) {
    AbundanceField out = denoise(f, spec);
    CHECK((out.data - f.data).cwiseAbs().maxCoeff() < 1e-12);
  }
}

TEST_CASE("median removes an isolated impulse") {
  AbundanceField f(1, 5, 5);
  f.at(0, 2, 2) = 10.0;
  AbundanceField out = denoise(f, DenoiserSpec::median(1));
  CHECK(out.at(0, 2, 2) == 0.0);
}

TEST_CASE("gaussian impulse response is the sampled kernel") {
  const double sigma = 1.0;
  AbundanceField f(1, 15, 15);
  f.at(0, 7, 7) = 1.0;
  AbundanceField out = denoise(f, DenoiserSpec::gaussian(sigma));

  // direct separable-kernel evaluation, radius 3*sigma, same normalization
  const int radius = 3;
  double norm = 0.0;
  std::vector<double> k(2 * radius + 1);
  for (int i = -radius; i <= radius; ++i) {
    k[static_cast<size_t>(i + radius)] = std::exp(-0.5 * i * i / (sigma * sigma));
    norm += k[static_cast<size_t>(i + radius)];
  }
  for (double& v : k) v /= norm;
  for (int dr = -radius; dr <= radius; ++dr)
    for (int dc = -radius; dc <= radius; ++dc)
      CHECK(out.at(0, 7 + dr, 7 + dc) ==
            doctest::Approx(k[static_cast<size_t>(dr + radius)] * k[static_cast<size_t>(dc + radius)])
                .epsilon(1e-12));

  AbundanceField res = residual(f, DenoiserSpec::gaussian(sigma));
  CHECK(res.at(0, 7, 7) == doctest::Approx(1.0 - k[radius] * k[radius]).epsilon(1e-12));
}

TEST_CASE("linear scale residual is the complementary fraction") {
  AbundanceField f = random_field(2, 6, 6, 9);
  AbundanceField res = residual(f, DenoiserSpec::linear_scale(0.5));
  CHECK((res.data - 0.5 * f.data).cwiseAbs().maxCoeff() < 1e-15);
}

TEST_CASE("smoothing kinds stay within the input range") {
  AbundanceField f = random_field(2, 12, 12, 33);
  const double lo = f.data.minCoeff(), hi = f.data.maxCoeff();
  for (const DenoiserSpec& spec :
       {DenoiserSpec::gaussian(0.8), DenoiserSpec::median(2), DenoiserSpec::nlm(1, 4, 0.15)}) {
    AbundanceField out = denoise(f, spec);
    CHECK(out.data.minCoeff() >= lo - 1e-12);
    CHECK(out.data.maxCoeff() <= hi + 1e-12);
  }
}

TEST_CASE("channels are processed independently") {
  AbundanceField f = random_field(3, 8, 8, 4);
  AbundanceField full = denoise(f, DenoiserSpec::gaussian(1.0));
  for (int c = 0; c < 3; ++c) {
    AbundanceField single(1, 8, 8);
    single.data = f.data.row(c);
    AbundanceField out = denoise(single, DenoiserSpec::gaussian(1.0));
    CHECK((out.data - full.data.row(c)).cwiseAbs().maxCoeff() == 0.0);
  }
}

TEST_CASE("denoisers are deterministic") {
  AbundanceField f = random_field(2, 10, 10, 5);
  for (const DenoiserSpec& spec :
       {DenoiserSpec::gaussian(1.2), DenoiserSpec::median(1), DenoiserSpec::nlm(1, 3, 0.1)}) {
    AbundanceField a = denoise(f, spec);
    AbundanceField b = denoise(f, spec);
    CHECK((a.data.array() == b.data.array()).all());
  }
}

TEST_CASE("bad parameters are rejected") {
  CHECK_THROWS_AS(denoiser_kind_from_string("wavelet"), Error);
  AbundanceField f = random_field(1, 5, 5, 2);
  CHECK_THROWS_AS(denoise(f, DenoiserSpec::gaussian(-1.0)), Error);
  CHECK_THROWS_AS(denoise(f, DenoiserSpec::median(0)), Error);
  CHECK_THROWS_AS(denoise(f, DenoiserSpec::nlm(1, 2, 0.0)), Error);
}
