#include "unmix/synth.hpp"

#include <cmath>
#include <vector>

#include "unmix/rng.hpp"

namespace unmix {

namespace detail {
extern const int kSpectraSamples;
extern const double kSpectraTable[224][4];
}  // namespace detail

void check_spec(const SynthSpec& spec) {
  if (spec.height < 8 || spec.width < 8)
    fail(ErrorKind::Param, "synthetic scene must be at least 8x8");
  if (spec.endmember_count < 2 && spec.endmember_count != 1)
    fail(ErrorKind::Param, "endmember count must be >= 1");
  if (spec.endmember_count > spec.band_count)
    fail(ErrorKind::Param, "endmember count cannot exceed band count");
  if (spec.band_count < 1) fail(ErrorKind::Param, "band count must be positive");
  if (spec.smoothness <= 0.0 || spec.sharpness <= 0.0)
    fail(ErrorKind::Param, "smoothness and sharpness must be positive");
}

namespace {

// reflect across sample boundaries: ... 1 0 | 0 1 2 ... n-1 | n-1 n-2 ...
int reflect_index(int i, int n) {
  if (n == 1) return 0;
  while (i < 0 || i >= n) {
    if (i < 0) i = -i - 1;
    if (i >= n) i = 2 * n - 1 - i;
  }
  return i;
}

std::vector<double> gaussian_kernel(double sigma) {
  int radius = std::max(1, static_cast<int>(std::ceil(3.0 * sigma)));
  std::vector<double> k(static_cast<size_t>(2 * radius + 1));
  double sum = 0.0;
  for (int i = -radius; i <= radius; ++i) {
    double v = std::exp(-0.5 * (i / sigma) * (i / sigma));
    k[static_cast<size_t>(i + radius)] = v;
    sum += v;
  }
  for (double& v : k) v /= sum;
  return k;
}

// separable Gaussian blur of an H x W plane stored row-major
void blur_plane(std::vector<double>& plane, int h, int w, double sigma) {
  const std::vector<double> k = gaussian_kernel(sigma);
  const int radius = static_cast<int>(k.size() / 2);
  std::vector<double> tmp(plane.size());
  for (int r = 0; r < h; ++r)
    for (int c = 0; c < w; ++c) {
      double acc = 0.0;
      for (int d = -radius; d <= radius; ++d)
        acc += k[static_cast<size_t>(d + radius)] * plane[static_cast<size_t>(r) * w + reflect_index(c + d, w)];
      tmp[static_cast<size_t>(r) * w + c] = acc;
    }
  for (int c = 0; c < w; ++c)
    for (int r = 0; r < h; ++r) {
      double acc = 0.0;
      for (int d = -radius; d <= radius; ++d)
        acc += k[static_cast<size_t>(d + radius)] * tmp[static_cast<size_t>(reflect_index(r + d, h)) * w + c];
      plane[static_cast<size_t>(r) * w + c] = acc;
    }
}

double resample_table(int column, double t) {
  // linear interpolation over the curated table at parameter t in [0,1]
  const int n = detail::kSpectraSamples;
  double x = t * (n - 1);
  int i0 = static_cast<int>(std::floor(x));
  if (i0 >= n - 1) i0 = n - 2;
  double frac = x - i0;
  return detail::kSpectraTable[i0][column] * (1.0 - frac) +
         detail::kSpectraTable[i0 + 1][column] * frac;
}

}  // namespace

EndmemberMatrix builtin_endmembers(int bands, int count, std::uint64_t seed) {
  EndmemberMatrix m(bands, count);
  const int curated = 4;
  for (int r = 0; r < std::min(count, curated); ++r)
    for (int b = 0; b < bands; ++b)
      m.data(b, r) = resample_table(r, bands == 1 ? 0.0 : static_cast<double>(b) / (bands - 1));

  if (count > curated) {
    // fallback: smooth positive spectra as sums of Gaussian bumps
    Rng rng(seed ^ 0x5eedULL);
    for (int r = curated; r < count; ++r) {
      double base = rng.uniform(0.05, 0.25);
      int bumps = 3 + static_cast<int>(rng.below(3));
      std::vector<double> center(static_cast<size_t>(bumps)), widthp(static_cast<size_t>(bumps)),
          amp(static_cast<size_t>(bumps));
      for (int j = 0; j < bumps; ++j) {
        center[static_cast<size_t>(j)] = rng.uniform(0.05, 0.95);
        widthp[static_cast<size_t>(j)] = rng.uniform(0.05, 0.25);
        amp[static_cast<size_t>(j)] = rng.uniform(0.1, 0.5);
      }
      for (int b = 0; b < bands; ++b) {
        double t = bands == 1 ? 0.0 : static_cast<double>(b) / (bands - 1);
        double v = base;
        for (int j = 0; j < bumps; ++j) {
          double z = (t - center[static_cast<size_t>(j)]) / widthp[static_cast<size_t>(j)];
          v += amp[static_cast<size_t>(j)] * std::exp(-0.5 * z * z);
        }
        m.data(b, r) = std::min(v, 0.98);
      }
    }
  }
  return m;
}

std::tuple<HyperCube, EndmemberMatrix, AbundanceField> generate_synthetic(const SynthSpec& spec) {
  check_spec(spec);
  const int h = spec.height, w = spec.width, r_count = spec.endmember_count;
  const long n = static_cast<long>(h) * w;

  EndmemberMatrix endmembers = builtin_endmembers(spec.band_count, r_count, spec.seed);

  // R independent Gaussian random fields, standardized after filtering so the
  // softmax sharpness acts on a consistent scale
  Rng rng(spec.seed);
  AbundanceField abundances(r_count, h, w);
  std::vector<double> plane(static_cast<size_t>(n));
  for (int r = 0; r < r_count; ++r) {
    for (long i = 0; i < n; ++i) plane[static_cast<size_t>(i)] = rng.normal();
    blur_plane(plane, h, w, spec.smoothness);
    double mean = 0.0;
    for (double v : plane) mean += v;
    mean /= static_cast<double>(n);
    double var = 0.0;
    for (double v : plane) var += (v - mean) * (v - mean);
    var /= static_cast<double>(n);
    double inv_std = var > 0.0 ? 1.0 / std::sqrt(var) : 1.0;
    for (long i = 0; i < n; ++i) abundances.data(r, i) = (plane[static_cast<size_t>(i)] - mean) * inv_std;
  }

  // per-pixel softmax; with one endmember this forces a = 1
  for (long i = 0; i < n; ++i) {
    double mx = abundances.data.col(i).maxCoeff();
    double sum = 0.0;
    for (int r = 0; r < r_count; ++r) {
      double e = std::exp(spec.sharpness * (abundances.data(r, i) - mx));
      abundances.data(r, i) = e;
      sum += e;
    }
    abundances.data.col(i) /= sum;
  }

  HyperCube cube(h, w, spec.band_count);
  cube.data = endmembers.data * abundances.data;
  return {std::move(cube), std::move(endmembers), std::move(abundances)};
}

HyperCube add_noise(const HyperCube& cube, double snr_db, std::uint64_t seed) {
  check_cube(cube);
  if (std::isnan(snr_db)) fail(ErrorKind::Param, "snr_db must not be NaN");
  if (std::isinf(snr_db) && snr_db > 0.0) return cube;

  double signal_power = cube.data.array().square().mean();
  double sigma = std::sqrt(signal_power / std::pow(10.0, snr_db / 10.0));
  Rng rng(seed);
  HyperCube noisy = cube;
  for (int b = 0; b < cube.bands; ++b)
    for (long i = 0; i < cube.pixels(); ++i) noisy.data(b, i) += sigma * rng.normal();
  return noisy;
}

}  // namespace unmix
