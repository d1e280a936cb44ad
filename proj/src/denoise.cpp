#include "unmix/denoise.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

namespace unmix {

DenoiserKind denoiser_kind_from_string(const std::string& name) {
  if (name == "identity") return DenoiserKind::Identity;
  if (name == "gaussian") return DenoiserKind::Gaussian;
  if (name == "median") return DenoiserKind::Median;
  if (name == "nlm") return DenoiserKind::Nlm;
  if (name == "linear_scale") return DenoiserKind::LinearScale;
  fail(ErrorKind::Param, "unknown denoiser kind: \"" + name + "\"");
}

std::string to_string(DenoiserKind kind) {
  switch (kind) {
    case DenoiserKind::Identity: return "identity";
    case DenoiserKind::Gaussian: return "gaussian";
    case DenoiserKind::Median: return "median";
    case DenoiserKind::Nlm: return "nlm";
    case DenoiserKind::LinearScale: return "linear_scale";
  }
  return "?";
}

void check_denoiser(const DenoiserSpec& spec) {
  switch (spec.kind) {
    case DenoiserKind::Gaussian:
      if (spec.sigma <= 0.0) fail(ErrorKind::Param, "gaussian sigma must be positive");
      break;
    case DenoiserKind::Median:
      if (spec.radius < 1) fail(ErrorKind::Param, "median radius must be >= 1");
      break;
    case DenoiserKind::Nlm:
      if (spec.patch_radius < 1 || spec.search_radius < 1 || spec.h <= 0.0)
        fail(ErrorKind::Param, "nlm parameters must be positive");
      break;
    default: break;
  }
}

namespace {

int reflect_index(int i, int n) {
  if (n == 1) return 0;
  while (i < 0 || i >= n) {
    if (i < 0) i = -i - 1;
    if (i >= n) i = 2 * n - 1 - i;
  }
  return i;
}

using Plane = std::vector<double>;  // H x W row-major

Plane channel_plane(const AbundanceField& f, int r) {
  Plane p(static_cast<size_t>(f.pixels()));
  for (long n = 0; n < f.pixels(); ++n) p[static_cast<size_t>(n)] = f.data(r, n);
  return p;
}

void gaussian_plane(const Plane& in, Plane& out, int h, int w, double sigma) {
  int radius = std::max(1, static_cast<int>(std::ceil(3.0 * sigma)));
  std::vector<double> k(static_cast<size_t>(2 * radius + 1));
  double sum = 0.0;
  for (int i = -radius; i <= radius; ++i) {
    double v = std::exp(-0.5 * (i / sigma) * (i / sigma));
    k[static_cast<size_t>(i + radius)] = v;
    sum += v;
  }
  for (double& v : k) v /= sum;

  Plane tmp(in.size());
  for (int r = 0; r < h; ++r)
    for (int c = 0; c < w; ++c) {
      double acc = 0.0;
      for (int d = -radius; d <= radius; ++d)
        acc += k[static_cast<size_t>(d + radius)] * in[static_cast<size_t>(r) * w + reflect_index(c + d, w)];
      tmp[static_cast<size_t>(r) * w + c] = acc;
    }
  for (int c = 0; c < w; ++c)
    for (int r = 0; r < h; ++r) {
      double acc = 0.0;
      for (int d = -radius; d <= radius; ++d)
        acc += k[static_cast<size_t>(d + radius)] * tmp[static_cast<size_t>(reflect_index(r + d, h)) * w + c];
      out[static_cast<size_t>(r) * w + c] = acc;
    }
}

void median_plane(const Plane& in, Plane& out, int h, int w, int radius) {
  const int win = 2 * radius + 1;
  std::vector<double> window(static_cast<size_t>(win) * win);
  for (int r = 0; r < h; ++r)
    for (int c = 0; c < w; ++c) {
      size_t m = 0;
      for (int dr = -radius; dr <= radius; ++dr)
        for (int dc = -radius; dc <= radius; ++dc)
          window[m++] = in[static_cast<size_t>(reflect_index(r + dr, h)) * w + reflect_index(c + dc, w)];
      auto mid = window.begin() + static_cast<long>(m / 2);
      std::nth_element(window.begin(), mid, window.begin() + static_cast<long>(m));
      out[static_cast<size_t>(r) * w + c] = *mid;
    }
}

// sliding-window non-local means: per-pixel convex combination of search
// offsets weighted by exp(-mean patch distance / h^2). One shifted
// squared-difference image plus a separable box sum per offset replaces the
// per-pixel patch loop.
void nlm_plane(const Plane& in, Plane& out, int h, int w, int pr, int sr, double hp) {
  const double inv = 1.0 / ((2 * pr + 1) * (2 * pr + 1) * hp * hp);
  const int pad = sr + pr;
  const int ph = h + 2 * pad, pw = w + 2 * pad;
  Plane padded(static_cast<size_t>(ph) * pw);
  for (int r = 0; r < ph; ++r)
    for (int c = 0; c < pw; ++c)
      padded[static_cast<size_t>(r) * pw + c] =
          in[static_cast<size_t>(reflect_index(r - pad, h)) * w + reflect_index(c - pad, w)];

  const int dh = h + 2 * pr, dw = w + 2 * pr;  // halo covering all patch sums
  Plane diff2(static_cast<size_t>(dh) * dw), rowsum(static_cast<size_t>(dh) * w);
  Plane acc(static_cast<size_t>(h) * w, 0.0), wsum(static_cast<size_t>(h) * w, 0.0);

  for (int dr = -sr; dr <= sr; ++dr)
    for (int dc = -sr; dc <= sr; ++dc) {
      // squared difference between the image and its shifted copy
      for (int r = 0; r < dh; ++r) {
        const double* base = &padded[static_cast<size_t>(r + pad - pr) * pw + (pad - pr)];
        const double* shifted = base + static_cast<size_t>(dr) * pw + dc;
        double* row = &diff2[static_cast<size_t>(r) * dw];
        for (int c = 0; c < dw; ++c) {
          double d = base[c] - shifted[c];
          row[c] = d * d;
        }
      }
      // horizontal then vertical box sums over the patch window
      for (int r = 0; r < dh; ++r) {
        const double* row = &diff2[static_cast<size_t>(r) * dw];
        double run = 0.0;
        for (int c = 0; c < 2 * pr + 1; ++c) run += row[c];
        double* dst = &rowsum[static_cast<size_t>(r) * w];
        dst[0] = run;
        for (int c = 1; c < w; ++c) {
          run += row[c + 2 * pr] - row[c - 1];
          dst[c] = run;
        }
      }
      for (int c = 0; c < w; ++c) {
        double run = 0.0;
        for (int r = 0; r < 2 * pr + 1; ++r) run += rowsum[static_cast<size_t>(r) * w + c];
        const double* center_row = &padded[static_cast<size_t>(pad + dr) * pw + pad + dc];
        for (int r = 0; r < h; ++r) {
          double weight = std::exp(-run * inv);
          wsum[static_cast<size_t>(r) * w + c] += weight;
          acc[static_cast<size_t>(r) * w + c] +=
              weight * center_row[static_cast<size_t>(r) * pw + c];
          if (r + 1 < h)
            run += rowsum[static_cast<size_t>(r + 2 * pr + 1) * w + c] -
                   rowsum[static_cast<size_t>(r) * w + c];
        }
      }
    }
  for (long i = 0; i < static_cast<long>(out.size()); ++i)
    out[static_cast<size_t>(i)] = acc[static_cast<size_t>(i)] / wsum[static_cast<size_t>(i)];
}

}  // namespace

AbundanceField denoise(const AbundanceField& field, const DenoiserSpec& spec) {
  check_field(field);
  check_denoiser(spec);
  if (spec.kind == DenoiserKind::Identity) return field;
  if (spec.kind == DenoiserKind::LinearScale) {
    AbundanceField out = field;
    out.data *= spec.scale_c;
    return out;
  }

  AbundanceField out = field;
  const int h = field.height, w = field.width;
  Plane result(static_cast<size_t>(field.pixels()));
  for (int r = 0; r < field.count; ++r) {
    Plane plane = channel_plane(field, r);
    switch (spec.kind) {
      case DenoiserKind::Gaussian: gaussian_plane(plane, result, h, w, spec.sigma); break;
      case DenoiserKind::Median: median_plane(plane, result, h, w, spec.radius); break;
      case DenoiserKind::Nlm:
        nlm_plane(plane, result, h, w, spec.patch_radius, spec.search_radius, spec.h);
        break;
      default: break;
    }
    for (long n = 0; n < field.pixels(); ++n) out.data(r, n) = result[static_cast<size_t>(n)];
  }
  return out;
}

AbundanceField residual(const AbundanceField& field, const DenoiserSpec& spec) {
  AbundanceField out = denoise(field, spec);
  out.data = field.data - out.data;
  return out;
}

}  // namespace unmix
