#pragma once

#include <string>

#include "unmix/types.hpp"

namespace unmix {

enum class DenoiserKind { Identity, Gaussian, Median, Nlm, LinearScale };

// Pluggable denoising operator applied independently per abundance channel.
// LinearScale (C(A) = c*A) exists for tests only: it admits closed-form
// fixed points of the regularized updates.
struct DenoiserSpec {
  DenoiserKind kind = DenoiserKind::Identity;
  double sigma = 1.0;        // gaussian: std in pixels
  int radius = 1;            // median: window radius
  int patch_radius = 1;      // nlm
  int search_radius = 5;     // nlm
  double h = 0.1;            // nlm filtering strength
  double scale_c = 1.0;      // linear_scale factor

  static DenoiserSpec identity() { return DenoiserSpec{}; }
  static DenoiserSpec gaussian(double sigma_px) {
    DenoiserSpec s;
    s.kind = DenoiserKind::Gaussian;
    s.sigma = sigma_px;
    return s;
  }
  static DenoiserSpec median(int window_radius) {
    DenoiserSpec s;
    s.kind = DenoiserKind::Median;
    s.radius = window_radius;
    return s;
  }
  static DenoiserSpec nlm(int patch_radius, int search_radius, double h) {
    DenoiserSpec s;
    s.kind = DenoiserKind::Nlm;
    s.patch_radius = patch_radius;
    s.search_radius = search_radius;
    s.h = h;
    return s;
  }
  static DenoiserSpec linear_scale(double c) {
    DenoiserSpec s;
    s.kind = DenoiserKind::LinearScale;
    s.scale_c = c;
    return s;
  }
};

DenoiserKind denoiser_kind_from_string(const std::string& name);
std::string to_string(DenoiserKind kind);
void check_denoiser(const DenoiserSpec& spec);

// Same shape out; deterministic; identity returns the input unchanged.
// Boundaries use symmetric (reflect) padding.
AbundanceField denoise(const AbundanceField& field, const DenoiserSpec& spec);

// field - denoise(field, spec)
AbundanceField residual(const AbundanceField& field, const DenoiserSpec& spec);

}  // namespace unmix
