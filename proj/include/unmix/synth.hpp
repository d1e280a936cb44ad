#pragma once

#include <cstdint>
#include <tuple>

#include "unmix/types.hpp"

namespace unmix {

struct SynthSpec {
  int height = 100;
  int width = 100;
  int endmember_count = 4;
  int band_count = 224;
  double smoothness = 8.0;  // Gaussian-field correlation length, pixels
  double sharpness = 4.0;   // softmax concentration of the abundance maps
  std::uint64_t seed = 1;
};

void check_spec(const SynthSpec& spec);

// Built-in reflectance spectra: the first four endmembers come from the
// curated table (assets/spectra4_224.csv, embedded at build time) resampled
// to `bands`; any further ones are smooth positive sums of Gaussian bumps.
EndmemberMatrix builtin_endmembers(int bands, int count, std::uint64_t seed);

// Synthetic scene: R spatially correlated abundance maps (filtered Gaussian
// fields through a per-pixel softmax, so ANC/ASC hold exactly) mixed with the
// built-in endmembers. The returned cube is noiseless.
std::tuple<HyperCube, EndmemberMatrix, AbundanceField> generate_synthetic(const SynthSpec& spec);

// Additive white Gaussian noise at the requested SNR;
// sigma^2 = mean(signal^2) / 10^(snr_db/10). +infinity returns a copy.
HyperCube add_noise(const HyperCube& cube, double snr_db, std::uint64_t seed);

}  // namespace unmix
