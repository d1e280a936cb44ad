#pragma once

#include <cstdint>

#include "unmix/types.hpp"

namespace unmix {

struct InitResult {
  EndmemberMatrix endmembers;  // M(0)
  AbundanceField abundances;   // A(0)
};

// Vertex component analysis. Estimates the signal subspace, picks the
// projection rule from the estimated SNR, then grows the endmember set by
// repeatedly maximizing |f^T y| along directions orthogonal to the current
// set. Returns the selected pure-pixel candidates mapped back to band space.
// Deterministic given the seed; argmax ties break at the lowest pixel index.
EndmemberMatrix vca(const Eigen::MatrixXd& X, int count, std::uint64_t seed);

// Fully constrained least squares per pixel: min ||x - Ma|| s.t. a >= 0,
// sum(a) = 1. Solved by appending a weighted all-ones row (weight 1e3
// relative to the data scale) and running active-set nonnegative least
// squares, then renormalizing the sum exactly.
AbundanceField fcls(const Eigen::MatrixXd& X, const EndmemberMatrix& m, int height, int width);

// VCA + FCLS on a cube, the common initialization path.
InitResult initialize(const HyperCube& cube, int count, std::uint64_t seed);

}  // namespace unmix
