#pragma once

#include <string>

#include "unmix/types.hpp"

namespace unmix {

// `.hsc` cube container: one UTF-8 JSON header line
//   {"height":H,"width":W,"bands":B,"dtype":"f32le","order":"bsq"}
// terminated by '\n', followed by B*H*W little-endian 32-bit floats in
// band-sequential order. Values are quantized to f32 on save.
HyperCube load_cube(const std::string& path);
void save_cube(const HyperCube& cube, const std::string& path);

// Endmember CSV: B data rows x R comma-separated columns; an optional first
// row starting with '#' is skipped.
EndmemberMatrix load_endmembers_csv(const std::string& path);
void save_endmembers_csv(const EndmemberMatrix& m, const std::string& path,
                         const std::string& comment = "");

// Raw f32le dump of an abundance field, channel-sequential, pixel order as
// the cube. Loading needs the dimensions from elsewhere (meta.json).
void save_field_raw(const AbundanceField& field, const std::string& path);
AbundanceField load_field_raw(const std::string& path, int count, int height, int width);

// One 8-bit PGM (P5, maxval 255) per endmember, [0,1] mapped linearly to
// [0,255] with clamping and round-half-up, plus a lossless f32le `.raw`
// companion per channel. Files are named <prefix>_<r>.pgm / .raw.
void export_abundance_maps(const AbundanceField& field, const std::string& dir,
                           const std::string& prefix = "abundance");

// Grayscale PGM of an arbitrary H x W map with the same scaling rule.
void save_pgm(const Eigen::MatrixXd& rowmajor_map, const std::string& path);

}  // namespace unmix
