#pragma once

#include <Eigen/Dense>
#include <stdexcept>
#include <string>

namespace unmix {

// Error kinds map 1:1 onto CLI exit codes (see tools/).
enum class ErrorKind { Param, Format, Io, Numeric, Degenerate };

class Error : public std::runtime_error {
public:
  Error(ErrorKind kind, const std::string& msg) : std::runtime_error(msg), kind_(kind) {}
  ErrorKind kind() const { return kind_; }

private:
  ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& msg) { throw Error(kind, msg); }

// ---------------------------------------------------------------------------
// Core data model.
//
// Pixel flattening is row-major everywhere: pixel n = row * width + col.
// A cube is stored as its B x N matrix view; band b of pixel n is data(b, n).
// Writing the matrix row by row gives the band-sequential file layout.
// ---------------------------------------------------------------------------

struct HyperCube {
  int height = 0;
  int width = 0;
  int bands = 0;
  Eigen::MatrixXd data;  // bands x (height*width)

  HyperCube() = default;
  HyperCube(int h, int w, int b)
      : height(h), width(w), bands(b), data(Eigen::MatrixXd::Zero(b, static_cast<long>(h) * w)) {}

  long pixels() const { return static_cast<long>(height) * width; }

  double& at(int band, int row, int col) { return data(band, static_cast<long>(row) * width + col); }
  double at(int band, int row, int col) const { return data(band, static_cast<long>(row) * width + col); }
};

struct EndmemberMatrix {
  int bands = 0;
  int count = 0;
  Eigen::MatrixXd data;  // bands x count

  EndmemberMatrix() = default;
  EndmemberMatrix(int b, int r) : bands(b), count(r), data(Eigen::MatrixXd::Zero(b, r)) {}
};

// Abundance-shaped field, also used for the auxiliary/dual variables that
// share its shape but carry no sign or sum constraint.
struct AbundanceField {
  int count = 0;
  int height = 0;
  int width = 0;
  Eigen::MatrixXd data;  // count x (height*width), pixel order as HyperCube

  AbundanceField() = default;
  AbundanceField(int r, int h, int w)
      : count(r), height(h), width(w), data(Eigen::MatrixXd::Zero(r, static_cast<long>(h) * w)) {}

  long pixels() const { return static_cast<long>(height) * width; }

  double& at(int channel, int row, int col) {
    return data(channel, static_cast<long>(row) * width + col);
  }
  double at(int channel, int row, int col) const {
    return data(channel, static_cast<long>(row) * width + col);
  }
};

inline void check_finite(const Eigen::MatrixXd& m, const char* what) {
  if (!m.allFinite()) fail(ErrorKind::Numeric, std::string(what) + " contains non-finite values");
}

inline void check_cube(const HyperCube& c) {
  if (c.height <= 0 || c.width <= 0 || c.bands <= 0)
    fail(ErrorKind::Param, "cube dimensions must be positive");
  if (c.data.rows() != c.bands || c.data.cols() != c.pixels())
    fail(ErrorKind::Param, "cube payload does not match declared dimensions");
  check_finite(c.data, "cube");
}

inline void check_endmembers(const EndmemberMatrix& m) {
  if (m.bands <= 0 || m.count < 1) fail(ErrorKind::Param, "endmember dimensions must be positive");
  if (m.data.rows() != m.bands || m.data.cols() != m.count)
    fail(ErrorKind::Param, "endmember payload does not match declared dimensions");
  check_finite(m.data, "endmembers");
}

inline void check_field(const AbundanceField& a) {
  if (a.count < 1 || a.height <= 0 || a.width <= 0)
    fail(ErrorKind::Param, "abundance dimensions must be positive");
  if (a.data.rows() != a.count || a.data.cols() != a.pixels())
    fail(ErrorKind::Param, "abundance payload does not match declared dimensions");
  check_finite(a.data, "abundances");
}

}  // namespace unmix
