#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include <Eigen/Dense>

namespace unmix {

// Column-wise softmax with a stability shift; temperature multiplies logits.
inline void softmax_columns(Eigen::MatrixXd& m, double temperature = 1.0) {
  for (long c = 0; c < m.cols(); ++c) {
    double mx = m.col(c).maxCoeff();
    double sum = 0.0;
    for (long r = 0; r < m.rows(); ++r) {
      double e = std::exp(temperature * (m(r, c) - mx));
      m(r, c) = e;
      sum += e;
    }
    m.col(c) /= sum;
  }
}

// Euclidean projection of each column onto the probability simplex
// {a >= 0, sum a = 1} (sort-based algorithm).
inline void project_columns_to_simplex(Eigen::MatrixXd& m) {
  const long rows = m.rows();
  std::vector<double> u(static_cast<size_t>(rows));
  for (long c = 0; c < m.cols(); ++c) {
    for (long r = 0; r < rows; ++r) u[static_cast<size_t>(r)] = m(r, c);
    std::sort(u.begin(), u.end(), std::greater<double>());
    double cssv = 0.0, theta = 0.0;
    long rho = 0;
    for (long j = 0; j < rows; ++j) {
      cssv += u[static_cast<size_t>(j)];
      double t = (cssv - 1.0) / static_cast<double>(j + 1);
      if (u[static_cast<size_t>(j)] > t) {
        rho = j + 1;
        theta = t;
      }
    }
    (void)rho;
    for (long r = 0; r < rows; ++r) m(r, c) = std::max(m(r, c) - theta, 0.0);
  }
}

}  // namespace unmix
