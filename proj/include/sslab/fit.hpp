#pragma once

#include <Eigen/Core>

#include <vector>

namespace sslab {

struct LinearFit {
  Eigen::VectorXd coefficients;
  double residual_rms = 0.0;
  double residual_max = 0.0;
};

/// Least squares min |A c - b| by column-pivoting QR. Throws NumericalError
/// when A is rank deficient.
LinearFit least_squares(const Eigen::MatrixXd& design, const Eigen::VectorXd& rhs);

/// Slope of the ordinary least-squares line through (x, y).
double regression_slope(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace sslab
