#include "sslab/fit.hpp"

#include "sslab/kernels.hpp"

#include <Eigen/QR>

namespace sslab {

LinearFit least_squares(const Eigen::MatrixXd& design, const Eigen::VectorXd& rhs) {
  if (design.rows() < design.cols()) throw NumericalError("least squares: fewer rows than unknowns");
  // Column scaling keeps the rank test meaningful for mixed magnitudes.
  const Eigen::VectorXd scale = design.colwise().norm().transpose().cwiseMax(1e-300);
  const Eigen::MatrixXd scaled = design * scale.cwiseInverse().asDiagonal();
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(scaled);
  qr.setThreshold(1e-12);
  if (qr.rank() < design.cols()) throw NumericalError("least squares: rank-deficient design");
  LinearFit out;
  out.coefficients = qr.solve(rhs).cwiseQuotient(scale);
  const Eigen::VectorXd r = design * out.coefficients - rhs;
  out.residual_rms = std::sqrt(r.squaredNorm() / static_cast<double>(r.size()));
  out.residual_max = r.cwiseAbs().maxCoeff();
  return out;
}

double regression_slope(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) throw ValidationError("regression needs two or more points");
  Eigen::MatrixXd a(x.size(), 2);
  Eigen::VectorXd b(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    a(i, 0) = 1.0;
    a(i, 1) = x[i];
    b(i) = y[i];
  }
  return least_squares(a, b).coefficients(1);
}

}  // namespace sslab
