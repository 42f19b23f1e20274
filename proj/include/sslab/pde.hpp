#pragma once

// Self-similar solutions u(x,t) = t^{1/(1-p)} w((x - x0)/sqrt(t)) of
// u_t - u_xx = u|u|^{p-1}, their finite-difference residual, and a
// method-of-lines evolution used to cross-check them.

#include "sslab/heteroclinic.hpp"
#include "sslab/homoclinic.hpp"

#include <Eigen/Core>

#include <string>
#include <vector>

namespace sslab {

enum class ProfileKind { homoclinic, front, homogeneous };

const char* to_string(ProfileKind k);

/// Piecewise quintic Hermite representation of w on a finite eta range, using
/// w'' from the profile equation at the nodes.
class SelfSimilarProfile {
 public:
  SelfSimilarProfile(ProfileKind kind, const Params& params, std::vector<double> eta, std::vector<double> w,
                     std::vector<double> wp);

  /// Homoclinic profile from both half trajectories; zero beyond the computed range.
  static SelfSimilarProfile from_homoclinic(const Params& params, const HomoclinicResult& result);
  /// Odd front profile; beyond the computed range, +-(x_eq - A eta^{-3} e^{-eta^2/4})
  /// with the fitted tail coefficients.
  static SelfSimilarProfile from_front(const Params& params, const HeteroclinicResult& result);
  /// w = x_eq, i.e. the maximal solution ((1-p)t)^{1/(1-p)}.
  static SelfSimilarProfile homogeneous(const Params& params);

  ProfileKind kind() const { return kind_; }
  const Params& params() const { return params_; }
  double eta_min() const { return eta_.empty() ? 0.0 : eta_.front(); }
  double eta_max() const { return eta_.empty() ? 0.0 : eta_.back(); }

  /// (w, w') at eta.
  Vec2 eval(double eta) const;

  void set_tail(const TailFit& fit) { tail_ = fit; }

 private:
  ProfileKind kind_;
  Params params_;
  std::vector<double> eta_, w_, wp_, wpp_;
  TailFit tail_;
};

/// 0 for t <= tau; otherwise (t - tau)^{1/(1-p)} w((x - x0)/(t - tau)^{1/2}).
double eval_self_similar(const SelfSimilarProfile& profile, double x, double t, double x0 = 0.0, double tau = 0.0);

/// Analytic u_x and u_t of the self-similar field.
double self_similar_ux(const SelfSimilarProfile& profile, double x, double t);
double self_similar_ut(const SelfSimilarProfile& profile, double x, double t);

/// u^{+}(t) = ((1-p)t)^{1/(1-p)}.
double maximal_solution(const Params& params, double t);

struct Grid {
  double half_width = 16.0;
  std::size_t nx = 1025;
  double t0 = 1.0;
  double t1 = 2.0;
  double cfl = 0.4;

  void validate() const;
  double dx() const { return 2.0 * half_width / static_cast<double>(nx - 1); }
  double x(std::size_t i) const { return -half_width + static_cast<double>(i) * dx(); }
  Eigen::ArrayXd nodes() const;
  /// Same extent, spacing halved.
  Grid refined() const;
};

struct Field {
  double time = 0.0;
  Eigen::ArrayXd values;
};

Field sample_field(const SelfSimilarProfile& profile, const Grid& grid, double t);

struct ResidualReport {
  double dx = 0.0;
  double max_abs_residual = 0.0;
  double l2_residual = 0.0;
  /// Max residual over nodes at least two cells from any sign change of u.
  double max_abs_residual_smooth = 0.0;
  double max_ux_error = 0.0;  // central difference vs analytic u_x
  double max_ut_error = 0.0;  // central difference vs analytic u_t
};

/// Central differences in x (spacing dx) and t (step dx) at t0, interior nodes.
ResidualReport pde_residual(const SelfSimilarProfile& profile, const Grid& grid);

enum class BoundaryKind { zero, self_similar };

struct BoundaryCondition {
  BoundaryKind kind = BoundaryKind::zero;
  const SelfSimilarProfile* profile = nullptr;  // required for self_similar
};

struct EvolveStats {
  std::size_t steps = 0;
  double dt = 0.0;
  double max_order_violation = 0.0;  // max(|u| - u^+(t)) over nodes and steps
  std::size_t min_sign_changes = 0;  // fewest sign changes of u seen across steps
};

/// Second-order central differences in space, classical RK4 in time with
/// dt <= cfl dx^2, from initial.time to grid.t1.
Field evolve(const Field& initial, const Grid& grid, const BoundaryCondition& bc, const Params& params,
             EvolveStats* stats = nullptr);

struct ErrorNorms {
  double sup = 0.0;
  double l2 = 0.0;
  double rel_sup = 0.0;  // sup / max |exact|
};

ErrorNorms compare_self_similar(const Field& evolved, const SelfSimilarProfile& profile, const Grid& grid);

}  // namespace sslab
