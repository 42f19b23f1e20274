#pragma once

// Shooting construction of the front profile: trajectories from (0, beta)
// either cross x = x_eq with y > 0 (case I) or stop with y = 0 short of x_eq
// (case II). Bisection between the two traps the connection to the saddle.

#include "sslab/integrator.hpp"

#include <variant>
#include <vector>

namespace sslab {

class BracketFailure : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

/// Local a priori bound: min{(2/beta)(m_H + sqrt(m_H^2 + beta^2/2)), x_eq/beta}.
double eta_star(const Params& params, double beta);

/// Every beta below this value classifies as case II.
double case_two_bound(const Params& params);
/// Every beta above this value classifies as case I.
double case_one_bound(const Params& params);

struct CaseOne {
  double eta_beta;
  double y_beta;
};
struct CaseTwo {
  double eta_beta;
  double x_beta;
};
struct Undecided {
  double eta_horizon;
  double terminal_distance;  // to (x_eq, 0)
};

struct ShotOutcome {
  std::variant<CaseOne, CaseTwo, Undecided> value;
  /// beta/2 < y < beta and beta eta/2 < x < beta eta on (0, eta*].
  bool sandwich_ok = true;
  double eta_star = 0.0;

  bool is_case_one() const { return std::holds_alternative<CaseOne>(value); }
  bool is_case_two() const { return std::holds_alternative<CaseTwo>(value); }
  bool is_undecided() const { return std::holds_alternative<Undecided>(value); }
  /// Exit eta for decided shots, the horizon otherwise.
  double eta_exit() const;
  const char* name() const;
};

/// Shots are integrated in the deviation xi = x - x_eq, so the tail gap keeps
/// full relative precision; errors are controlled relative to (xi, y).
inline IntegratorConfig shooting_integrator() {
  IntegratorConfig c;
  c.rel_tol = 1e-13;
  c.abs_tol = 1e-300;
  c.event_tol = 1e-15;
  return c;
}

struct ShootingConfig {
  IntegratorConfig integrator = shooting_integrator();
  /// Undecided shots must end this close to the saddle.
  double undecided_radius = 0.05;
  double undecided_min_eta = 10.0;
};

/// Integrates from (0, (0, beta)) with terminal events at x = x_eq (rising)
/// and y = 0 (falling). Throws NumericalError on ambiguous or failed shots.
ShotOutcome classify_shot(const Params& params, double beta, const ShootingConfig& config = {},
                          Trajectory* trajectory = nullptr);

struct Bracket {
  double beta_lo;  // case II
  double beta_hi;  // case I
};

/// Starts from the two analytic bounds nudged outward by delta and widens
/// geometrically until both ends classify as required.
Bracket initial_bracket(const Params& params, const ShootingConfig& config = {}, double delta = 1e-3);

struct TailFit {
  double a_inf = 0.0;
  double gaussian_slope = 0.0;  // coefficient of -eta^2/4; model value 1
  double cubic_correction = 0.0;  // coefficient of -3 log eta; model value 1
  double window_lo = 0.0;
  double window_hi = 0.0;
  bool window_shrunk = false;
  std::size_t points = 0;
};

struct HeteroclinicResult {
  Params params;
  Bracket initial;
  double beta_star = 0.0;
  double interval_width = 0.0;
  int iterations = 0;
  bool accepted_undecided = false;
  Trajectory trajectory;  // forward from (0, beta*) to the horizon, no terminal events
  TailFit tail;
};

struct BisectionOptions {
  double tol_beta = 1e-9;
  /// Keep halving past tol_beta until the bracket cannot be split further.
  bool refine_to_resolution = true;
  int max_iterations = 60;
};

HeteroclinicResult bisect_beta(const Params& params, const Bracket& bracket, const BisectionOptions& options = {},
                               const ShootingConfig& config = {});

/// (x, y)(eta) = (-x(-eta), y(-eta)) for eta < 0; increasing eta.
Trajectory extend_by_reflection(const HeteroclinicResult& result);

/// Fit of log(x_eq - x) against -eta^2/4 and -3 log eta over [eta_lo, eta_hi].
TailFit tail_fit(const Trajectory& forward, const Params& params, double eta_lo = 3.0, double eta_hi = 8.0);

struct ScanPoint {
  double beta;
  ShotOutcome outcome;
};

std::vector<ScanPoint> beta_scan(const Params& params, double beta_min, double beta_max, std::size_t n,
                                 const ShootingConfig& config = {});

}  // namespace sslab
