#pragma once

// Homoclinic connections w_{alpha,beta}: trajectories from a zero-value inside
// the separatrix that return to the origin as |eta| grows, and the
// measurement of their decay.

#include "sslab/integrator.hpp"

#include <cstdint>
#include <map>
#include <vector>

namespace sslab {

class NotEnoughOscillations : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

struct HomoclinicSeed {
  double alpha = 0.0;
  double beta = 0.0;
};

/// Throws ValidationError unless the seed lies in the closed region bounded
/// by the separatrix, minus the origin and the two saddles.
void validate_seed(const Params& params, const HomoclinicSeed& seed);

struct HomoclinicConfig {
  IntegratorConfig integrator;
  double conv_radius = 1e-3;
  double containment_tol = 1e-8;
};

struct HomoclinicResult {
  HomoclinicSeed seed;
  double c_seed = 0.0;
  Trajectory forward;
  Trajectory backward;
  double f_limit_plus = 0.0;  // V at the forward terminal sample
  double f_limit_minus = 0.0;
  bool converged_plus = false;
  bool converged_minus = false;
  double containment_excess = 0.0;  // max(V - c_seed) over all samples
  double max_abs_x = 0.0;
};

HomoclinicResult run_homoclinic(const Params& params, const HomoclinicSeed& seed, const HomoclinicConfig& config);

/// Rejection sampling of n seeds, uniform in the bounding box of the
/// separatrix region. Deterministic in rng_seed.
std::vector<HomoclinicSeed> sample_seeds(const Params& params, std::size_t n, std::uint64_t rng_seed);

struct EnvelopePoint {
  double eta;
  double amplitude;  // local maximum of |x|
};

/// Successive local maxima of |x| with |eta| >= eta_start, located from sign
/// changes of y and refined on the dense output. Ordered by increasing |eta|.
std::vector<EnvelopePoint> extract_envelope(const Trajectory& traj, double eta_start = 3.0);

struct DecayFitOptions {
  double eta_lo = 3.0;  // lower end of the fit window; raised to the first extremum
  double eta_hi = 12.0;
  double epsilon = 0.1;  // slack in the algebraic exponent 2/(1-p) - epsilon
  double ratio_eta_near = 5.0;
  double ratio_eta_far = 10.0;
};

struct DecayFit {
  /// Coefficient of -eta^2/4 in log a; the averaging model predicts 1.
  double gaussian_slope = 0.0;
  /// Coefficient of -(1 + 2/(1-p)) log eta; model value 1.
  double log_correction = 0.0;
  double a_inf = 0.0;
  double residual_rms = 0.0;
  double residual_max = 0.0;
  double window_lo = 0.0;
  double window_hi = 0.0;
  std::size_t points = 0;
  /// r(far)/r(near) with r(eta) = sup_{s >= eta} |x(s)| (1+eta)^{2/(1-p)-epsilon};
  /// NaN when no trajectory was supplied.
  double algebraic_ratio = 0.0;
};

/// Least-squares fit of log a against (-eta^2/4, -(1+2/(1-p)) log eta) plus an
/// intercept log A_inf over the window.
DecayFit fit_decay(const std::vector<EnvelopePoint>& envelope, const Params& params,
                   const DecayFitOptions& options = {});

/// Envelope extraction, decay fit and the algebraic-bound ratio for one trajectory.
DecayFit analyze_decay(const Trajectory& traj, const Params& params, const DecayFitOptions& options = {});

double algebraic_ratio(const Trajectory& traj, const Params& params, const DecayFitOptions& options = {});

struct LqNorm {
  double q = 0.0;
  double value = 0.0;  // (integral |x|^q)^{1/q}, tail included
  double integral = 0.0;
  double tail = 0.0;  // estimated contribution to the integral beyond the computed range
  bool below_guaranteed_range = false;  // q <= (1-p)/2
};

/// Trapezoidal L^q norm of x over both trajectories; each side gets a tail
/// estimate from its fitted Gaussian envelope when one is available.
LqNorm lq_norm(const Trajectory& forward, const Trajectory& backward, double q, const Params& params);

enum class Parity { even, odd };

/// max |x(eta) -+ x(-eta)| and |y(eta) +- y(-eta)| over the forward samples.
double symmetry_error(const Trajectory& forward, const Trajectory& backward, Parity x_parity);

}  // namespace sslab
