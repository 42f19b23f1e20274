#pragma once

// The fast oscillator W'' + W|W|^{p-1} = 0, W(0) = a, W'(0) = 0, that governs
// the oscillatory tails of the homoclinic profiles.

#include "sslab/integrator.hpp"

#include <vector>

namespace sslab {

struct OscillatorConfig {
  double rel_tol = 1e-12;
  double abs_tol = 1e-14;
  double h_max = 5e-3;  // keeps cubic Hermite interpolation below 1e-10
  double periods = 3.0;
};

struct PeriodicOrbit {
  double p = 0.0;
  double amplitude = 1.0;
  bool control_case = false;  // p == 1
  /// Samples of (W, W') with increasing zeta, spanning both signs of zeta.
  std::vector<OdeSample> samples;
  double period_integrated = 0.0;
  double energy_level = 0.0;  // a^{1+p}/(1+p)
  double max_energy_deviation = 0.0;

  Vec2 at(double zeta) const;
  double zeta_min() const { return samples.front().s; }
  double zeta_max() const { return samples.back().s; }
};

/// Oscillator energy (W')^2/2 + |W|^{1+p}/(1+p).
double oscillator_energy(double p, const Vec2& pt);

/// Integrates from (amplitude, 0) over at least config.periods periods in both directions.
PeriodicOrbit solve_w(double p, const OscillatorConfig& config = {}, double amplitude = 1.0);

/// T(p) = 2^{3/2} (1+p)^{1/2} int_0^1 (1 - l^{1+p})^{-1/2} dl by tanh-sinh quadrature.
double period_t(double p);

struct SymmetryReport {
  double even_error = 0.0;         // max |W(z) - W(-z)|
  double half_period_error = 0.0;  // max |W(z) + W(T/2 - z)|
  bool ok = false;
};

SymmetryReport check_symmetry(const PeriodicOrbit& orbit, double tol = 1e-8);

struct ScalingReport {
  double measured = 0.0;
  double predicted = 0.0;  // a^{(1-p)/2} T(p)
  double rel_error = 0.0;
  bool ok = false;
};

ScalingReport amplitude_scaling_check(double p, double amplitude, double tol = 1e-6);

struct PhasePortrait {
  std::vector<double> ps;
  std::vector<PeriodicOrbit> orbits;
  std::vector<double> max_abs_wprime;
  /// Orbit k encloses orbit k+1 (p ascending); worst signed energy excess of
  /// orbit k+1 measured in the energy of p_k.
  bool nesting_ok = false;
  double nesting_margin = 0.0;
};

PhasePortrait emit_phase_portrait(std::vector<double> p_list, const OscillatorConfig& config = {});

}  // namespace sslab
