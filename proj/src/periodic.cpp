#include "sslab/periodic.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace sslab {

namespace {

void check_exponent(double p) {
  if (!(p > 0.0 && p <= 1.0)) throw ValidationError("oscillator exponent must lie in (0, 1]");
}

IntegratorConfig core_config(const OscillatorConfig& c, double horizon) {
  IntegratorConfig ic;
  ic.rel_tol = c.rel_tol;
  ic.abs_tol = c.abs_tol;
  ic.h_max = c.h_max;
  ic.h_init = std::min(1e-3, c.h_max);
  ic.h_min = 1e-14;
  ic.eta_max = horizon;
  ic.event_tol = 1e-13;
  return ic;
}

}  // namespace

double oscillator_energy(double p, const Vec2& pt) {
  return 0.5 * pt.y() * pt.y() + std::pow(std::abs(pt.x()), 1.0 + p) / (1.0 + p);
}

Vec2 PeriodicOrbit::at(double zeta) const {
  auto it = std::lower_bound(samples.begin(), samples.end(), zeta,
                             [](const OdeSample& s, double z) { return s.s < z; });
  if (it == samples.begin()) return samples.front().z;
  if (it == samples.end()) return samples.back().z;
  return hermite(*(it - 1), *it, zeta);
}

PeriodicOrbit solve_w(double p, const OscillatorConfig& config, double amplitude) {
  check_exponent(p);
  if (!(amplitude > 0.0)) throw ValidationError("oscillator amplitude must be positive");
  PeriodicOrbit orbit;
  orbit.p = p;
  orbit.amplitude = amplitude;
  orbit.control_case = p == 1.0;
  orbit.energy_level = std::pow(amplitude, 1.0 + p) / (1.0 + p);

  // T(p) <= 2 pi on (0, 1]; the horizon covers the requested periods with margin.
  const double horizon = (config.periods + 0.25) * 2.0 * std::numbers::pi * std::pow(amplitude, 0.5 * (1.0 - p));
  const IntegratorConfig ic = core_config(config, horizon);
  const Vec2 z0(amplitude, 0.0);
  const OdeRhs fwd = [p](double, const Vec2& z) { return Vec2(z.y(), -signed_pow(z.x(), p)); };
  const OdeRhs bwd = [p](double, const Vec2& z) { return Vec2(-z.y(), signed_pow(z.x(), p)); };
  const std::vector<OdeEvent> turns{{[](double, const Vec2& z) { return z.y(); }, Crossing::either, false}};
  const OdeResult rf = dormand_prince(fwd, z0, horizon, ic, turns);
  const OdeResult rb = dormand_prince(bwd, z0, horizon, ic);
  for (const OdeResult* r : {&rf, &rb}) {
    if (r->status != IntegrationStatus::horizon_reached) {
      throw NumericalError(std::string("oscillator integration stopped: ") + to_string(r->status));
    }
  }

  orbit.samples.reserve(rf.samples.size() + rb.samples.size());
  for (auto it = rb.samples.rbegin(); it != rb.samples.rend() - 1; ++it) {
    orbit.samples.push_back({-it->s, it->z, -it->dz});
  }
  orbit.samples.insert(orbit.samples.end(), rf.samples.begin(), rf.samples.end());
  for (const auto& s : orbit.samples) {
    orbit.max_energy_deviation =
        std::max(orbit.max_energy_deviation, std::abs(oscillator_energy(p, s.z) - orbit.energy_level));
  }

  // Zeros of W' alternate between minima and maxima, half a period apart.
  const auto& turns_hit = rf.events;
  if (turns_hit.size() < 2 * static_cast<std::size_t>(config.periods)) {
    throw NumericalError("oscillator did not complete the requested periods");
  }
  const std::size_t used = 2 * static_cast<std::size_t>(config.periods);
  orbit.period_integrated = 2.0 * turns_hit[used - 1].s / static_cast<double>(used);
  return orbit;
}

double period_t(double p) {
  check_exponent(p);
  // tanh-sinh: l = 1 / (1 + e^{-2u}), u = (pi/2) sinh t, with 1 - l kept at
  // full relative accuracy near l = 1.
  const double half_pi = 0.5 * std::numbers::pi;
  const double h = 1.0 / 128.0;
  double acc = 0.0;
  for (int k = -768; k <= 768; ++k) {
    const double t = k * h;
    const double u = half_pi * std::sinh(t);
    const double e = std::exp(-2.0 * std::abs(u));
    const double small = e / (1.0 + e);  // distance to the nearer endpoint
    const double one_minus_lam = u >= 0 ? small : 1.0 / (1.0 + e);
    // dl/dt = (pi/2) cosh t * 2 e^{-2|u|} / (1 + e^{-2|u|})^2
    const double w = half_pi * std::cosh(t) * 2.0 * small / (1.0 + e);
    if (w == 0.0 || one_minus_lam == 0.0) continue;
    const double gap = -std::expm1((1.0 + p) * std::log1p(-one_minus_lam));
    if (!(gap > 0.0)) continue;
    acc += w / std::sqrt(gap);
  }
  return std::pow(2.0, 1.5) * std::sqrt(1.0 + p) * acc * h;
}

SymmetryReport check_symmetry(const PeriodicOrbit& orbit, double tol) {
  SymmetryReport rep;
  const double half = 0.5 * orbit.period_integrated;
  for (const auto& s : orbit.samples) {
    const double z = s.s;
    if (-z >= orbit.zeta_min() && -z <= orbit.zeta_max()) {
      rep.even_error = std::max(rep.even_error, std::abs(s.z.x() - orbit.at(-z).x()));
    }
    const double m = half - z;
    if (m >= orbit.zeta_min() && m <= orbit.zeta_max()) {
      rep.half_period_error = std::max(rep.half_period_error, std::abs(s.z.x() + orbit.at(m).x()));
    }
  }
  rep.ok = rep.even_error <= tol && rep.half_period_error <= tol;
  return rep;
}

ScalingReport amplitude_scaling_check(double p, double amplitude, double tol) {
  ScalingReport rep;
  rep.measured = solve_w(p, {}, amplitude).period_integrated;
  rep.predicted = std::pow(amplitude, 0.5 * (1.0 - p)) * period_t(p);
  rep.rel_error = std::abs(rep.measured - rep.predicted) / rep.predicted;
  rep.ok = rep.rel_error <= tol;
  return rep;
}

PhasePortrait emit_phase_portrait(std::vector<double> p_list, const OscillatorConfig& config) {
  for (double p : p_list) {
    if (!(p > 0.0 && p < 1.0)) throw ValidationError("phase portrait exponents must lie in (0, 1)");
  }
  std::sort(p_list.begin(), p_list.end());
  PhasePortrait out;
  out.ps = p_list;
  for (double p : p_list) {
    out.orbits.push_back(solve_w(p, config));
    double m = 0.0;
    for (const auto& s : out.orbits.back().samples) m = std::max(m, std::abs(s.z.y()));
    out.max_abs_wprime.push_back(m);
  }
  // Orbit k+1 lies inside orbit k iff its points do not exceed the p_k energy level.
  out.nesting_margin = -std::numeric_limits<double>::infinity();
  bool ok = true;
  for (std::size_t k = 0; k + 1 < out.orbits.size(); ++k) {
    const double pk = out.ps[k];
    const double level = 1.0 / (1.0 + pk);
    for (const auto& s : out.orbits[k + 1].samples) {
      out.nesting_margin = std::max(out.nesting_margin, oscillator_energy(pk, s.z) - level);
    }
    if (!(out.max_abs_wprime[k] > out.max_abs_wprime[k + 1])) ok = false;
  }
  if (out.orbits.size() < 2) out.nesting_margin = 0.0;
  out.nesting_ok = ok && out.nesting_margin <= 1e-9;
  return out;
}

}  // namespace sslab
