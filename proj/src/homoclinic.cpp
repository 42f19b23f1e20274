#include "sslab/homoclinic.hpp"

#include "sslab/fit.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

namespace sslab {

void validate_seed(const Params& params, const HomoclinicSeed& seed) {
  if (!std::isfinite(seed.alpha) || !std::isfinite(seed.beta)) throw ValidationError("seed must be finite");
  const PhasePoint<double> pt(seed.alpha, seed.beta);
  const double v = lyapunov_v(params, pt);
  constexpr double tol = 1e-14;
  if (std::abs(seed.alpha) > params.x_eq + tol || v > params.c_star + tol) {
    throw ValidationError("seed lies outside the separatrix region");
  }
  if (seed.alpha == 0.0 && seed.beta == 0.0) throw ValidationError("seed is the origin");
  if (seed.beta == 0.0 && std::abs(std::abs(seed.alpha) - params.x_eq) <= tol * params.x_eq) {
    throw ValidationError("seed is a saddle equilibrium");
  }
}

HomoclinicResult run_homoclinic(const Params& params, const HomoclinicSeed& seed, const HomoclinicConfig& config) {
  validate_seed(params, seed);
  HomoclinicResult r;
  r.seed = seed;
  r.c_seed = lyapunov_v(params, PhasePoint<double>(seed.alpha, seed.beta));
  const IntegrationStart start{0.0, Vec2(seed.alpha, seed.beta)};
  r.forward = integrate(params, start, Direction::forward, config.integrator);
  r.backward = integrate(params, start, Direction::backward, config.integrator);
  for (const Trajectory* t : {&r.forward, &r.backward}) {
    if (t->status != IntegrationStatus::horizon_reached) {
      throw NumericalError(std::string("homoclinic integration stopped: ") + to_string(t->status));
    }
    for (const auto& s : t->samples) {
      r.containment_excess = std::max(r.containment_excess, s.v - r.c_seed);
      r.max_abs_x = std::max(r.max_abs_x, std::abs(s.x));
    }
  }
  r.f_limit_plus = r.forward.back().v;
  r.f_limit_minus = r.backward.back().v;
  r.converged_plus = std::hypot(r.forward.back().x, r.forward.back().y) < config.conv_radius;
  r.converged_minus = std::hypot(r.backward.back().x, r.backward.back().y) < config.conv_radius;
  return r;
}

std::vector<HomoclinicSeed> sample_seeds(const Params& params, std::size_t n, std::uint64_t rng_seed) {
  std::mt19937_64 rng(rng_seed);
  // 53-bit uniform in [0, 1); std::uniform_real_distribution is not portable bit-for-bit.
  auto unit = [&rng] { return static_cast<double>(rng() >> 11) * 0x1.0p-53; };
  const double ymax = std::sqrt(2.0 * params.c_star);
  std::vector<HomoclinicSeed> out;
  out.reserve(n);
  while (out.size() < n) {
    const HomoclinicSeed s{(2.0 * unit() - 1.0) * params.x_eq, (2.0 * unit() - 1.0) * ymax};
    try {
      validate_seed(params, s);
    } catch (const ValidationError&) {
      continue;
    }
    out.push_back(s);
  }
  return out;
}

std::vector<EnvelopePoint> extract_envelope(const Trajectory& traj, double eta_start) {
  std::vector<EnvelopePoint> out;
  const auto& smp = traj.samples;
  for (std::size_t i = 1; i < smp.size(); ++i) {
    const auto& a = smp[i - 1];
    const auto& b = smp[i];
    if (std::abs(b.eta) < eta_start) continue;
    if (!((a.y > 0.0 && b.y <= 0.0) || (a.y < 0.0 && b.y >= 0.0))) continue;
    double lo = a.eta, hi = b.eta;
    for (int k = 0; k < 80 && lo != hi; ++k) {
      const double mid = 0.5 * (lo + hi);
      if (mid == lo || mid == hi) break;
      if ((traj.at(mid).y() > 0.0) == (a.y > 0.0)) {
        lo = mid;
      } else {
        hi = mid;
      }
    }
    const double eta = 0.5 * (lo + hi);
    if (std::abs(eta) < eta_start) continue;
    out.push_back({eta, std::abs(traj.at(eta).x())});
  }
  if (out.size() < 4) throw NotEnoughOscillations("fewer than 4 envelope extrema");
  return out;
}

DecayFit fit_decay(const std::vector<EnvelopePoint>& envelope, const Params& params,
                   const DecayFitOptions& options) {
  DecayFit fit;
  fit.algebraic_ratio = std::numeric_limits<double>::quiet_NaN();
  double lo = options.eta_lo;
  if (!envelope.empty()) lo = std::max(lo, std::abs(envelope.front().eta));
  std::vector<const EnvelopePoint*> used;
  for (const auto& e : envelope) {
    const double ae = std::abs(e.eta);
    if (ae >= lo && ae <= options.eta_hi && e.amplitude > 0.0) used.push_back(&e);
  }
  if (used.size() < 6) throw NotEnoughOscillations("decay fit needs at least 6 envelope points");
  const double power = 1.0 + 2.0 / (1.0 - params.p);
  Eigen::MatrixXd a(used.size(), 3);
  Eigen::VectorXd b(used.size());
  for (std::size_t i = 0; i < used.size(); ++i) {
    const double eta = std::abs(used[i]->eta);
    a(i, 0) = 1.0;
    a(i, 1) = -eta * eta / 4.0;
    a(i, 2) = -power * std::log(eta);
    b(i) = std::log(used[i]->amplitude);
  }
  const LinearFit lf = least_squares(a, b);
  fit.a_inf = std::exp(lf.coefficients(0));
  fit.gaussian_slope = lf.coefficients(1);
  fit.log_correction = lf.coefficients(2);
  fit.residual_rms = lf.residual_rms;
  fit.residual_max = lf.residual_max;
  fit.window_lo = lo;
  fit.window_hi = options.eta_hi;
  fit.points = used.size();
  return fit;
}

double algebraic_ratio(const Trajectory& traj, const Params& params, const DecayFitOptions& options) {
  const double k = 2.0 / (1.0 - params.p) - options.epsilon;
  auto r = [&](double eta) {
    double sup = 0.0;
    for (const auto& s : traj.samples) {
      if (std::abs(s.eta) >= eta) sup = std::max(sup, std::abs(s.x));
    }
    sup = std::max(sup, std::abs(traj.at(std::copysign(eta, direction_sign(traj.direction))).x()));
    return sup * std::pow(1.0 + eta, k);
  };
  if (std::abs(traj.eta_end()) < options.ratio_eta_far) {
    throw ValidationError("trajectory does not reach the far ratio point");
  }
  const double near = r(options.ratio_eta_near);
  return near > 0.0 ? r(options.ratio_eta_far) / near : std::numeric_limits<double>::quiet_NaN();
}

DecayFit analyze_decay(const Trajectory& traj, const Params& params, const DecayFitOptions& options) {
  DecayFit fit = fit_decay(extract_envelope(traj, options.eta_lo), params, options);
  fit.algebraic_ratio = algebraic_ratio(traj, params, options);
  return fit;
}

namespace {

double trapezoid_abs_pow(const Trajectory& t, double q) {
  double acc = 0.0;
  for (std::size_t i = 1; i < t.samples.size(); ++i) {
    const auto& a = t.samples[i - 1];
    const auto& b = t.samples[i];
    acc += 0.5 * std::abs(b.eta - a.eta) * (std::pow(std::abs(a.x), q) + std::pow(std::abs(b.x), q));
  }
  return acc;
}

// Integral of the fitted envelope^q beyond |eta_end|, by composite Simpson.
double envelope_tail(const Trajectory& t, double q, const Params& params) {
  DecayFit fit;
  try {
    fit = fit_decay(extract_envelope(t, 3.0), params);
  } catch (const NumericalError&) {
    return 0.0;
  }
  const double power = 1.0 + 2.0 / (1.0 - params.p);
  auto env = [&](double eta) {
    const double loga = std::log(fit.a_inf) - fit.gaussian_slope * eta * eta / 4.0 -
                        fit.log_correction * power * std::log(eta);
    return std::exp(q * loga);
  };
  const double e0 = std::abs(t.eta_end());
  const double e1 = e0 + 20.0;
  const int n = 4000;
  const double h = (e1 - e0) / n;
  double acc = env(e0) + env(e1);
  for (int i = 1; i < n; ++i) acc += (i % 2 ? 4.0 : 2.0) * env(e0 + i * h);
  return acc * h / 3.0;
}

}  // namespace

LqNorm lq_norm(const Trajectory& forward, const Trajectory& backward, double q, const Params& params) {
  if (!(q > 0.0)) throw ValidationError("L^q norm needs q > 0");
  LqNorm out;
  out.q = q;
  out.below_guaranteed_range = q <= (1.0 - params.p) / 2.0;
  const double body = trapezoid_abs_pow(forward, q) + trapezoid_abs_pow(backward, q);
  if (body > 0.0) out.tail = envelope_tail(forward, q, params) + envelope_tail(backward, q, params);
  out.integral = body + out.tail;
  out.value = out.integral > 0.0 ? std::pow(out.integral, 1.0 / q) : 0.0;
  return out;
}

double symmetry_error(const Trajectory& forward, const Trajectory& backward, Parity x_parity) {
  const double sx = x_parity == Parity::even ? 1.0 : -1.0;
  const double reach = std::min(std::abs(forward.eta_end()), std::abs(backward.eta_end()));
  double err = 0.0;
  for (const auto& s : forward.samples) {
    if (s.eta > reach) break;
    const Vec2 m = backward.at(-s.eta);
    // y = x' has the opposite parity of x.
    err = std::max({err, std::abs(s.x - sx * m.x()), std::abs(s.y + sx * m.y())});
  }
  return err;
}

}  // namespace sslab
