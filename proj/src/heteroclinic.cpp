#include "sslab/heteroclinic.hpp"

#include "sslab/fit.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

namespace sslab {

double eta_star(const Params& params, double beta) {
  if (!(beta > 0.0)) throw ValidationError("eta_star needs beta > 0");
  const double m = params.m_h;
  const double first = (2.0 / beta) * (m + std::sqrt(m * m + beta * beta / 2.0));
  return std::min(first, params.x_eq / beta);
}

double case_two_bound(const Params& params) {
  return std::sqrt(std::pow(1.0 - params.p, 2.0 / (1.0 - params.p)) / (1.0 + params.p));
}

double case_one_bound(const Params& params) {
  const double gap = params.x_eq - params.m_h;
  return std::sqrt(2.0 * (gap * gap - params.m_h * params.m_h));
}

double ShotOutcome::eta_exit() const {
  return std::visit(
      [](const auto& v) -> double {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, Undecided>) {
          return v.eta_horizon;
        } else {
          return v.eta_beta;
        }
      },
      value);
}

const char* ShotOutcome::name() const {
  if (is_case_one()) return "CaseI";
  if (is_case_two()) return "CaseII";
  return "Undecided";
}

namespace {

// H(x_eq + xi) without cancellation near the saddle, using x_eq^p = x_eq/(1-p).
double reaction_near_saddle(const Params& params, double xi) {
  const double p = params.p, x_eq = params.x_eq;
  if (std::abs(xi) < 0.5 * x_eq) return xi / (1.0 - p) - x_eq / (1.0 - p) * std::expm1(p * std::log1p(xi / x_eq));
  return reaction_h(p, x_eq + xi);
}

// Forward run from (0, (0, beta)): in (x, y) until x reaches x_eq / 2, then in
// (xi, y). With classify set, stops at xi = 0 (rising) or y = 0 (falling).
Trajectory shoot(const Params& params, double beta, const IntegratorConfig& cfg, bool classify) {
  cfg.validate();
  const double x_eq = params.x_eq;
  Trajectory traj;
  auto append = [&](const OdeResult& r, double eta0, double shift) {
    for (const auto& smp : r.samples) {
      const double eta = eta0 + smp.s;
      if (!traj.samples.empty() && eta <= traj.samples.back().eta) continue;
      const double x = shift + smp.z.x();
      traj.samples.push_back({eta, x, smp.z.y(), lyapunov_v(params, Vec2(x, smp.z.y())), smp.dz.x(), smp.dz.y()});
    }
    traj.status = r.status;
  };
  const OdeEvent y_zero{[](double, const Vec2& z) { return z.y(); }, Crossing::falling, true};

  std::vector<OdeEvent> near{{[x_eq](double, const Vec2& z) { return z.x() - 0.5 * x_eq; }, Crossing::rising, true}};
  if (classify) near.push_back(y_zero);
  const OdeRhs f_near = [&params](double eta, const Vec2& z) { return rhs_q(params, eta, z); };
  const OdeResult first = dormand_prince(f_near, Vec2(0.0, beta), cfg.eta_max, cfg, near);
  append(first, 0.0, 0.0);
  if (first.status != IntegrationStatus::terminal_event) return traj;
  const OdeEventHit& hit = first.events.back();
  if (hit.index == 1) {
    traj.events.push_back({"y_zero", hit.s, hit.z.x(), hit.z.y()});
    return traj;
  }

  const double eta0 = hit.s;
  std::vector<OdeEvent> far;
  if (classify) far = {{[](double, const Vec2& z) { return z.x(); }, Crossing::rising, true}, y_zero};
  const OdeRhs f_far = [&params, eta0](double s, const Vec2& z) {
    return Vec2(z.y(), reaction_near_saddle(params, z.x()) - (eta0 + s) * z.y() / 2.0);
  };
  traj.status = IntegrationStatus::horizon_reached;
  if (!(cfg.eta_max - eta0 > 0.0)) return traj;
  const OdeResult second = dormand_prince(f_far, Vec2(hit.z.x() - x_eq, hit.z.y()), cfg.eta_max - eta0, cfg, far);
  append(second, eta0, x_eq);
  for (const auto& h : second.events) {
    traj.events.push_back({h.index == 0 ? "x_eq" : "y_zero", eta0 + h.s, x_eq + h.z.x(), h.z.y()});
  }
  return traj;
}

ShotOutcome classify_once(const Params& params, double beta, const ShootingConfig& config, Trajectory* out) {
  const double x_eq = params.x_eq;
  Trajectory traj = shoot(params, beta, config.integrator, true);

  ShotOutcome outcome;
  outcome.eta_star = eta_star(params, beta);
  for (const auto& s : traj.samples) {
    if (s.eta <= 0.0) continue;
    if (s.eta > outcome.eta_star) break;
    const bool y_ok = beta / 2.0 < s.y && s.y < beta;
    const bool x_ok = beta * s.eta / 2.0 < s.x && s.x < beta * s.eta;
    if (!y_ok || !x_ok) outcome.sandwich_ok = false;
  }

  const double tol = config.integrator.event_tol;
  switch (traj.status) {
    case IntegrationStatus::terminal_event: {
      const EventHit& hit = traj.events.back();
      if (std::abs(hit.x - x_eq) <= tol && std::abs(hit.y) <= tol) {
        throw NumericalError("degenerate shot: both exit conditions hold at once");
      }
      if (hit.name == "x_eq") {
        if (!(hit.y > 0.0)) throw NumericalError("degenerate shot: x_eq reached with y <= 0");
        outcome.value = CaseOne{hit.eta, hit.y};
      } else {
        if (!(hit.x > 0.0 && hit.x < x_eq)) throw NumericalError("degenerate shot: y = 0 outside (0, x_eq)");
        outcome.value = CaseTwo{hit.eta, hit.x};
      }
      break;
    }
    case IntegrationStatus::horizon_reached: {
      const auto& b = traj.back();
      outcome.value = Undecided{b.eta, std::hypot(b.x - x_eq, b.y)};
      break;
    }
    default:
      throw NumericalError(std::string("shot integration failed: ") + to_string(traj.status));
  }
  if (out) *out = std::move(traj);
  return outcome;
}

}  // namespace

ShotOutcome classify_shot(const Params& params, double beta, const ShootingConfig& config, Trajectory* trajectory) {
  if (!(beta > 0.0) || !std::isfinite(beta)) throw ValidationError("shooting needs beta > 0");
  try {
    return classify_once(params, beta, config, trajectory);
  } catch (const NumericalError&) {
    ShootingConfig tight = config;
    tight.integrator.rel_tol /= 10.0;
    tight.integrator.abs_tol /= 10.0;
    tight.integrator.event_tol /= 10.0;
    return classify_once(params, beta, tight, trajectory);
  }
}

Bracket initial_bracket(const Params& params, const ShootingConfig& config, double delta) {
  Bracket b{case_two_bound(params) * (1.0 - delta), case_one_bound(params) * (1.0 + delta)};
  int widen = 0;
  while (!classify_shot(params, b.beta_lo, config).is_case_two()) {
    if (++widen > 10) throw BracketFailure("lower bracket end never classified as case II");
    b.beta_lo /= 2.0;
  }
  widen = 0;
  while (!classify_shot(params, b.beta_hi, config).is_case_one()) {
    if (++widen > 10) throw BracketFailure("upper bracket end never classified as case I");
    b.beta_hi *= 2.0;
  }
  if (!(b.beta_lo < b.beta_hi)) throw BracketFailure("bracket ends out of order");
  return b;
}

HeteroclinicResult bisect_beta(const Params& params, const Bracket& bracket, const BisectionOptions& options,
                               const ShootingConfig& config) {
  if (!(options.tol_beta > 0.0)) throw ValidationError("tol_beta must be positive");
  if (!(bracket.beta_lo > 0.0 && bracket.beta_lo < bracket.beta_hi)) throw ValidationError("invalid bracket");
  if (!classify_shot(params, bracket.beta_lo, config).is_case_two() ||
      !classify_shot(params, bracket.beta_hi, config).is_case_one()) {
    throw BracketFailure("bracket ends do not straddle the connection");
  }
  HeteroclinicResult r;
  r.params = params;
  r.initial = bracket;
  double lo = bracket.beta_lo, hi = bracket.beta_hi;
  double star = 0.5 * (lo + hi);
  while (r.iterations < options.max_iterations) {
    if (hi - lo <= options.tol_beta && !options.refine_to_resolution) break;
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    ++r.iterations;
    const ShotOutcome o = classify_shot(params, mid, config);
    star = mid;
    if (o.is_undecided()) {
      const auto& u = std::get<Undecided>(o.value);
      if (u.terminal_distance <= config.undecided_radius && u.eta_horizon >= config.undecided_min_eta) {
        r.accepted_undecided = true;
        break;
      }
      throw NumericalError("shot reached the horizon away from the saddle");
    }
    if (o.is_case_two()) {
      lo = mid;
    } else {
      hi = mid;
    }
    star = 0.5 * (lo + hi);
  }
  r.interval_width = r.accepted_undecided ? 0.0 : hi - lo;
  if (!r.accepted_undecided && r.interval_width > options.tol_beta) {
    throw NumericalError("bisection did not reach tol_beta within the iteration limit");
  }
  r.beta_star = star;
  r.trajectory = shoot(params, star, config.integrator, false);
  if (r.trajectory.status != IntegrationStatus::horizon_reached) {
    throw NumericalError(std::string("front trajectory failed: ") + to_string(r.trajectory.status));
  }
  r.tail = tail_fit(r.trajectory, params);
  return r;
}

Trajectory extend_by_reflection(const HeteroclinicResult& result) {
  const Trajectory& f = result.trajectory;
  Trajectory out;
  out.direction = Direction::forward;
  out.status = f.status;
  out.samples.reserve(2 * f.samples.size());
  for (auto it = f.samples.rbegin(); it != f.samples.rend(); ++it) {
    if (it->eta == 0.0) continue;
    out.samples.push_back({-it->eta, -it->x, it->y, it->v, it->dx, -it->dy});
  }
  out.samples.insert(out.samples.end(), f.samples.begin(), f.samples.end());
  return out;
}

TailFit tail_fit(const Trajectory& forward, const Params& params, double eta_lo, double eta_hi) {
  TailFit fit;
  fit.window_lo = eta_lo;
  fit.window_hi = std::min(eta_hi, forward.eta_end());
  // Uniform resampling so that the fit weights the window evenly.
  const double step = 0.05;
  std::vector<std::pair<double, double>> pts;
  for (double eta = eta_lo; eta <= fit.window_hi + 1e-12; eta += step) {
    const double r = params.x_eq - forward.at(eta).x();
    if (!(r > 0.0)) {
      fit.window_shrunk = true;
      fit.window_hi = eta - step;
      break;
    }
    pts.emplace_back(eta, std::log(r));
  }
  if (pts.size() < 8) throw NumericalError("tail fit window holds too few positive residuals");
  Eigen::MatrixXd a(pts.size(), 3);
  Eigen::VectorXd b(pts.size());
  for (std::size_t i = 0; i < pts.size(); ++i) {
    const double eta = pts[i].first;
    a(i, 0) = 1.0;
    a(i, 1) = -eta * eta / 4.0;
    a(i, 2) = -3.0 * std::log(eta);
    b(i) = pts[i].second;
  }
  const LinearFit lf = least_squares(a, b);
  fit.a_inf = std::exp(lf.coefficients(0));
  fit.gaussian_slope = lf.coefficients(1);
  fit.cubic_correction = lf.coefficients(2);
  fit.points = pts.size();
  return fit;
}

std::vector<ScanPoint> beta_scan(const Params& params, double beta_min, double beta_max, std::size_t n,
                                 const ShootingConfig& config) {
  if (!(beta_min > 0.0 && beta_min < beta_max) || n < 2) throw ValidationError("invalid beta scan range");
  std::vector<ScanPoint> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double beta = beta_min + (beta_max - beta_min) * static_cast<double>(i) / static_cast<double>(n - 1);
    out.push_back({beta, classify_shot(params, beta, config)});
  }
  return out;
}

}  // namespace sslab
