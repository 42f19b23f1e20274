#include "sslab/integrator.hpp"

#include "sslab/io.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

namespace sslab {

namespace {

constexpr double c2 = 1.0 / 5.0, c3 = 3.0 / 10.0, c4 = 4.0 / 5.0, c5 = 8.0 / 9.0;
constexpr double a21 = 1.0 / 5.0;
constexpr double a31 = 3.0 / 40.0, a32 = 9.0 / 40.0;
constexpr double a41 = 44.0 / 45.0, a42 = -56.0 / 15.0, a43 = 32.0 / 9.0;
constexpr double a51 = 19372.0 / 6561.0, a52 = -25360.0 / 2187.0, a53 = 64448.0 / 6561.0, a54 = -212.0 / 729.0;
constexpr double a61 = 9017.0 / 3168.0, a62 = -355.0 / 33.0, a63 = 46732.0 / 5247.0, a64 = 49.0 / 176.0,
                 a65 = -5103.0 / 18656.0;
constexpr double b1 = 35.0 / 384.0, b3 = 500.0 / 1113.0, b4 = 125.0 / 192.0, b5 = -2187.0 / 6784.0,
                 b6 = 11.0 / 84.0;
constexpr double e1 = 71.0 / 57600.0, e3 = -71.0 / 16695.0, e4 = 71.0 / 1920.0, e5 = -17253.0 / 339200.0,
                 e6 = 22.0 / 525.0, e7 = -1.0 / 40.0;

constexpr double safety = 0.9;
constexpr double fac_min = 0.2;
constexpr double fac_max = 10.0;

struct Step {
  Vec2 z1;
  Vec2 k7;  // f(s + h, z1), reused as the next k1
  double err;
};

Step dp_step(const OdeRhs& f, double s, const Vec2& z, const Vec2& k1, double h, const IntegratorConfig& cfg) {
  const Vec2 k2 = f(s + c2 * h, z + h * (a21 * k1));
  const Vec2 k3 = f(s + c3 * h, z + h * (a31 * k1 + a32 * k2));
  const Vec2 k4 = f(s + c4 * h, z + h * (a41 * k1 + a42 * k2 + a43 * k3));
  const Vec2 k5 = f(s + c5 * h, z + h * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4));
  const Vec2 k6 = f(s + h, z + h * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5));
  Step out;
  out.z1 = z + h * (b1 * k1 + b3 * k3 + b4 * k4 + b5 * k5 + b6 * k6);
  out.k7 = f(s + h, out.z1);
  const Vec2 local = h * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * out.k7);
  double acc = 0.0;
  for (int i = 0; i < 2; ++i) {
    const double sc = cfg.abs_tol + cfg.rel_tol * std::max(std::abs(z[i]), std::abs(out.z1[i]));
    acc += (local[i] / sc) * (local[i] / sc);
  }
  out.err = std::sqrt(acc / 2.0);
  return out;
}

bool crossed(double g0, double g1, Crossing c) {
  switch (c) {
    case Crossing::rising: return g0 < 0.0 && g1 >= 0.0;
    case Crossing::falling: return g0 > 0.0 && g1 <= 0.0;
    case Crossing::either: return (g0 < 0.0 && g1 >= 0.0) || (g0 > 0.0 && g1 <= 0.0);
  }
  return false;
}

}  // namespace

const char* to_string(IntegrationStatus s) {
  switch (s) {
    case IntegrationStatus::horizon_reached: return "horizon_reached";
    case IntegrationStatus::terminal_event: return "terminal_event";
    case IntegrationStatus::step_underflow: return "step_underflow";
    case IntegrationStatus::non_finite_state: return "non_finite_state";
    case IntegrationStatus::step_limit: return "step_limit";
  }
  return "?";
}

void IntegratorConfig::validate() const {
  if (!(rel_tol > 0.0) || !(abs_tol > 0.0) || !(event_tol > 0.0)) {
    throw ValidationError("integrator tolerances must be positive");
  }
  if (!(h_min > 0.0) || !(h_min <= h_max)) throw ValidationError("integrator needs 0 < h_min <= h_max");
  if (!(h_init > 0.0)) throw ValidationError("integrator h_init must be positive");
  if (!(eta_max > 0.0)) throw ValidationError("integrator eta_max must be positive");
}

Vec2 hermite(const OdeSample& a, const OdeSample& b, double s) {
  const double h = b.s - a.s;
  if (h == 0.0) return a.z;
  const double t = (s - a.s) / h;
  const double t2 = t * t;
  const double t3 = t2 * t;
  const double h00 = 2 * t3 - 3 * t2 + 1;
  const double h10 = t3 - 2 * t2 + t;
  const double h01 = -2 * t3 + 3 * t2;
  const double h11 = t3 - t2;
  return h00 * a.z + h10 * h * a.dz + h01 * b.z + h11 * h * b.dz;
}

OdeResult dormand_prince(const OdeRhs& f, const Vec2& z0, double s_end, const IntegratorConfig& cfg,
                         const std::vector<OdeEvent>& events) {
  cfg.validate();
  OdeResult out;
  double s = 0.0;
  Vec2 z = z0;
  Vec2 k1 = f(s, z);
  out.samples.push_back({s, z, k1});
  if (!z.allFinite() || !k1.allFinite()) {
    out.status = IntegrationStatus::non_finite_state;
    return out;
  }

  std::vector<double> g_prev(events.size());
  for (std::size_t i = 0; i < events.size(); ++i) g_prev[i] = events[i].g(s, z);

  double h = std::min(cfg.h_init, cfg.h_max);
  std::size_t steps = 0;
  while (s < s_end) {
    if (++steps > cfg.max_steps) {
      out.status = IntegrationStatus::step_limit;
      return out;
    }
    bool last = false;
    if (s + h >= s_end) {
      h = s_end - s;
      last = true;
    }
    const Step st = dp_step(f, s, z, k1, h, cfg);
    if (!st.z1.allFinite() || !st.k7.allFinite()) {
      if (h <= cfg.h_min) {
        out.status = IntegrationStatus::non_finite_state;
        return out;
      }
      h = std::max(cfg.h_min, h * fac_min);
      ++out.rejected;
      continue;
    }
    const double fac = st.err == 0.0 ? fac_max : std::clamp(safety * std::pow(st.err, -0.2), fac_min, fac_max);
    if (st.err > 1.0 && h > cfg.h_min) {
      h = std::max(cfg.h_min, h * std::min(1.0, fac));
      ++out.rejected;
      continue;
    }
    // Accepted (possibly forced at h_min).
    const bool forced = st.err > 1.0;
    ++out.accepted;
    const OdeSample a{s, z, k1};
    const OdeSample b{last ? s_end : s + h, st.z1, st.k7};

    // Event detection on the step endpoints; localization by bisection on
    // exact sub-steps from the step start.
    std::optional<OdeEventHit> first_terminal;
    std::vector<OdeEventHit> hits;
    for (std::size_t i = 0; i < events.size(); ++i) {
      const double g1 = events[i].g(b.s, b.z);
      if (crossed(g_prev[i], g1, events[i].crossing)) {
        double lo = 0.0, hi = b.s - a.s;
        double glo = g_prev[i];
        Vec2 zloc = b.z;
        double sloc = b.s;
        for (int it = 0; it < 200; ++it) {
          const double mid = 0.5 * (lo + hi);
          const Vec2 zm = dp_step(f, a.s, a.z, a.dz, mid, cfg).z1;
          const double gm = events[i].g(a.s + mid, zm);
          if (std::abs(gm) <= cfg.event_tol || hi - lo <= 4e-16 * std::max(1.0, std::abs(a.s))) {
            zloc = zm;
            sloc = a.s + mid;
            break;
          }
          if ((gm < 0.0) == (glo < 0.0)) {
            lo = mid;
            glo = gm;
          } else {
            hi = mid;
          }
          zloc = zm;
          sloc = a.s + mid;
        }
        OdeEventHit hit{i, sloc, zloc};
        hits.push_back(hit);
        if (events[i].terminal && (!first_terminal || hit.s < first_terminal->s)) first_terminal = hit;
      }
      g_prev[i] = g1;
    }
    std::sort(hits.begin(), hits.end(), [](const OdeEventHit& x, const OdeEventHit& y) { return x.s < y.s; });
    if (first_terminal) {
      for (const auto& hit : hits) {
        if (hit.s <= first_terminal->s) out.events.push_back(hit);
      }
      if (first_terminal->s > a.s) {
        out.samples.push_back({first_terminal->s, first_terminal->z, f(first_terminal->s, first_terminal->z)});
      }
      out.status = IntegrationStatus::terminal_event;
      return out;
    }
    out.events.insert(out.events.end(), hits.begin(), hits.end());

    s = b.s;
    z = b.z;
    k1 = b.dz;
    out.samples.push_back(b);
    if (forced) {
      out.status = IntegrationStatus::step_underflow;
      return out;
    }
    if (last) break;
    h = std::clamp(h * fac, cfg.h_min, cfg.h_max);
  }
  out.status = IntegrationStatus::horizon_reached;
  return out;
}

// ---------------------------------------------------------------------------

std::size_t Trajectory::locate(double eta) const {
  const double sgn = direction_sign(direction);
  auto it = std::lower_bound(samples.begin(), samples.end(), eta,
                             [sgn](const TrajectorySample& smp, double e) { return sgn * smp.eta < sgn * e; });
  return static_cast<std::size_t>(it - samples.begin());
}

Vec2 Trajectory::at(double eta) const {
  if (samples.empty()) throw NumericalError("empty trajectory");
  std::size_t j = locate(eta);
  if (j == 0) return {samples.front().x, samples.front().y};
  if (j >= samples.size()) return {samples.back().x, samples.back().y};
  const auto& a = samples[j - 1];
  const auto& b = samples[j];
  // Hermite in eta directly; derivatives are d/deta.
  const OdeSample sa{a.eta, {a.x, a.y}, {a.dx, a.dy}};
  const OdeSample sb{b.eta, {b.x, b.y}, {b.dx, b.dy}};
  return hermite(sa, sb, eta);
}

void Trajectory::write_csv(std::ostream& os) const {
  CsvWriter csv(os, {"eta", "x", "y", "V"});
  for (const auto& s : samples) csv.row({s.eta, s.x, s.y, s.v});
}

Trajectory integrate(const Params& params, const IntegrationStart& start, Direction direction,
                     const IntegratorConfig& config, const std::vector<EventSpec>& events) {
  config.validate();
  if (!start.point.allFinite() || !std::isfinite(start.eta0)) throw ValidationError("non-finite start state");
  const double d = direction_sign(direction);
  const double eta0 = start.eta0;
  // s = d (eta - eta0) runs forward in both directions.
  OdeRhs f = [&params, d, eta0](double s, const Vec2& z) -> Vec2 {
    return d * rhs_q(params, eta0 + d * s, z);
  };
  std::vector<OdeEvent> core_events;
  core_events.reserve(events.size());
  for (const auto& ev : events) {
    core_events.push_back({[g = ev.g, d, eta0](double s, const Vec2& z) { return g(eta0 + d * s, z); },
                           ev.crossing, ev.terminal});
  }
  // eta_max is a horizon in |eta|, measured from 0.
  const double s_end = config.eta_max - d * eta0;
  if (!(s_end > 0.0)) throw ValidationError("start lies beyond the horizon");
  const OdeResult r = dormand_prince(f, start.point, s_end, config, core_events);

  Trajectory traj;
  traj.direction = direction;
  traj.status = r.status;
  traj.samples.reserve(r.samples.size());
  for (const auto& smp : r.samples) {
    const Vec2 dz = d * smp.dz;
    traj.samples.push_back({eta0 + d * smp.s, smp.z.x(), smp.z.y(), lyapunov_v(params, smp.z), dz.x(), dz.y()});
  }
  for (const auto& hit : r.events) {
    traj.events.push_back({events[hit.index].name, eta0 + d * hit.s, hit.z.x(), hit.z.y()});
  }
  return traj;
}

MonotoneReport check_monotone_f(const Trajectory& traj, double tol) {
  MonotoneReport rep;
  for (std::size_t i = 1; i < traj.samples.size(); ++i) {
    const auto& a = traj.samples[i - 1];
    const auto& b = traj.samples[i];
    // Only steps moving away from eta = 0 are constrained.
    if (std::abs(b.eta) < std::abs(a.eta)) continue;
    if (a.eta * b.eta < 0.0) continue;
    rep.max_violation = std::max(rep.max_violation, b.v - a.v);
  }
  rep.ok = rep.max_violation <= tol;
  return rep;
}

}  // namespace sslab
