// One PASS/FAIL line per acceptance criterion. Exit status is the number of
// failures, capped at 1.
#include "sslab/cli.hpp"
#include "sslab/heteroclinic.hpp"
#include "sslab/homoclinic.hpp"
#include "sslab/io.hpp"
#include "sslab/pde.hpp"
#include "sslab/periodic.hpp"
#include "sslab/pool.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

using namespace sslab;
namespace fs = std::filesystem;

namespace {

struct Verdict {
  bool pass;
  std::string detail;
};

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

const std::vector<double>& p_grid() {
  static const std::vector<double> g{0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9};
  return g;
}

HomoclinicConfig tight() {
  HomoclinicConfig c;
  c.integrator.rel_tol = 1e-11;
  c.integrator.abs_tol = 1e-20;
  return c;
}

const Params& half() {
  static const Params P = derived_constants(0.5);
  return P;
}

const std::vector<HomoclinicResult>& sampled_runs() {
  static const std::vector<HomoclinicResult> runs = [] {
    const auto seeds = sample_seeds(half(), 20, 1);
    std::vector<HomoclinicResult> r(seeds.size());
    parallel_for(seeds.size(), 0, [&](std::size_t i) { r[i] = run_homoclinic(half(), seeds[i], tight()); });
    return r;
  }();
  return runs;
}

const HomoclinicResult& even_run() {
  static const HomoclinicResult r = run_homoclinic(half(), {0.1, 0.0}, tight());
  return r;
}

const HeteroclinicResult& front_half() {
  static const HeteroclinicResult r = bisect_beta(half(), initial_bracket(half()));
  return r;
}

Verdict energy_identity() {
  double worst = 0.0;
  for (double p : p_grid()) worst = std::max(worst, solve_w(p).max_energy_deviation);
  return {worst < 1e-8, "max energy deviation " + num(worst)};
}

Verdict period_cross_check() {
  double worst = 0.0;
  for (double p : p_grid()) {
    const double t = period_t(p);
    worst = std::max(worst, std::abs(solve_w(p).period_integrated - t) / t);
  }
  const double two_pi = 2 * std::numbers::pi;
  const double one = std::abs(period_t(1.0) - two_pi);
  const double near = std::abs(period_t(0.99) - two_pi) / two_pi;
  return {worst <= 1e-6 && one <= 1e-10 && near <= 0.005,
          "max rel error " + num(worst) + ", |T(1)-2pi| " + num(one) + ", T(0.99) rel " + num(near)};
}

Verdict amplitude_scaling() {
  double worst = 0.0;
  for (double a : {0.25, 0.5, 1.0}) worst = std::max(worst, amplitude_scaling_check(0.5, a).rel_error);
  return {worst <= 1e-6, "max rel error " + num(worst)};
}

Verdict lyapunov_monotone() {
  double worst = 0.0;
  for (const auto& r : sampled_runs()) {
    worst = std::max({worst, check_monotone_f(r.forward, 1e-9).max_violation,
                      check_monotone_f(r.backward, 1e-9).max_violation});
  }
  return {worst <= 1e-9, "20 seeds, max per-step violation " + num(worst)};
}

Verdict homoclinic_convergence() {
  double dist = 0.0, excess = -1.0, xmax = 0.0, reach = 1e9;
  for (const auto& r : sampled_runs()) {
    for (const Trajectory* t : {&r.forward, &r.backward}) {
      dist = std::max(dist, std::hypot(t->back().x, t->back().y));
      reach = std::min(reach, std::abs(t->eta_end()));
      for (const auto& s : t->samples) {
        excess = std::max(excess, s.v - r.c_seed);
        xmax = std::max(xmax, std::abs(s.x));
      }
    }
  }
  const bool ok = dist < 1e-3 && reach >= 12.0 - 1e-12 && excess <= 1e-8 && xmax <= 0.25 + 1e-9;
  return {ok, "max |(x,y)| at |eta|=12 " + num(dist) + ", max V - c_seed " + num(excess) + ", max |x| " + num(xmax)};
}

Verdict decay_bounds() {
  DecayFitOptions o;
  o.eta_lo = 4.0;
  o.eta_hi = 12.0;
  const DecayFit f = analyze_decay(even_run().forward, half(), o);
  const bool ok = f.algebraic_ratio <= 1.0 && f.gaussian_slope >= 0.9 && f.gaussian_slope <= 1.1;
  return {ok, "r(10)/r(5) " + num(f.algebraic_ratio) + ", normalized slope " + num(f.gaussian_slope) + " over [" +
                  num(f.window_lo) + ", " + num(f.window_hi) + "] with " + std::to_string(f.points) + " extrema"};
}

Verdict symmetry() {
  const HomoclinicResult odd = run_homoclinic(half(), {0.0, 0.15}, tight());
  const double eo = symmetry_error(odd.forward, odd.backward, Parity::odd);
  const double ee = symmetry_error(even_run().forward, even_run().backward, Parity::even);
  return {eo <= 1e-8 && ee <= 1e-8, "odd error " + num(eo) + ", even error " + num(ee)};
}

Verdict shooting_brackets() {
  const Params& P = half();
  const double two = case_two_bound(P), one = case_one_bound(P);
  const double two_oracle = P.x_eq / std::sqrt(1 + P.p);
  const double gap = P.x_eq - P.m_h, one_oracle = std::sqrt(2 * (gap * gap - P.m_h * P.m_h));
  bool ok = std::abs(two - 0.204124) < 1e-6 && std::abs(one - 0.5) < 1e-12 &&
            std::abs(two - two_oracle) < 1e-14 && std::abs(one - one_oracle) < 1e-14;
  ok = ok && classify_shot(P, 0.15).is_case_two() && classify_shot(P, 0.6).is_case_one();
  for (double f : {1 - 1e-6, 1 + 1e-6}) {
    ok = ok && classify_shot(P, 0.15 * f).is_case_two() && classify_shot(P, 0.6 * f).is_case_one();
  }
  return {ok, "bounds " + num(two) + " / " + num(one) + ", 0.15 -> " + classify_shot(P, 0.15).name() + ", 0.6 -> " +
                  classify_shot(P, 0.6).name()};
}

Verdict bisection() {
  const std::vector<double> ps{0.3, 0.5, 0.7};
  std::vector<HeteroclinicResult> rs(ps.size());
  parallel_for(ps.size(), 0, [&](std::size_t i) {
    const Params P = derived_constants(ps[i]);
    rs[i] = bisect_beta(P, initial_bracket(P));
  });
  bool ok = true;
  std::string detail;
  for (const auto& r : rs) {
    const double xeq = r.params.x_eq;
    bool inside = true;
    for (const auto& s : r.trajectory.samples) {
      if (s.eta <= 0 || s.eta > 10) continue;
      inside = inside && s.y > 0 && s.y <= r.beta_star && s.x > 0 && s.x < xeq;
    }
    const Vec2 end = r.trajectory.at(10.0);
    const double d = std::hypot(end.x() - xeq, end.y());
    const bool good = r.interval_width <= 1e-9 && r.iterations <= 60 && inside && d < 1e-3;
    ok = ok && good;
    detail += (detail.empty() ? "" : "; ") + std::string("p=") + num(r.params.p) + " beta* " + num(r.beta_star) +
              " width " + num(r.interval_width) + " in " + std::to_string(r.iterations) + ", dist " + num(d);
  }
  return {ok, detail};
}

Verdict heteroclinic_tail() {
  const TailFit t = tail_fit(front_half().trajectory, half(), 3.0, 8.0);
  return {t.gaussian_slope >= 0.9 && t.gaussian_slope <= 1.1 && t.a_inf > 0,
          "normalized slope " + num(t.gaussian_slope) + ", A_inf " + num(t.a_inf)};
}

const SelfSimilarProfile& homoclinic_profile() {
  static const SelfSimilarProfile s = SelfSimilarProfile::from_homoclinic(half(), even_run());
  return s;
}

const SelfSimilarProfile& front_profile() {
  static const SelfSimilarProfile s = SelfSimilarProfile::from_front(half(), front_half());
  return s;
}

Verdict residual_convergence() {
  Grid g;
  g.half_width = 16.0;
  g.nx = 1025;
  bool ok = true;
  std::string detail;
  for (auto [name, prof] : {std::pair{"homoclinic", &homoclinic_profile()}, std::pair{"front", &front_profile()}}) {
    const ResidualReport a = pde_residual(*prof, g), b = pde_residual(*prof, g.refined());
    const double ratio = a.max_abs_residual / b.max_abs_residual;
    ok = ok && ratio >= 3.5 && ratio <= 4.5;
    detail += (detail.empty() ? "" : "; ") + std::string(name) + " ratio " + num(ratio) + " (" +
              num(a.max_abs_residual) + " -> " + num(b.max_abs_residual) + ")";
  }
  return {ok, detail};
}

Verdict self_similar_evolution() {
  Grid g;
  g.half_width = 12.0 * std::sqrt(2.0);
  g.nx = 1025;
  g.t0 = 1.0;
  g.t1 = 2.0;
  g.cfl = 0.4;
  struct Case {
    const char* name;
    const SelfSimilarProfile* profile;
    BoundaryKind bc;
    ErrorNorms norms;
    EvolveStats stats;
  };
  std::vector<Case> cases{{"homoclinic", &homoclinic_profile(), BoundaryKind::zero, {}, {}},
                          {"front", &front_profile(), BoundaryKind::self_similar, {}, {}}};
  parallel_for(cases.size(), 0, [&](std::size_t i) {
    Case& c = cases[i];
    const Field end = evolve(sample_field(*c.profile, g, g.t0), g, {c.bc, c.profile}, half(), &c.stats);
    c.norms = compare_self_similar(end, *c.profile, g);
  });
  bool ok = true;
  std::string detail;
  for (const auto& c : cases) {
    ok = ok && c.norms.rel_sup <= 1e-3 && c.stats.max_order_violation <= 1e-8;
    detail += (detail.empty() ? "" : "; ") + std::string(c.name) + " rel sup " + num(c.norms.rel_sup) +
              ", order excess " + num(c.stats.max_order_violation);
  }
  return {ok, detail};
}

std::map<std::string, std::string> snapshot(const fs::path& dir) {
  std::map<std::string, std::string> m;
  for (const auto& e : fs::recursive_directory_iterator(dir)) {
    if (!e.is_regular_file()) continue;
    std::ifstream f(e.path(), std::ios::binary);
    std::stringstream ss;
    ss << f.rdbuf();
    m[fs::relative(e.path(), dir).string()] = ss.str();
  }
  return m;
}

Verdict determinism() {
  const std::vector<std::vector<std::string>> runs{
      {"levelset", "--p", "0.5"},
      {"homoclinic", "--sample", "4", "--seed", "7", "--q", "1,2"},
      {"decay-fit", "--alpha", "0.1", "--beta", "0"},
      {"heteroclinic", "--p", "0.3,0.5", "--scan", "11"},
      {"periodic"},
      {"pde-verify", "--kind", "homogeneous,front", "--nx", "257", "--residual-nx", "257", "--residual-levels", "2"}};
  const fs::path root = fs::temp_directory_path() / "sslab_acceptance_determinism";
  fs::remove_all(root);
  std::map<std::string, std::string> snaps[2];
  for (int rep = 0; rep < 2; ++rep) {
    const fs::path out = root / std::to_string(rep);
    for (auto args : runs) {
      args.insert(args.begin(), "sslab");
      args.push_back("--out");
      args.push_back(out.string());
      std::vector<const char*> argv;
      for (const auto& a : args) argv.push_back(a.c_str());
      std::ostringstream log, err;
      const int code = cli::run(static_cast<int>(argv.size()), argv.data(), log, err);
      if (code != 0) return {false, args[1] + " exited with " + std::to_string(code) + ": " + err.str()};
    }
    snaps[rep] = snapshot(out);
  }
  std::size_t csv_json = 0;
  for (const auto& [name, content] : snaps[0]) {
    const auto ext = fs::path(name).extension();
    csv_json += ext == ".csv" || ext == ".json";
  }
  const bool same = snaps[0] == snaps[1];
  fs::remove_all(root);
  return {same && csv_json > 0, std::to_string(snaps[0].size()) + " files (" + std::to_string(csv_json) +
                                    " CSV/JSON), " + (same ? "identical" : "different")};
}

}  // namespace

int main() {
  const std::vector<std::pair<const char*, std::function<Verdict()>>> criteria{
      {"energy identity", energy_identity},
      {"period cross-check", period_cross_check},
      {"amplitude scaling", amplitude_scaling},
      {"Lyapunov monotonicity", lyapunov_monotone},
      {"homoclinic convergence", homoclinic_convergence},
      {"decay bounds", decay_bounds},
      {"symmetry", symmetry},
      {"shooting brackets", shooting_brackets},
      {"bisection", bisection},
      {"heteroclinic tail", heteroclinic_tail},
      {"PDE residual convergence", residual_convergence},
      {"self-similar evolution", self_similar_evolution},
      {"determinism", determinism}};
  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const auto start = std::chrono::steady_clock::now();
    Verdict v;
    try {
      v = criteria[i].second();
    } catch (const std::exception& e) {
      v = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    failures += !v.pass;
    std::cout << (v.pass ? "PASS" : "FAIL") << " [" << i + 1 << "] " << criteria[i].first << ": " << v.detail << " ("
              << num(secs) << " s)" << std::endl;
  }
  std::cout << criteria.size() - failures << "/" << criteria.size() << " criteria passed" << std::endl;
  return failures == 0 ? 0 : 1;
}
