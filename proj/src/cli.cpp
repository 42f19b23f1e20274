#include "sslab/cli.hpp"

#include "sslab/heteroclinic.hpp"
#include "sslab/homoclinic.hpp"
#include "sslab/io.hpp"
#include "sslab/pde.hpp"
#include "sslab/periodic.hpp"
#include "sslab/pool.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <memory>
#include <set>
#include <sstream>

#ifndef SSLAB_VERSION
#define SSLAB_VERSION "0.0.0"
#endif

namespace sslab::cli {

using json = nlohmann::ordered_json;

const char* version() { return SSLAB_VERSION; }

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::string tag(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", v);
  return buf;
}

std::string dump(const json& j) { return j.dump(2) + "\n"; }

struct Common {
  std::vector<double> p{0.5};
  bool p_given = false;
  std::string out = "out";
  std::string config;
  double tol_beta = 1e-9;
  double eta_max = 12.0;
  std::uint64_t seed = 1;
  std::size_t jobs = 0;
};

struct OutputFile {
  std::string name;
  std::string content;
};

struct Context {
  const Common& common;
  std::ostream& log;
  std::vector<OutputFile> files;

  void add(std::string name, std::string content) { files.push_back({std::move(name), std::move(content)}); }
};

double single_p(const Common& c) {
  if (c.p.size() != 1) throw ValidationError("this command takes a single --p");
  derived_constants(c.p.front());
  return c.p.front();
}

void check_positive(double v, const char* what) {
  if (!(v > 0.0) || !std::isfinite(v)) throw ValidationError(std::string(what) + " must be positive");
}

IntegratorConfig integrator_config(const Common& c, double rel_tol, double abs_tol) {
  IntegratorConfig ic;
  ic.eta_max = c.eta_max;
  ic.rel_tol = rel_tol;
  ic.abs_tol = abs_tol;
  ic.validate();
  return ic;
}

// ---------------------------------------------------------------------------

class Command {
 public:
  virtual ~Command() = default;
  virtual void validate(const Common& c) = 0;
  virtual void run(Context& ctx) = 0;
};

class LevelsetCmd : public Command {
 public:
  int levels = 8;
  std::vector<double> c_values;
  std::size_t points = 201;

  void attach(CLI::App* app) {
    app->add_option("--levels", levels, "number of equal steps of c in [0, c_star]");
    app->add_option("--c", c_values, "explicit level values (override --levels)")->delimiter(',');
    app->add_option("--points", points, "points per level curve");
  }

  void validate(const Common& c) override {
    const Params P = derived_constants(single_p(c));
    if (levels < 1) throw ValidationError("--levels must be at least 1");
    if (points < 8) throw ValidationError("--points must be at least 8");
    for (double v : c_values) {
      if (!(v >= 0.0 && v <= P.c_star)) {
        throw ValidationError("level c=" + format_real(v) + " outside [0, c_star=" + format_real(P.c_star) + "]");
      }
    }
  }

  void run(Context& ctx) override {
    const Params P = derived_constants(ctx.common.p.front());
    std::vector<double> cs = c_values;
    if (cs.empty()) {
      for (int k = 0; k <= levels; ++k) cs.push_back(P.c_star * k / levels);
    }
    std::vector<std::vector<PhasePoint<double>>> curves(cs.size());
    parallel_for(cs.size(), ctx.common.jobs, [&](std::size_t i) { curves[i] = level_curve_sample(P, cs[i], points); });

    std::ostringstream csv;
    CsvWriter w(csv, {"level", "c", "x", "y"});
    json levels_json = json::array();
    SvgPlot plot{"Level curves of V inside the separatrix, p=" + tag(P.p), "x", "y", {}};
    const char* palette[] = {"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b", "#e377c2", "#17becf"};
    for (std::size_t i = 0; i < cs.size(); ++i) {
      const auto& pts = curves[i];
      double on_err = 0.0;
      SvgSeries s;
      for (const auto& q : pts) {
        w.row({static_cast<double>(i), cs[i], q.x(), q.y()});
        on_err = std::max(on_err, std::abs(lyapunov_v(P, q) - cs[i]));
        s.xs.push_back(q.x());
        s.ys.push_back(q.y());
      }
      const double closure = (pts.front() - pts.back()).norm();
      s.stroke = palette[i % 8];
      s.markers = pts.size() == 1;
      plot.series.push_back(std::move(s));
      levels_json.push_back({{"index", i},
                             {"c", json_real(cs[i])},
                             {"points", pts.size()},
                             {"closed", closure <= 1e-12},
                             {"closure_error", json_real(closure)},
                             {"max_level_error", json_real(on_err)}});
    }
    SvgSeries eq;
    eq.xs = {-P.x_eq, 0.0, P.x_eq};
    eq.ys = {0.0, 0.0, 0.0};
    eq.stroke = "black";
    eq.markers = true;
    plot.series.push_back(eq);

    json j = {{"p", json_real(P.p)},
              {"x_eq", json_real(P.x_eq)},
              {"c_star", json_real(P.c_star)},
              {"lambda_min", json_real(P.lambda_min)},
              {"m_H", json_real(P.m_h)},
              {"equilibria", {{-P.x_eq, 0.0}, {0.0, 0.0}, {P.x_eq, 0.0}}},
              {"levels", levels_json}};
    ctx.add("levelset.csv", csv.str());
    ctx.add("levelset.json", dump(j));
    ctx.add("levelset.svg", plot.render());
    ctx.log << "levelset: " << cs.size() << " levels, c_star = " << format_real(P.c_star) << "\n";
  }
};

HomoclinicSeed parse_seed(const std::string& text) {
  const auto colon = text.find(':');
  if (colon == std::string::npos) throw ValidationError("seed '" + text + "' is not alpha:beta");
  try {
    std::size_t u = 0, v = 0;
    const std::string a = trim(text.substr(0, colon)), b = trim(text.substr(colon + 1));
    HomoclinicSeed s{std::stod(a, &u), std::stod(b, &v)};
    if (u != a.size() || v != b.size()) throw std::invalid_argument("trailing");
    return s;
  } catch (const std::logic_error&) {
    throw ValidationError("seed '" + text + "' is not alpha:beta");
  }
}

class HomoclinicCmd : public Command {
 public:
  std::vector<std::string> seeds{"0.1:0"};
  std::size_t sample = 0;
  std::vector<double> qs{1.0};
  bool trajectories = false;
  double conv_radius = 1e-3;
  double rel_tol = 1e-11;
  double abs_tol = 1e-20;
  double eta_lo = 3.0;

  void attach(CLI::App* app) {
    app->add_option("--seeds", seeds, "zero-values alpha:beta")->delimiter(',');
    app->add_option("--sample", sample, "use this many rejection-sampled seeds instead of --seeds");
    app->add_option("--q", qs, "exponents of the L^q norms")->delimiter(',');
    app->add_flag("--trajectories", trajectories, "also write forward/backward trajectory CSVs");
    app->add_option("--conv-radius", conv_radius, "distance to the origin that counts as converged");
    app->add_option("--rel-tol", rel_tol, "integrator relative tolerance");
    app->add_option("--abs-tol", abs_tol, "integrator absolute tolerance");
    app->add_option("--eta-lo", eta_lo, "lower end of the envelope fit window");
  }

  std::vector<HomoclinicSeed> resolved;

  void validate(const Common& c) override {
    const Params P = derived_constants(single_p(c));
    integrator_config(c, rel_tol, abs_tol);
    check_positive(conv_radius, "--conv-radius");
    for (double q : qs) check_positive(q, "--q");
    if (!(eta_lo >= 0.0 && eta_lo < c.eta_max)) throw ValidationError("--eta-lo must lie in [0, eta-max)");
    resolved.clear();
    if (sample > 0) {
      resolved = sample_seeds(P, sample, c.seed);
    } else {
      if (seeds.empty()) throw ValidationError("no seeds given");
      for (const auto& s : seeds) resolved.push_back(parse_seed(s));
    }
    for (const auto& s : resolved) validate_seed(P, s);
  }

  void run(Context& ctx) override {
    const Params P = derived_constants(ctx.common.p.front());
    HomoclinicConfig hc;
    hc.integrator = integrator_config(ctx.common, rel_tol, abs_tol);
    hc.conv_radius = conv_radius;
    DecayFitOptions dopt;
    dopt.eta_lo = eta_lo;
    dopt.eta_hi = ctx.common.eta_max;

    struct Report {
      HomoclinicResult result;
      std::optional<DecayFit> fit;
      std::vector<LqNorm> norms;
      MonotoneReport mono_plus, mono_minus;
    };
    std::vector<Report> reports(resolved.size());
    parallel_for(resolved.size(), ctx.common.jobs, [&](std::size_t i) {
      Report& r = reports[i];
      r.result = run_homoclinic(P, resolved[i], hc);
      try {
        r.fit = fit_decay(extract_envelope(r.result.forward, dopt.eta_lo), P, dopt);
        if (std::abs(r.result.forward.eta_end()) >= dopt.ratio_eta_far) {
          r.fit->algebraic_ratio = algebraic_ratio(r.result.forward, P, dopt);
        } else {
          r.fit->algebraic_ratio = std::numeric_limits<double>::quiet_NaN();
        }
      } catch (const NumericalError&) {
        r.fit.reset();
      }
      for (double q : qs) r.norms.push_back(lq_norm(r.result.forward, r.result.backward, q, P));
      r.mono_plus = check_monotone_f(r.result.forward, 1e-9);
      r.mono_minus = check_monotone_f(r.result.backward, 1e-9);
    });

    std::ostringstream summary;
    CsvWriter sw(summary, {"index", "alpha", "beta", "c_seed", "converged_plus", "converged_minus", "F_limit_plus",
                           "F_limit_minus", "gaussian_slope", "A_inf", "max_abs_x", "containment_excess"});
    SvgPlot plot{"Homoclinic profiles w(eta), p=" + tag(P.p), "eta", "w", {}};
    const double nan = std::numeric_limits<double>::quiet_NaN();
    std::size_t converged = 0;
    for (std::size_t i = 0; i < reports.size(); ++i) {
      const Report& r = reports[i];
      const HomoclinicResult& h = r.result;
      converged += h.converged_plus && h.converged_minus;
      const double slope = r.fit ? r.fit->gaussian_slope : nan;
      const double a_inf = r.fit ? r.fit->a_inf : nan;
      json lq = json::object(), lq_detail = json::object();
      for (const auto& n : r.norms) {
        lq[tag(n.q)] = json_real(n.value);
        lq_detail[tag(n.q)] = {{"integral", json_real(n.integral)},
                               {"tail", json_real(n.tail)},
                               {"below_guaranteed_range", n.below_guaranteed_range}};
      }
      json j = {{"seed", {{"alpha", json_real(h.seed.alpha)}, {"beta", json_real(h.seed.beta)}}},
                {"c_seed", json_real(h.c_seed)},
                {"converged_plus", h.converged_plus},
                {"converged_minus", h.converged_minus},
                {"F_limit_plus", json_real(h.f_limit_plus)},
                {"F_limit_minus", json_real(h.f_limit_minus)},
                {"gaussian_slope", json_real(slope)},
                {"A_inf", json_real(a_inf)},
                {"lq", lq},
                {"p", json_real(P.p)},
                {"eta_max", json_real(ctx.common.eta_max)},
                {"max_abs_x", json_real(h.max_abs_x)},
                {"containment_excess", json_real(h.containment_excess)},
                {"monotone_violation",
                 {{"plus", json_real(r.mono_plus.max_violation)}, {"minus", json_real(r.mono_minus.max_violation)}}},
                {"decay_fit",
                 r.fit ? json{{"log_correction", json_real(r.fit->log_correction)},
                              {"window", {json_real(r.fit->window_lo), json_real(r.fit->window_hi)}},
                              {"points", r.fit->points},
                              {"residual_rms", json_real(r.fit->residual_rms)},
                              {"algebraic_ratio", json_real(r.fit->algebraic_ratio)}}
                       : json(nullptr)},
                {"lq_detail", lq_detail}};
      char name[64];
      std::snprintf(name, sizeof name, "homoclinic_%03zu", i);
      ctx.add(std::string(name) + ".json", dump(j));
      sw.row({static_cast<double>(i), h.seed.alpha, h.seed.beta, h.c_seed, h.converged_plus ? 1.0 : 0.0,
              h.converged_minus ? 1.0 : 0.0, h.f_limit_plus, h.f_limit_minus, slope, a_inf, h.max_abs_x,
              h.containment_excess});
      if (trajectories) {
        std::ostringstream f, b;
        h.forward.write_csv(f);
        h.backward.write_csv(b);
        ctx.add(std::string(name) + "_forward.csv", f.str());
        ctx.add(std::string(name) + "_backward.csv", b.str());
      }
      SvgSeries s;
      for (auto it = h.backward.samples.rbegin(); it != h.backward.samples.rend(); ++it) {
        s.xs.push_back(it->eta);
        s.ys.push_back(it->x);
      }
      for (const auto& smp : h.forward.samples) {
        s.xs.push_back(smp.eta);
        s.ys.push_back(smp.x);
      }
      plot.series.push_back(std::move(s));
    }
    ctx.add("homoclinic_summary.csv", summary.str());
    ctx.add("homoclinic.svg", plot.render());
    ctx.log << "homoclinic: " << reports.size() << " seeds, " << converged << " converged in both directions\n";
  }
};

class DecayFitCmd : public Command {
 public:
  double alpha = 0.1;
  double beta = 0.0;
  double eta_lo = 3.0;
  double eta_hi = 12.0;
  double epsilon = 0.1;
  double rel_tol = 1e-11;
  double abs_tol = 1e-20;

  void attach(CLI::App* app) {
    app->add_option("--alpha", alpha, "w(0)");
    app->add_option("--beta", beta, "w'(0)");
    app->add_option("--eta-lo", eta_lo, "fit window start");
    app->add_option("--eta-hi", eta_hi, "fit window end");
    app->add_option("--epsilon", epsilon, "slack in the algebraic exponent");
    app->add_option("--rel-tol", rel_tol, "integrator relative tolerance");
    app->add_option("--abs-tol", abs_tol, "integrator absolute tolerance");
  }

  void validate(const Common& c) override {
    const Params P = derived_constants(single_p(c));
    integrator_config(c, rel_tol, abs_tol);
    validate_seed(P, {alpha, beta});
    if (!(eta_lo >= 0.0 && eta_lo < eta_hi)) throw ValidationError("fit window needs 0 <= eta-lo < eta-hi");
    if (eta_hi > c.eta_max) throw ValidationError("--eta-hi exceeds --eta-max");
    check_positive(epsilon, "--epsilon");
  }

  void run(Context& ctx) override {
    const Params P = derived_constants(ctx.common.p.front());
    const IntegratorConfig ic = integrator_config(ctx.common, rel_tol, abs_tol);
    const Trajectory tr = integrate(P, {0.0, Vec2(alpha, beta)}, Direction::forward, ic);
    if (tr.status != IntegrationStatus::horizon_reached) {
      throw NumericalError(std::string("integration stopped: ") + to_string(tr.status));
    }
    DecayFitOptions opt;
    opt.eta_lo = eta_lo;
    opt.eta_hi = eta_hi;
    opt.epsilon = epsilon;
    const auto env = extract_envelope(tr, eta_lo);
    DecayFit fit = fit_decay(env, P, opt);
    fit.algebraic_ratio = std::abs(tr.eta_end()) >= opt.ratio_eta_far ? algebraic_ratio(tr, P, opt)
                                                                       : std::numeric_limits<double>::quiet_NaN();
    const double k = 1.0 + 2.0 / (1.0 - P.p);
    auto model = [&](double eta) {
      return fit.a_inf * std::exp(-fit.gaussian_slope * eta * eta / 4.0 - fit.log_correction * k * std::log(eta));
    };

    std::ostringstream csv;
    CsvWriter w(csv, {"eta", "amplitude", "fitted"});
    SvgSeries pts, line;
    pts.markers = true;
    line.stroke = "#d62728";
    for (const auto& e : env) {
      if (e.eta > eta_hi) break;
      w.row({e.eta, e.amplitude, model(e.eta)});
      pts.xs.push_back(e.eta);
      pts.ys.push_back(std::log10(e.amplitude));
    }
    for (int i = 0; i <= 200; ++i) {
      const double eta = fit.window_lo + (fit.window_hi - fit.window_lo) * i / 200.0;
      line.xs.push_back(eta);
      line.ys.push_back(std::log10(model(eta)));
    }
    SvgPlot plot{"Envelope of |w| and least-squares fit, p=" + tag(P.p), "eta", "log10 amplitude", {pts, line}};

    json j = {{"p", json_real(P.p)},
              {"seed", {{"alpha", json_real(alpha)}, {"beta", json_real(beta)}}},
              {"window", {json_real(fit.window_lo), json_real(fit.window_hi)}},
              {"points", fit.points},
              {"gaussian_slope", json_real(fit.gaussian_slope)},
              {"log_correction", json_real(fit.log_correction)},
              {"A_inf", json_real(fit.a_inf)},
              {"residual_rms", json_real(fit.residual_rms)},
              {"residual_max", json_real(fit.residual_max)},
              {"algebraic_ratio", json_real(fit.algebraic_ratio)},
              {"ratio_eta", {json_real(opt.ratio_eta_near), json_real(opt.ratio_eta_far)}},
              {"epsilon", json_real(epsilon)}};
    ctx.add("decay_fit.json", dump(j));
    ctx.add("envelope.csv", csv.str());
    ctx.add("decay_fit.svg", plot.render());
    ctx.log << "decay-fit: slope " << format_real(fit.gaussian_slope) << " over " << fit.points
            << " extrema, r(far)/r(near) " << format_real(fit.algebraic_ratio) << "\n";
  }
};

class HeteroclinicCmd : public Command {
 public:
  std::size_t scan = 41;
  double delta = 1e-3;
  bool stop_at_tol = false;
  double undecided_radius = 0.05;
  double undecided_min_eta = 10.0;

  void attach(CLI::App* app) {
    app->add_option("--scan", scan, "beta-scan points across the initial bracket (0 disables)");
    app->add_option("--delta", delta, "relative nudge of the analytic bracket ends");
    app->add_flag("--stop-at-tol", stop_at_tol, "stop bisecting once the width reaches --tol-beta");
    app->add_option("--undecided-radius", undecided_radius, "horizon shots this close to the saddle end bisection");
    app->add_option("--undecided-min-eta", undecided_min_eta, "minimal horizon for that rule");
  }

  void validate(const Common& c) override {
    if (c.p.empty()) throw ValidationError("no --p given");
    for (double p : c.p) derived_constants(p);
    check_positive(c.tol_beta, "--tol-beta");
    integrator_config(c, 1e-10, 1e-12);
    if (scan == 1) throw ValidationError("--scan needs 0 or at least 2 points");
    if (!(delta > 0.0 && delta < 1.0)) throw ValidationError("--delta must lie in (0, 1)");
    check_positive(undecided_radius, "--undecided-radius");
  }

  void run(Context& ctx) override {
    ShootingConfig sc;
    sc.integrator.eta_max = ctx.common.eta_max;
    sc.undecided_radius = undecided_radius;
    sc.undecided_min_eta = undecided_min_eta;
    BisectionOptions bo;
    bo.tol_beta = ctx.common.tol_beta;
    bo.refine_to_resolution = !stop_at_tol;

    const auto& ps = ctx.common.p;
    struct Run {
      HeteroclinicResult result;
      std::vector<ScanPoint> scan;
    };
    std::vector<Run> runs(ps.size());
    parallel_for(ps.size(), ctx.common.jobs, [&](std::size_t i) {
      const Params P = derived_constants(ps[i]);
      const Bracket br = initial_bracket(P, sc, delta);
      runs[i].result = bisect_beta(P, br, bo, sc);
      if (scan > 0) runs[i].scan = beta_scan(P, br.beta_lo, br.beta_hi, scan, sc);
    });

    SvgPlot plot{"Front profiles w(eta)", "eta", "w", {}};
    for (std::size_t i = 0; i < runs.size(); ++i) {
      const HeteroclinicResult& r = runs[i].result;
      const std::string t = tag(ps[i]);
      const Trajectory ext = extend_by_reflection(r);
      std::ostringstream tcsv;
      ext.write_csv(tcsv);
      ctx.add("front_p" + t + ".csv", tcsv.str());

      int transitions = 0;
      if (!runs[i].scan.empty()) {
        std::ostringstream scsv;
        CsvWriter w(scsv, {"beta", "outcome", "eta_beta"});
        const char* last = nullptr;
        for (const auto& s : runs[i].scan) {
          w.row_cells({format_real(s.beta), s.outcome.name(), format_real(s.outcome.eta_exit())});
          if (last && std::string(last) != s.outcome.name()) ++transitions;
          last = s.outcome.name();
        }
        ctx.add("scan_p" + t + ".csv", scsv.str());
      }
      const double eta_check = std::min(10.0, r.trajectory.eta_end());
      const Vec2 end = r.trajectory.at(eta_check);
      json j = {{"p", json_real(ps[i])},
                {"beta_lo", json_real(r.initial.beta_lo)},
                {"beta_hi", json_real(r.initial.beta_hi)},
                {"beta_star", json_real(r.beta_star)},
                {"interval_width", json_real(r.interval_width)},
                {"iterations", r.iterations},
                {"tail", {{"A_inf", json_real(r.tail.a_inf)}, {"slope", json_real(r.tail.gaussian_slope)}}},
                {"accepted_undecided", r.accepted_undecided},
                {"tail_window", {json_real(r.tail.window_lo), json_real(r.tail.window_hi)}},
                {"tail_window_shrunk", r.tail.window_shrunk},
                {"saddle_distance", {{"eta", json_real(eta_check)},
                                     {"distance", json_real(std::hypot(end.x() - r.params.x_eq, end.y()))}}},
                {"scan_points", runs[i].scan.size()},
                {"scan_transitions", transitions}};
      ctx.add("heteroclinic_p" + t + ".json", dump(j));
      SvgSeries s;
      for (const auto& smp : ext.samples) {
        s.xs.push_back(smp.eta);
        s.ys.push_back(smp.x);
      }
      plot.series.push_back(std::move(s));
      ctx.log << "heteroclinic p=" << t << ": beta* = " << format_real(r.beta_star) << " after " << r.iterations
              << " halvings\n";
    }
    ctx.add("heteroclinic.svg", plot.render());
  }
};

class PeriodicCmd : public Command {
 public:
  double amplitude = 1.0;
  double periods = 3.0;
  bool skip_control = false;

  void attach(CLI::App* app) {
    app->add_option("--amplitude", amplitude, "W(0)");
    app->add_option("--periods", periods, "periods integrated in each direction");
    app->add_flag("--skip-control", skip_control, "omit the p=1 control row");
  }

  std::vector<double> ps;

  void validate(const Common& c) override {
    ps = c.p_given ? c.p : std::vector<double>{0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9};
    for (double p : ps) {
      if (!(p > 0.0 && p <= 1.0)) throw ValidationError("oscillator exponent must lie in (0, 1]");
    }
    std::sort(ps.begin(), ps.end());
    ps.erase(std::unique(ps.begin(), ps.end()), ps.end());
    if (!skip_control && ps.back() != 1.0) ps.push_back(1.0);
    check_positive(amplitude, "--amplitude");
    if (!(periods >= 1.0)) throw ValidationError("--periods must be at least 1");
  }

  void run(Context& ctx) override {
    OscillatorConfig oc;
    oc.periods = periods;
    struct Row {
      PeriodicOrbit orbit;
      double quadrature = 0.0;
      SymmetryReport symmetry;
    };
    std::vector<Row> rows(ps.size());
    parallel_for(ps.size(), ctx.common.jobs, [&](std::size_t i) {
      rows[i].orbit = solve_w(ps[i], oc, amplitude);
      rows[i].quadrature = period_t(ps[i]);
      rows[i].symmetry = check_symmetry(rows[i].orbit);
    });

    std::ostringstream table, orbits;
    CsvWriter tw(table, {"p", "T_quadrature", "T_predicted", "T_integrated", "rel_error", "max_energy_deviation",
                         "even_error", "half_period_error", "control"});
    CsvWriter ow(orbits, {"p", "zeta", "W", "Wprime"});
    json rows_json = json::array();
    SvgPlot plot{"Phase paths of W'' + W|W|^(p-1) = 0", "W", "W'", {}};
    std::vector<double> sub_unit;
    for (std::size_t i = 0; i < rows.size(); ++i) {
      const Row& r = rows[i];
      const double p = ps[i];
      const double predicted = std::pow(amplitude, 0.5 * (1.0 - p)) * r.quadrature;
      const double rel = std::abs(r.orbit.period_integrated - predicted) / predicted;
      tw.row({p, r.quadrature, predicted, r.orbit.period_integrated, rel, r.orbit.max_energy_deviation,
              r.symmetry.even_error, r.symmetry.half_period_error, r.orbit.control_case ? 1.0 : 0.0});
      rows_json.push_back({{"p", json_real(p)},
                           {"T_quadrature", json_real(r.quadrature)},
                           {"T_integrated", json_real(r.orbit.period_integrated)},
                           {"rel_error", json_real(rel)},
                           {"max_energy_deviation", json_real(r.orbit.max_energy_deviation)},
                           {"symmetry_ok", r.symmetry.ok},
                           {"control", r.orbit.control_case}});
      SvgSeries s;
      for (const auto& smp : r.orbit.samples) {
        if (smp.s < 0.0 || smp.s > r.orbit.period_integrated) continue;
        ow.row({p, smp.s, smp.z.x(), smp.z.y()});
        s.xs.push_back(smp.z.x());
        s.ys.push_back(smp.z.y());
      }
      if (p < 1.0) {
        plot.series.push_back(std::move(s));
        sub_unit.push_back(p);
      }
    }

    json nesting = nullptr;
    if (amplitude == 1.0 && sub_unit.size() >= 2) {
      const PhasePortrait pp = emit_phase_portrait(sub_unit, oc);
      json m = json::object();
      for (std::size_t k = 0; k < pp.ps.size(); ++k) m[tag(pp.ps[k])] = json_real(pp.max_abs_wprime[k]);
      nesting = {{"ok", pp.nesting_ok}, {"margin", json_real(pp.nesting_margin)}, {"max_abs_wprime", m}};
    }
    json j = {{"amplitude", json_real(amplitude)}, {"periods", json_real(periods)}, {"rows", rows_json},
              {"nesting", nesting}};
    ctx.add("period_table.csv", table.str());
    ctx.add("orbits.csv", orbits.str());
    ctx.add("phase_portrait.svg", plot.render());
    ctx.add("periodic.json", dump(j));
    ctx.log << "periodic: " << rows.size() << " rows\n";
  }
};

class PdeVerifyCmd : public Command {
 public:
  std::vector<std::string> kinds{"homogeneous", "homoclinic", "front"};
  double alpha = 0.1;
  double beta = 0.0;
  std::size_t nx = 1025;
  double half_width = 0.0;
  double residual_half_width = 16.0;
  std::size_t residual_nx = 1025;
  int residual_levels = 3;
  double t0 = 1.0;
  double t1 = 2.0;
  double cfl = 0.4;
  double rel_tol = 1e-11;
  double abs_tol = 1e-20;

  void attach(CLI::App* app) {
    app->add_option("--kind", kinds, "profiles to verify")
        ->delimiter(',')
        ->check(CLI::IsMember({"homogeneous", "homoclinic", "front"}));
    app->add_option("--alpha", alpha, "homoclinic w(0)");
    app->add_option("--beta", beta, "homoclinic w'(0)");
    app->add_option("--nx", nx, "evolution grid nodes (odd)");
    app->add_option("--half-width", half_width, "evolution half width L (0: 12 sqrt(t1))");
    app->add_option("--residual-half-width", residual_half_width, "residual grid half width per sqrt(t0)");
    app->add_option("--residual-nx", residual_nx, "coarsest residual grid nodes (odd)");
    app->add_option("--residual-levels", residual_levels, "number of residual grids, each halving dx");
    app->add_option("--t0", t0, "seed time");
    app->add_option("--t1", t1, "final time");
    app->add_option("--cfl", cfl, "dt / dx^2");
    app->add_option("--rel-tol", rel_tol, "profile integrator relative tolerance");
    app->add_option("--abs-tol", abs_tol, "profile integrator absolute tolerance");
  }

  Grid evolution_grid() const {
    Grid g;
    g.half_width = half_width > 0.0 ? half_width : 12.0 * std::sqrt(t1);
    g.nx = nx;
    g.t0 = t0;
    g.t1 = t1;
    g.cfl = cfl;
    return g;
  }

  Grid residual_grid() const {
    Grid g;
    g.half_width = residual_half_width * std::sqrt(t0);
    g.nx = residual_nx;
    g.t0 = t0;
    g.t1 = t1;
    g.cfl = cfl;
    return g;
  }

  void validate(const Common& c) override {
    const Params P = derived_constants(single_p(c));
    integrator_config(c, rel_tol, abs_tol);
    if (kinds.empty()) throw ValidationError("no --kind given");
    evolution_grid().validate();
    residual_grid().validate();
    if (cfl > 0.5) throw ValidationError("cfl above 0.5 violates the explicit stability limit");
    if (residual_levels < 1 || residual_levels > 4) throw ValidationError("--residual-levels must lie in [1, 4]");
    const bool localized = std::find(kinds.begin(), kinds.end(), "homoclinic") != kinds.end();
    if (localized) {
      validate_seed(P, {alpha, beta});
      if (evolution_grid().half_width < 12.0 * std::sqrt(t1)) {
        throw ValidationError("localized runs need --half-width >= 12 sqrt(t1)");
      }
    }
    check_positive(c.tol_beta, "--tol-beta");
  }

  void run(Context& ctx) override {
    const Params P = derived_constants(ctx.common.p.front());
    struct Run {
      std::unique_ptr<SelfSimilarProfile> profile;
      json source;
      std::vector<ResidualReport> residuals;
      Field initial, evolved;
      EvolveStats stats;
      ErrorNorms norms;
    };
    std::vector<Run> runs(kinds.size());
    const Grid eg = evolution_grid();
    parallel_for(kinds.size(), ctx.common.jobs, [&](std::size_t i) {
      Run& r = runs[i];
      const std::string& k = kinds[i];
      if (k == "homogeneous") {
        r.profile = std::make_unique<SelfSimilarProfile>(SelfSimilarProfile::homogeneous(P));
        r.source = json::object();
      } else if (k == "homoclinic") {
        HomoclinicConfig hc;
        hc.integrator = integrator_config(ctx.common, rel_tol, abs_tol);
        const HomoclinicResult h = run_homoclinic(P, {alpha, beta}, hc);
        r.profile = std::make_unique<SelfSimilarProfile>(SelfSimilarProfile::from_homoclinic(P, h));
        r.source = {{"alpha", json_real(alpha)}, {"beta", json_real(beta)}};
      } else {
        ShootingConfig sc;
        sc.integrator.eta_max = ctx.common.eta_max;
        BisectionOptions bo;
        bo.tol_beta = ctx.common.tol_beta;
        const HeteroclinicResult h = bisect_beta(P, initial_bracket(P, sc), bo, sc);
        r.profile = std::make_unique<SelfSimilarProfile>(SelfSimilarProfile::from_front(P, h));
        r.source = {{"beta_star", json_real(h.beta_star)}};
      }
      Grid g = residual_grid();
      for (int level = 0; level < residual_levels; ++level) {
        r.residuals.push_back(pde_residual(*r.profile, g));
        g = g.refined();
      }
      const BoundaryCondition bc{k == "homoclinic" ? BoundaryKind::zero : BoundaryKind::self_similar,
                                 r.profile.get()};
      r.initial = sample_field(*r.profile, eg, t0);
      r.evolved = evolve(r.initial, eg, bc, P, &r.stats);
      r.norms = compare_self_similar(r.evolved, *r.profile, eg);
    });

    std::ostringstream conv;
    CsvWriter cw(conv, {"kind", "nx", "dx", "max_residual", "l2_residual", "max_residual_smooth", "ux_error",
                        "ut_error", "ratio_max", "ratio_l2"});
    json runs_json = json::array();
    const double nan = std::numeric_limits<double>::quiet_NaN();
    for (std::size_t i = 0; i < runs.size(); ++i) {
      const Run& r = runs[i];
      json res = json::array();
      for (std::size_t l = 0; l < r.residuals.size(); ++l) {
        const ResidualReport& a = r.residuals[l];
        const double rm = l ? r.residuals[l - 1].max_abs_residual / a.max_abs_residual : nan;
        const double rl = l ? r.residuals[l - 1].l2_residual / a.l2_residual : nan;
        const auto n = static_cast<std::size_t>(std::llround(2.0 * residual_grid().half_width / a.dx)) + 1;
        cw.row_cells({kinds[i], std::to_string(n), format_real(a.dx), format_real(a.max_abs_residual),
                      format_real(a.l2_residual), format_real(a.max_abs_residual_smooth), format_real(a.max_ux_error),
                      format_real(a.max_ut_error), format_real(rm), format_real(rl)});
        res.push_back({{"nx", n},
                       {"dx", json_real(a.dx)},
                       {"max_residual", json_real(a.max_abs_residual)},
                       {"l2_residual", json_real(a.l2_residual)},
                       {"ratio_max", json_real(rm)},
                       {"ratio_l2", json_real(rl)}});
      }
      runs_json.push_back({{"kind", kinds[i]},
                           {"source", r.source},
                           {"residual", res},
                           {"evolution",
                            {{"sup", json_real(r.norms.sup)},
                             {"l2", json_real(r.norms.l2)},
                             {"rel_sup", json_real(r.norms.rel_sup)},
                             {"steps", r.stats.steps},
                             {"dt", json_real(r.stats.dt)},
                             {"max_order_violation", json_real(r.stats.max_order_violation)},
                             {"min_sign_changes", r.stats.min_sign_changes}}}});

      std::ostringstream field;
      CsvWriter fw(field, {"x", "u_t0", "u_t1", "u_exact_t1"});
      SvgSeries ev, ex;
      ex.stroke = "#d62728";
      for (std::size_t n = 0; n < eg.nx; ++n) {
        const auto e = static_cast<Eigen::Index>(n);
        const double exact = eval_self_similar(*r.profile, eg.x(n), r.evolved.time);
        fw.row({eg.x(n), r.initial.values(e), r.evolved.values(e), exact});
        ev.xs.push_back(eg.x(n));
        ev.ys.push_back(r.evolved.values(e));
        ex.xs.push_back(eg.x(n));
        ex.ys.push_back(exact);
      }
      ctx.add("field_" + kinds[i] + ".csv", field.str());
      SvgPlot plot{"Evolved (blue) and self-similar (red) field at t=" + tag(t1) + ", " + kinds[i], "x", "u",
                   {ev, ex}};
      ctx.add("field_" + kinds[i] + ".svg", plot.render());
      ctx.log << "pde-verify " << kinds[i] << ": rel sup error " << format_real(r.norms.rel_sup) << "\n";
    }
    json j = {{"p", json_real(P.p)},
              {"grid",
               {{"half_width", json_real(eg.half_width)},
                {"nx", eg.nx},
                {"dx", json_real(eg.dx())},
                {"t0", json_real(t0)},
                {"t1", json_real(t1)},
                {"cfl", json_real(cfl)}}},
              {"residual_grid", {{"half_width", json_real(residual_grid().half_width)}, {"nx", residual_nx}}},
              {"runs", runs_json}};
    ctx.add("pde_convergence.csv", conv.str());
    ctx.add("pde_verify.json", dump(j));
  }
};

// ---------------------------------------------------------------------------

void add_common(CLI::App* app, Common& c) {
  app->add_option("--p", c.p, "exponent p; comma-separated where a grid is accepted")->delimiter(',');
  app->add_option("--out", c.out, "output directory");
  app->add_option("--config", c.config, "INI file whose [command] section supplies defaults");
  app->add_option("--tol-beta", c.tol_beta, "bisection width threshold");
  app->add_option("--eta-max", c.eta_max, "integration horizon in |eta|");
  app->add_option("--seed", c.seed, "random seed for seed sampling");
  app->add_option("--jobs", c.jobs, "worker threads (0: hardware, at most 8)");
}

const std::set<std::string> unhashed{"--out", "--config", "--jobs", "--help"};

std::string canonical_config(const std::string& command, CLI::App* sub) {
  std::vector<std::string> lines;
  for (const CLI::Option* opt : sub->get_options()) {
    const std::string name = opt->get_name(false, false);
    if (name.rfind("--", 0) != 0 || unhashed.count(name)) continue;
    std::string value;
    if (opt->get_expected_max() == 0) {
      value = opt->count() > 0 ? "true" : "false";
    } else if (opt->count() > 0) {
      for (const auto& r : opt->results()) value += (value.empty() ? "" : ",") + r;
    } else {
      value = opt->get_default_str();
      if (value.size() >= 2 && value.front() == '[' && value.back() == ']') value = value.substr(1, value.size() - 2);
      if (value == "{}") value.clear();
    }
    lines.push_back(name.substr(2) + " = " + value);
  }
  std::sort(lines.begin(), lines.end());
  std::string out = "[" + command + "]\n";
  for (const auto& l : lines) out += l + "\n";
  return out;
}

bool truthy(const std::string& v, const std::string& key) {
  std::string s = v;
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char ch) { return std::tolower(ch); });
  if (s == "true" || s == "1" || s == "yes" || s == "on") return true;
  if (s == "false" || s == "0" || s == "no" || s == "off") return false;
  throw ValidationError("config key '" + key + "' expects a boolean");
}

// Config entries become arguments placed before the command-line ones, and
// only for options the command line does not set itself.
std::vector<std::string> config_arguments(CLI::App* sub, const std::string& command,
                                          const std::vector<std::string>& user_args) {
  std::string path;
  std::set<std::string> given;
  for (std::size_t i = 0; i < user_args.size(); ++i) {
    const std::string& a = user_args[i];
    if (a.rfind("--", 0) != 0) continue;
    const auto eq = a.find('=');
    const std::string name = a.substr(0, eq);
    given.insert(name);
    if (name == "--config") {
      if (eq != std::string::npos) {
        path = a.substr(eq + 1);
      } else if (i + 1 < user_args.size()) {
        path = user_args[i + 1];
      }
    }
  }
  std::vector<std::string> out;
  if (path.empty()) return out;
  for (const auto& [raw_key, value] : read_ini_section(path, command)) {
    std::string key = raw_key;
    std::replace(key.begin(), key.end(), '_', '-');
    const std::string name = "--" + key;
    if (name == "--config") throw ValidationError("config files cannot include other config files");
    const CLI::Option* opt = sub->get_option_no_throw(name);
    if (opt == nullptr) throw ValidationError("unknown config key '" + raw_key + "' in [" + command + "]");
    if (given.count(name)) continue;
    if (opt->get_expected_max() == 0) {
      if (truthy(value, raw_key)) out.push_back(name);
      continue;
    }
    if (value.empty()) continue;
    std::istringstream words(value);
    std::string word, joined;
    while (words >> word) joined += (joined.empty() ? "" : ",") + word;
    out.push_back(name + "=" + joined);
  }
  return out;
}

void write_outputs(const Context& ctx, const std::string& command, const std::string& hash) {
  namespace fs = std::filesystem;
  const fs::path dir(ctx.common.out);
  for (const auto& f : ctx.files) write_text_file(dir / f.name, f.content);

  const fs::path mpath = dir / "manifest.json";
  std::map<std::string, json> entries;
  if (fs::exists(mpath)) {
    std::ifstream in(mpath);
    json old;
    try {
      old = json::parse(in);
    } catch (const json::exception&) {
      throw IoError("existing manifest " + mpath.string() + " is not valid JSON");
    }
    if (old.contains("entries") && old["entries"].is_array()) {
      for (const auto& e : old["entries"]) {
        if (e.contains("file") && e["file"].is_string()) entries[e["file"].get<std::string>()] = e;
      }
    }
  }
  for (const auto& f : ctx.files) {
    entries[f.name] = {{"file", f.name},
                       {"command", command},
                       {"config_hash", hash},
                       {"version", version()},
                       {"bytes", f.content.size()},
                       {"content_hash", hex64(fnv1a(f.content))}};
  }
  json m = {{"entries", json::array()}};
  for (const auto& [name, e] : entries) m["entries"].push_back(e);
  write_text_file(mpath, dump(m));
}

}  // namespace

std::map<std::string, std::string> read_ini_section(const std::string& path, const std::string& section) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read config file " + path);
  std::map<std::string, std::string> out;
  std::string line, current;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string t = trim(line);
    if (t.empty() || t[0] == '#' || t[0] == ';') continue;
    if (t.front() == '[') {
      if (t.back() != ']') throw ValidationError(path + ":" + std::to_string(lineno) + ": unterminated section");
      current = trim(t.substr(1, t.size() - 2));
      continue;
    }
    const auto eq = t.find('=');
    if (eq == std::string::npos || eq == 0) {
      throw ValidationError(path + ":" + std::to_string(lineno) + ": expected key = value");
    }
    if (current != section) continue;
    std::string value = trim(t.substr(eq + 1));
    if (value.size() >= 2 && value.front() == '"' && value.back() == '"') value = value.substr(1, value.size() - 2);
    out[trim(t.substr(0, eq))] = value;
  }
  return out;
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Self-similar solutions of u_t - u_xx = u|u|^{p-1}: phase-plane construction and checks", "sslab"};
  app.option_defaults()->always_capture_default();
  app.set_version_flag("--version", std::string(version()));
  app.require_subcommand(1);

  Common common;
  LevelsetCmd levelset;
  HomoclinicCmd homoclinic;
  HeteroclinicCmd heteroclinic;
  PeriodicCmd periodic;
  PdeVerifyCmd pde_verify;
  DecayFitCmd decay_fit;
  std::vector<std::pair<CLI::App*, Command*>> commands;
  auto add = [&](const char* name, const char* help, auto& cmd) {
    CLI::App* sub = app.add_subcommand(name, help);
    add_common(sub, common);
    cmd.attach(sub);
    commands.emplace_back(sub, &cmd);
  };
  add("levelset", "level curves of V inside the separatrix", levelset);
  add("homoclinic", "homoclinic connections from zero-values (alpha, beta)", homoclinic);
  add("heteroclinic", "front profile by shooting and bisection", heteroclinic);
  add("periodic", "period table and phase portrait of the fast oscillator", periodic);
  add("pde-verify", "PDE residual and self-similar evolution checks", pde_verify);
  add("decay-fit", "envelope decay fit of one homoclinic profile", decay_fit);

  std::vector<std::string> args(argv + 1, argv + argc);
  try {
    if (!args.empty() && args.front().rfind("-", 0) != 0) {
      for (auto& [sub, cmd] : commands) {
        if (sub->get_name() != args.front()) continue;
        const std::vector<std::string> rest(args.begin() + 1, args.end());
        std::vector<std::string> extra = config_arguments(sub, args.front(), rest);
        args.insert(args.begin() + 1, extra.begin(), extra.end());
      }
    }
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? ok : validation;
  } catch (const ValidationError& e) {
    err << "error: " << e.what() << "\n";
    return validation;
  } catch (const IoError& e) {
    err << "error: " << e.what() << "\n";
    return io;
  }

  CLI::App* sub = nullptr;
  Command* cmd = nullptr;
  for (auto& [s, c] : commands) {
    if (s->parsed()) sub = s, cmd = c;
  }
  if (sub == nullptr) return validation;
  common.p_given = sub->get_option("--p")->count() > 0;
  const std::string name = sub->get_name();

  try {
    if (common.out.empty()) throw ValidationError("--out must not be empty");
    if (common.jobs > 256) throw ValidationError("--jobs must be at most 256");
    cmd->validate(common);
    const std::string resolved = canonical_config(name, sub);
    const std::string hash = hex64(fnv1a(resolved));
    Context ctx{common, out, {}};
    cmd->run(ctx);
    ctx.add("run_" + name + ".ini", resolved);
    write_outputs(ctx, name, hash);
    out << "wrote " << ctx.files.size() << " files to " << common.out << " (config " << hash << ")\n";
    return ok;
  } catch (const ValidationError& e) {
    err << "validation error: " << e.what() << "\n";
    return validation;
  } catch (const IoError& e) {
    err << "i/o error: " << e.what() << "\n";
    return io;
  } catch (const std::filesystem::filesystem_error& e) {
    err << "i/o error: " << e.what() << "\n";
    return io;
  } catch (const NumericalError& e) {
    err << "numerical failure: " << e.what() << "\n";
    return numerical;
  } catch (const std::exception& e) {
    err << "numerical failure: " << e.what() << "\n";
    return numerical;
  }
}

}  // namespace sslab::cli
