#include "sslab/pde.hpp"

#include <algorithm>
#include <cmath>

namespace sslab {

const char* to_string(ProfileKind k) {
  switch (k) {
    case ProfileKind::homoclinic: return "homoclinic";
    case ProfileKind::front: return "front";
    case ProfileKind::homogeneous: return "homogeneous";
  }
  return "?";
}

SelfSimilarProfile::SelfSimilarProfile(ProfileKind kind, const Params& params, std::vector<double> eta,
                                       std::vector<double> w, std::vector<double> wp)
    : kind_(kind), params_(params), eta_(std::move(eta)), w_(std::move(w)), wp_(std::move(wp)) {
  if (eta_.size() != w_.size() || eta_.size() != wp_.size()) throw ValidationError("profile arrays differ in size");
  for (std::size_t i = 1; i < eta_.size(); ++i) {
    if (!(eta_[i] > eta_[i - 1])) throw ValidationError("profile nodes must increase strictly");
  }
  wpp_.resize(eta_.size());
  for (std::size_t i = 0; i < eta_.size(); ++i) {
    wpp_[i] = reaction_h(params_.p, w_[i]) - 0.5 * eta_[i] * wp_[i];
  }
}

SelfSimilarProfile SelfSimilarProfile::from_homoclinic(const Params& params, const HomoclinicResult& result) {
  std::vector<double> eta, w, wp;
  for (auto it = result.backward.samples.rbegin(); it != result.backward.samples.rend(); ++it) {
    if (it->eta >= 0.0) continue;
    eta.push_back(it->eta);
    w.push_back(it->x);
    wp.push_back(it->y);
  }
  for (const auto& s : result.forward.samples) {
    eta.push_back(s.eta);
    w.push_back(s.x);
    wp.push_back(s.y);
  }
  return SelfSimilarProfile(ProfileKind::homoclinic, params, std::move(eta), std::move(w), std::move(wp));
}

SelfSimilarProfile SelfSimilarProfile::from_front(const Params& params, const HeteroclinicResult& result) {
  const Trajectory full = extend_by_reflection(result);
  std::vector<double> eta, w, wp;
  for (const auto& s : full.samples) {
    eta.push_back(s.eta);
    w.push_back(s.x);
    wp.push_back(s.y);
  }
  SelfSimilarProfile out(ProfileKind::front, params, std::move(eta), std::move(w), std::move(wp));
  out.set_tail(result.tail);
  return out;
}

SelfSimilarProfile SelfSimilarProfile::homogeneous(const Params& params) {
  return SelfSimilarProfile(ProfileKind::homogeneous, params, {}, {}, {});
}

Vec2 SelfSimilarProfile::eval(double eta) const {
  if (kind_ == ProfileKind::homogeneous) return {params_.x_eq, 0.0};
  if (eta < eta_.front() || eta > eta_.back()) {
    if (kind_ == ProfileKind::homoclinic) return {0.0, 0.0};
    const double a = std::abs(eta);
    const double s = tail_.gaussian_slope, c = tail_.cubic_correction;
    const double r = tail_.a_inf * std::exp(-s * a * a / 4.0 - 3.0 * c * std::log(a));
    const double dr = r * (-s * a / 2.0 - 3.0 * c / a);
    const double sg = eta < 0.0 ? -1.0 : 1.0;
    return {sg * (params_.x_eq - r), -dr};
  }
  auto it = std::upper_bound(eta_.begin(), eta_.end(), eta);
  std::size_t j = static_cast<std::size_t>(it - eta_.begin());
  if (j == 0) j = 1;
  if (j >= eta_.size()) j = eta_.size() - 1;
  const std::size_t i = j - 1;
  const double h = eta_[j] - eta_[i];
  const double t = (eta - eta_[i]) / h;
  const double t2 = t * t, t3 = t2 * t, t4 = t3 * t, t5 = t4 * t;
  const double h0 = 1 - 10 * t3 + 15 * t4 - 6 * t5;
  const double h1 = t - 6 * t3 + 8 * t4 - 3 * t5;
  const double h2 = 0.5 * (t2 - 3 * t3 + 3 * t4 - t5);
  const double h3 = 10 * t3 - 15 * t4 + 6 * t5;
  const double h4 = -4 * t3 + 7 * t4 - 3 * t5;
  const double h5 = 0.5 * (t3 - 2 * t4 + t5);
  const double d0 = -30 * t2 + 60 * t3 - 30 * t4;
  const double d1 = 1 - 18 * t2 + 32 * t3 - 15 * t4;
  const double d2 = 0.5 * (2 * t - 9 * t2 + 12 * t3 - 5 * t4);
  const double d3 = 30 * t2 - 60 * t3 + 30 * t4;
  const double d4 = -12 * t2 + 28 * t3 - 15 * t4;
  const double d5 = 0.5 * (3 * t2 - 8 * t3 + 5 * t4);
  const double w = h0 * w_[i] + h1 * h * wp_[i] + h2 * h * h * wpp_[i] + h3 * w_[j] + h4 * h * wp_[j] +
                   h5 * h * h * wpp_[j];
  const double wp =
      (d0 * w_[i] + d1 * h * wp_[i] + d2 * h * h * wpp_[i] + d3 * w_[j] + d4 * h * wp_[j] + d5 * h * h * wpp_[j]) /
      h;
  return {w, wp};
}

double eval_self_similar(const SelfSimilarProfile& profile, double x, double t, double x0, double tau) {
  if (t <= tau) return 0.0;
  const double s = t - tau;
  const double p = profile.params().p;
  return std::pow(s, 1.0 / (1.0 - p)) * profile.eval((x - x0) / std::sqrt(s)).x();
}

double self_similar_ux(const SelfSimilarProfile& profile, double x, double t) {
  const double p = profile.params().p;
  return std::pow(t, 1.0 / (1.0 - p) - 0.5) * profile.eval(x / std::sqrt(t)).y();
}

double self_similar_ut(const SelfSimilarProfile& profile, double x, double t) {
  const double p = profile.params().p;
  const double eta = x / std::sqrt(t);
  const Vec2 w = profile.eval(eta);
  return std::pow(t, 1.0 / (1.0 - p) - 1.0) / (1.0 - p) * (w.x() - 0.5 * (1.0 - p) * eta * w.y());
}

double maximal_solution(const Params& params, double t) {
  return std::pow((1.0 - params.p) * t, 1.0 / (1.0 - params.p));
}

void Grid::validate() const {
  if (!(half_width > 0.0)) throw ValidationError("grid half width must be positive");
  if (nx < 64 || nx % 2 == 0) throw ValidationError("grid needs an odd node count of at least 64");
  if (!(t0 > 0.0 && t0 < t1)) throw ValidationError("grid needs 0 < t0 < t1");
  if (!(cfl > 0.0)) throw ValidationError("cfl must be positive");
}

Eigen::ArrayXd Grid::nodes() const {
  Eigen::ArrayXd x(static_cast<Eigen::Index>(nx));
  for (std::size_t i = 0; i < nx; ++i) x(static_cast<Eigen::Index>(i)) = this->x(i);
  return x;
}

Grid Grid::refined() const {
  Grid g = *this;
  g.nx = 2 * (nx - 1) + 1;
  return g;
}

Field sample_field(const SelfSimilarProfile& profile, const Grid& grid, double t) {
  Field f;
  f.time = t;
  f.values.resize(static_cast<Eigen::Index>(grid.nx));
  for (std::size_t i = 0; i < grid.nx; ++i) {
    f.values(static_cast<Eigen::Index>(i)) = eval_self_similar(profile, grid.x(i), t);
  }
  return f;
}

namespace {

Eigen::ArrayXd reaction(const Eigen::ArrayXd& u, double p) { return u.sign() * u.abs().pow(p); }

std::size_t sign_changes(const Eigen::ArrayXd& u) {
  std::size_t n = 0;
  double last = 0.0;
  for (Eigen::Index i = 0; i < u.size(); ++i) {
    if (u(i) == 0.0) continue;
    if (last != 0.0 && (u(i) > 0.0) != (last > 0.0)) ++n;
    last = u(i);
  }
  return n;
}

}  // namespace

ResidualReport pde_residual(const SelfSimilarProfile& profile, const Grid& grid) {
  grid.validate();
  ResidualReport rep;
  const double dx = grid.dx();
  const double dt = dx;
  const double t0 = grid.t0;
  if (!(t0 - dt > 0.0)) throw ValidationError("residual time step reaches t = 0");
  const double p = profile.params().p;
  const Field now = sample_field(profile, grid, t0);
  const Field before = sample_field(profile, grid, t0 - dt);
  const Field after = sample_field(profile, grid, t0 + dt);
  const Eigen::ArrayXd& u = now.values;
  const Eigen::Index n = u.size();

  std::vector<bool> near_sign_change(static_cast<std::size_t>(n), false);
  for (Eigen::Index i = 0; i + 1 < n; ++i) {
    if ((u(i) > 0.0 && u(i + 1) <= 0.0) || (u(i) < 0.0 && u(i + 1) >= 0.0) || u(i) == 0.0) {
      for (Eigen::Index k = std::max<Eigen::Index>(0, i - 2); k <= std::min(n - 1, i + 3); ++k) {
        near_sign_change[static_cast<std::size_t>(k)] = true;
      }
    }
  }

  rep.dx = dx;
  double sq = 0.0;
  for (Eigen::Index i = 1; i + 1 < n; ++i) {
    const double uxx = (u(i + 1) - 2.0 * u(i) + u(i - 1)) / (dx * dx);
    const double ut = (after.values(i) - before.values(i)) / (2.0 * dt);
    const double ux = (u(i + 1) - u(i - 1)) / (2.0 * dx);
    const double r = std::abs(ut - uxx - signed_pow(u(i), p));
    rep.max_abs_residual = std::max(rep.max_abs_residual, r);
    if (!near_sign_change[static_cast<std::size_t>(i)]) {
      rep.max_abs_residual_smooth = std::max(rep.max_abs_residual_smooth, r);
    }
    sq += r * r * dx;
    const double x = grid.x(static_cast<std::size_t>(i));
    rep.max_ux_error = std::max(rep.max_ux_error, std::abs(ux - self_similar_ux(profile, x, t0)));
    rep.max_ut_error = std::max(rep.max_ut_error, std::abs(ut - self_similar_ut(profile, x, t0)));
  }
  rep.l2_residual = std::sqrt(sq);
  return rep;
}

Field evolve(const Field& initial, const Grid& grid, const BoundaryCondition& bc, const Params& params,
             EvolveStats* stats) {
  grid.validate();
  if (grid.cfl > 0.5) throw ValidationError("cfl above 0.5 violates the explicit stability limit");
  if (initial.values.size() != static_cast<Eigen::Index>(grid.nx)) throw ValidationError("field/grid mismatch");
  if (!(initial.time > 0.0 && initial.time < grid.t1)) throw ValidationError("evolution needs 0 < t_start < t1");
  if (bc.kind == BoundaryKind::self_similar && bc.profile == nullptr) {
    throw ValidationError("self-similar boundary needs a profile");
  }
  const double dx = grid.dx();
  const double span = grid.t1 - initial.time;
  const auto steps = static_cast<std::size_t>(std::ceil(span / (grid.cfl * dx * dx)));
  const double dt = span / static_cast<double>(steps);
  const double p = params.p;
  const Eigen::Index n = initial.values.size();
  const double inv_dx2 = 1.0 / (dx * dx);

  auto boundary = [&](Eigen::ArrayXd& u, double t) {
    if (bc.kind == BoundaryKind::zero) {
      u(0) = 0.0;
      u(n - 1) = 0.0;
    } else {
      u(0) = eval_self_similar(*bc.profile, -grid.half_width, t);
      u(n - 1) = eval_self_similar(*bc.profile, grid.half_width, t);
    }
  };
  // Boundary nodes follow the exact u_t so that every RK stage stays consistent.
  auto rhs = [&](const Eigen::ArrayXd& u, double t) {
    Eigen::ArrayXd k = Eigen::ArrayXd::Zero(n);
    k.segment(1, n - 2) = (u.segment(2, n - 2) - 2.0 * u.segment(1, n - 2) + u.segment(0, n - 2)) * inv_dx2 +
                          reaction(u.segment(1, n - 2), p);
    if (bc.kind == BoundaryKind::self_similar) {
      k(0) = self_similar_ut(*bc.profile, -grid.half_width, t);
      k(n - 1) = self_similar_ut(*bc.profile, grid.half_width, t);
    }
    return k;
  };

  EvolveStats st;
  st.dt = dt;
  st.min_sign_changes = sign_changes(initial.values);
  Eigen::ArrayXd u = initial.values;
  double t = initial.time;
  for (std::size_t s = 0; s < steps; ++s) {
    const Eigen::ArrayXd k1 = rhs(u, t);
    const Eigen::ArrayXd k2 = rhs(u + 0.5 * dt * k1, t + 0.5 * dt);
    const Eigen::ArrayXd k3 = rhs(u + 0.5 * dt * k2, t + 0.5 * dt);
    const Eigen::ArrayXd k4 = rhs(u + dt * k3, t + dt);
    u += (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    t = s + 1 == steps ? grid.t1 : initial.time + static_cast<double>(s + 1) * dt;
    boundary(u, t);
    if (!u.allFinite()) throw NumericalError("evolution produced a non-finite value");
    const double bound = maximal_solution(params, t);
    st.max_order_violation = std::max(st.max_order_violation, u.abs().maxCoeff() - bound);
    st.min_sign_changes = std::min(st.min_sign_changes, sign_changes(u));
  }
  st.steps = steps;
  if (stats) *stats = st;
  return {t, u};
}

ErrorNorms compare_self_similar(const Field& evolved, const SelfSimilarProfile& profile, const Grid& grid) {
  const Field exact = sample_field(profile, grid, evolved.time);
  if (exact.values.size() != evolved.values.size()) throw ValidationError("field/grid mismatch");
  const Eigen::ArrayXd diff = evolved.values - exact.values;
  ErrorNorms e;
  e.sup = diff.abs().maxCoeff();
  e.l2 = std::sqrt(diff.square().sum() * grid.dx());
  const double scale = exact.values.abs().maxCoeff();
  e.rel_sup = scale > 0.0 ? e.sup / scale : e.sup;
  return e;
}

}  // namespace sslab
