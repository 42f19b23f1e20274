#pragma once

// Scalar kernels of the self-similar reduction of u_t - u_xx = u|u|^{p-1}.
//
// With u(x,t) = t^{1/(1-p)} w(eta), eta = x / sqrt(t), the profile obeys the
// non-autonomous planar system
//
//   x' = y
//   y' = x/(1-p) - x|x|^{p-1} - eta y / 2
//
// where x = w and y = w'. Everything here is templated on the scalar type and
// free of state.

#include <Eigen/Core>

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace sslab {

class ValidationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

template <typename Scalar>
using Vector2 = Eigen::Matrix<Scalar, 2, 1>;

/// A point (x, y) = (w, w') of the phase plane.
template <typename Scalar>
using PhasePoint = Vector2<Scalar>;

/// sign(x)|x|^e, with the value 0 at x = 0.
template <typename Scalar>
Scalar signed_pow(Scalar x, Scalar e) {
  using std::abs;
  using std::pow;
  if (x == Scalar(0)) return Scalar(0);
  const Scalar m = pow(abs(x), e);
  return x < Scalar(0) ? -m : m;
}

/// H(x) = x/(1-p) - sign(x)|x|^p. Odd, vanishes at 0 and +-x_eq.
template <typename Scalar>
Scalar reaction_h(Scalar p, Scalar x) {
  return x / (Scalar(1) - p) - signed_pow(x, p);
}

template <typename Scalar>
struct ProblemParams {
  Scalar p;
  Scalar x_eq;        // (1-p)^{1/(1-p)}, abscissa of the saddles
  Scalar c_star;      // V(+-x_eq, 0)
  Scalar lambda_min;  // argmin of H on [0, x_eq]
  Scalar m_h;         // H(lambda_min) < 0
};

using Params = ProblemParams<double>;

template <typename Scalar>
ProblemParams<Scalar> derived_constants(Scalar p) {
  using std::pow;
  if (!(p > Scalar(0) && p < Scalar(1))) {
    throw ValidationError("exponent p must lie in (0, 1), got " + std::to_string(static_cast<double>(p)));
  }
  const Scalar q = Scalar(1) - p;
  ProblemParams<Scalar> out;
  out.p = p;
  out.x_eq = pow(q, Scalar(1) / q);
  out.c_star = pow(q, Scalar(2) / q) / (Scalar(2) * (Scalar(1) + p));
  // H'(x) = 1/(1-p) - p x^{p-1} = 0
  out.lambda_min = pow(p * q, Scalar(1) / q);
  out.m_h = reaction_h(p, out.lambda_min);
  return out;
}

/// V(x, y) = y^2/2 - x^2/(2(1-p)) + |x|^{1+p}/(1+p).
template <typename Scalar>
Scalar lyapunov_v(const ProblemParams<Scalar>& params, const PhasePoint<Scalar>& pt) {
  using std::abs;
  using std::pow;
  const Scalar p = params.p;
  const Scalar x = pt.x();
  return pt.y() * pt.y() / Scalar(2) - x * x / (Scalar(2) * (Scalar(1) - p)) +
         pow(abs(x), Scalar(1) + p) / (Scalar(1) + p);
}

/// Gradient (dV/dx, dV/dy) = (-H(x), y).
template <typename Scalar>
Vector2<Scalar> lyapunov_gradient(const ProblemParams<Scalar>& params, const PhasePoint<Scalar>& pt) {
  return Vector2<Scalar>(-reaction_h(params.p, pt.x()), pt.y());
}

/// Right-hand side Q(eta, x, y) = (y, H(x) - eta y / 2).
template <typename Scalar>
Vector2<Scalar> rhs_q(const ProblemParams<Scalar>& params, Scalar eta, const PhasePoint<Scalar>& pt) {
  return Vector2<Scalar>(pt.y(), reaction_h(params.p, pt.x()) - eta * pt.y() / Scalar(2));
}

enum class Membership { inside, on, outside };

inline const char* to_string(Membership m) {
  switch (m) {
    case Membership::inside: return "inside";
    case Membership::on: return "on";
    case Membership::outside: return "outside";
  }
  return "?";
}

/// Classifies pt against the bounded level set {V <= c, |x| <= x_eq}.
template <typename Scalar>
Membership level_membership(const ProblemParams<Scalar>& params, const PhasePoint<Scalar>& pt, Scalar c,
                            Scalar tol = Scalar(1e-9)) {
  using std::abs;
  if (!(c >= Scalar(0) && c <= params.c_star)) {
    throw ValidationError("level c must lie in [0, c_star]");
  }
  if (abs(pt.x()) > params.x_eq + tol) return Membership::outside;
  const Scalar v = lyapunov_v(params, pt);
  if (abs(v - c) <= tol) return Membership::on;
  if (abs(pt.x()) > params.x_eq) return Membership::outside;
  return v < c ? Membership::inside : Membership::outside;
}

/// The x-only part of V, increasing on [0, x_eq] from 0 to c_star.
template <typename Scalar>
Scalar potential_part(const ProblemParams<Scalar>& params, Scalar x) {
  return lyapunov_v(params, PhasePoint<Scalar>(x, Scalar(0)));
}

namespace detail {

template <typename Scalar, typename F>
Scalar bisect_root(F&& f, Scalar lo, Scalar hi, Scalar tol, int max_iter = 200) {
  Scalar flo = f(lo);
  for (int i = 0; i < max_iter && hi - lo > tol; ++i) {
    const Scalar mid = (lo + hi) / Scalar(2);
    const Scalar fm = f(mid);
    if ((fm < Scalar(0)) == (flo < Scalar(0))) {
      lo = mid;
      flo = fm;
    } else {
      hi = mid;
    }
  }
  return (lo + hi) / Scalar(2);
}

}  // namespace detail

/// Samples the closed level curve V = c inside the separatrix, counterclockwise
/// starting at the right x-axis crossing; the last point repeats the first.
/// Uses vertical slices x = const and bisection in y.
template <typename Scalar>
std::vector<PhasePoint<Scalar>> level_curve_sample(const ProblemParams<Scalar>& params, Scalar c, std::size_t n) {
  using std::cos;
  using std::sqrt;
  if (!(c >= Scalar(0) && c <= params.c_star)) {
    throw ValidationError("level c must lie in [0, c_star]");
  }
  if (n < 8) throw ValidationError("level curve needs at least 8 points");
  if (c == Scalar(0)) return {PhasePoint<Scalar>(Scalar(0), Scalar(0))};

  const Scalar eps = std::numeric_limits<Scalar>::epsilon();
  Scalar x_edge = params.x_eq;
  if (c < params.c_star) {
    x_edge = detail::bisect_root<Scalar>([&](Scalar x) { return potential_part(params, x) - c; }, Scalar(0),
                                         params.x_eq, Scalar(16) * eps * params.x_eq);
  }
  const Scalar y_top = sqrt(Scalar(2) * c) * Scalar(1.01) + Scalar(1e-12);
  auto upper_y = [&](Scalar x) {
    auto g = [&](Scalar y) { return lyapunov_v(params, PhasePoint<Scalar>(x, y)) - c; };
    if (g(Scalar(0)) >= Scalar(0)) return Scalar(0);
    if (!(g(y_top) > Scalar(0))) {
      throw NumericalError("level-curve slice x=" + std::to_string(static_cast<double>(x)) + " has no root");
    }
    return detail::bisect_root<Scalar>(g, Scalar(0), y_top, Scalar(4) * eps * y_top);
  };

  // n-1 distinct points; half on each branch, cosine-spaced toward the ends.
  const std::size_t m = n - 1;
  const std::size_t upper_count = m / 2;
  const std::size_t lower_count = m - upper_count;
  const Scalar pi = Scalar(3.14159265358979323846264338327950288L);
  std::vector<PhasePoint<Scalar>> out;
  out.reserve(n);
  for (std::size_t i = 0; i < upper_count; ++i) {
    const Scalar x = x_edge * cos(pi * Scalar(i) / Scalar(upper_count));
    out.emplace_back(x, upper_y(x));
  }
  for (std::size_t i = 0; i < lower_count; ++i) {
    const Scalar x = -x_edge * cos(pi * Scalar(i) / Scalar(lower_count));
    out.emplace_back(x, -upper_y(x));
  }
  out.push_back(out.front());
  return out;
}

}  // namespace sslab
