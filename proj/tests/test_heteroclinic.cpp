#include "sslab/heteroclinic.hpp"

#include <doctest.h>

#include <cmath>

using namespace sslab;

namespace {

const Params& half() {
  static const Params P = derived_constants(0.5);
  return P;
}

const HeteroclinicResult& front() {
  static const HeteroclinicResult r = bisect_beta(half(), initial_bracket(half()));
  return r;
}

}  // namespace

TEST_SUITE("heteroclinic") {
  TEST_CASE("local bound eta*") {
    const Params& P = half();
    CHECK(eta_star(P, 0.5) == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(eta_star(P, 2.0) == doctest::Approx(0.125).epsilon(1e-15));
    // the first branch is 1.294727 at beta = 2, so the x_eq / beta branch is taken
    CHECK(-0.125 + std::sqrt(0.015625 + 2) == doctest::Approx(1.2947271).epsilon(1e-7));
    CHECK(eta_star(P, 0.1) == doctest::Approx(20 * (-0.125 + std::sqrt(0.015625 + 0.005))).epsilon(1e-14));
    for (int k = 1; k <= 9; ++k) {
      const Params Q = derived_constants(0.1 * k);
      for (double b : {1e-3, 0.1, 1.0, 10.0}) CHECK(eta_star(Q, b) > 0);
    }
    CHECK_THROWS_AS(eta_star(P, 0.0), ValidationError);
  }

  TEST_CASE("analytic bracket values") {
    const Params& P = half();
    CHECK(case_two_bound(P) == doctest::Approx(std::sqrt(0.0625 / 1.5)).epsilon(1e-15));
    CHECK(case_two_bound(P) == doctest::Approx(0.204124).epsilon(1e-6));
    CHECK(case_one_bound(P) == doctest::Approx(0.5).epsilon(1e-15));
    const Params Q = derived_constants(0.2);
    CHECK(case_two_bound(Q) == doctest::Approx(std::sqrt(std::pow(0.8, 2.5) / 1.2)).epsilon(1e-14));
    for (int k = 1; k <= 9; ++k) {
      const Params R = derived_constants(0.1 * k);
      CHECK(case_two_bound(R) < case_one_bound(R));
    }
  }

  TEST_CASE("classification of the example shots") {
    const Params& P = half();
    const ShotOutcome lo = classify_shot(P, 0.1);
    REQUIRE(lo.is_case_two());
    const auto& c2 = std::get<CaseTwo>(lo.value);
    CHECK(c2.x_beta > 0);
    CHECK(c2.x_beta < P.x_eq);
    CHECK(c2.eta_beta > lo.eta_star);
    CHECK(lo.sandwich_ok);

    const ShotOutcome hi = classify_shot(P, 0.6);
    REQUIRE(hi.is_case_one());
    const auto& c1 = std::get<CaseOne>(hi.value);
    CHECK(c1.y_beta > 0);
    CHECK(c1.y_beta < 0.6);
    CHECK(c1.eta_beta > hi.eta_star);
    CHECK(hi.sandwich_ok);

    const ShotOutcome edge = classify_shot(P, 0.5);
    CHECK_FALSE(edge.is_undecided());
    CHECK_THROWS_AS(classify_shot(P, -0.1), ValidationError);
  }

  TEST_CASE("proven memberships and exit after eta*") {
    const Params& P = half();
    for (double b : {0.02, 0.05, 0.1, 0.15, 0.2}) {
      const ShotOutcome o = classify_shot(P, b);
      CHECK(o.is_case_two());
      CHECK(o.eta_exit() > o.eta_star);
    }
    for (double b : {0.51, 0.6, 1.0, 2.0, 5.0}) {
      const ShotOutcome o = classify_shot(P, b);
      CHECK(o.is_case_one());
      CHECK(o.eta_exit() > o.eta_star);
    }
  }

  TEST_CASE("classification is open") {
    const Params& P = half();
    for (double b : {0.15, 0.6}) {
      const bool two = classify_shot(P, b).is_case_two();
      for (double f : {1 - 1e-6, 1 + 1e-6}) CHECK(classify_shot(P, b * f).is_case_two() == two);
    }
  }

  TEST_CASE("continuous dependence on beta") {
    const Params& P = half();
    for (double b : {0.15, 0.6}) {
      Trajectory a, c;
      const ShotOutcome oa = classify_shot(P, b, {}, &a);
      const ShotOutcome oc = classify_shot(P, b + 1e-8, {}, &c);
      const double reach = std::min(oa.eta_exit(), oc.eta_exit());
      double err = 0;
      for (const auto& s : a.samples) {
        if (s.eta > reach) break;
        const Vec2 z = c.at(s.eta);
        err = std::max({err, std::abs(z.x() - s.x), std::abs(z.y() - s.y)});
      }
      CHECK(err < 1e-5);
    }
  }

  TEST_CASE("initial bracket") {
    const Bracket b = initial_bracket(half());
    CHECK(b.beta_lo == doctest::Approx(0.204124 * 0.999).epsilon(1e-5));
    CHECK(b.beta_hi == doctest::Approx(0.5 * 1.001).epsilon(1e-12));
    for (double p : {0.2, 0.3, 0.7}) {
      const Params Q = derived_constants(p);
      const Bracket c = initial_bracket(Q);
      CHECK(c.beta_lo < c.beta_hi);
      CHECK(classify_shot(Q, c.beta_lo).is_case_two());
      CHECK(classify_shot(Q, c.beta_hi).is_case_one());
    }
  }

  TEST_CASE("bisection to the connection") {
    const HeteroclinicResult& r = front();
    CHECK(r.beta_star > 0.204124);
    CHECK(r.beta_star < 0.5);
    CHECK(r.interval_width <= 1e-9);
    CHECK(r.iterations <= 60);
    CHECK(r.trajectory.status == IntegrationStatus::horizon_reached);
    for (const auto& s : r.trajectory.samples) {
      if (s.eta <= 0 || s.eta > 10) continue;
      CHECK(s.y > 0);
      CHECK(s.y <= r.beta_star);
      CHECK(s.x > 0);
      CHECK(s.x < 0.25);
    }
    const Vec2 end = r.trajectory.at(10.0);
    CHECK(std::hypot(end.x() - 0.25, end.y()) < 1e-3);
  }

  TEST_CASE("bisection stopping at tol_beta") {
    BisectionOptions o;
    o.refine_to_resolution = false;
    const HeteroclinicResult r = bisect_beta(half(), initial_bracket(half()), o);
    CHECK(r.interval_width <= 1e-9);
    CHECK(r.iterations <= 30);
    CHECK(std::abs(r.beta_star - front().beta_star) <= 1e-9);
  }

  TEST_CASE("bad brackets") {
    const Params& P = half();
    CHECK_THROWS_AS(bisect_beta(P, {0.5, 0.2}), ValidationError);
    CHECK_THROWS_AS(bisect_beta(P, {0.1, 0.15}), BracketFailure);
    BisectionOptions o;
    o.tol_beta = 0;
    CHECK_THROWS_AS(bisect_beta(P, {0.2, 0.5}, o), ValidationError);
  }

  TEST_CASE("odd extension") {
    const HeteroclinicResult& r = front();
    const Trajectory e = extend_by_reflection(r);
    for (std::size_t i = 1; i < e.samples.size(); ++i) CHECK(e.samples[i].eta > e.samples[i - 1].eta);
    CHECK(e.at(0.0).x() == 0.0);
    for (double eta : {0.5, 2.0, 5.0, 9.0}) {
      CHECK(e.at(-eta).y() == doctest::Approx(e.at(eta).y()).epsilon(1e-12));
      CHECK(e.at(-eta).x() == doctest::Approx(-e.at(eta).x()).epsilon(1e-12));
    }
    CHECK(std::abs(e.at(10.0).x() - 0.25) < 1e-3);
    CHECK(std::abs(e.at(-10.0).x() + 0.25) < 1e-3);
  }

  TEST_CASE("tail fit") {
    const Params& P = half();
    SUBCASE("synthetic tail") {
      Trajectory t;
      for (double eta = 1.0; eta <= 12.0 + 1e-9; eta += 0.01) {
        const double r = std::pow(eta, -3) * std::exp(-eta * eta / 4);
        const double k = -3 / eta - eta / 2;
        const double r1 = r * k, r2 = r1 * k + r * (3 / (eta * eta) - 0.5);
        t.samples.push_back({eta, P.x_eq - r, -r1, 0.0, -r1, -r2});
      }
      const TailFit f = tail_fit(t, P);
      CHECK(f.gaussian_slope == doctest::Approx(1.0).epsilon(1e-8));
      CHECK(f.cubic_correction == doctest::Approx(1.0).epsilon(1e-7));
      CHECK(f.a_inf == doctest::Approx(1.0).epsilon(1e-7));
      CHECK_FALSE(f.window_shrunk);
    }
    SUBCASE("computed front") {
      const TailFit& f = front().tail;
      CHECK(f.gaussian_slope >= 0.9);
      CHECK(f.gaussian_slope <= 1.1);
      CHECK(f.a_inf > 0);
    }
  }

  TEST_CASE("beta scan across the bracket changes class once") {
    const Bracket b = initial_bracket(half());
    const auto scan = beta_scan(half(), b.beta_lo, b.beta_hi, 41);
    REQUIRE(scan.size() == 41);
    int changes = 0;
    for (std::size_t i = 1; i < scan.size(); ++i) {
      changes += std::string(scan[i].outcome.name()) != scan[i - 1].outcome.name();
    }
    CHECK(changes == 1);
    CHECK(scan.front().outcome.is_case_two());
    CHECK(scan.back().outcome.is_case_one());
    CHECK_THROWS_AS(beta_scan(half(), 0.5, 0.2, 5), ValidationError);
  }
}
