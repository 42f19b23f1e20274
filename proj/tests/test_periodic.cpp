#include "sslab/fit.hpp"
#include "sslab/periodic.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>

using namespace sslab;

namespace {

// T(p) = 2^{3/2} (1+p)^{-1/2} B(1/(1+p), 1/2)
double beta_oracle(double p) { return std::pow(2.0, 1.5) / std::sqrt(1.0 + p) * std::beta(1.0 / (1.0 + p), 0.5); }

}  // namespace

TEST_SUITE("periodic") {
  TEST_CASE("p = 1 is the harmonic oscillator") {
    const PeriodicOrbit o = solve_w(1.0);
    CHECK(o.control_case);
    CHECK(o.period_integrated == doctest::Approx(2 * std::numbers::pi).epsilon(1e-9));
    for (const auto& s : o.samples) CHECK(std::abs(s.z.x() - std::cos(s.s)) < 1e-8);
    CHECK(period_t(1.0) == doctest::Approx(2 * std::numbers::pi).epsilon(1e-12));
  }

  TEST_CASE("initial data") {
    const PeriodicOrbit o = solve_w(0.5);
    const Vec2 z = o.at(0.0);
    CHECK(z.x() == 1.0);
    CHECK(z.y() == 0.0);
    CHECK_FALSE(o.control_case);
    CHECK(o.zeta_min() <= -3 * o.period_integrated);
    CHECK(o.zeta_max() >= 3 * o.period_integrated);
  }

  TEST_CASE("quadrature against the Beta-function identity") {
    CHECK(period_t(0.5) == doctest::Approx(5.9746736).epsilon(1e-7));
    CHECK(period_t(0.5) == doctest::Approx(5.9747).epsilon(1e-5));
    for (int k = 1; k <= 9; ++k) {
      const double p = 0.1 * k;
      CAPTURE(p);
      CHECK(std::abs(period_t(p) - beta_oracle(p)) <= 1e-10);
    }
    CHECK(std::abs(period_t(0.99) - 2 * std::numbers::pi) / (2 * std::numbers::pi) < 0.005);
    CHECK_THROWS_AS(period_t(0.0), ValidationError);
    CHECK_THROWS_AS(period_t(1.5), ValidationError);
  }

  TEST_CASE("integrated period, energy and symmetry on the p grid") {
    for (int k = 1; k <= 9; ++k) {
      const double p = 0.1 * k;
      CAPTURE(p);
      const PeriodicOrbit o = solve_w(p);
      CHECK(std::abs(o.period_integrated - period_t(p)) / period_t(p) <= 1e-6);
      CHECK(o.max_energy_deviation < 1e-8);
      CHECK(o.energy_level == doctest::Approx(1 / (1 + p)));
      const SymmetryReport s = check_symmetry(o);
      CHECK(s.ok);
    }
  }

  TEST_CASE("symmetry negative control") {
    PeriodicOrbit o = solve_w(0.5);
    CHECK(check_symmetry(o).ok);
    for (auto& s : o.samples) s.s += 1e-3;
    const SymmetryReport bad = check_symmetry(o);
    CHECK_FALSE(bad.ok);
    CHECK(bad.even_error > 1e-6);
  }

  TEST_CASE("amplitude scaling") {
    const ScalingReport one = amplitude_scaling_check(0.5, 1.0);
    CHECK(one.ok);
    CHECK(one.predicted == doctest::Approx(period_t(0.5)));

    const ScalingReport quarter = amplitude_scaling_check(0.5, 0.25);
    CHECK(quarter.ok);
    CHECK(quarter.predicted == doctest::Approx(std::pow(0.25, 0.25) * beta_oracle(0.5)).epsilon(1e-10));
    CHECK(quarter.measured == doctest::Approx(4.2248).epsilon(1e-4));

    std::vector<double> la, lt;
    for (double a : {1e-1, 1e-2, 1e-3}) {
      la.push_back(std::log(a));
      lt.push_back(std::log(solve_w(0.5, {}, a).period_integrated));
    }
    CHECK(std::abs(regression_slope(la, lt) - 0.25) <= 1e-3);
    CHECK_THROWS_AS(solve_w(0.5, {}, 0.0), ValidationError);
  }

  TEST_CASE("phase portrait nesting") {
    std::vector<double> ps;
    for (int k = 1; k <= 9; ++k) ps.push_back(0.1 * k);
    const PhasePortrait pp = emit_phase_portrait(ps);
    REQUIRE(pp.orbits.size() == 9);
    CHECK(pp.max_abs_wprime.front() == doctest::Approx(std::sqrt(2 / 1.1)).epsilon(1e-8));
    CHECK(pp.max_abs_wprime.front() == doctest::Approx(1.3484).epsilon(1e-4));
    CHECK(pp.max_abs_wprime.back() == doctest::Approx(1.0260).epsilon(1e-4));
    for (const auto& o : pp.orbits) {
      double right = -2, left = 2;
      for (const auto& s : o.samples) right = std::max(right, s.z.x()), left = std::min(left, s.z.x());
      CHECK(right == doctest::Approx(1.0).epsilon(1e-9));
      CHECK(left == doctest::Approx(-1.0).epsilon(1e-6));
    }
    CHECK(pp.nesting_ok);
    CHECK_THROWS_AS(emit_phase_portrait({0.5, 1.0}), ValidationError);
  }
}
