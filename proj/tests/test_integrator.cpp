#include "sslab/homoclinic.hpp"
#include "sslab/integrator.hpp"

#include <doctest.h>

#include <cmath>
#include <sstream>

using namespace sslab;

namespace {

IntegratorConfig horizon(double eta_max) {
  IntegratorConfig c;
  c.eta_max = eta_max;
  return c;
}

}  // namespace

TEST_SUITE("integrator") {
  TEST_CASE("config validation") {
    IntegratorConfig c;
    CHECK_NOTHROW(c.validate());
    c.rel_tol = -1;
    CHECK_THROWS_AS(c.validate(), ValidationError);
    c = {};
    c.h_min = 1.0;
    c.h_max = 0.1;
    CHECK_THROWS_AS(c.validate(), ValidationError);
    c = {};
    c.eta_max = 0;
    CHECK_THROWS_AS(c.validate(), ValidationError);
  }

  TEST_CASE("origin stays put") {
    const Params P = derived_constants(0.5);
    const Trajectory t = integrate(P, {0.0, Vec2(0, 0)}, Direction::forward, horizon(5));
    CHECK(t.status == IntegrationStatus::horizon_reached);
    CHECK(t.eta_end() == doctest::Approx(5.0));
    for (const auto& s : t.samples) CHECK(std::hypot(s.x, s.y) <= 1e-12);
  }

  TEST_CASE("saddle equilibrium stays within 1e-8 up to eta = 5") {
    const Params P = derived_constants(0.5);
    const Trajectory t = integrate(P, {0.0, Vec2(0.25, 0)}, Direction::forward, horizon(5));
    CHECK(t.status == IntegrationStatus::horizon_reached);
    for (const auto& s : t.samples) CHECK(std::hypot(s.x - 0.25, s.y) <= 1e-8);
  }

  TEST_CASE("slope sandwich near the origin") {
    const Params P = derived_constants(0.5);
    const double beta = 1.0;
    const Trajectory t = integrate(P, {0.0, Vec2(0, beta)}, Direction::forward, horizon(0.5));
    for (const auto& s : t.samples) {
      if (s.eta <= 0) continue;
      CHECK(s.y > beta / 2);
      CHECK(s.y < beta);
      CHECK(s.x > beta * s.eta / 2);
      CHECK(s.x < beta * s.eta);
    }
    CHECK(t.back().x == doctest::Approx(0.5).epsilon(0.05));
  }

  TEST_CASE("samples are monotone in eta and carry V") {
    const Params P = derived_constants(0.5);
    for (Direction d : {Direction::forward, Direction::backward}) {
      const Trajectory t = integrate(P, {0.0, Vec2(0.1, 0.05)}, d, horizon(8));
      CHECK(t.direction == d);
      CHECK(std::abs(t.eta_end()) == doctest::Approx(8.0));
      for (std::size_t i = 1; i < t.samples.size(); ++i) {
        CHECK(direction_sign(d) * (t.samples[i].eta - t.samples[i - 1].eta) > 0);
      }
      for (const auto& s : t.samples) CHECK(s.v == lyapunov_v(P, Vec2(s.x, s.y)));
    }
  }

  TEST_CASE("backward run equals the forward run of the reflected system") {
    // (x, y)(eta) -> (x, -y)(-eta) maps solutions to solutions.
    const Params P = derived_constants(0.5);
    const Trajectory f = integrate(P, {0.0, Vec2(0.07, 0.03)}, Direction::forward, horizon(6));
    const Trajectory b = integrate(P, {0.0, Vec2(0.07, -0.03)}, Direction::backward, horizon(6));
    for (double eta : {1.0, 2.5, 4.0, 6.0}) {
      const Vec2 a = f.at(eta), c = b.at(-eta);
      CHECK(std::abs(a.x() - c.x()) < 1e-8);
      CHECK(std::abs(a.y() + c.y()) < 1e-8);
    }
  }

  TEST_CASE("events are located to event_tol and terminal events stop") {
    const Params P = derived_constants(0.5);
    // x > beta eta / 2 on (0, eta*], so x = 0.01 is reached before eta = 0.2
    std::vector<EventSpec> ev{{"x_hits", [](double, const Vec2& z) { return z.x() - 0.01; }, Crossing::rising, true}};
    const IntegratorConfig cfg = horizon(10);
    const Trajectory t = integrate(P, {0.0, Vec2(0, 0.1)}, Direction::forward, cfg, ev);
    CHECK(t.status == IntegrationStatus::terminal_event);
    REQUIRE(t.events.size() == 1);
    CHECK(t.events[0].name == "x_hits");
    CHECK(std::abs(t.events[0].x - 0.01) <= cfg.event_tol);
    CHECK(t.back().eta == doctest::Approx(t.events[0].eta));

    ev[0].terminal = false;
    ev[0].crossing = Crossing::either;
    const Trajectory all = integrate(P, {0.0, Vec2(0.1, 0)}, Direction::forward, cfg,
                                     {{"zero", [](double, const Vec2& z) { return z.x(); }, Crossing::either, false}});
    CHECK(all.status == IntegrationStatus::horizon_reached);
    CHECK(all.events.size() >= 4);
    for (std::size_t i = 0; i < all.events.size(); ++i) {
      CHECK(std::abs(all.events[i].x) <= cfg.event_tol);
      if (i) CHECK(all.events[i].eta > all.events[i - 1].eta);
    }
  }

  TEST_CASE("generic core: harmonic oscillator accuracy") {
    IntegratorConfig cfg;
    const OdeResult r = dormand_prince([](double, const Vec2& z) { return Vec2(z.y(), -z.x()); }, Vec2(1, 0), 10.0,
                                       cfg);
    CHECK(r.status == IntegrationStatus::horizon_reached);
    CHECK(std::abs(r.samples.back().z.x() - std::cos(10.0)) < 1e-8);
    // dense output in the middle of a step
    const auto& a = r.samples[r.samples.size() / 2];
    const auto& b = r.samples[r.samples.size() / 2 + 1];
    const double s = 0.5 * (a.s + b.s);
    CHECK(std::abs(hermite(a, b, s).x() - std::cos(s)) < 1e-7);
  }

  TEST_CASE("generic core: blow-up is reported, not looped") {
    IntegratorConfig cfg;
    const OdeResult r = dormand_prince([](double, const Vec2& z) { return Vec2(z.x() * z.x(), 0.0); }, Vec2(1, 0),
                                       2.0, cfg);
    CHECK(r.status != IntegrationStatus::horizon_reached);
    CHECK((r.status == IntegrationStatus::step_underflow || r.status == IntegrationStatus::non_finite_state));
    CHECK(r.samples.back().s < 1.0);
  }

  TEST_CASE("halving rel_tol moves the end state by less than 10 rel_tol") {
    const Params P = derived_constants(0.5);
    IntegratorConfig a = horizon(8), b = horizon(8);
    a.rel_tol = 1e-8;
    a.abs_tol = 1e-12;
    b.rel_tol = 0.5e-8;
    b.abs_tol = 0.5e-12;
    const Trajectory ta = integrate(P, {0.0, Vec2(0.1, 0.0)}, Direction::forward, a);
    const Trajectory tb = integrate(P, {0.0, Vec2(0.1, 0.0)}, Direction::forward, b);
    const double dx = std::hypot(ta.back().x - tb.back().x, ta.back().y - tb.back().y);
    CHECK(dx < 10 * a.rel_tol);
  }

  TEST_CASE("F is monotone along homoclinic runs") {
    const Params P = derived_constants(0.5);
    const Trajectory eq = integrate(P, {0.0, Vec2(0.25, 0)}, Direction::forward, horizon(3));
    CHECK(check_monotone_f(eq, 1e-9).max_violation <= 1e-15);

    IntegratorConfig cfg = horizon(10);
    cfg.rel_tol = 1e-12;
    cfg.abs_tol = 1e-14;
    Trajectory t = integrate(P, {0.0, Vec2(0.1, 0)}, Direction::forward, cfg);
    const MonotoneReport r = check_monotone_f(t, 1e-9);
    CHECK(r.ok);
    CHECK(r.max_violation <= 1e-9);

    Trajectory b = integrate(P, {0.0, Vec2(0.1, 0)}, Direction::backward, cfg);
    CHECK(check_monotone_f(b, 1e-9).ok);

    // negative control: bump V by 1e-3 at one sample
    t.samples[t.samples.size() / 2].v += 1e-3;
    const MonotoneReport bad = check_monotone_f(t, 1e-9);
    CHECK_FALSE(bad.ok);
    CHECK(bad.max_violation == doctest::Approx(1e-3).epsilon(1e-3));
  }

  TEST_CASE("runs from inside the separatrix stay inside and below x_eq") {
    const Params P = derived_constants(0.5);
    for (const auto& seed : sample_seeds(P, 6, 99)) {
      for (Direction d : {Direction::forward, Direction::backward}) {
        const Trajectory t = integrate(P, {0.0, Vec2(seed.alpha, seed.beta)}, d, horizon(12));
        for (const auto& s : t.samples) {
          CHECK(std::abs(s.x) <= P.x_eq + 1e-8);
          CHECK(level_membership(P, Vec2(s.x, s.y), P.c_star, 1e-8) != Membership::outside);
        }
      }
    }
  }

  TEST_CASE("CSV dump") {
    const Params P = derived_constants(0.5);
    const Trajectory t = integrate(P, {0.0, Vec2(0.1, 0)}, Direction::forward, horizon(0.5));
    std::ostringstream os;
    t.write_csv(os);
    const std::string s = os.str();
    CHECK(s.rfind("eta,x,y,V\r\n", 0) == 0);
    CHECK(s.find("0.10000000000000001") != std::string::npos);
    std::size_t lines = 0;
    for (char c : s) lines += c == '\n';
    CHECK(lines == t.samples.size() + 1);
  }
}
