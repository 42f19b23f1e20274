#pragma once

// Adaptive Dormand-Prince 5(4) integration of planar systems with event
// location and cubic Hermite dense output.

#include "sslab/kernels.hpp"

#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace sslab {

using Vec2 = Vector2<double>;

struct IntegratorConfig {
  double rel_tol = 1e-10;
  double abs_tol = 1e-12;
  double h_init = 1e-3;
  double h_min = 1e-12;
  double h_max = 0.1;
  double eta_max = 12.0;  // horizon in |eta|
  double event_tol = 1e-10;
  std::size_t max_steps = 20'000'000;

  void validate() const;
};

enum class Direction { forward, backward };

inline double direction_sign(Direction d) { return d == Direction::forward ? 1.0 : -1.0; }

/// Crossing direction measured along the integration direction.
enum class Crossing { rising, falling, either };

struct EventSpec {
  std::string name;
  std::function<double(double eta, const Vec2& pt)> g;
  Crossing crossing = Crossing::either;
  bool terminal = false;
};

struct EventHit {
  std::string name;
  double eta;
  double x;
  double y;
};

enum class IntegrationStatus { horizon_reached, terminal_event, step_underflow, non_finite_state, step_limit };

const char* to_string(IntegrationStatus s);

// ---------------------------------------------------------------------------
// Generic core: integrates dz/ds = f(s, z) for s from 0 upward.

struct OdeSample {
  double s;
  Vec2 z;
  Vec2 dz;
};

struct OdeEvent {
  std::function<double(double s, const Vec2& z)> g;
  Crossing crossing = Crossing::either;
  bool terminal = false;
};

struct OdeEventHit {
  std::size_t index;  // into the event list
  double s;
  Vec2 z;
};

struct OdeResult {
  std::vector<OdeSample> samples;
  std::vector<OdeEventHit> events;
  IntegrationStatus status = IntegrationStatus::horizon_reached;
  std::size_t accepted = 0;
  std::size_t rejected = 0;
};

using OdeRhs = std::function<Vec2(double s, const Vec2& z)>;

OdeResult dormand_prince(const OdeRhs& f, const Vec2& z0, double s_end, const IntegratorConfig& config,
                         const std::vector<OdeEvent>& events = {});

/// Cubic Hermite interpolation between two samples.
Vec2 hermite(const OdeSample& a, const OdeSample& b, double s);

// ---------------------------------------------------------------------------
// The self-similar system.

struct TrajectorySample {
  double eta;
  double x;
  double y;
  double v;
  double dx;  // x' at the sample
  double dy;  // y' at the sample
};

class Trajectory {
 public:
  Direction direction = Direction::forward;
  std::vector<TrajectorySample> samples;
  std::vector<EventHit> events;
  IntegrationStatus status = IntegrationStatus::horizon_reached;

  bool empty() const { return samples.empty(); }
  const TrajectorySample& front() const { return samples.front(); }
  const TrajectorySample& back() const { return samples.back(); }

  double eta_begin() const { return samples.front().eta; }
  double eta_end() const { return samples.back().eta; }

  /// Dense output at eta inside the sampled range.
  Vec2 at(double eta) const;

  /// Index of the first sample whose |eta - eta_begin| reaches |eta - eta_begin|.
  std::size_t locate(double eta) const;

  void write_csv(std::ostream& os) const;
};

struct IntegrationStart {
  double eta0 = 0.0;
  Vec2 point = Vec2::Zero();
};

/// Integrates the self-similar system from (eta0, point) toward
/// eta0 +- config.eta_max.
Trajectory integrate(const Params& params, const IntegrationStart& start, Direction direction,
                     const IntegratorConfig& config, const std::vector<EventSpec>& events = {});

struct MonotoneReport {
  double max_violation = 0.0;  // largest increase of F along |eta|
  bool ok = true;
};

/// F(eta) = V(x, y) must be non-increasing as |eta| grows away from zero.
MonotoneReport check_monotone_f(const Trajectory& traj, double tol);

}  // namespace sslab
