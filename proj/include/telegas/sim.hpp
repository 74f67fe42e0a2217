#pragma once

// Exact event-driven Monte Carlo for telegraph particles.
//
// Every path is piecewise linear between switch and reflection events, so
// meetings and crossings are roots of linear equations and nothing is
// discretized in time. Hard collisions of labeled particles are never
// simulated directly: the labeled positions at time t are the sorted
// positions of independent paths, and each collision is a crossing of two
// independent paths.

#include <cstdint>
#include <functional>
#include <optional>
#include <random>
#include <vector>

#include "telegas/core.hpp"

namespace telegas::sim {

/// Random stream keyed by (seed, stream_id). The pair determines every draw;
/// distinct stream ids give unrelated generator states.
class RngStream {
public:
  RngStream(std::uint64_t seed, std::uint64_t stream_id);

  /// Uniform on the open interval (0, 1).
  double uniform();
  double exponential(double rate);
  bool coin();

  std::uint64_t seed() const { return seed_; }
  std::uint64_t stream_id() const { return stream_id_; }

private:
  std::uint64_t seed_;
  std::uint64_t stream_id_;
  std::mt19937_64 engine_;
};

struct Breakpoint {
  double time;
  double position;
  double slope;

  friend bool operator==(const Breakpoint&, const Breakpoint&) = default;
};

/// Piecewise-linear path. breakpoints[0] is (0, origin, initial slope); each
/// later breakpoint is a switch or a reflection.
struct Trajectory {
  std::vector<Breakpoint> breakpoints;
  double origin = 0.0;
  double horizon = 0.0;

  double position(double t) const;
  double slope(double t) const;

  friend bool operator==(const Trajectory&, const Trajectory&) = default;
};

/// Free telegraph path on the line up to T.
Trajectory sample_trajectory(double y0, VelocityState xi0, const Params& params,
                             double horizon, RngStream& rng);

/// Telegraph path reflected at 0 and b up to T.
Trajectory sample_reflected_trajectory(double y0, VelocityState xi0,
                                       const Params& params, double b,
                                       double horizon, RngStream& rng);

struct MeetingOutcome {
  /// Meeting instant, or t_max when censored.
  double time = 0.0;
  bool censored = false;
  /// Met with no switch at all; then time == z / (2v) exactly.
  bool at_atom = false;
};

/// First time the gap of a pair started at distance z closes.
MeetingOutcome simulate_first_meeting(PatternPair pattern, double z,
                                      const Params& params, double t_max,
                                      RngStream& rng);

/// Crossing instants in (0, T] of two independent paths started at distance z.
std::vector<double> two_particle_collision_times(PatternPair pattern, double z,
                                                 const Params& params,
                                                 double horizon, RngStream& rng);

/// Number of crossings in (0, T]; one crossing is one hard collision.
std::size_t simulate_two_particle_collisions(PatternPair pattern, double z,
                                             const Params& params,
                                             double horizon, RngStream& rng);

enum class EventKind { switch_direction, reflect, crossing };

struct GasEvent {
  double time;
  EventKind kind;
  /// Path index (switch, reflect) or the lower path index of a crossing.
  int particle;
  /// Higher path index of a crossing, -1 otherwise.
  int other = -1;
  /// Reflections: 0 for the wall at 0, 1 for the wall at b.
  int wall = -1;
  /// Crossings: the touching ranks are (rank_low, rank_low + 1), 1-based.
  int rank_low = 0;

  friend bool operator==(const GasEvent&, const GasEvent&) = default;
};

struct GasResult {
  double horizon = 0.0;
  std::vector<GasEvent> events;
  /// free_path_times[k - 2] is the first time ranks (k - 1, k) touch,
  /// censored at T, for k = 2..n. Rank 1 has no lower neighbour.
  std::vector<double> free_path_times;
  std::vector<bool> free_path_censored;
  /// Row-major strict upper triangle: pair (i, j), i < j.
  std::vector<std::size_t> pair_crossing_counts;
  /// First crossing time of paths (i, j), censored at T.
  std::vector<double> pair_first_crossing;
  std::vector<double> final_positions;
  std::optional<std::vector<Trajectory>> trajectories;

  std::size_t n() const { return final_positions.size(); }
  std::size_t pair_index(std::size_t i, std::size_t j) const;
  std::size_t pair_count(std::size_t i, std::size_t j) const;
  double first_crossing(std::size_t i, std::size_t j) const;
  std::size_t total_crossings() const;

  friend bool operator==(const GasResult&, const GasResult&) = default;
};

/// Simulates n independent telegraph paths (reflected when the config has a
/// boundary) up to T, recording every switch, reflection and pairwise
/// crossing. Throws ValidationError on a bad config and
/// numerics::BudgetExceeded once more than max_events events occur.
GasResult simulate_gas(const GasConfig& config, double horizon, RngStream& rng,
                       bool keep_paths, std::size_t max_events = 50'000'000);

/// Labeled hard-collision positions at time t: the sorted path positions.
std::vector<double> labeled_positions(const std::vector<Trajectory>& paths,
                                      double t);

/// Folds x into [0, b] with the period-2b tent map.
double reflected_fold(double x, double b);

/// (1/T) int_0^T f(S(t)) dt along one reflected path with fair-coin initial
/// direction. `antiderivative` is any F with F' = f; a segment of slope s
/// from x0 to x1 contributes (F(x1) - F(x0)) / s.
double time_average(const std::function<double(double)>& antiderivative,
                    double y0, const Params& params, double b, double horizon,
                    RngStream& rng);

/// Same average with per-segment quadrature of f.
double time_average_quadrature(const std::function<double(double)>& f, double y0,
                               const Params& params, double b, double horizon,
                               RngStream& rng);

/// S(t) of a reflected path with fair-coin initial direction, started at y0
/// or, when y0 is empty, uniformly on [0, b].
double sample_reflected_position(double t, std::optional<double> y0,
                                 const Params& params, double b, RngStream& rng);

}  // namespace telegas::sim
