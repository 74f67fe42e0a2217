#include "telegas/sim.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>
#include <tuple>

#include "telegas/numerics.hpp"

namespace telegas::sim {

RngStream::RngStream(std::uint64_t seed, std::uint64_t stream_id)
    : seed_(seed), stream_id_(stream_id) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream_id),
                    static_cast<std::uint32_t>(stream_id >> 32)};
  engine_.seed(seq);
}

double RngStream::uniform() {
  return (static_cast<double>(engine_() >> 11) + 0.5) * 0x1.0p-53;
}

double RngStream::exponential(double rate) { return -std::log(uniform()) / rate; }

bool RngStream::coin() { return (engine_() >> 63) != 0; }

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::size_t segment_index(const Trajectory& path, double t) {
  const auto it = std::upper_bound(path.breakpoints.begin(), path.breakpoints.end(), t,
                                   [](double value, const Breakpoint& bp) { return value < bp.time; });
  return it == path.breakpoints.begin() ? 0
                                        : static_cast<std::size_t>(it - path.breakpoints.begin()) - 1;
}

// One particle between events: x(t) = x_ref + slope (t - t_ref).
struct Mover {
  double t_ref = 0.0;
  double x_ref = 0.0;
  double slope = 0.0;
  double next_switch = kInf;
  double next_wall = kInf;
  int wall_side = -1;

  double at(double t) const { return x_ref + slope * (t - t_ref); }
  double next_event() const { return std::min(next_switch, next_wall); }

  void aim_wall(std::optional<double> b) {
    if (!b) return;
    if (slope > 0.0) {
      next_wall = t_ref + (*b - x_ref) / slope;
      wall_side = 1;
    } else {
      next_wall = t_ref + x_ref / -slope;
      wall_side = 0;
    }
  }
};

double clamp_to(double x, std::optional<double> b) {
  return b ? std::clamp(x, 0.0, *b) : x;
}

Trajectory run_path(double y0, VelocityState xi0, const Params& params, std::optional<double> b,
                    double horizon, RngStream& rng) {
  make_params(params.v, params.lambda);
  if (!(horizon > 0.0)) throw std::domain_error("trajectory horizon must be > 0");
  if (b && (!(*b > 0.0) || y0 < 0.0 || y0 > *b))
    throw std::domain_error("reflected path needs b > 0 and y0 in [0, b]");
  Trajectory path;
  path.origin = y0;
  path.horizon = horizon;
  Mover m;
  m.x_ref = y0;
  m.slope = xi0.velocity(params);
  m.next_switch = rng.exponential(params.lambda);
  m.aim_wall(b);
  path.breakpoints.push_back({0.0, y0, m.slope});
  while (m.next_event() < horizon) {
    const double t = m.next_event();
    if (m.next_wall <= m.next_switch) {
      m.x_ref = m.wall_side == 1 ? *b : 0.0;
    } else {
      m.x_ref = clamp_to(m.at(t), b);
      m.next_switch = t + rng.exponential(params.lambda);
    }
    m.t_ref = t;
    m.slope = -m.slope;
    m.aim_wall(b);
    path.breakpoints.push_back({t, m.x_ref, m.slope});
  }
  return path;
}

int sign_of(double x) { return (x > 0.0) - (x < 0.0); }

}  // namespace

double Trajectory::position(double t) const {
  const Breakpoint& bp = breakpoints[segment_index(*this, t)];
  return bp.position + bp.slope * (t - bp.time);
}

double Trajectory::slope(double t) const { return breakpoints[segment_index(*this, t)].slope; }

Trajectory sample_trajectory(double y0, VelocityState xi0, const Params& params, double horizon,
                             RngStream& rng) {
  return run_path(y0, xi0, params, std::nullopt, horizon, rng);
}

Trajectory sample_reflected_trajectory(double y0, VelocityState xi0, const Params& params, double b,
                                       double horizon, RngStream& rng) {
  return run_path(y0, xi0, params, b, horizon, rng);
}

MeetingOutcome simulate_first_meeting(PatternPair pattern, double z, const Params& params,
                                      double t_max, RngStream& rng) {
  make_params(params.v, params.lambda);
  if (!(z > 0.0)) throw std::domain_error("first meeting needs z > 0");
  const double v = params.v;
  int k1 = pattern.k1;
  int k2 = pattern.k2;
  double gap = z;
  double t = 0.0;
  bool switched = false;
  for (;;) {
    const double dt = rng.exponential(2.0 * params.lambda);
    const double closing = v * (VelocityState{k1}.sign() - VelocityState{k2}.sign());
    if (closing > 0.0) {
      const double reach = switched ? gap / closing : z / (2.0 * v);
      if (reach <= dt) {
        const double when = switched ? t + reach : reach;
        if (when > t_max) return {t_max, true, false};
        return {when, false, !switched};
      }
    }
    if (t + dt > t_max) return {t_max, true, false};
    gap -= closing * dt;
    t += dt;
    switched = true;
    if (rng.coin()) {
      k1 = 1 - k1;
    } else {
      k2 = 1 - k2;
    }
  }
}

std::vector<double> two_particle_collision_times(PatternPair pattern, double z,
                                                 const Params& params, double horizon,
                                                 RngStream& rng) {
  make_params(params.v, params.lambda);
  if (!(z > 0.0)) throw std::domain_error("collision count needs z > 0");
  if (!(horizon > 0.0)) throw std::domain_error("horizon must be > 0");
  const double v = params.v;
  int k1 = pattern.k1;
  int k2 = pattern.k2;
  double gap = z;
  int last_sign = 1;
  double t = 0.0;
  std::vector<double> times;
  while (t < horizon) {
    const double dt = std::min(rng.exponential(2.0 * params.lambda), horizon - t);
    const double slope = v * (VelocityState{k2}.sign() - VelocityState{k1}.sign());
    const double end = gap + slope * dt;
    const int end_sign = sign_of(end);
    if (end_sign != 0 && end_sign != last_sign) {
      times.push_back(gap == 0.0 ? t : t + gap / -slope);
      last_sign = end_sign;
    }
    gap = end;
    t += dt;
    if (rng.coin()) {
      k1 = 1 - k1;
    } else {
      k2 = 1 - k2;
    }
  }
  return times;
}

std::size_t simulate_two_particle_collisions(PatternPair pattern, double z, const Params& params,
                                             double horizon, RngStream& rng) {
  return two_particle_collision_times(pattern, z, params, horizon, rng).size();
}

std::size_t GasResult::pair_index(std::size_t i, std::size_t j) const {
  if (i > j) std::swap(i, j);
  if (i == j || j >= n()) throw std::out_of_range("pair index out of range");
  return i * n() - i * (i + 1) / 2 + (j - i - 1);
}

std::size_t GasResult::pair_count(std::size_t i, std::size_t j) const {
  return pair_crossing_counts[pair_index(i, j)];
}

double GasResult::first_crossing(std::size_t i, std::size_t j) const {
  return pair_first_crossing[pair_index(i, j)];
}

std::size_t GasResult::total_crossings() const {
  std::size_t total = 0;
  for (std::size_t c : pair_crossing_counts) total += c;
  return total;
}

GasResult simulate_gas(const GasConfig& config, double horizon, RngStream& rng, bool keep_paths,
                       std::size_t max_events) {
  validate(config);
  if (!(horizon > 0.0)) throw ValidationError("T must be > 0");
  const Params& params = config.params;
  const std::optional<double> b = config.boundary;
  const std::size_t n = config.positions.size();
  const std::size_t pairs = n * (n - 1) / 2;

  GasResult result;
  result.horizon = horizon;
  result.final_positions.assign(n, 0.0);
  result.pair_crossing_counts.assign(pairs, 0);
  result.pair_first_crossing.assign(pairs, horizon);
  result.free_path_times.assign(n > 0 ? n - 1 : 0, horizon);
  result.free_path_censored.assign(n > 0 ? n - 1 : 0, true);
  std::vector<Trajectory> paths(keep_paths ? n : 0);

  std::vector<Mover> movers(n);
  for (std::size_t i = 0; i < n; ++i) {
    const int xi = config.initial_regimes.is_equiprobable() ? (rng.coin() ? 1 : 0)
                                                            : config.initial_regimes.fixed[i];
    movers[i].x_ref = config.positions[i];
    movers[i].slope = VelocityState{xi}.velocity(params);
  }
  for (std::size_t i = 0; i < n; ++i) {
    movers[i].next_switch = rng.exponential(params.lambda);
    movers[i].aim_wall(b);
    if (keep_paths) {
      paths[i].origin = movers[i].x_ref;
      paths[i].horizon = horizon;
      paths[i].breakpoints.push_back({0.0, movers[i].x_ref, movers[i].slope});
    }
  }

  std::vector<int> last_sign(pairs, 1);
  std::vector<double> x_now(config.positions);
  std::vector<double> x_next(n);
  double t_now = 0.0;

  struct Crossing {
    double time;
    std::size_t i;
    std::size_t j;
  };
  std::vector<Crossing> crossings;

  auto budget_check = [&] {
    if (result.events.size() > max_events)
      throw numerics::BudgetExceeded(
          "gas event budget of " + std::to_string(max_events) + " exceeded before T = " +
              std::to_string(horizon) + " (lambda = " + std::to_string(params.lambda) +
              ", n = " + std::to_string(n) + ")",
          t_now);
  };

  for (;;) {
    std::size_t who = n;
    double event_time = kInf;
    for (std::size_t i = 0; i < n; ++i) {
      if (movers[i].next_event() < event_time) {
        event_time = movers[i].next_event();
        who = i;
      }
    }
    const double t_next = std::min(event_time, horizon);
    for (std::size_t i = 0; i < n; ++i) x_next[i] = clamp_to(movers[i].at(t_next), b);

    crossings.clear();
    std::size_t p = 0;
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = i + 1; j < n; ++j, ++p) {
        const double d1 = x_next[j] - x_next[i];
        const int s1 = sign_of(d1);
        if (s1 == 0 || s1 == last_sign[p]) continue;
        const double d0 = x_now[j] - x_now[i];
        const double closing = movers[i].slope - movers[j].slope;
        double when = t_now;
        if (d0 != 0.0)
          when = closing != 0.0 ? t_now + d0 / closing
                                : t_now + (t_next - t_now) * (d0 / (d0 - d1));
        crossings.push_back({std::clamp(when, t_now, t_next), i, j});
        last_sign[p] = s1;
      }
    }
    std::sort(crossings.begin(), crossings.end(), [](const Crossing& a, const Crossing& c) {
      return std::tie(a.time, a.i, a.j) < std::tie(c.time, c.i, c.j);
    });
    for (const Crossing& c : crossings) {
      const double meet = 0.5 * (movers[c.i].at(c.time) + movers[c.j].at(c.time));
      int below = 0;
      for (std::size_t k = 0; k < n; ++k)
        if (k != c.i && k != c.j && movers[k].at(c.time) < meet) ++below;
      const int rank_low = below + 1;
      GasEvent ev{c.time, EventKind::crossing, static_cast<int>(c.i), static_cast<int>(c.j), -1,
                  rank_low};
      result.events.push_back(ev);
      const std::size_t idx = result.pair_index(c.i, c.j);
      if (result.pair_crossing_counts[idx]++ == 0) result.pair_first_crossing[idx] = c.time;
      const auto slot = static_cast<std::size_t>(rank_low) - 1;
      if (result.free_path_censored[slot]) {
        result.free_path_times[slot] = c.time;
        result.free_path_censored[slot] = false;
      }
    }
    budget_check();

    if (event_time > horizon) break;

    Mover& m = movers[who];
    GasEvent ev{event_time, EventKind::switch_direction, static_cast<int>(who)};
    if (m.next_wall <= m.next_switch) {
      ev.kind = EventKind::reflect;
      ev.wall = m.wall_side;
      m.x_ref = m.wall_side == 1 ? *b : 0.0;
    } else {
      m.x_ref = clamp_to(m.at(event_time), b);
      m.next_switch = event_time + rng.exponential(params.lambda);
    }
    m.t_ref = event_time;
    m.slope = -m.slope;
    m.aim_wall(b);
    x_next[who] = m.x_ref;
    if (keep_paths) paths[who].breakpoints.push_back({event_time, m.x_ref, m.slope});
    result.events.push_back(ev);
    budget_check();

    x_now.swap(x_next);
    t_now = t_next;
  }

  for (std::size_t i = 0; i < n; ++i) result.final_positions[i] = x_next[i];
  if (keep_paths) result.trajectories = std::move(paths);
  return result;
}

std::vector<double> labeled_positions(const std::vector<Trajectory>& paths, double t) {
  std::vector<double> out;
  out.reserve(paths.size());
  for (const auto& path : paths) out.push_back(path.position(t));
  std::sort(out.begin(), out.end());
  return out;
}

double reflected_fold(double x, double b) {
  if (!(b > 0.0)) throw std::domain_error("fold needs b > 0");
  double r = std::fmod(x, 2.0 * b);
  if (r < 0.0) r += 2.0 * b;
  return r <= b ? r : 2.0 * b - r;
}

namespace {

template <class SegmentIntegral>
double average_along(double y0, const Params& params, double b, double horizon, RngStream& rng,
                     SegmentIntegral&& segment) {
  const VelocityState xi{rng.coin() ? 1 : 0};
  const Trajectory path = sample_reflected_trajectory(y0, xi, params, b, horizon, rng);
  double total = 0.0;
  const auto& bps = path.breakpoints;
  for (std::size_t i = 0; i < bps.size(); ++i) {
    const double end = i + 1 < bps.size() ? bps[i + 1].time : horizon;
    const double dt = end - bps[i].time;
    if (dt <= 0.0) continue;
    const double x0 = bps[i].position;
    const double x1 = std::clamp(x0 + bps[i].slope * dt, 0.0, b);
    total += segment(x0, x1, bps[i].slope, dt);
  }
  return total / horizon;
}

}  // namespace

double time_average(const std::function<double(double)>& antiderivative, double y0,
                    const Params& params, double b, double horizon, RngStream& rng) {
  return average_along(y0, params, b, horizon, rng,
                       [&](double x0, double x1, double slope, double) {
                         return (antiderivative(x1) - antiderivative(x0)) / slope;
                       });
}

double time_average_quadrature(const std::function<double(double)>& f, double y0,
                               const Params& params, double b, double horizon, RngStream& rng) {
  return average_along(y0, params, b, horizon, rng,
                       [&](double x0, double, double slope, double dt) {
                         return numerics::integrate(
                                    [&](double s) { return f(x0 + slope * s); }, 0.0, dt, 1e-13)
                             .value;
                       });
}

double sample_reflected_position(double t, std::optional<double> y0, const Params& params, double b,
                                 RngStream& rng) {
  if (!(t >= 0.0)) throw std::domain_error("t must be >= 0");
  const double start = y0 ? *y0 : b * rng.uniform();
  const VelocityState xi{rng.coin() ? 1 : 0};
  if (t == 0.0) return start;
  return sample_reflected_trajectory(start, xi, params, b, t, rng).position(t);
}

}  // namespace telegas::sim
