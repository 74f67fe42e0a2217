#include "telegas/experiments.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <limits>
#include <map>
#include <numeric>
#include <stdexcept>

#include "telegas/numerics.hpp"
#include "telegas/replicate.hpp"
#include "telegas/serialize.hpp"
#include "telegas/sim.hpp"
#include "telegas/stats.hpp"

namespace telegas::cli {

namespace fs = std::filesystem;
using json = nlohmann::json;
using analytic::Constants;
using analytic::MixedDistribution;

namespace {

// ---------------------------------------------------------------------------
// Config plumbing

template <class Config, class Visitor>
void visit_fields(Config& c, Visitor&& visit) {
  visit("seed", c.seed);
  visit("replicas", c.replicas);
  visit("level", c.level);
  visit("v", c.v);
  visit("lambda", c.lambda);
  visit("z", c.z);
  visit("pattern", c.pattern);
  visit("c", c.c);
  visit("n", c.n);
  visit("b", c.b);
  visit("T", c.T);
  visit("t_max", c.t_max);
  visit("t_min", c.t_min);
  visit("y0", c.y0);
  visit("span", c.span);
  visit("eps", c.eps);
  visit("alpha", c.alpha);
  visit("grid", c.grid);
  visit("s_list", c.s_list);
  visit("z_list", c.z_list);
  visit("y_list", c.y_list);
  visit("times", c.times);
  visit("ranks", c.ranks);
}

std::vector<double> linspace(double a, double b, std::size_t count) {
  std::vector<double> out(count);
  for (std::size_t i = 0; i < count; ++i)
    out[i] = count == 1 ? a : a + (b - a) * static_cast<double>(i) / static_cast<double>(count - 1);
  return out;
}

ExperimentConfig defaults_for(const std::string& name) {
  ExperimentConfig d;
  d.level = 0.01;
  d.v = 1.0;
  d.lambda = 1.0;
  if (name == "first-meeting") {
    d.z = 1.0;
    d.pattern = "01";
    d.replicas = 100000;
    d.t_max = 1000.0;
  } else if (name == "laplace-check") {
    d.z = 1.0;
    d.replicas = 100000;
    d.t_max = 200.0;
    d.s_list = {0.5, 1.0, 2.0};
  } else if (name == "kac") {
    d.v.reset();
    d.lambda.reset();
    d.z = 1.0;
    d.c = 1.0;
    d.pattern = "01";
    d.eps = {1.0, 0.5, 0.25, 0.125};
    d.replicas = 10000;
    d.t_max = 1000.0;
    d.s_list = {1.0};
  } else if (name == "renewal") {
    d.z = 1.0;
    d.pattern = "01";
    d.T = 5.0;
    d.replicas = 10000;
  } else if (name == "renewal-scaling") {
    d.v.reset();
    d.lambda.reset();
    d.z = 1.0;
    d.c = 1.0;
    d.pattern = "01";
    d.eps = {0.2, 0.1, 0.05};
    d.T = 1.0;
    d.replicas = 10000;
  } else if (name == "lemma3-bound") {
    d.z_list = {0.25, 0.5, 1.0, 2.0};
    d.T = 2.0;
    d.replicas = 10000;
  } else if (name == "free-path") {
    d.span = 1.0;
    d.n = 20;
    d.T = 2.0;
    d.replicas = 10000;
  } else if (name == "ergodic") {
    d.b = 1.0;
    d.T = 10000.0;
    d.y0 = 0.5;
    d.replicas = 1;
  } else if (name == "stationary") {
    d.b = 1.0;
    d.times = {0.5, 2.0};
    d.replicas = 10000;
  } else if (name == "order-stats") {
    d.n = 5;
    d.b = 1.0;
    d.T = 1.0;
    d.ranks = {1, 3, 5};
    d.replicas = 10000;
  } else if (name == "collision-rate") {
    d.n = 5;
    d.b = 1.0;
    d.T = 100.0;
    d.replicas = 1000;
  } else if (name == "reflect-density") {
    d.b = 1.0;
    d.times = {1.0, 10.0};
    d.y_list = {0.2, 0.5};
  } else if (name == "levy-identity") {
    d.s_list = {0.5, 1.0, 2.0};
    d.z_list = {0.5, 1.0, 2.0};
  } else if (name == "tail") {
    d.z = 1.0;
    d.pattern = "01";
    d.replicas = 100000;
    d.t_max = 1000.0;
    d.t_min = 10.0;
    d.alpha = {0.0, 0.25, 0.5, 0.75};
    d.times = {50.0, 100.0};
  } else if (name == "analytic-grid") {
    d.z = 1.0;
    d.grid = linspace(0.0, 10.0, 201);
  }
  return d;
}

// ---------------------------------------------------------------------------
// Output helpers

std::string cell(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}
// Short form for names built from numbers.
std::string tag(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", x);
  return buf;
}

std::string cell(std::size_t x) { return std::to_string(x); }
std::string cell(int x) { return std::to_string(x); }
std::string cell(bool x) { return x ? "1" : "0"; }
std::string cell(const std::string& x) { return x; }

class Csv {
public:
  Csv(const fs::path& path, const std::vector<std::string>& header) : path_(path), out_(path) {
    if (!out_) throw std::runtime_error("cannot write " + path.string());
    line(header);
  }

  template <class... Cells>
  void row(const Cells&... cells) {
    line({cell(cells)...});
  }

  void line(const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (i) out_ << ',';
      out_ << cells[i];
    }
    out_ << '\n';
  }

  void close() {
    out_.close();
    if (!out_) throw std::runtime_error("error writing " + path_.string());
  }

private:
  fs::path path_;
  std::ofstream out_;
};

json bound(std::optional<double> b) { return b ? json(*b) : json(nullptr); }

json ks_json(const std::string& name, const stats::KsReport& r) {
  return {{"name", name},         {"statistic", r.statistic}, {"threshold", r.threshold},
          {"n_effective", r.n_effective}, {"level", r.level}, {"pass", r.pass}};
}

std::uint64_t block(std::uint64_t k) { return k << 32; }

struct Context {
  ExperimentConfig cfg;
  RunReport& report;
  fs::path dir;
  Constants constants;

  Csv csv(const std::string& name, const std::vector<std::string>& header) {
    report.artifacts.push_back(name);
    return Csv(dir / name, header);
  }

  void verdict(const std::string& name, double value, std::optional<double> lower,
               std::optional<double> upper) {
    report.verdicts.push_back({name, value, lower, upper, within(value, lower, upper)});
  }

  void ks(const std::string& name, const stats::KsReport& r) {
    report.ks.push_back(ks_json(name, r));
    verdict("ks_" + name, r.statistic, std::nullopt, r.threshold);
  }

  template <class Fn>
  auto replicas(std::size_t count, std::uint64_t stream_base, Fn&& fn) {
    return run_replicas(count, cfg.workers, *cfg.seed, stream_base, std::forward<Fn>(fn));
  }

  Params params() const { return make_params(*cfg.v, *cfg.lambda); }
  double level() const { return *cfg.level; }
};

// ---------------------------------------------------------------------------
// Shared pieces

std::vector<sim::MeetingOutcome> meetings(Context& ctx, PatternPair pattern, double z,
                                          const Params& params, double t_max,
                                          std::uint64_t stream_base) {
  return ctx.replicas(*ctx.cfg.replicas, stream_base, [&](sim::RngStream& rng, std::size_t) {
    return sim::simulate_first_meeting(pattern, z, params, t_max, rng);
  });
}

stats::EmpiricalSample sample_of(const std::vector<sim::MeetingOutcome>& outcomes) {
  std::vector<double> values;
  std::vector<bool> censored;
  values.reserve(outcomes.size());
  censored.reserve(outcomes.size());
  for (const auto& o : outcomes) {
    values.push_back(o.time);
    censored.push_back(o.censored);
  }
  return stats::EmpiricalSample::from(std::move(values), std::move(censored));
}

stats::KsReport ks_against(const stats::EmpiricalSample& sample, const MixedDistribution& law,
                           double level) {
  const std::vector<double> at = law.cdf_sorted(sample.values);
  std::vector<double> left(at.size());
  for (std::size_t i = 0; i < at.size(); ++i)
    left[i] = sample.values[i] <= law.atom_time() ? 0.0 : at[i];
  return stats::ks_one_sample_tabulated(sample, at, left, level);
}

double mean_of(const std::vector<double>& x) {
  return std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(x.size());
}

// Standard error of a mean; zero for fewer than two values.
double standard_error(const std::vector<double>& x) {
  if (x.size() < 2) return 0.0;
  const double m = mean_of(x);
  double ss = 0.0;
  for (double v : x) ss += (v - m) * (v - m);
  return std::sqrt(ss / static_cast<double>(x.size() - 1) / static_cast<double>(x.size()));
}

std::vector<PatternPair> patterns_or(const ExperimentConfig& cfg, std::vector<PatternPair> all) {
  if (cfg.pattern) return {parse_pattern(*cfg.pattern)};
  return all;
}

std::vector<double> uniform_sites(sim::RngStream& rng, int n, double b) {
  std::vector<double> sites(static_cast<std::size_t>(n));
  for (double& s : sites) s = b * rng.uniform();
  std::sort(sites.begin(), sites.end());
  return sites;
}

// ---------------------------------------------------------------------------
// Experiments

void first_meeting(Context& ctx) {
  const auto& c = ctx.cfg;
  const Params params = ctx.params();
  const PatternPair pattern = parse_pattern(*c.pattern);
  const double z = *c.z;
  const auto outcomes = meetings(ctx, pattern, z, params, *c.t_max, 0);
  const MixedDistribution law(pattern, z, params, ctx.constants);
  const auto sample = sample_of(outcomes);

  auto samples = ctx.csv("samples.csv", {"replica", "time", "censored", "at_atom"});
  std::size_t atoms = 0;
  std::size_t early = 0;
  for (std::size_t i = 0; i < outcomes.size(); ++i) {
    const auto& o = outcomes[i];
    samples.row(i, o.time, o.censored, o.at_atom);
    atoms += o.at_atom;
    early += !o.censored && o.time < law.atom_time();
  }
  samples.close();

  const double n = static_cast<double>(outcomes.size());
  const double freq = static_cast<double>(atoms) / n;
  ctx.report.estimates["atom_frequency"] = freq;
  ctx.report.estimates["censored_fraction"] = sample.censored_fraction();
  ctx.report.estimates["meetings_before_t0"] = early;
  ctx.report.reference["atom_time"] = law.atom_time();
  ctx.report.reference["atom_mass"] = law.atom_mass();
  if (pattern == PatternPair::approach()) {
    const double p = std::exp(-params.lambda * z / params.v);
    const double band = 3.0 * std::sqrt(p * (1.0 - p) / n);
    ctx.verdict("atom_frequency", freq, p - band, p + band);
  } else {
    ctx.verdict("meetings_before_t0", static_cast<double>(early), std::nullopt, 0.0);
  }
  ctx.ks("analytic_cdf", ks_against(sample, law, ctx.level()));

  if (pattern.k1 == pattern.k2) {
    const PatternPair mirror{1 - pattern.k1, 1 - pattern.k2};
    const auto other = sample_of(meetings(ctx, mirror, z, params, *c.t_max, block(1)));
    ctx.ks("symmetry_" + to_string(pattern) + "_" + to_string(mirror),
           stats::ks_two_sample(sample, other, ctx.level()));
  }

  const double t0 = law.atom_time();
  const std::vector<double> grid =
      c.grid ? *c.grid : linspace(t0, t0 + 10.0 * (t0 + 1.0 / params.lambda), 201);
  const auto analytic_cdf = law.cdf_sorted(grid);
  auto table = ctx.csv("cdf.csv", {"t", "empirical_cdf", "analytic_cdf"});
  for (std::size_t i = 0; i < grid.size(); ++i)
    table.row(grid[i], stats::ecdf(sample, grid[i]), analytic_cdf[i]);
  table.close();
}

void laplace_check(Context& ctx) {
  const auto& c = ctx.cfg;
  const Params params = ctx.params();
  const double z = *c.z;
  const double t_max = *c.t_max;
  auto table = ctx.csv("laplace.csv", {"pattern", "s", "mc_mean", "standard_error", "phi",
                                       "quadrature"});
  const auto patterns = patterns_or(c, {kAllPatterns.begin(), kAllPatterns.end()});
  for (std::size_t p = 0; p < patterns.size(); ++p) {
    const PatternPair pattern = patterns[p];
    const auto outcomes = meetings(ctx, pattern, z, params, t_max, block(p));
    const MixedDistribution law(pattern, z, params);
    for (double s : *c.s_list) {
      std::vector<double> values;
      values.reserve(outcomes.size());
      // A censored draw contributes 0; the bias is below exp(-s t_max).
      for (const auto& o : outcomes) values.push_back(o.censored ? 0.0 : std::exp(-s * o.time));
      const auto ci = stats::mc_mean_ci(values, 0.99);
      const double exact = analytic::phi(pattern, s, z, params);
      const double quad = law.laplace(s);
      table.row(to_string(pattern), s, ci.mean, ci.standard_error, exact, quad);
      const std::string label = to_string(pattern) + "_s" + tag(s);
      ctx.verdict("mc_transform_" + label, ci.mean, exact - 3.0 * ci.standard_error,
                  exact + 3.0 * ci.standard_error);
      ctx.verdict("quadrature_transform_" + label, std::abs(quad - exact), std::nullopt, 1e-8);
    }
  }
  table.close();
  ctx.report.reference["censoring_bias_bound"] = std::exp(-c.s_list->front() * t_max);
}

void kac(Context& ctx) {
  const auto& c = ctx.cfg;
  const PatternPair pattern = parse_pattern(*c.pattern);
  const double z = *c.z;
  const double diffusion = *c.c;
  const double s = c.s_list->front();
  const auto& eps = *c.eps;
  std::vector<double> distances;
  std::vector<double> transform_gaps;
  auto table = ctx.csv("kac.csv", {"eps", "v", "lambda", "ks_distance", "ks_threshold",
                                   "transform_distance"});
  for (std::size_t i = 0; i < eps.size(); ++i) {
    const Params params = kac_params(eps[i], diffusion);
    const auto sample = sample_of(meetings(ctx, pattern, z, params, *c.t_max, block(i)));
    const auto report = stats::ks_one_sample(
        sample,
        [&](double t) { return analytic::wiener_meeting_cdf(t, z, diffusion, ctx.constants); },
        ctx.level());
    const double gap = std::abs(analytic::phi(pattern, s, z, params) -
                                analytic::wiener_meeting_laplace(s, z, diffusion, ctx.constants));
    distances.push_back(report.statistic);
    transform_gaps.push_back(gap);
    ctx.report.ks.push_back(ks_json("wiener_eps" + tag(eps[i]), report));
    table.row(eps[i], params.v, params.lambda, report.statistic, report.threshold, gap);
  }
  table.close();
  std::size_t ks_breaks = 0;
  std::size_t transform_breaks = 0;
  for (std::size_t i = 1; i < eps.size(); ++i) {
    ks_breaks += !(distances[i] < distances[i - 1]);
    transform_breaks += !(transform_gaps[i] < transform_gaps[i - 1]);
  }
  ctx.report.estimates["ks_distances"] = distances;
  ctx.report.reference["transform_distances"] = transform_gaps;
  ctx.verdict("ks_not_decreasing_steps", static_cast<double>(ks_breaks), std::nullopt, 0.0);
  ctx.verdict("ks_final", distances.back(), std::nullopt, 0.05);
  ctx.verdict("transform_not_decreasing_steps", static_cast<double>(transform_breaks),
              std::nullopt, 0.0);
}

void renewal(Context& ctx) {
  const auto& c = ctx.cfg;
  const Params params = ctx.params();
  const PatternPair pattern = parse_pattern(*c.pattern);
  const double z = *c.z;
  const double horizon = *c.T;
  const auto runs = ctx.replicas(*c.replicas, 0, [&](sim::RngStream& rng, std::size_t) {
    return sim::two_particle_collision_times(pattern, z, params, horizon, rng);
  });
  std::vector<double> counts;
  counts.reserve(runs.size());
  for (const auto& r : runs) counts.push_back(static_cast<double>(r.size()));
  const auto ci = stats::mc_mean_ci(counts, 0.99);
  const double exact = analytic::renewal_H(pattern, horizon, z, params);
  ctx.report.estimates["mean_collisions"] = ci.mean;
  ctx.report.estimates["standard_error"] = ci.standard_error;
  ctx.report.reference["renewal_H"] = exact;
  ctx.verdict("relative_error", std::abs(ci.mean / exact - 1.0), std::nullopt, 0.05);

  const std::vector<double> grid = c.grid ? *c.grid : linspace(0.0, horizon, 51);
  auto table = ctx.csv("renewal.csv", {"t", "mc_mean", "renewal_H"});
  for (double t : grid) {
    double total = 0.0;
    for (const auto& r : runs)
      total += static_cast<double>(std::upper_bound(r.begin(), r.end(), t) - r.begin());
    table.row(t, total / static_cast<double>(runs.size()),
              analytic::renewal_H(pattern, t, z, params));
  }
  table.close();
}

void renewal_scaling(Context& ctx) {
  const auto& c = ctx.cfg;
  const PatternPair pattern = parse_pattern(*c.pattern);
  const double z = *c.z;
  const double horizon = *c.T;
  const auto& eps = *c.eps;
  std::vector<double> scaled;
  auto table = ctx.csv("renewal_scaling.csv", {"eps", "mc_mean", "standard_error", "renewal_H",
                                               "eps_times_mc_mean"});
  for (std::size_t i = 0; i < eps.size(); ++i) {
    const Params params = kac_params(eps[i], *c.c);
    const auto counts = ctx.replicas(*c.replicas, block(i), [&](sim::RngStream& rng, std::size_t) {
      return static_cast<double>(
          sim::simulate_two_particle_collisions(pattern, z, params, horizon, rng));
    });
    const double mean = mean_of(counts);
    const double exact = analytic::renewal_H(pattern, horizon, z, params);
    scaled.push_back(eps[i] * mean);
    table.row(eps[i], mean, standard_error(counts), exact, eps[i] * mean);
  }
  table.close();
  const double centre = mean_of(scaled);
  double spread = 0.0;
  for (double x : scaled) spread = std::max(spread, std::abs(x / centre - 1.0));
  ctx.report.estimates["eps_times_H"] = scaled;
  ctx.verdict("scaled_spread", spread, std::nullopt, 0.25);
}

void lemma3_bound(Context& ctx) {
  const auto& c = ctx.cfg;
  const Params params = ctx.params();
  const double horizon = *c.T;
  const double constant = lemma3_constant(horizon, params);
  ctx.report.reference["C"] = constant;
  const auto patterns = patterns_or(c, {PatternPair::approach(), PatternPair::separate()});
  auto table = ctx.csv("lemma3.csv", {"pattern", "z", "mc_mean", "standard_error",
                                      "analytic_mean", "bound"});
  std::uint64_t k = 0;
  for (PatternPair pattern : patterns) {
    for (double z : *c.z_list) {
      const auto outcomes = meetings(ctx, pattern, z, params, horizon, block(k++));
      std::vector<double> capped;
      capped.reserve(outcomes.size());
      for (const auto& o : outcomes) capped.push_back(o.time);
      const double mean = mean_of(capped);
      const double se = standard_error(capped);
      const MixedDistribution law(pattern, z, params);
      const double exact =
          law.atom_mass() * law.atom_time() +
          numerics::integrate([&](double t) { return t * law.density(t); }, law.atom_time(),
                              std::max(law.atom_time(), horizon), 1e-11)
              .value +
          horizon * (1.0 - law.cdf(horizon));
      table.row(to_string(pattern), z, mean, se, exact, constant * z);
      ctx.verdict("bound_" + to_string(pattern) + "_z" + tag(z), mean - 3.0 * se, std::nullopt,
                  constant * z);
    }
  }
  table.close();
}

void free_path(Context& ctx) {
  const auto& c = ctx.cfg;
  const Params params = ctx.params();
  const double span = *c.span;
  const int gaps = *c.n;
  const double horizon = *c.T;
  if (gaps < 2) throw ValidationError("free-path needs n >= 2");
  GasConfig gas;
  gas.params = params;
  for (int k = 0; k <= gaps; ++k) gas.positions.push_back(span * (1.0 - std::ldexp(1.0, -k)));
  validate(gas);

  const auto runs = ctx.replicas(*c.replicas, 0, [&](sim::RngStream& rng, std::size_t) {
    return sim::simulate_gas(gas, horizon, rng, false).free_path_times;
  });
  const double constant = lemma3_constant(horizon, params);
  const auto m = static_cast<std::size_t>(gaps);

  std::vector<double> partial_per_replica(runs.size(), 0.0);
  std::vector<double> increments;
  std::vector<double> increment_errors;
  std::vector<double> partial_sums;
  std::size_t breaks = 0;
  double worst = -std::numeric_limits<double>::infinity();
  auto table = ctx.csv("free_path.csv", {"k", "gap", "mean_tau", "standard_error", "bound",
                                         "partial_sum", "partial_standard_error"});
  for (std::size_t k = 0; k < m; ++k) {
    std::vector<double> tau(runs.size());
    for (std::size_t r = 0; r < runs.size(); ++r) {
      tau[r] = runs[r][k];
      partial_per_replica[r] += tau[r];
    }
    const double gap = gas.positions[k + 1] - gas.positions[k];
    const double mean = mean_of(tau);
    const double partial = mean_of(partial_per_replica);
    const double partial_se = standard_error(partial_per_replica);
    if (!partial_sums.empty() && partial < partial_sums.back()) ++breaks;
    increments.push_back(mean);
    increment_errors.push_back(standard_error(tau));
    partial_sums.push_back(partial);
    worst = std::max(worst, partial - 3.0 * partial_se);
    table.row(k + 1, gap, mean, standard_error(tau), constant * gap, partial, partial_se);
  }
  table.close();

  // Geometric decay: exp of the least-squares slope of log increment on k.
  std::vector<double> xs;
  std::vector<double> ys;
  for (std::size_t k = 0; k < increments.size(); ++k) {
    if (increments[k] > 0.0) {
      xs.push_back(static_cast<double>(k + 1));
      ys.push_back(std::log(increments[k]));
    }
  }
  double ratio = std::numeric_limits<double>::quiet_NaN();
  if (xs.size() >= 2) {
    const double mx = mean_of(xs);
    const double my = mean_of(ys);
    double sxy = 0.0;
    double sxx = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
      sxy += (xs[i] - mx) * (ys[i] - my);
      sxx += (xs[i] - mx) * (xs[i] - mx);
    }
    ratio = std::exp(sxy / sxx);
  }

  // Steps where an increment exceeds its predecessor by more than 3 combined SE.
  std::size_t growth = 0;
  for (std::size_t k = 1; k < increments.size(); ++k) {
    const double noise = std::hypot(increment_errors[k], increment_errors[k - 1]);
    growth += increments[k] > increments[k - 1] + 3.0 * noise;
  }

  ctx.report.reference["C"] = constant;
  ctx.report.reference["bound"] = constant * span;
  ctx.report.estimates["mean_free_paths"] = increments;
  ctx.report.estimates["partial_sums"] = partial_sums;
  ctx.report.estimates["partial_sum_with_first"] = horizon + partial_sums.back();
  ctx.report.estimates["decay_ratio"] = ratio;
  ctx.verdict("partial_sums_decreasing_steps", static_cast<double>(breaks), std::nullopt, 0.0);
  ctx.verdict("partial_sums_minus_3se", worst, std::nullopt, constant * span);
  ctx.verdict("increment_decay_ratio", ratio, std::nullopt, 0.9);
  ctx.verdict("increment_growth_steps", static_cast<double>(growth), std::nullopt, 0.0);
}

void ergodic(Context& ctx) {
  const auto& c = ctx.cfg;
  const Params params = ctx.params();
  const double b = *c.b;
  const double y0 = *c.y0;
  const double horizon = *c.T;
  const auto runs = ctx.replicas(*c.replicas, 0, [&](sim::RngStream& rng, std::size_t) {
    sim::RngStream same_path = rng;
    const double first = sim::time_average([](double x) { return 0.5 * x * x; }, y0, params, b,
                                           horizon, same_path);
    const double second = sim::time_average([](double x) { return x * x * x / 3.0; }, y0,
                                            params, b, horizon, rng);
    return std::pair{first, second};
  });
  auto table = ctx.csv("ergodic.csv", {"replica", "average_x", "average_x2"});
  std::vector<double> first;
  std::vector<double> second;
  for (std::size_t i = 0; i < runs.size(); ++i) {
    table.row(i, runs[i].first, runs[i].second);
    first.push_back(runs[i].first);
    second.push_back(runs[i].second);
  }
  table.close();
  const double m1 = mean_of(first);
  const double m2 = mean_of(second);
  ctx.report.estimates["average_x"] = m1;
  ctx.report.estimates["average_x2"] = m2;
  ctx.verdict("average_x", m1, 0.5 * b - 0.01, 0.5 * b + 0.01);
  ctx.verdict("average_x2", m2, b * b / 3.0 - 0.01, b * b / 3.0 + 0.01);
}

void stationary(Context& ctx) {
  const auto& c = ctx.cfg;
  const Params params = ctx.params();
  const double b = *c.b;
  auto table = ctx.csv("stationary.csv", {"t", "ks_distance", "ks_threshold"});
  const auto& times = *c.times;
  for (std::size_t i = 0; i < times.size(); ++i) {
    const double t = times[i];
    auto values = ctx.replicas(*c.replicas, block(i), [&](sim::RngStream& rng, std::size_t) {
      return sim::sample_reflected_position(t, c.y0, params, b, rng);
    });
    const auto sample = stats::EmpiricalSample::from(std::move(values));
    const auto report = stats::ks_one_sample(
        sample, [b](double x) { return std::clamp(x / b, 0.0, 1.0); }, ctx.level());
    ctx.ks("uniform_t" + tag(t), report);
    table.row(t, report.statistic, report.threshold);
  }
  table.close();
}

// P(at least r of the events) by listing all 2^n outcomes.
double enumerate_order_cdf(int rank, const std::vector<double>& p) {
  const std::size_t n = p.size();
  double total = 0.0;
  for (std::size_t mask = 0; mask < (std::size_t{1} << n); ++mask) {
    double prob = 1.0;
    int hits = 0;
    for (std::size_t i = 0; i < n; ++i) {
      if (mask >> i & 1) {
        prob *= p[i];
        ++hits;
      } else {
        prob *= 1.0 - p[i];
      }
    }
    if (hits >= rank) total += prob;
  }
  return total;
}

void order_stats(Context& ctx) {
  const auto& c = ctx.cfg;
  const Params params = ctx.params();
  const int n = *c.n;
  const double b = *c.b;
  const double horizon = *c.T;
  for (int r : *c.ranks)
    if (r < 1 || r > n) throw ValidationError("ranks must lie in [1, n]");
  const auto runs = ctx.replicas(*c.replicas, 0, [&](sim::RngStream& rng, std::size_t) {
    GasConfig gas;
    gas.params = params;
    gas.boundary = b;
    gas.positions = uniform_sites(rng, n, b);
    auto positions = sim::simulate_gas(gas, horizon, rng, false).final_positions;
    std::sort(positions.begin(), positions.end());
    return positions;
  });
  std::vector<std::string> header{"replica"};
  for (int k = 1; k <= n; ++k) header.push_back("rank" + std::to_string(k));
  auto table = ctx.csv("order_stats.csv", header);
  for (std::size_t i = 0; i < runs.size(); ++i) {
    std::vector<std::string> cells{cell(i)};
    for (double x : runs[i]) cells.push_back(cell(x));
    table.line(cells);
  }
  table.close();

  for (int r : *c.ranks) {
    std::vector<double> values;
    values.reserve(runs.size());
    for (const auto& positions : runs) values.push_back(positions[static_cast<std::size_t>(r - 1)]);
    const auto sample = stats::EmpiricalSample::from(std::move(values));
    ctx.ks("rank" + std::to_string(r),
           stats::ks_one_sample(
               sample,
               [&](double x) { return analytic::uniform_order_stat_cdf(r, n, x, b); },
               ctx.level()));
  }

  const std::vector<std::vector<double>> cases{
      {0.13, 0.58, 0.91}, {0.02, 0.5, 0.97}, {0.3, 0.3, 0.7}, {1e-3, 0.999, 0.42}};
  double worst = 0.0;
  for (const auto& p : cases)
    for (int r = 1; r <= 3; ++r)
      worst = std::max(worst, std::abs(analytic::order_stat_cdf(r, p) - enumerate_order_cdf(r, p)));
  ctx.verdict("order_cdf_vs_enumeration", worst, std::nullopt, 1e-12);
}

void collision_rate(Context& ctx) {
  const auto& c = ctx.cfg;
  const Params params = ctx.params();
  const double b = *c.b;
  const double horizon = *c.T;
  const int n = *c.n;
  const auto crossings = [&](int particles, std::uint64_t base) {
    return ctx.replicas(*c.replicas, base, [&, particles](sim::RngStream& rng, std::size_t) {
      GasConfig gas;
      gas.params = params;
      gas.boundary = b;
      gas.positions = uniform_sites(rng, particles, b);
      return static_cast<double>(sim::simulate_gas(gas, horizon, rng, false).total_crossings());
    });
  };
  const auto pair_runs = crossings(2, block(0));
  const auto gas_runs = crossings(n, block(1));
  auto table = ctx.csv("collision_rate.csv", {"replica", "crossings_2", "crossings_n"});
  for (std::size_t i = 0; i < pair_runs.size(); ++i) table.row(i, pair_runs[i], gas_runs[i]);
  table.close();

  const double rate = mean_of(pair_runs) / horizon;
  const auto bounds = collision_rate_bounds(params.v, b);
  const double predicted = 0.5 * n * (n - 1) * rate * horizon;
  const double observed = mean_of(gas_runs);
  ctx.report.estimates["pair_rate"] = rate;
  ctx.report.estimates["pair_rate_standard_error"] = standard_error(pair_runs) / horizon;
  ctx.report.estimates["gas_mean_collisions"] = observed;
  ctx.report.reference["predicted_gas_collisions"] = predicted;
  ctx.verdict("pair_rate", rate, bounds.lower, bounds.upper);
  ctx.verdict("gas_relative_error", std::abs(observed / predicted - 1.0), std::nullopt, 0.1);
}

// Points of [0, b] of the form 2kb +- a +- reach, where an image density jumps.
std::vector<double> image_breaks(double a, double reach, double b) {
  std::vector<double> pts{0.0, b};
  const auto kmax = static_cast<long>(std::ceil((a + reach + b) / (2.0 * b))) + 1;
  for (long k = -kmax; k <= kmax; ++k)
    for (double s1 : {1.0, -1.0})
      for (double s2 : {1.0, -1.0}) {
        const double w = 2.0 * b * static_cast<double>(k) + s1 * a + s2 * reach;
        if (w > 0.0 && w < b) pts.push_back(w);
      }
  std::sort(pts.begin(), pts.end());
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
  return pts;
}

double integrate_pieces(const std::function<double(double)>& f, const std::vector<double>& pts) {
  double total = 0.0;
  for (std::size_t i = 1; i < pts.size(); ++i)
    total += numerics::integrate(f, pts[i - 1], pts[i], 1e-14).value;
  return total;
}

void reflect_density(Context& ctx) {
  const auto& c = ctx.cfg;
  analytic::ReflectingDensityParams rp;
  rp.b = *c.b;
  rp.params = ctx.params();
  const double b = rp.b;
  const double t = c.times->front();
  const double t_long = c.times->back();
  const std::vector<double> grid = c.grid ? *c.grid : linspace(0.0, b, 201);

  json norms = json::array();
  for (double y : *c.y_list) {
    const double continuous =
        integrate_pieces([&](double x) { return analytic::reflecting_density(t, x, y, rp); },
                         image_breaks(y, rp.params.v * t, b));
    const auto atoms = analytic::reflecting_atoms(t, y, rp);
    const double total = continuous + atoms[0].mass + atoms[1].mass;
    norms.push_back({{"y", y}, {"continuous", continuous}, {"total", total}});
    ctx.verdict("normalization_y" + tag(y), total, 1.0 - 1e-4, 1.0 + 1e-4);
  }
  ctx.report.estimates["normalization"] = norms;

  // Averaged over a uniform start, each no-switch atom spreads into density
  // e^{-lt} / (2b).
  double mixture_gap = 0.0;
  for (double x : grid) {
    const double mixed =
        (integrate_pieces([&](double y) { return analytic::reflecting_density(t, x, y, rp); },
                          image_breaks(x, rp.params.v * t, b)) +
         std::exp(-rp.params.lambda * t)) /
        b;
    mixture_gap = std::max(mixture_gap, std::abs(mixed - 1.0 / b));
  }
  ctx.verdict("mixture_uniformity", mixture_gap, std::nullopt, 1e-8);

  auto table = ctx.csv("reflect_density.csv", {"t", "y", "x", "density"});
  double sup_gap = 0.0;
  for (double time : {t, t_long}) {
    for (double y : *c.y_list) {
      for (double x : grid) {
        const double p = analytic::reflecting_density(time, x, y, rp);
        table.row(time, y, x, p);
        if (time == t_long) sup_gap = std::max(sup_gap, std::abs(p - 1.0 / b));
      }
    }
  }
  table.close();
  ctx.report.reference["atom_mass_long"] = std::exp(-rp.params.lambda * t_long);
  ctx.verdict("long_time_sup_deviation", sup_gap, std::nullopt, 1e-6);

  try {
    const double value = analytic::reflecting_series(t_long, grid[grid.size() / 2],
                                                     c.y_list->front(), rp);
    ctx.report.reference["cosine_series"] = {{"converged", true}, {"value", value}};
  } catch (const numerics::BudgetExceeded& e) {
    ctx.report.reference["cosine_series"] = {
        {"converged", false}, {"partial", e.partial()}, {"message", e.what()}};
  }
}

void levy_identity(Context& ctx) {
  const auto& c = ctx.cfg;
  const Params params = ctx.params();
  auto table = ctx.csv("levy.csv", {"s", "z", "residual"});
  double worst = 0.0;
  for (double s : *c.s_list) {
    for (double z : *c.z_list) {
      const double r = analytic::levy_identity_residual(s, z, params, ctx.constants);
      table.row(s, z, r);
      worst = std::max(worst, std::abs(r));
    }
  }
  table.close();
  ctx.verdict("max_residual", worst, std::nullopt, 1e-6);
}

void tail(Context& ctx) {
  const auto& c = ctx.cfg;
  const Params params = ctx.params();
  const PatternPair pattern = parse_pattern(*c.pattern);
  const double z = *c.z;
  const MixedDistribution law(pattern, z, params);
  const double t1 = c.times->front();
  const double t2 = c.times->back();
  const double ratio = law.survival(t2) / law.survival(t1);
  const double expected = std::sqrt(t1 / t2);
  ctx.report.reference["survival_ratio"] = ratio;
  ctx.report.reference["tail_constant"] = law.tail_constant();
  ctx.verdict("survival_ratio", ratio, 0.95 * expected, 1.05 * expected);

  const auto sample = sample_of(meetings(ctx, pattern, z, params, *c.t_max, 0));
  const double slope = stats::tail_slope(sample, *c.t_min);
  ctx.report.estimates["tail_slope"] = slope;
  ctx.report.estimates["censored_fraction"] = sample.censored_fraction();
  ctx.verdict("tail_slope", slope, -0.6, -0.4);

  std::size_t mismatches = 0;
  json moments = json::array();
  for (double a : *c.alpha) {
    const auto m = analytic::moment_alpha(a, pattern, z, params, *c.t_max);
    const bool should_diverge = a >= 0.5;
    mismatches += m.diverges != should_diverge || (!m.diverges && !std::isfinite(m.extrapolated));
    moments.push_back({{"alpha", a},
                       {"partial", m.partial},
                       {"extrapolated", m.diverges ? json(nullptr) : json(m.extrapolated)},
                       {"diverges", m.diverges}});
  }
  ctx.report.reference["moments"] = moments;
  ctx.verdict("moment_flag_mismatches", static_cast<double>(mismatches), std::nullopt, 0.0);

  auto table = ctx.csv("survival.csv", {"t", "analytic_survival", "empirical_survival"});
  for (double e = 0.0; e <= 3.0 + 1e-9; e += 0.1) {
    const double t = std::pow(10.0, e);
    table.row(t, law.survival(t), 1.0 - stats::ecdf(sample, t));
  }
  table.close();
}

void analytic_grid(Context& ctx) {
  const auto& c = ctx.cfg;
  const Params params = ctx.params();
  const double z = *c.z;
  for (PatternPair pattern : kAllPatterns) {
    const std::string name = "density_" + to_string(pattern) + ".csv";
    ctx.report.artifacts.push_back(name);
    emit_density_grid(MixedDistribution(pattern, z, params, ctx.constants), *c.grid,
                      ctx.dir / name);
  }
  json masses = json::object();
  for (PatternPair pattern : kAllPatterns) {
    const MixedDistribution law(pattern, z, params);
    const double total = law.atom_mass() + law.continuous_mass();
    masses[to_string(pattern)] = total;
    const double tol = pattern == PatternPair::approach() ? 1e-6 : 1e-4;
    ctx.verdict("normalization_" + to_string(pattern), total, 1.0 - tol, 1.0 + tol);
  }
  ctx.report.estimates["total_mass"] = masses;

  const MixedDistribution corrected(PatternPair::approach(), z, params);
  const MixedDistribution literal(PatternPair::approach(), z, params, Constants::paper_literal);
  const double literal_continuous = literal.continuous_mass();
  const double literal_total = literal.atom_mass() + literal_continuous;
  const double scaled_ratio =
      literal_continuous / corrected.continuous_mass() * 4.0 * params.v * params.v;
  ctx.report.estimates["literal_total_mass"] = literal_total;
  ctx.verdict("literal_continuous_ratio_times_4v2", scaled_ratio, 1.0 - 1e-6, 1.0 + 1e-6);
  ctx.verdict("literal_normalization_gap", std::abs(1.0 - literal_total), 1e-6, std::nullopt);
}

const std::map<std::string, std::function<void(Context&)>>& registry() {
  static const std::map<std::string, std::function<void(Context&)>> table{
      {"first-meeting", first_meeting},   {"laplace-check", laplace_check},
      {"kac", kac},                       {"renewal", renewal},
      {"renewal-scaling", renewal_scaling}, {"lemma3-bound", lemma3_bound},
      {"free-path", free_path},           {"ergodic", ergodic},
      {"stationary", stationary},         {"order-stats", order_stats},
      {"collision-rate", collision_rate}, {"reflect-density", reflect_density},
      {"levy-identity", levy_identity},   {"tail", tail},
      {"analytic-grid", analytic_grid}};
  return table;
}

}  // namespace

const std::vector<std::string>& experiment_names() {
  static const std::vector<std::string> names{
      "first-meeting", "laplace-check", "kac",          "renewal",        "renewal-scaling",
      "lemma3-bound",  "free-path",     "ergodic",      "stationary",     "order-stats",
      "collision-rate", "reflect-density", "levy-identity", "tail",       "analytic-grid"};
  return names;
}

json to_json(const ExperimentConfig& config) {
  json j;
  j["experiment"] = config.experiment;
  j["paper_literal"] = config.paper_literal;
  visit_fields(config, [&j](const char* key, const auto& field) {
    if (field) j[key] = *field;
  });
  return j;
}

ExperimentConfig config_from_json(const json& j) {
  if (!j.is_object()) throw ValidationError("config must be a JSON object");
  ExperimentConfig config;
  std::map<std::string, std::function<void(const json&)>> setters;
  visit_fields(config, [&setters](const char* key, auto& field) {
    setters[key] = [&field](const json& value) {
      field = value.get<typename std::decay_t<decltype(field)>::value_type>();
    };
  });
  for (const auto& [key, value] : j.items()) {
    if (key == "experiment") {
      config.experiment = value.get<std::string>();
    } else if (key == "paper_literal") {
      config.paper_literal = value.get<bool>();
    } else if (key == "workers") {
      config.workers = value.get<unsigned>();
    } else if (key == "out") {
      config.out_dir = value.get<std::string>();
    } else if (auto it = setters.find(key); it != setters.end()) {
      try {
        it->second(value);
      } catch (const json::exception& e) {
        throw ValidationError("config key '" + key + "': " + e.what());
      }
    } else {
      throw ValidationError("unknown config key '" + key + "'");
    }
  }
  return config;
}

ExperimentConfig merge(ExperimentConfig base, const ExperimentConfig& overrides) {
  if (!overrides.experiment.empty()) base.experiment = overrides.experiment;
  base.paper_literal = base.paper_literal || overrides.paper_literal;
  visit_fields(base, [&](const char* key, auto& field) {
    visit_fields(overrides, [&](const char* other_key, const auto& other) {
      if constexpr (std::is_same_v<std::decay_t<decltype(field)>, std::decay_t<decltype(other)>>) {
        if (std::string_view(key) == other_key && other) field = other;
      }
    });
  });
  return base;
}

ExperimentConfig resolve(const ExperimentConfig& config) {
  if (!registry().contains(config.experiment)) {
    std::string list;
    for (const auto& name : experiment_names()) list += (list.empty() ? "" : ", ") + name;
    throw ValidationError("unknown experiment '" + config.experiment + "' (expected one of " +
                          list + ")");
  }
  if (!config.seed) throw ValidationError("a seed is required (--seed N)");
  if (config.workers < 1) throw ValidationError("workers must be >= 1");
  ExperimentConfig defaults = defaults_for(config.experiment);
  defaults.experiment = config.experiment;
  defaults.workers = config.workers;
  defaults.out_dir = config.out_dir;
  ExperimentConfig resolved = merge(defaults, config);
  resolved.workers = config.workers;
  resolved.out_dir = config.out_dir;
  if (resolved.replicas && *resolved.replicas < 1) throw ValidationError("replicas must be >= 1");
  if (resolved.v || resolved.lambda) {
    if (!resolved.v || !resolved.lambda)
      throw ValidationError("v and lambda must be given together");
    make_params(*resolved.v, *resolved.lambda);
  }
  if (resolved.grid && !std::is_sorted(resolved.grid->begin(), resolved.grid->end()))
    throw ValidationError("grid must be sorted");
  if (resolved.pattern) parse_pattern(*resolved.pattern);
  return resolved;
}

bool within(double value, std::optional<double> lower, std::optional<double> upper) {
  if (std::isnan(value)) return false;
  if (lower && value < *lower) return false;
  if (upper && value > *upper) return false;
  return true;
}

bool RunReport::all_pass() const {
  return std::all_of(verdicts.begin(), verdicts.end(), [](const Verdict& v) { return v.pass; });
}

json RunReport::to_json() const {
  json vs = json::array();
  for (const auto& v : verdicts)
    vs.push_back({{"name", v.name},
                  {"value", v.value},
                  {"lower", bound(v.lower)},
                  {"upper", bound(v.upper)},
                  {"pass", v.pass}});
  return {{"experiment", experiment}, {"config", config},
          {"estimates", estimates},   {"ks", ks},
          {"reference", reference},   {"verdicts", vs},
          {"all_pass", all_pass()},   {"wall_time_seconds", wall_time_seconds},
          {"artifacts", artifacts}};
}

int exit_code(const RunReport& report) { return report.all_pass() ? 0 : 2; }

int reverify(const json& report) {
  bool ok = true;
  for (const auto& v : report.at("verdicts")) {
    const json& value = v.at("value");
    const auto opt = [](const json& b) -> std::optional<double> {
      if (b.is_null()) return std::nullopt;
      return b.get<double>();
    };
    const double x = value.is_null() ? std::numeric_limits<double>::quiet_NaN() : value.get<double>();
    ok = ok && within(x, opt(v.at("lower")), opt(v.at("upper")));
  }
  return ok ? 0 : 2;
}

void emit_density_grid(const MixedDistribution& law, std::span<const double> grid,
                       const fs::path& out) {
  if (!std::is_sorted(grid.begin(), grid.end()))
    throw ValidationError("density grid must be sorted");
  Csv csv(out, {"t", "density", "cdf", "atom"});
  const std::vector<double> cdf = law.cdf_sorted(grid);
  const double t0 = law.atom_time();
  bool atom_pending =
      law.atom_mass() > 0.0 && !grid.empty() && grid.front() <= t0 && t0 <= grid.back();
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (atom_pending && grid[i] >= t0) {
      csv.row(t0, law.atom_mass(), law.cdf(t0), 1);
      atom_pending = false;
    }
    csv.row(grid[i], law.density(grid[i]), cdf[i], 0);
  }
  csv.close();
}

RunReport run(const ExperimentConfig& config) {
  const ExperimentConfig resolved = resolve(config);
  RunReport report;
  report.experiment = resolved.experiment;
  report.config = to_json(resolved);
  const fs::path dir(resolved.out_dir);
  const auto start = std::chrono::steady_clock::now();
  try {
    fs::create_directories(dir);
    Context ctx{resolved, report, dir,
                resolved.paper_literal ? Constants::paper_literal : Constants::corrected};
    registry().at(resolved.experiment)(ctx);

    json echo = report.config;
    echo["workers"] = resolved.workers;
    echo["out"] = resolved.out_dir;
    report.artifacts.push_back("config.json");
    std::ofstream(dir / "config.json") << echo.dump(2) << '\n';
    report.artifacts.push_back("report.json");
    report.wall_time_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::ofstream file(dir / "report.json");
    file << report.to_json().dump(2) << '\n';
    if (!file) throw std::runtime_error("error writing " + (dir / "report.json").string());
  } catch (...) {
    std::error_code ignored;
    for (const auto& name : report.artifacts) fs::remove(dir / name, ignored);
    throw;
  }
  return report;
}

}  // namespace telegas::cli
