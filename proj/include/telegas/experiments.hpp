#pragma once

// Seeded experiment runner. Each experiment draws replicas in parallel,
// writes CSV tables and a report.json into the output directory, and turns
// its checks into verdicts of the form lower <= value <= upper.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "telegas/analytic.hpp"

namespace telegas::cli {

/// Names accepted by run(), in registry order.
const std::vector<std::string>& experiment_names();

/// Every scenario field is optional; resolve() fills the ones an experiment
/// uses from its defaults and leaves the rest empty.
struct ExperimentConfig {
  std::string experiment;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> replicas;
  unsigned workers = 1;
  std::string out_dir = "out";
  bool paper_literal = false;
  std::optional<double> level;

  std::optional<double> v;
  std::optional<double> lambda;
  std::optional<double> z;
  std::optional<std::string> pattern;
  std::optional<double> c;
  std::optional<int> n;
  std::optional<double> b;
  std::optional<double> T;
  std::optional<double> t_max;
  std::optional<double> t_min;
  std::optional<double> y0;
  std::optional<double> span;
  std::optional<std::vector<double>> eps;
  std::optional<std::vector<double>> alpha;
  std::optional<std::vector<double>> grid;
  std::optional<std::vector<double>> s_list;
  std::optional<std::vector<double>> z_list;
  std::optional<std::vector<double>> y_list;
  std::optional<std::vector<double>> times;
  std::optional<std::vector<int>> ranks;
};

/// Set fields only; keys are the flag names with '-' written as '_'.
nlohmann::json to_json(const ExperimentConfig& config);
/// Unknown keys are rejected. Fields absent from the JSON stay empty.
ExperimentConfig config_from_json(const nlohmann::json& j);
/// Copies every field set in `overrides` onto `base`.
ExperimentConfig merge(ExperimentConfig base, const ExperimentConfig& overrides);
/// Validates the experiment name and seed and fills the experiment's defaults.
ExperimentConfig resolve(const ExperimentConfig& config);

struct Verdict {
  std::string name;
  double value = 0.0;
  std::optional<double> lower;
  std::optional<double> upper;
  bool pass = false;
};

/// lower <= value <= upper, missing bounds ignored, NaN fails.
bool within(double value, std::optional<double> lower, std::optional<double> upper);

struct RunReport {
  std::string experiment;
  nlohmann::json config;
  nlohmann::json estimates = nlohmann::json::object();
  nlohmann::json ks = nlohmann::json::array();
  nlohmann::json reference = nlohmann::json::object();
  std::vector<Verdict> verdicts;
  double wall_time_seconds = 0.0;
  std::vector<std::string> artifacts;

  bool all_pass() const;
  nlohmann::json to_json() const;
};

/// Runs a resolved or unresolved config. On any exception the files written
/// so far are removed before the exception propagates.
RunReport run(const ExperimentConfig& config);

/// 0 when every verdict passes, 2 otherwise.
int exit_code(const RunReport& report);

/// Recomputes every verdict from its recorded value and bounds and returns
/// the exit code they imply.
int reverify(const nlohmann::json& report);

/// CSV `t,density,cdf,atom` on a nondecreasing grid. The atom, when it has
/// mass and t0 lies within the grid range, is an extra row with its mass in
/// the density column and atom = 1. An empty grid gives the header alone.
void emit_density_grid(const analytic::MixedDistribution& law, std::span<const double> grid,
                       const std::filesystem::path& out);

}  // namespace telegas::cli
