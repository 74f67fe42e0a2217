#include <cstdio>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "telegas/experiments.hpp"
#include "telegas/numerics.hpp"

namespace {

using telegas::cli::ExperimentConfig;

template <class T>
void set_if(CLI::Option* option, std::optional<T>& field, const T& value) {
  if (option->count() > 0) field = value;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Telegraph-particle collision experiments"};
  app.set_version_flag("--version", "telegas 1.0");

  std::string experiment;
  std::string config_path;
  std::uint64_t seed = 0;
  std::size_t replicas = 0;
  unsigned workers = 1;
  std::string out_dir = "out";
  bool paper_literal = false;
  double z = 0, v = 0, lambda = 0, c = 0, b = 0, horizon = 0, t_max = 0, t_min = 0, y0 = 0;
  double span = 0, level = 0;
  int n = 0;
  std::string pattern;
  std::vector<double> eps, alpha, grid, s_list, z_list, y_list, times;
  std::vector<int> ranks;

  std::string names;
  for (const auto& name : telegas::cli::experiment_names()) names += "\n  " + name;
  app.add_option("experiment", experiment, "Experiment to run:" + names)->required();
  auto* o_config = app.add_option("--config", config_path, "JSON config file (flags override it)");
  auto* o_seed = app.add_option("--seed", seed, "RNG seed (required here or in the config)");
  auto* o_replicas = app.add_option("--replicas", replicas, "Monte Carlo replicas");
  auto* o_workers = app.add_option("--workers", workers, "Worker threads")->check(CLI::PositiveNumber);
  auto* o_out = app.add_option("--out", out_dir, "Output directory");
  app.add_flag("--paper-literal", paper_literal, "Use the literal alternative constants");
  auto* o_z = app.add_option("--z", z, "Initial distance");
  auto* o_pattern = app.add_option("--pattern", pattern, "Regime pattern")
                        ->check(CLI::IsMember({"00", "01", "10", "11"}));
  auto* o_v = app.add_option("--v", v, "Speed");
  auto* o_lambda = app.add_option("--lambda", lambda, "Switching rate");
  auto* o_eps = app.add_option("--eps", eps, "Kac scaling parameters")->delimiter(',');
  auto* o_c = app.add_option("--c", c, "Diffusion coefficient under Kac scaling");
  auto* o_n = app.add_option("--n", n, "Particle count (gaps for free-path)");
  auto* o_b = app.add_option("--b", b, "Box length");
  auto* o_T = app.add_option("--T", horizon, "Time horizon");
  auto* o_alpha = app.add_option("--alpha", alpha, "Moment orders")->delimiter(',');
  auto* o_grid = app.add_option("--grid", grid, "Sorted evaluation grid")->delimiter(',');
  auto* o_t_max = app.add_option("--t-max", t_max, "Censoring horizon");
  auto* o_t_min = app.add_option("--t-min", t_min, "Lower end of the tail fit");
  auto* o_y0 = app.add_option("--y0", y0, "Start position");
  auto* o_span = app.add_option("--span", span, "Span of the free-path configuration");
  auto* o_level = app.add_option("--level", level, "KS level (0.05 or 0.01)");
  auto* o_s = app.add_option("--s-list", s_list, "Transform arguments")->delimiter(',');
  auto* o_zl = app.add_option("--z-list", z_list, "Distances")->delimiter(',');
  auto* o_yl = app.add_option("--y-list", y_list, "Start positions")->delimiter(',');
  auto* o_times = app.add_option("--times", times, "Times")->delimiter(',');
  auto* o_ranks = app.add_option("--ranks", ranks, "Order-statistic ranks")->delimiter(',');

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    ExperimentConfig base;
    if (o_config->count() > 0) {
      std::ifstream in(config_path);
      if (!in) throw std::runtime_error("cannot read config " + config_path);
      base = telegas::cli::config_from_json(nlohmann::json::parse(in));
    }
    ExperimentConfig flags;
    flags.experiment = experiment;
    flags.paper_literal = paper_literal;
    set_if(o_seed, flags.seed, seed);
    set_if(o_replicas, flags.replicas, replicas);
    set_if(o_z, flags.z, z);
    set_if(o_pattern, flags.pattern, pattern);
    set_if(o_v, flags.v, v);
    set_if(o_lambda, flags.lambda, lambda);
    set_if(o_eps, flags.eps, eps);
    set_if(o_c, flags.c, c);
    set_if(o_n, flags.n, n);
    set_if(o_b, flags.b, b);
    set_if(o_T, flags.T, horizon);
    set_if(o_alpha, flags.alpha, alpha);
    set_if(o_grid, flags.grid, grid);
    set_if(o_t_max, flags.t_max, t_max);
    set_if(o_t_min, flags.t_min, t_min);
    set_if(o_y0, flags.y0, y0);
    set_if(o_span, flags.span, span);
    set_if(o_level, flags.level, level);
    set_if(o_s, flags.s_list, s_list);
    set_if(o_zl, flags.z_list, z_list);
    set_if(o_yl, flags.y_list, y_list);
    set_if(o_times, flags.times, times);
    set_if(o_ranks, flags.ranks, ranks);

    ExperimentConfig config = telegas::cli::merge(base, flags);
    config.workers = o_workers->count() > 0 ? workers : base.workers;
    config.out_dir = o_out->count() > 0 ? out_dir : base.out_dir;

    const auto report = telegas::cli::run(config);
    for (const auto& verdict : report.verdicts)
      std::printf("%-44s %s  value=%.6g\n", verdict.name.c_str(), verdict.pass ? "pass" : "FAIL",
                  verdict.value);
    std::printf("report: %s/report.json\n", config.out_dir.c_str());
    return telegas::cli::exit_code(report);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
}
