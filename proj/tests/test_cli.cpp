#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "telegas/experiments.hpp"

using namespace telegas;
using namespace telegas::cli;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("telegas_test_cli_" + name);
  fs::remove_all(p);
  return p;
}

std::vector<std::string> lines_of(const fs::path& p) {
  std::ifstream in(p);
  std::vector<std::string> out;
  for (std::string line; std::getline(in, line);) out.push_back(line);
  return out;
}

std::vector<double> split_numbers(const std::string& line) {
  std::vector<double> out;
  std::stringstream ss(line);
  for (std::string cell; std::getline(ss, cell, ',');) out.push_back(std::stod(cell));
  return out;
}

}  // namespace

TEST_CASE("experiment registry") {
  const auto& names = experiment_names();
  CHECK(names.size() == 15);
  for (const char* name : {"first-meeting", "lemma3-bound", "reflect-density", "analytic-grid"})
    CHECK(std::find(names.begin(), names.end(), name) != names.end());
}

TEST_CASE("config json round trip") {
  ExperimentConfig c;
  c.experiment = "first-meeting";
  c.seed = 42;
  c.replicas = 500;
  c.z = 0.5;
  c.pattern = "10";
  c.grid = std::vector<double>{0.0, 1.0, 2.0};
  c.ranks = std::vector<int>{1, 2};
  c.paper_literal = true;
  const json j = to_json(c);
  CHECK(j.at("seed") == 42);
  CHECK_FALSE(j.contains("lambda"));
  const ExperimentConfig back = config_from_json(j);
  CHECK(to_json(back) == j);
  CHECK_THROWS(config_from_json(json{{"experiment", "kac"}, {"bogus", 1}}));
}

TEST_CASE("flags override the config file") {
  ExperimentConfig file;
  file.experiment = "renewal";
  file.seed = 1;
  file.T = 3.0;
  file.z = 2.0;
  ExperimentConfig flags;
  flags.T = 7.0;
  const auto merged = merge(file, flags);
  CHECK(merged.T == 7.0);
  CHECK(merged.z == 2.0);
  CHECK(merged.seed == 1u);
}

TEST_CASE("resolve fills defaults and rejects bad input") {
  ExperimentConfig c;
  c.experiment = "renewal";
  c.seed = 3;
  const auto r = resolve(c);
  CHECK(r.T == 5.0);
  CHECK(r.replicas == 10000u);
  CHECK(r.v == 1.0);

  ExperimentConfig missing_seed;
  missing_seed.experiment = "renewal";
  CHECK_THROWS_AS(resolve(missing_seed), ValidationError);
  ExperimentConfig unknown = c;
  unknown.experiment = "nope";
  CHECK_THROWS_AS(resolve(unknown), ValidationError);
  ExperimentConfig unsorted = c;
  unsorted.experiment = "analytic-grid";
  unsorted.grid = std::vector<double>{1.0, 0.5};
  CHECK_THROWS_AS(resolve(unsorted), ValidationError);
  ExperimentConfig bad_pattern = c;
  bad_pattern.pattern = "02";
  CHECK_THROWS(resolve(bad_pattern));
  ExperimentConfig negative_speed = c;
  negative_speed.v = -1.0;
  CHECK_THROWS_AS(resolve(negative_speed), ValidationError);
}

TEST_CASE("verdict bounds") {
  CHECK(within(1.0, 0.0, 2.0));
  CHECK(within(2.0, 0.0, 2.0));
  CHECK(within(0.0, 0.0, std::nullopt));
  CHECK_FALSE(within(2.1, std::nullopt, 2.0));
  CHECK_FALSE(within(std::nan(""), std::nullopt, std::nullopt));
}

TEST_CASE("density grid export") {
  const Params unit{1.0, 1.0};
  const analytic::MixedDistribution law(PatternPair::approach(), 1.0, unit);
  const fs::path dir = scratch("grid");
  fs::create_directories(dir);

  emit_density_grid(law, std::vector<double>{}, dir / "empty.csv");
  CHECK(lines_of(dir / "empty.csv") == std::vector<std::string>{"t,density,cdf,atom"});

  const std::vector<double> grid{0.0, 0.25, 0.5, 1.0, 2.0};
  emit_density_grid(law, grid, dir / "grid.csv");
  const auto lines = lines_of(dir / "grid.csv");
  REQUIRE(lines.size() == 7);
  const auto before = split_numbers(lines[2]);
  CHECK(before[1] == 0.0);
  CHECK(before[2] == 0.0);
  const auto atom = split_numbers(lines[3]);
  CHECK(atom[0] == 0.5);
  CHECK(atom[1] == law.atom_mass());
  CHECK(atom[3] == 1.0);
  const auto row = split_numbers(lines[5]);
  CHECK(row[0] == 1.0);
  CHECK(row[1] == law.density(1.0));
  CHECK(row[2] == doctest::Approx(law.cdf(1.0)).epsilon(1e-12));
  CHECK(row[3] == 0.0);
  CHECK_THROWS(emit_density_grid(law, std::vector<double>{1.0, 0.0}, dir / "bad.csv"));
  fs::remove_all(dir);
}

TEST_CASE("a run writes its artifacts and the report re-verifies") {
  const fs::path dir = scratch("run");
  ExperimentConfig c;
  c.experiment = "first-meeting";
  c.seed = 11;
  c.replicas = 2000;
  c.workers = 2;
  c.out_dir = dir.string();
  const RunReport report = run(c);
  CHECK(fs::exists(dir / "report.json"));
  CHECK(fs::exists(dir / "config.json"));
  CHECK(fs::exists(dir / "samples.csv"));
  for (const auto& name : report.artifacts) CHECK(fs::exists(dir / name));
  std::ifstream in(dir / "report.json");
  const json stored = json::parse(in);
  CHECK(stored.at("experiment") == "first-meeting");
  CHECK(stored.at("config").at("seed") == 11);
  CHECK_FALSE(stored.at("config").contains("workers"));
  CHECK(reverify(stored) == exit_code(report));
  CHECK(lines_of(dir / "samples.csv").size() == 2001);

  json tampered = stored;
  tampered["verdicts"][0]["value"] = 1e300;
  tampered["verdicts"][0]["upper"] = 0.0;
  CHECK(reverify(tampered) == 2);
  fs::remove_all(dir);
}

TEST_CASE("a failing run leaves nothing behind") {
  const fs::path dir = scratch("failing");
  ExperimentConfig c;
  c.experiment = "reflect-density";
  c.seed = 1;
  c.times = std::vector<double>{1.0, 0.01};
  c.out_dir = dir.string();
  CHECK_THROWS(run(c));
  if (fs::exists(dir)) CHECK(fs::is_empty(dir));
  fs::remove_all(dir);
}

TEST_CASE("paper-literal switch changes the exported approach density") {
  const fs::path dir = scratch("literal");
  ExperimentConfig c;
  c.experiment = "analytic-grid";
  c.seed = 1;
  c.v = 2.0;
  c.lambda = 1.0;
  c.grid = std::vector<double>{0.5, 1.0, 2.0};
  c.out_dir = (dir / "corrected").string();
  CHECK(exit_code(run(c)) == 0);
  c.paper_literal = true;
  c.out_dir = (dir / "literal").string();
  run(c);
  const auto a = lines_of(dir / "corrected" / "density_01.csv");
  const auto b = lines_of(dir / "literal" / "density_01.csv");
  REQUIRE(a.size() == b.size());
  const auto ra = split_numbers(a.back());
  const auto rb = split_numbers(b.back());
  CHECK(ra[1] == doctest::Approx(16.0 * rb[1]).epsilon(1e-12));
  fs::remove_all(dir);
}
