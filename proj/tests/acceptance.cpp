// Runs every acceptance criterion through the experiment runner and prints
// one PASS/FAIL line per criterion. Seeds are fixed in advance.

#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iterator>
#include <string>
#include <vector>

#include "telegas/experiments.hpp"

namespace fs = std::filesystem;
using telegas::cli::ExperimentConfig;
using telegas::cli::RunReport;

namespace {

constexpr std::uint64_t kSeedBase = 20261019;

fs::path root = "acceptance_out";

struct Outcome {
  bool pass = false;
  std::string detail;
};

ExperimentConfig make(const std::string& experiment, int criterion) {
  ExperimentConfig c;
  c.experiment = experiment;
  c.seed = kSeedBase + static_cast<std::uint64_t>(criterion);
  c.out_dir = (root / ("c" + std::to_string(criterion) + "_" + experiment)).string();
  return c;
}

// Passes when every verdict whose name starts with one of `prefixes` passes;
// an empty list selects all verdicts. At least one verdict must match.
Outcome judge(const RunReport& report, const std::vector<std::string>& prefixes = {}) {
  Outcome out{true, ""};
  std::size_t matched = 0;
  for (const auto& v : report.verdicts) {
    bool selected = prefixes.empty();
    for (const auto& p : prefixes) selected = selected || v.name.rfind(p, 0) == 0;
    if (!selected) continue;
    ++matched;
    if (!v.pass) {
      out.pass = false;
      char buf[160];
      std::snprintf(buf, sizeof buf, "%s%s=%.6g", out.detail.empty() ? "" : "; ", v.name.c_str(),
                    v.value);
      out.detail += buf;
    }
  }
  if (matched == 0) {
    out.pass = false;
    out.detail = "no matching verdicts";
  }
  return out;
}

Outcome run_and_judge(ExperimentConfig config, const std::vector<std::string>& prefixes = {}) {
  return judge(telegas::cli::run(config), prefixes);
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

Outcome same_csv_across_workers(ExperimentConfig config) {
  const std::string base = config.out_dir;
  std::vector<fs::path> dirs;
  for (unsigned workers : {1u, 8u}) {
    config.workers = workers;
    config.out_dir = base + "_w" + std::to_string(workers);
    telegas::cli::run(config);
    dirs.emplace_back(config.out_dir);
  }
  std::size_t compared = 0;
  for (const auto& entry : fs::directory_iterator(dirs[0])) {
    if (entry.path().extension() != ".csv") continue;
    ++compared;
    if (slurp(entry.path()) != slurp(dirs[1] / entry.path().filename()))
      return {false, config.experiment + ": " + entry.path().filename().string() + " differs"};
  }
  if (compared == 0) return {false, config.experiment + ": no CSV output"};
  return {true, ""};
}

}  // namespace

int main(int argc, char** argv) {
  if (argc > 1) root = argv[1];
  fs::create_directories(root);

  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"1  atom mass of the (0,1) meeting law",
       [] {
         auto c = make("first-meeting", 1);
         c.replicas = 100000;
         return run_and_judge(c, {"atom_frequency"});
       }},
      {"2  normalization audit",
       [] { return run_and_judge(make("analytic-grid", 2)); }},
      {"3  Laplace transform agreement",
       [] { return run_and_judge(make("laplace-check", 3), {"mc_transform_"}); }},
      {"4  one-sample KS of the (0,1) law",
       [] {
         auto c = make("first-meeting", 4);
         c.replicas = 10000;
         return run_and_judge(c, {"ks_analytic_cdf"});
       }},
      {"5  (0,0) versus (1,1) two-sample KS",
       [] {
         auto c = make("first-meeting", 5);
         c.pattern = "00";
         c.replicas = 10000;
         return run_and_judge(c, {"ks_symmetry_"});
       }},
      {"6  Kac convergence", [] { return run_and_judge(make("kac", 6)); }},
      {"7  renewal function", [] { return run_and_judge(make("renewal", 7)); }},
      {"8  renewal scaling", [] { return run_and_judge(make("renewal-scaling", 8)); }},
      {"9  E min(tau, T) linear bound", [] { return run_and_judge(make("lemma3-bound", 9)); }},
      {"10 free-path summability", [] { return run_and_judge(make("free-path", 10)); }},
      {"11 ergodic time averages", [] { return run_and_judge(make("ergodic", 11)); }},
      {"12 stationarity of the uniform start", [] { return run_and_judge(make("stationary", 12)); }},
      {"13 order statistics", [] { return run_and_judge(make("order-stats", 13)); }},
      {"14 reflecting density", [] { return run_and_judge(make("reflect-density", 14)); }},
      {"15 collision rate", [] { return run_and_judge(make("collision-rate", 15)); }},
      {"16 heavy tail", [] { return run_and_judge(make("tail", 16)); }},
      {"17 Levy exponent identity", [] { return run_and_judge(make("levy-identity", 17)); }},
      {"18 determinism across worker counts",
       [] {
         auto a = make("first-meeting", 18);
         a.replicas = 10000;
         auto b = make("collision-rate", 18);
         const Outcome first = same_csv_across_workers(a);
         if (!first.pass) return first;
         return same_csv_across_workers(b);
       }},
  };

  int failures = 0;
  for (const auto& [name, check] : criteria) {
    Outcome o;
    try {
      o = check();
    } catch (const std::exception& e) {
      o = {false, std::string("error: ") + e.what()};
    }
    failures += !o.pass;
    std::printf("%s  %s%s%s\n", o.pass ? "PASS" : "FAIL", name.c_str(),
                o.detail.empty() ? "" : "  ", o.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failures,
              criteria.size());
  return failures == 0 ? 0 : 1;
}
