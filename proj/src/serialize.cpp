#include "telegas/serialize.hpp"

namespace telegas {

void to_json(nlohmann::json& j, const Params& p) { j = {{"v", p.v}, {"lambda", p.lambda}}; }

void from_json(const nlohmann::json& j, Params& p) {
  p = make_params(j.at("v").get<double>(), j.at("lambda").get<double>());
}

void to_json(nlohmann::json& j, const VelocityState& s) { j = s.xi; }

void from_json(const nlohmann::json& j, VelocityState& s) {
  const int xi = j.get<int>();
  if (xi != 0 && xi != 1) throw ValidationError("regime label must be 0 or 1");
  s.xi = xi;
}

void to_json(nlohmann::json& j, const PatternPair& p) { j = to_string(p); }

void from_json(const nlohmann::json& j, PatternPair& p) { p = parse_pattern(j.get<std::string>()); }

void to_json(nlohmann::json& j, const InitialRegimes& r) {
  if (r.is_equiprobable()) {
    j = "equiprobable";
  } else {
    j = r.fixed;
  }
}

void from_json(const nlohmann::json& j, InitialRegimes& r) {
  if (j.is_string()) {
    if (j.get<std::string>() != "equiprobable")
      throw ValidationError("initial regimes must be \"equiprobable\" or a list of labels");
    r.fixed.clear();
    return;
  }
  r.fixed = j.get<std::vector<int>>();
}

void to_json(nlohmann::json& j, const GasConfig& g) {
  j = {{"positions", g.positions},
       {"params", g.params},
       {"initial_regimes", g.initial_regimes}};
  j["boundary"] = g.boundary ? nlohmann::json(*g.boundary) : nlohmann::json(nullptr);
}

void from_json(const nlohmann::json& j, GasConfig& g) {
  GasConfig out;
  out.positions = j.at("positions").get<std::vector<double>>();
  out.params = j.at("params").get<Params>();
  if (j.contains("initial_regimes")) out.initial_regimes = j.at("initial_regimes").get<InitialRegimes>();
  if (j.contains("boundary") && !j.at("boundary").is_null()) out.boundary = j.at("boundary").get<double>();
  validate(out);
  g = std::move(out);
}

}  // namespace telegas
