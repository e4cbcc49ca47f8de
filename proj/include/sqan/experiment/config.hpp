#pragma once

#include <cmath>
#include <cstdint>
#include <fstream>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "sqan/errors.hpp"
#include "sqan/params.hpp"

namespace sqan {

// Declarative experiment configuration. One JSON file per run, nested sections
// mirroring the type names; unknown keys anywhere are errors so that typos in
// physics parameters cannot pass silently.

enum class Scenario { classify, sweep2d, noise_study, readout_map, linear_analysis, convert_params };

inline const char* to_string(Scenario s) {
  switch (s) {
    case Scenario::classify: return "classify";
    case Scenario::sweep2d: return "sweep2d";
    case Scenario::noise_study: return "noise_study";
    case Scenario::readout_map: return "readout_map";
    case Scenario::linear_analysis: return "linear_analysis";
    case Scenario::convert_params: return "convert_params";
  }
  return "?";
}

inline Scenario scenario_from_string(const std::string& s) {
  if (s == "classify") return Scenario::classify;
  if (s == "sweep2d") return Scenario::sweep2d;
  if (s == "noise_study") return Scenario::noise_study;
  if (s == "readout_map") return Scenario::readout_map;
  if (s == "linear_analysis") return Scenario::linear_analysis;
  if (s == "convert_params") return Scenario::convert_params;
  throw config_error("unknown scenario '" + s + "'");
}

struct SweepAxis {
  std::string param;  // a ChainParams field name
  double min = 0.0;
  double max = 1.0;
  int steps = 41;

  double value(int k) const {
    return (steps == 1) ? min
                        : min + (max - min) * static_cast<double>(k) / static_cast<double>(steps - 1);
  }
};

struct ClassifyOptions {
  std::optional<double> g1_frac = 0.8;  // g1 as a fraction of the squeezer threshold
  ClassEncoding encoding = ClassEncoding::pump_phase;
  double chi = 0.0;  // only read for dispersive_shift encoding
};

struct NoiseOptions {
  std::vector<double> n_cl_values = {0.0, 1.0, 4.0, 16.0};
};

struct ReadoutOptions {
  double g_frac = 0.9;   // pumps as a fraction of the zero-detuning thresholds
  double chi_min = 0.0;
  double chi_max = 0.5;  // in units of kappa2; kappa/2 = 0.5*(kappa1+gamma)/... set per config
  int chi_steps = 41;
  double phi1_min = 0.0;
  double phi1_max = 2.0 * M_PI;
  int phi1_steps = 41;
};

struct ConvertOptions {
  std::string direction = "to_effective";  // or "from_effective"
  // physical side (to_effective input / from_effective SNAIL constants)
  double omega_s = 5000.0;
  double g3 = 0.1;
  double g4 = -1e-3;
  double kappa_s = 1.0;
  double eps_p = 0.0;
  double phi_p = 0.0;
  double eta_sig = 0.0;
  double phi_sig = 0.0;
};

struct SpotCheck {
  double axis1 = 0.0;
  double axis2 = 0.0;
};

struct OutputOptions {
  std::string dir = "out";
  bool emit_csv = true;
  bool emit_json = true;
};

struct ExperimentConfig {
  Scenario scenario = Scenario::classify;
  ChainParams chain;
  SimControls controls;
  ClassifyOptions classify;
  std::optional<SweepAxis> axis1;
  std::optional<SweepAxis> axis2;
  NoiseOptions noise;
  ReadoutOptions readout;
  ConvertOptions convert;
  std::vector<SpotCheck> spot_checks;
  OutputOptions output;

  void validate() const;
};

namespace cfg_detail {

using nlohmann::json;

inline void check_keys(const json& j, const std::set<std::string>& allowed,
                       const std::string& where) {
  if (!j.is_object()) throw config_error(where + ": expected an object");
  for (auto it = j.begin(); it != j.end(); ++it) {
    if (!allowed.count(it.key()))
      throw config_error(where + ": unknown key '" + it.key() + "'");
  }
}

template <class T>
inline void get_to(const json& j, const char* key, T& out) {
  if (j.contains(key)) {
    try {
      j.at(key).get_to(out);
    } catch (const json::exception& e) {
      throw config_error(std::string("bad value for '") + key + "': " + e.what());
    }
  }
}

inline const std::map<std::string, double ChainParams::*>& chain_fields() {
  static const std::map<std::string, double ChainParams::*> m = {
      {"delta1", &ChainParams::delta1}, {"delta2", &ChainParams::delta2},
      {"g1", &ChainParams::g1},         {"phi1", &ChainParams::phi1},
      {"g2", &ChainParams::g2},         {"phi2", &ChainParams::phi2},
      {"lambda", &ChainParams::lambda}, {"kappa1", &ChainParams::kappa1},
      {"kappa2", &ChainParams::kappa2}, {"gamma", &ChainParams::gamma},
      {"eta_d2", &ChainParams::eta_d2}, {"phi_d2", &ChainParams::phi_d2},
      {"n_cl", &ChainParams::n_cl}};
  return m;
}

inline ChainParams parse_chain(const json& j) {
  ChainParams p;
  std::set<std::string> allowed;
  for (const auto& [name, ptr] : chain_fields()) allowed.insert(name);
  check_keys(j, allowed, "chain");
  for (const auto& [name, ptr] : chain_fields()) {
    if (j.contains(name)) {
      if (!j.at(name).is_number())
        throw config_error("chain." + name + ": expected a number");
      p.*ptr = j.at(name).get<double>();
    }
  }
  return p;
}

inline json chain_to_json(const ChainParams& p) {
  json j;
  for (const auto& [name, ptr] : chain_fields()) j[name] = p.*ptr;
  return j;
}

}  // namespace cfg_detail

inline void ExperimentConfig::validate() const {
  chain.validate();
  controls.validate();
  auto check_axis = [](const SweepAxis& a, const char* which) {
    if (!cfg_detail::chain_fields().count(a.param))
      throw config_error(std::string(which) + ".param '" + a.param +
                         "' is not a ChainParams field");
    if (a.steps < 2) throw config_error(std::string(which) + ".steps must be >= 2");
  };
  if (axis1) check_axis(*axis1, "sweep.axis1");
  if (axis2) check_axis(*axis2, "sweep.axis2");
  if (scenario == Scenario::sweep2d && (!axis1 || !axis2))
    throw config_error("sweep2d requires sweep.axis1 and sweep.axis2");
  if (classify.g1_frac && !(*classify.g1_frac > 0.0 && *classify.g1_frac < 1.0))
    throw config_error("classify.g1_frac must lie in (0, 1)");
  if (!(readout.g_frac > 0.0 && readout.g_frac < 1.0))
    throw config_error("readout.g_frac must lie in (0, 1)");
  if (readout.chi_steps < 2 || readout.phi1_steps < 2)
    throw config_error("readout grid needs >= 2 steps per axis");
  if (convert.direction != "to_effective" && convert.direction != "from_effective")
    throw config_error("convert.direction must be 'to_effective' or 'from_effective'");
  for (double v : noise.n_cl_values)
    if (v < 0.0) throw config_error("noise.n_cl_values must be >= 0");
  if (noise.n_cl_values.empty()) throw config_error("noise.n_cl_values must not be empty");
}

inline ExperimentConfig parse_config(const nlohmann::json& j) {
  using cfg_detail::check_keys;
  using cfg_detail::get_to;
  using nlohmann::json;
  check_keys(j, {"scenario", "chain", "controls", "classify", "sweep", "noise", "readout",
                 "convert", "spot_checks", "output"},
             "config");
  ExperimentConfig cfg;
  if (!j.contains("scenario")) throw config_error("config: missing 'scenario'");
  cfg.scenario = scenario_from_string(j.at("scenario").get<std::string>());
  if (j.contains("chain")) cfg.chain = cfg_detail::parse_chain(j.at("chain"));
  if (j.contains("controls")) {
    const json& c = j.at("controls");
    check_keys(c, {"dt", "t_settle", "t_filter", "n_traj", "seed", "steady_tol"}, "controls");
    get_to(c, "dt", cfg.controls.dt);
    get_to(c, "t_settle", cfg.controls.t_settle);
    get_to(c, "t_filter", cfg.controls.t_filter);
    get_to(c, "n_traj", cfg.controls.n_traj);
    get_to(c, "seed", cfg.controls.seed);
    get_to(c, "steady_tol", cfg.controls.steady_tol);
  }
  if (j.contains("classify")) {
    const json& c = j.at("classify");
    check_keys(c, {"g1_frac", "encoding", "chi"}, "classify");
    if (c.contains("g1_frac")) {
      if (c.at("g1_frac").is_null())
        cfg.classify.g1_frac.reset();
      else
        cfg.classify.g1_frac = c.at("g1_frac").get<double>();
    }
    if (c.contains("encoding")) {
      const std::string e = c.at("encoding").get<std::string>();
      if (e == "pump_phase")
        cfg.classify.encoding = ClassEncoding::pump_phase;
      else if (e == "dispersive_shift")
        cfg.classify.encoding = ClassEncoding::dispersive_shift;
      else
        throw config_error("classify.encoding must be 'pump_phase' or 'dispersive_shift'");
    }
    get_to(c, "chi", cfg.classify.chi);
  }
  if (j.contains("sweep")) {
    const json& s = j.at("sweep");
    check_keys(s, {"axis1", "axis2"}, "sweep");
    auto parse_axis = [&](const json& a, const char* which) {
      check_keys(a, {"param", "min", "max", "steps"}, which);
      SweepAxis ax;
      if (!a.contains("param")) throw config_error(std::string(which) + ": missing 'param'");
      ax.param = a.at("param").get<std::string>();
      get_to(a, "min", ax.min);
      get_to(a, "max", ax.max);
      get_to(a, "steps", ax.steps);
      return ax;
    };
    if (s.contains("axis1")) cfg.axis1 = parse_axis(s.at("axis1"), "sweep.axis1");
    if (s.contains("axis2")) cfg.axis2 = parse_axis(s.at("axis2"), "sweep.axis2");
  }
  if (j.contains("noise")) {
    const json& n = j.at("noise");
    check_keys(n, {"n_cl_values"}, "noise");
    get_to(n, "n_cl_values", cfg.noise.n_cl_values);
  }
  if (j.contains("readout")) {
    const json& r = j.at("readout");
    check_keys(r, {"g_frac", "chi_min", "chi_max", "chi_steps", "phi1_min", "phi1_max",
                   "phi1_steps"},
               "readout");
    get_to(r, "g_frac", cfg.readout.g_frac);
    get_to(r, "chi_min", cfg.readout.chi_min);
    get_to(r, "chi_max", cfg.readout.chi_max);
    get_to(r, "chi_steps", cfg.readout.chi_steps);
    get_to(r, "phi1_min", cfg.readout.phi1_min);
    get_to(r, "phi1_max", cfg.readout.phi1_max);
    get_to(r, "phi1_steps", cfg.readout.phi1_steps);
  }
  if (j.contains("convert")) {
    const json& c = j.at("convert");
    check_keys(c, {"direction", "omega_s", "g3", "g4", "kappa_s", "eps_p", "phi_p", "eta_sig",
                   "phi_sig"},
               "convert");
    get_to(c, "direction", cfg.convert.direction);
    get_to(c, "omega_s", cfg.convert.omega_s);
    get_to(c, "g3", cfg.convert.g3);
    get_to(c, "g4", cfg.convert.g4);
    get_to(c, "kappa_s", cfg.convert.kappa_s);
    get_to(c, "eps_p", cfg.convert.eps_p);
    get_to(c, "phi_p", cfg.convert.phi_p);
    get_to(c, "eta_sig", cfg.convert.eta_sig);
    get_to(c, "phi_sig", cfg.convert.phi_sig);
  }
  if (j.contains("spot_checks")) {
    const json& s = j.at("spot_checks");
    if (!s.is_array()) throw config_error("spot_checks: expected an array");
    for (const auto& e : s) {
      check_keys(e, {"axis1", "axis2"}, "spot_checks[]");
      SpotCheck sc;
      get_to(e, "axis1", sc.axis1);
      get_to(e, "axis2", sc.axis2);
      cfg.spot_checks.push_back(sc);
    }
  }
  if (j.contains("output")) {
    const json& o = j.at("output");
    check_keys(o, {"dir", "emit"}, "output");
    get_to(o, "dir", cfg.output.dir);
    if (o.contains("emit")) {
      std::vector<std::string> fmts = o.at("emit").get<std::vector<std::string>>();
      cfg.output.emit_csv = false;
      cfg.output.emit_json = false;
      for (const auto& f : fmts) {
        if (f == "csv")
          cfg.output.emit_csv = true;
        else if (f == "json")
          cfg.output.emit_json = true;
        else
          throw config_error("output.emit: unknown format '" + f + "'");
      }
    }
  }
  cfg.validate();
  return cfg;
}

inline ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw io_error("cannot open config file '" + path + "'");
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw config_error("config '" + path + "': " + e.what());
  }
  return parse_config(j);
}

// Fully resolved configuration, defaults included; embedded verbatim in every
// output file so that runs are reproducible from their artifacts alone.
inline nlohmann::json config_echo(const ExperimentConfig& cfg) {
  using nlohmann::json;
  json j;
  j["scenario"] = to_string(cfg.scenario);
  j["chain"] = cfg_detail::chain_to_json(cfg.chain);
  j["controls"] = {{"dt", cfg.controls.dt},
                   {"t_settle", cfg.controls.t_settle},
                   {"t_filter", cfg.controls.t_filter},
                   {"n_traj", cfg.controls.n_traj},
                   {"seed", cfg.controls.seed},
                   {"steady_tol", cfg.controls.steady_tol}};
  j["classify"] = {{"g1_frac", cfg.classify.g1_frac ? json(*cfg.classify.g1_frac) : json(nullptr)},
                   {"encoding", cfg.classify.encoding == ClassEncoding::pump_phase
                                    ? "pump_phase"
                                    : "dispersive_shift"},
                   {"chi", cfg.classify.chi}};
  if (cfg.axis1)
    j["sweep"]["axis1"] = {{"param", cfg.axis1->param},
                           {"min", cfg.axis1->min},
                           {"max", cfg.axis1->max},
                           {"steps", cfg.axis1->steps}};
  if (cfg.axis2)
    j["sweep"]["axis2"] = {{"param", cfg.axis2->param},
                           {"min", cfg.axis2->min},
                           {"max", cfg.axis2->max},
                           {"steps", cfg.axis2->steps}};
  j["noise"] = {{"n_cl_values", cfg.noise.n_cl_values}};
  j["readout"] = {{"g_frac", cfg.readout.g_frac},     {"chi_min", cfg.readout.chi_min},
                  {"chi_max", cfg.readout.chi_max},   {"chi_steps", cfg.readout.chi_steps},
                  {"phi1_min", cfg.readout.phi1_min}, {"phi1_max", cfg.readout.phi1_max},
                  {"phi1_steps", cfg.readout.phi1_steps}};
  j["convert"] = {{"direction", cfg.convert.direction},
                  {"omega_s", cfg.convert.omega_s},
                  {"g3", cfg.convert.g3},
                  {"g4", cfg.convert.g4},
                  {"kappa_s", cfg.convert.kappa_s},
                  {"eps_p", cfg.convert.eps_p},
                  {"phi_p", cfg.convert.phi_p},
                  {"eta_sig", cfg.convert.eta_sig},
                  {"phi_sig", cfg.convert.phi_sig}};
  json checks = json::array();
  for (const auto& sc : cfg.spot_checks) checks.push_back({{"axis1", sc.axis1}, {"axis2", sc.axis2}});
  j["spot_checks"] = checks;
  std::vector<std::string> emit;
  if (cfg.output.emit_csv) emit.push_back("csv");
  if (cfg.output.emit_json) emit.push_back("json");
  j["output"] = {{"dir", cfg.output.dir}, {"emit", emit}};
  return j;
}

// Set a ChainParams field by config name.
inline void set_chain_param(ChainParams& p, const std::string& name, double value) {
  const auto& m = cfg_detail::chain_fields();
  const auto it = m.find(name);
  if (it == m.end()) throw config_error("unknown ChainParams field '" + name + "'");
  p.*(it->second) = value;
}

}  // namespace sqan
