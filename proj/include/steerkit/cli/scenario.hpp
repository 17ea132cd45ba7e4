#pragma once

// Scenario documents: one JSON object per run. See README for the schema.

#include "steerkit/cli/units.hpp"
#include "steerkit/errors.hpp"
#include "steerkit/model.hpp"
#include "steerkit/numeric.hpp"

#include <json.hpp>
#include <openssl/evp.h>

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

namespace steerkit::cli {

using json = nlohmann::json;

inline constexpr int current_schema_version = 1;
inline constexpr const char* tool_version = "0.1.0";

enum class Mode { Curve, Heatmap, NThreshold, ValidateOracle, ValidateAdiabatic, WorkingPoint, CrossCorrelation };
enum class Engine { ClosedForm, Oracle, Both };
enum class ParamsKind { Physical, Reduced, Dimensionless };
enum class OracleModel { Reduced, Full };

namespace scenario_detail {

template <class E>
struct Names {
  std::vector<std::pair<E, const char*>> entries;

  std::string to_string(E e) const {
    for (const auto& [k, v] : entries)
      if (k == e) return v;
    return "?";
  }
  E parse(const std::string& s, const std::string& where) const {
    for (const auto& [k, v] : entries)
      if (s == v) return k;
    std::string allowed;
    for (const auto& [k, v] : entries) allowed += std::string(allowed.empty() ? "" : ", ") + v;
    fail(ErrorKind::ConfigError, where + ": '" + s + "' is not one of {" + allowed + "}");
  }
};

inline const Names<Mode> mode_names{{{Mode::Curve, "curve"},
                                     {Mode::Heatmap, "heatmap"},
                                     {Mode::NThreshold, "n-threshold"},
                                     {Mode::ValidateOracle, "validate-oracle"},
                                     {Mode::ValidateAdiabatic, "validate-adiabatic"},
                                     {Mode::WorkingPoint, "working-point"},
                                     {Mode::CrossCorrelation, "cross-correlation"}}};
inline const Names<Engine> engine_names{{{Engine::ClosedForm, "closedform"}, {Engine::Oracle, "oracle"}, {Engine::Both, "both"}}};
inline const Names<ParamsKind> kind_names{
    {{ParamsKind::Physical, "physical"}, {ParamsKind::Reduced, "reduced"}, {ParamsKind::Dimensionless, "dimensionless"}}};
inline const Names<OracleModel> oracle_names{{{OracleModel::Reduced, "reduced"}, {OracleModel::Full, "full"}}};

}  // namespace scenario_detail

inline std::string to_string(Mode m) { return scenario_detail::mode_names.to_string(m); }
inline std::string to_string(Engine e) { return scenario_detail::engine_names.to_string(e); }
inline std::string to_string(ParamsKind k) { return scenario_detail::kind_names.to_string(k); }
inline std::string to_string(OracleModel m) { return scenario_detail::oracle_names.to_string(m); }

inline const std::set<std::string> sweep_variables{"r", "tau", "n", "n0", "gamma_over_G", "G1_over_G2"};

struct Sweep {
  std::string variable;
  double lo = 0.0;
  double hi = 1.0;
  int points = 2;
  bool log_scale = false;

  std::vector<double> values() const {
    const auto n = static_cast<std::size_t>(points);
    return log_scale ? numeric::logspace(lo, hi, n) : numeric::linspace(lo, hi, n);
  }
  bool operator==(const Sweep&) const = default;
};

// One curve of a multi-curve run: parameter overrides on top of the base point.
struct Series {
  std::string label;
  std::map<std::string, double> set;

  bool operator==(const Series&) const = default;
};

struct Tolerances {
  std::optional<double> relative;  // validation bound; mode-dependent default
  double integrator = 1e-9;
  double threshold = 0.5;
  double r_max = 10.0;
  double sigma = 3.0;  // Monte Carlo agreement bound in standard errors

  bool operator==(const Tolerances&) const = default;
};

struct Params {
  ParamsKind kind = ParamsKind::Dimensionless;
  PhysicalParams physical;
  // Effective couplings g1, g2 given directly instead of via E1, E2.
  std::optional<std::array<double, 2>> couplings;
  ReducedParams reduced;
  DimensionlessPoint dimensionless;

  bool operator==(const Params&) const = default;
};

struct Scenario {
  int schema_version = current_schema_version;
  std::string name;
  std::string description;
  Mode mode = Mode::Curve;
  Engine engine = Engine::ClosedForm;
  OracleModel oracle_model = OracleModel::Reduced;
  Params params;
  std::optional<Sweep> sweep;
  std::optional<Sweep> sweep2;
  std::vector<Series> series;
  std::string output;
  std::uint64_t seed = 0;
  long trajectories = 0;
  Tolerances tolerances;

  bool operator==(const Scenario&) const = default;
};

namespace scenario_detail {

// Reads members of a JSON object, rejecting unknown keys.
class Reader {
 public:
  Reader(const json& j, std::string where) : j_(j), where_(std::move(where)) {
    if (!j.is_object()) fail(ErrorKind::ConfigError, where_ + ": expected an object");
  }

  bool has(const std::string& key) {
    seen_.insert(key);
    return j_.contains(key);
  }
  const json& at(const std::string& key) {
    seen_.insert(key);
    if (!j_.contains(key)) fail(ErrorKind::ConfigError, where_ + ": missing required field '" + key + "'");
    return j_.at(key);
  }
  std::string path(const std::string& key) const { return where_ + "." + key; }

  double number(const std::string& key) {
    const json& v = at(key);
    if (!v.is_number()) fail(ErrorKind::ConfigError, path(key) + ": expected a number");
    return v.get<double>();
  }
  double number_or(const std::string& key, double fallback) { return has(key) ? number(key) : fallback; }
  std::string string(const std::string& key) {
    const json& v = at(key);
    if (!v.is_string()) fail(ErrorKind::ConfigError, path(key) + ": expected a string");
    return v.get<std::string>();
  }
  std::string string_or(const std::string& key, const std::string& fallback) { return has(key) ? string(key) : fallback; }
  double frequency(const std::string& key) { return parse_frequency(at(key), path(key)); }
  double frequency_or(const std::string& key, double fallback) { return has(key) ? frequency(key) : fallback; }

  void finish() const {
    for (auto it = j_.begin(); it != j_.end(); ++it)
      if (!seen_.count(it.key())) fail(ErrorKind::ConfigError, where_ + ": unknown field '" + it.key() + "'");
  }

 private:
  const json& j_;
  std::string where_;
  std::set<std::string> seen_;
};

inline Params parse_params(const json& j) {
  Reader rd(j, "params");
  Params p;
  p.kind = kind_names.parse(rd.string("kind"), "params.kind");
  switch (p.kind) {
    case ParamsKind::Physical: {
      auto& ph = p.physical;
      ph.omega1 = rd.frequency("omega1");
      ph.omega2 = rd.frequency("omega2");
      ph.omega_m = rd.frequency("omega_m");
      ph.omega_L = rd.frequency("omega_L");
      ph.kappa1 = rd.frequency("kappa1");
      ph.kappa2 = rd.frequency("kappa2");
      ph.gamma = rd.frequency("gamma");
      ph.g01 = rd.frequency("g01");
      ph.g02 = rd.frequency("g02");
      ph.E1 = rd.frequency_or("E1", 0.0);
      ph.E2 = rd.frequency_or("E2", 0.0);
      ph.n0 = rd.number_or("n0", 0.0);
      ph.n = rd.number_or("n", 0.0);
      ph.tau = parse_duration(rd.at("tau"), rd.path("tau"));
      const bool g1 = rd.has("g1"), g2 = rd.has("g2");
      if (g1 != g2) fail(ErrorKind::ConfigError, "params: give both g1 and g2 or neither");
      if (g1) {
        if (rd.has("E1") || rd.has("E2"))
          fail(ErrorKind::ConfigError, "params: effective couplings g1, g2 exclude drive amplitudes E1, E2");
        p.couplings = std::array<double, 2>{rd.frequency("g1"), rd.frequency("g2")};
      }
      break;
    }
    case ParamsKind::Reduced: {
      auto& rp = p.reduced;
      rp.g1 = rd.frequency("g1");
      rp.g2 = rd.frequency("g2");
      rp.kappa = rd.frequency("kappa");
      rp.Delta = rd.frequency("Delta");
      rp.gamma = rd.frequency("gamma");
      rp.n0 = rd.number_or("n0", 0.0);
      rp.n = rd.number_or("n", 0.0);
      rp.tau = parse_duration(rd.at("tau"), rd.path("tau"));
      break;
    }
    case ParamsKind::Dimensionless: {
      auto& d = p.dimensionless;
      const DimensionlessPoint def;
      d.r = rd.number_or("r", def.r);
      d.gamma_over_G = rd.number_or("gamma_over_G", def.gamma_over_G);
      d.G1_over_G2 = rd.number_or("G1_over_G2", def.G1_over_G2);
      d.n0 = rd.number_or("n0", def.n0);
      d.n = rd.number_or("n", def.n);
      d.kappa_over_g = rd.number_or("kappa_over_g", def.kappa_over_g);
      d.Delta_over_kappa = rd.number_or("Delta_over_kappa", def.Delta_over_kappa);
      break;
    }
  }
  rd.finish();
  return p;
}

inline json emit_params(const Params& p) {
  json j;
  j["kind"] = to_string(p.kind);
  switch (p.kind) {
    case ParamsKind::Physical: {
      const auto& ph = p.physical;
      j["omega1"] = ph.omega1;
      j["omega2"] = ph.omega2;
      j["omega_m"] = ph.omega_m;
      j["omega_L"] = ph.omega_L;
      j["kappa1"] = ph.kappa1;
      j["kappa2"] = ph.kappa2;
      j["gamma"] = ph.gamma;
      j["g01"] = ph.g01;
      j["g02"] = ph.g02;
      if (p.couplings) {
        j["g1"] = (*p.couplings)[0];
        j["g2"] = (*p.couplings)[1];
      } else {
        j["E1"] = ph.E1;
        j["E2"] = ph.E2;
      }
      j["n0"] = ph.n0;
      j["n"] = ph.n;
      j["tau"] = ph.tau;
      break;
    }
    case ParamsKind::Reduced: {
      const auto& rp = p.reduced;
      j["g1"] = rp.g1;
      j["g2"] = rp.g2;
      j["kappa"] = rp.kappa;
      j["Delta"] = rp.Delta;
      j["gamma"] = rp.gamma;
      j["n0"] = rp.n0;
      j["n"] = rp.n;
      j["tau"] = rp.tau;
      break;
    }
    case ParamsKind::Dimensionless: {
      const auto& d = p.dimensionless;
      j["r"] = d.r;
      j["gamma_over_G"] = d.gamma_over_G;
      j["G1_over_G2"] = d.G1_over_G2;
      j["n0"] = d.n0;
      j["n"] = d.n;
      j["kappa_over_g"] = d.kappa_over_g;
      j["Delta_over_kappa"] = d.Delta_over_kappa;
      break;
    }
  }
  return j;
}

inline Sweep parse_sweep(const json& j, const std::string& where) {
  Reader rd(j, where);
  Sweep s;
  s.variable = rd.string("variable");
  s.lo = rd.number("lo");
  s.hi = rd.number("hi");
  const json& pts = rd.at("points");
  if (!pts.is_number_integer()) fail(ErrorKind::ConfigError, where + ".points: expected an integer");
  s.points = pts.get<int>();
  const std::string scale = rd.string_or("scale", "linear");
  if (scale != "linear" && scale != "log") fail(ErrorKind::ConfigError, where + ".scale: expected 'linear' or 'log'");
  s.log_scale = scale == "log";
  rd.finish();
  return s;
}

inline json emit_sweep(const Sweep& s) {
  return {{"variable", s.variable}, {"lo", s.lo}, {"hi", s.hi}, {"points", s.points}, {"scale", s.log_scale ? "log" : "linear"}};
}

inline void check_sweep(const Sweep& s, const std::string& where) {
  if (!sweep_variables.count(s.variable))
    fail(ErrorKind::ConfigError, where + ".variable: '" + s.variable + "' cannot be swept");
  if (s.points < 2) fail(ErrorKind::ConfigError, where + ".points must be >= 2");
  if (!(std::isfinite(s.lo) && std::isfinite(s.hi) && s.lo < s.hi))
    fail(ErrorKind::ConfigError, where + ": range requires finite lo < hi");
  if (s.log_scale && s.lo <= 0.0) fail(ErrorKind::ConfigError, where + ": log scale requires lo > 0");
  if (s.lo < 0.0) fail(ErrorKind::ConfigError, where + ": swept quantities are non-negative");
}

}  // namespace scenario_detail

// Structural and semantic checks; every violation is a ConfigError.
inline void validate(const Scenario& s) {
  using scenario_detail::check_sweep;
  if (s.schema_version != current_schema_version)
    fail(ErrorKind::ConfigError, "schema_version " + std::to_string(s.schema_version) + " is not supported (expected " +
                                     std::to_string(current_schema_version) + ")");
  if (s.sweep) check_sweep(*s.sweep, "sweep");
  if (s.sweep2) check_sweep(*s.sweep2, "sweep2");
  if (s.sweep && s.sweep2 && s.sweep->variable == s.sweep2->variable)
    fail(ErrorKind::ConfigError, "sweep and sweep2 must use different variables");
  for (const auto& ser : s.series)
    for (const auto& [k, v] : ser.set) {
      if (!sweep_variables.count(k)) fail(ErrorKind::ConfigError, "series '" + ser.label + "': cannot set '" + k + "'");
      if (!(std::isfinite(v) && v >= 0.0)) fail(ErrorKind::ConfigError, "series '" + ser.label + "': '" + k + "' must be >= 0");
    }
  if (s.trajectories != 0 && s.trajectories < 1000)
    fail(ErrorKind::ConfigError, "trajectories must be 0 (no Monte Carlo) or >= 1000");
  const auto& t = s.tolerances;
  if (!(t.integrator > 0.0 && t.threshold > 0.0 && t.r_max > 0.0 && t.sigma > 0.0) ||
      (t.relative && !(*t.relative > 0.0)))
    fail(ErrorKind::ConfigError, "tolerances must be positive");

  switch (s.mode) {
    case Mode::Curve:
    case Mode::CrossCorrelation:
      if (!s.sweep) fail(ErrorKind::ConfigError, to_string(s.mode) + " needs a sweep");
      if (s.sweep2) fail(ErrorKind::ConfigError, to_string(s.mode) + " takes a single sweep");
      break;
    case Mode::Heatmap:
      if (!s.sweep || !s.sweep2) fail(ErrorKind::ConfigError, "heatmap needs sweep and sweep2");
      break;
    case Mode::NThreshold:
      if (s.sweep && s.sweep->variable != "gamma_over_G" && s.sweep->variable != "n0")
        fail(ErrorKind::ConfigError, "n-threshold sweeps gamma_over_G or n0 only");
      if (s.sweep2) fail(ErrorKind::ConfigError, "n-threshold takes a single sweep");
      if (s.engine != Engine::ClosedForm) fail(ErrorKind::ConfigError, "n-threshold supports engine closedform only");
      break;
    case Mode::ValidateOracle:
    case Mode::ValidateAdiabatic:
      if (s.sweep2) fail(ErrorKind::ConfigError, to_string(s.mode) + " takes a single sweep");
      break;
    case Mode::WorkingPoint:
      if (s.params.kind != ParamsKind::Physical) fail(ErrorKind::ConfigError, "working-point needs physical params");
      if (s.sweep || s.sweep2) fail(ErrorKind::ConfigError, "working-point takes no sweep");
      break;
  }
  if (s.params.kind == ParamsKind::Physical) {
    validate(s.params.physical);
  } else if (s.params.kind == ParamsKind::Reduced) {
    validate(s.params.reduced);
  } else {
    const auto& d = s.params.dimensionless;
    for (double v : {d.r, d.gamma_over_G, d.G1_over_G2, d.n0, d.n, d.kappa_over_g, d.Delta_over_kappa})
      if (!std::isfinite(v)) fail(ErrorKind::ConfigError, "params: values must be finite");
    if (d.r < 0.0 || d.gamma_over_G < 0.0 || d.G1_over_G2 < 0.0 || d.n0 < 0.0 || d.n < 0.0 || d.kappa_over_g <= 0.0)
      fail(ErrorKind::ConfigError, "params: dimensionless values out of range");
  }
}

inline Scenario parse_scenario(const json& j) {
  using namespace scenario_detail;
  Reader rd(j, "scenario");
  Scenario s;
  const json& ver = rd.at("schema_version");
  if (!ver.is_number_integer()) fail(ErrorKind::ConfigError, "scenario.schema_version: expected an integer");
  s.schema_version = ver.get<int>();
  if (s.schema_version != current_schema_version)
    fail(ErrorKind::ConfigError, "schema_version " + std::to_string(s.schema_version) + " is not supported");
  s.name = rd.string_or("name", "");
  s.description = rd.string_or("description", "");
  s.mode = mode_names.parse(rd.string("mode"), "scenario.mode");
  s.engine = engine_names.parse(rd.string_or("engine", "closedform"), "scenario.engine");
  s.oracle_model = oracle_names.parse(rd.string_or("oracle_model", "reduced"), "scenario.oracle_model");
  s.params = parse_params(rd.at("params"));
  if (rd.has("sweep")) s.sweep = parse_sweep(rd.at("sweep"), "sweep");
  if (rd.has("sweep2")) s.sweep2 = parse_sweep(rd.at("sweep2"), "sweep2");
  if (rd.has("series")) {
    const json& arr = rd.at("series");
    if (!arr.is_array()) fail(ErrorKind::ConfigError, "scenario.series: expected an array");
    for (std::size_t i = 0; i < arr.size(); ++i) {
      const std::string where = "series[" + std::to_string(i) + "]";
      Reader sr(arr[i], where);
      Series ser;
      ser.label = sr.string("label");
      const json& set = sr.at("set");
      if (!set.is_object()) fail(ErrorKind::ConfigError, where + ".set: expected an object");
      for (auto it = set.begin(); it != set.end(); ++it) {
        if (!it.value().is_number()) fail(ErrorKind::ConfigError, where + ".set." + it.key() + ": expected a number");
        ser.set[it.key()] = it.value().get<double>();
      }
      sr.finish();
      s.series.push_back(ser);
    }
  }
  s.output = rd.string_or("output", "");
  if (rd.has("seed")) {
    const json& seed = rd.at("seed");
    if (!seed.is_number_unsigned()) fail(ErrorKind::ConfigError, "scenario.seed: expected a non-negative integer");
    s.seed = seed.get<std::uint64_t>();
  }
  if (rd.has("trajectories")) {
    const json& tr = rd.at("trajectories");
    if (!tr.is_number_integer()) fail(ErrorKind::ConfigError, "scenario.trajectories: expected an integer");
    s.trajectories = tr.get<long>();
  }
  if (rd.has("tolerances")) {
    Reader tr(rd.at("tolerances"), "tolerances");
    if (tr.has("relative")) s.tolerances.relative = tr.number("relative");
    s.tolerances.integrator = tr.number_or("integrator", s.tolerances.integrator);
    s.tolerances.threshold = tr.number_or("threshold", s.tolerances.threshold);
    s.tolerances.r_max = tr.number_or("r_max", s.tolerances.r_max);
    s.tolerances.sigma = tr.number_or("sigma", s.tolerances.sigma);
    tr.finish();
  }
  rd.finish();
  validate(s);
  return s;
}

inline Scenario parse_scenario_text(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    fail(ErrorKind::ConfigError, std::string("invalid JSON: ") + e.what());
  }
  return parse_scenario(j);
}

inline Scenario load_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::ConfigError, "cannot read scenario file '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_scenario_text(buf.str());
}

inline json emit_scenario(const Scenario& s) {
  using namespace scenario_detail;
  json j;
  j["schema_version"] = s.schema_version;
  j["name"] = s.name;
  if (!s.description.empty()) j["description"] = s.description;
  j["mode"] = to_string(s.mode);
  j["engine"] = to_string(s.engine);
  j["oracle_model"] = to_string(s.oracle_model);
  j["params"] = emit_params(s.params);
  if (s.sweep) j["sweep"] = emit_sweep(*s.sweep);
  if (s.sweep2) j["sweep2"] = emit_sweep(*s.sweep2);
  if (!s.series.empty()) {
    json arr = json::array();
    for (const auto& ser : s.series) arr.push_back({{"label", ser.label}, {"set", ser.set}});
    j["series"] = arr;
  }
  if (!s.output.empty()) j["output"] = s.output;
  j["seed"] = s.seed;
  j["trajectories"] = s.trajectories;
  json tol = {{"integrator", s.tolerances.integrator},
              {"threshold", s.tolerances.threshold},
              {"r_max", s.tolerances.r_max},
              {"sigma", s.tolerances.sigma}};
  if (s.tolerances.relative) tol["relative"] = *s.tolerances.relative;
  j["tolerances"] = tol;
  return j;
}

inline std::string sha256_hex(const std::string& data) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), digest, &len, EVP_sha256(), nullptr) != 1)
    fail(ErrorKind::ConfigError, "SHA-256 digest failed");
  static const char* hex = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < len; ++i) {
    out += hex[digest[i] >> 4];
    out += hex[digest[i] & 0xf];
  }
  return out;
}

// Digest of the canonical (sorted-key, compact) serialization.
inline std::string scenario_digest(const Scenario& s) { return "sha256:" + sha256_hex(emit_scenario(s).dump()); }

// Figure presets. Grid densities and axis ranges are our choice; the figures
// specify only the parameter sets.
inline Scenario preset(const std::string& name) {
  Scenario s;
  s.name = name;
  s.params.kind = ParamsKind::Dimensionless;
  s.engine = Engine::ClosedForm;
  if (name == "fig3a") {
    s.description = "E_m|W versus r at gamma/G = 0.1 for n0 = n in {0, 0.5, 5}";
    s.mode = Mode::Curve;
    s.params.dimensionless.gamma_over_G = 0.1;
    s.sweep = Sweep{"r", 0.0, 3.0, 301, false};
    s.series = {{"n0=n=0", {{"n0", 0.0}, {"n", 0.0}}},
                {"n0=n=0.5", {{"n0", 0.5}, {"n", 0.5}}},
                {"n0=n=5", {{"n0", 5.0}, {"n", 5.0}}}};
  } else if (name == "fig3b") {
    s.description = "E_m|W versus r at gamma/G = 0.1, n0 = 0, n in {100, 600, 1000}";
    s.mode = Mode::Curve;
    s.params.dimensionless.gamma_over_G = 0.1;
    s.sweep = Sweep{"r", 0.0, 10.0, 301, false};
    s.series = {{"n=100", {{"n0", 0.0}, {"n", 100.0}}},
                {"n=600", {{"n0", 0.0}, {"n", 600.0}}},
                {"n=1000", {{"n0", 0.0}, {"n", 1000.0}}}};
  } else if (name == "fig4") {
    s.description = "E_m|W over (r, gamma/G) at n0 = n = 0";
    s.mode = Mode::Heatmap;
    s.sweep = Sweep{"r", 0.0, 3.0, 201, false};
    s.sweep2 = Sweep{"gamma_over_G", 0.0, 2.0, 201, false};
  } else if (name == "inset") {
    s.description = "largest n with collective steering for all r <= r_max, versus gamma/G, n0 = 0";
    s.mode = Mode::NThreshold;
    s.sweep = Sweep{"gamma_over_G", 0.02, 0.9, 25, true};
  } else {
    fail(ErrorKind::ConfigError, "unknown preset '" + name + "' (fig3a, fig3b, fig4, inset)");
  }
  s.output = name + ".csv";
  validate(s);
  return s;
}

inline const std::vector<std::string> preset_names{"fig3a", "fig3b", "fig4", "inset"};

}  // namespace steerkit::cli
