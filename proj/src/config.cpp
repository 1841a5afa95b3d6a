#include "carfollow/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <initializer_list>
#include <sstream>

#include <json.hpp>

#include "carfollow/error.hpp"

namespace carfollow {

namespace {

using nlohmann::json;

class Reader {
 public:
  explicit Reader(std::string source) : source_(std::move(source)) {}

  [[noreturn]] void fail(const std::string& path, const std::string& msg) const {
    throw Error(ErrorCode::kConfig, source_ + ": field '" + path + "': " + msg);
  }

  void only_keys(const json& obj, const std::string& path,
                 std::initializer_list<const char*> allowed) const {
    for (auto it = obj.begin(); it != obj.end(); ++it) {
      const bool known = std::any_of(allowed.begin(), allowed.end(),
                                     [&](const char* k) { return it.key() == k; });
      if (!known) fail(join(path, it.key()), "unknown key");
    }
  }

  const json& object(const json& parent, const std::string& path,
                     const char* key) const {
    const auto it = parent.find(key);
    if (it == parent.end()) fail(join(path, key), "missing");
    if (!it->is_object()) fail(join(path, key), "expected an object");
    return *it;
  }

  double number(const json& obj, const std::string& path, const char* key,
                double fallback) const {
    const auto it = obj.find(key);
    if (it == obj.end()) return fallback;
    return number(*it, join(path, key));
  }

  double number(const json& value, const std::string& path) const {
    if (!value.is_number()) fail(path, "expected a number");
    const double x = value.get<double>();
    if (!std::isfinite(x)) fail(path, "expected a finite number");
    return x;
  }

  std::size_t count(const json& obj, const std::string& path, const char* key,
                    std::size_t fallback, long long min = 0) const {
    const auto it = obj.find(key);
    if (it == obj.end()) return fallback;
    if (!it->is_number_integer() || it->get<long long>() < min) {
      fail(join(path, key), "expected an integer >= " + std::to_string(min));
    }
    return static_cast<std::size_t>(it->get<long long>());
  }

  std::string text(const json& obj, const std::string& path, const char* key,
                   const std::string& fallback) const {
    const auto it = obj.find(key);
    if (it == obj.end()) return fallback;
    if (!it->is_string()) fail(join(path, key), "expected a string");
    return it->get<std::string>();
  }

  static std::string join(const std::string& path, const std::string& key) {
    return path.empty() ? key : path + "." + key;
  }

 private:
  std::string source_;
};

IdmParams read_idm(const Reader& r, const json& sc) {
  const std::string set = r.text(sc, "scenario", "parameter_set", "standard");
  IdmParams p;
  if (set == "standard") {
    p = IdmParams::standard();
  } else if (set == "creep") {
    p = IdmParams::creep();
  } else {
    r.fail("scenario.parameter_set", "expected 'standard' or 'creep'");
  }
  if (auto it = sc.find("parameters"); it != sc.end()) {
    const std::string path = "scenario.parameters";
    if (!it->is_object()) r.fail(path, "expected an object");
    r.only_keys(*it, path, {"v0", "T", "s0", "a", "b"});
    p.v0 = r.number(*it, path, "v0", p.v0);
    p.T = r.number(*it, path, "T", p.T);
    p.s0 = r.number(*it, path, "s0", p.s0);
    p.a = r.number(*it, path, "a", p.a);
    p.b = r.number(*it, path, "b", p.b);
  }
  return p;
}

FvdmParams read_ovm_family(const Reader& r, const json& sc, bool fvdm) {
  if (sc.contains("parameter_set")) {
    r.fail("scenario.parameter_set", "only applies to the IDM family");
  }
  FvdmParams p;
  if (auto it = sc.find("parameters"); it != sc.end()) {
    const std::string path = "scenario.parameters";
    if (!it->is_object()) r.fail(path, "expected an object");
    if (fvdm) {
      r.only_keys(*it, path, {"v0", "tau", "beta", "delta_s", "lambda"});
    } else {
      r.only_keys(*it, path, {"v0", "tau", "beta", "delta_s"});
    }
    p.ovm.v0 = r.number(*it, path, "v0", p.ovm.v0);
    p.ovm.tau = r.number(*it, path, "tau", p.ovm.tau);
    p.ovm.beta = r.number(*it, path, "beta", p.ovm.beta);
    p.ovm.delta_s = r.number(*it, path, "delta_s", p.ovm.delta_s);
    p.lambda = r.number(*it, path, "lambda", p.lambda);
  }
  return p;
}

Model read_model(const Reader& r, const json& sc) {
  const std::string name = r.text(sc, "scenario", "model", "idm");
  ModelType type;
  try {
    type = model_type_from_string(name);
  } catch (const Error& e) {
    r.fail("scenario.model", e.what());
  }
  try {
    switch (type) {
      case ModelType::kIdm: return Model::idm(read_idm(r, sc));
      case ModelType::kIdmPlus: return Model::idm_plus(read_idm(r, sc));
      case ModelType::kIdmModifiedFree:
        return Model::idm_modified_free(read_idm(r, sc));
      case ModelType::kOvm: return Model::ovm(read_ovm_family(r, sc, false).ovm);
      case ModelType::kFvdm: return Model::fvdm(read_ovm_family(r, sc, true));
    }
  } catch (const Error& e) {
    if (e.code() == ErrorCode::kConfig) throw;
    r.fail("scenario.parameters", e.what());
  }
  r.fail("scenario.model", "unsupported model");
}

SpeedProfile read_profile(const Reader& r, const json& value,
                          const std::string& path) {
  if (!value.is_object()) r.fail(path, "expected an object");
  r.only_keys(value, path, {"initial_speed", "segments"});
  const double v_init = r.number(value, path, "initial_speed", 14.0);
  std::vector<SpeedProfile::Segment> segments;
  if (auto it = value.find("segments"); it != value.end()) {
    if (!it->is_array()) r.fail(path + ".segments", "expected an array");
    for (std::size_t k = 0; k < it->size(); ++k) {
      const std::string sp = path + ".segments[" + std::to_string(k) + "]";
      const json& seg = (*it)[k];
      if (!seg.is_object()) r.fail(sp, "expected an object");
      r.only_keys(seg, sp, {"start", "acceleration"});
      if (!seg.contains("start") || !seg.contains("acceleration")) {
        r.fail(sp, "needs 'start' and 'acceleration'");
      }
      segments.push_back({r.number(seg.at("start"), sp + ".start"),
                          r.number(seg.at("acceleration"), sp + ".acceleration")});
    }
  }
  try {
    return SpeedProfile(v_init, std::move(segments));
  } catch (const Error& e) {
    r.fail(path, e.what());
  }
}

std::vector<CutInEvent> read_events(const Reader& r, const json& value) {
  const std::string path = "scenario.events";
  if (!value.is_array()) r.fail(path, "expected an array");
  std::vector<CutInEvent> events;
  for (std::size_t k = 0; k < value.size(); ++k) {
    const std::string ep = path + "[" + std::to_string(k) + "]";
    const json& ev = value[k];
    if (!ev.is_object()) r.fail(ep, "expected an object");
    r.only_keys(ev, ep, {"time", "gap_factor", "leader_speed_after"});
    for (const char* key : {"time", "gap_factor", "leader_speed_after"}) {
      if (!ev.contains(key)) r.fail(Reader::join(ep, key), "missing");
    }
    events.push_back({r.number(ev.at("time"), ep + ".time"),
                      r.number(ev.at("gap_factor"), ep + ".gap_factor"),
                      r.number(ev.at("leader_speed_after"),
                               ep + ".leader_speed_after")});
  }
  return events;
}

ScenarioSpec read_scenario(const Reader& r, const json& sc) {
  const std::string type = r.text(sc, "scenario", "type", "");
  const Model model = read_model(r, sc);
  ScenarioSpec spec;
  try {
    if (type == "start_stop") {
      r.only_keys(sc, "scenario",
                  {"type", "model", "parameter_set", "parameters", "vehicles",
                   "t_max", "light_distance", "error_vehicle"});
      spec = build_start_stop(model, r.count(sc, "scenario", "vehicles", 20, 1),
                              r.number(sc, "scenario", "light_distance",
                                       kLightDistance),
                              r.number(sc, "scenario", "t_max", 60.0));
    } else if (type == "external_leader") {
      r.only_keys(sc, "scenario",
                  {"type", "model", "parameter_set", "parameters", "vehicles",
                   "t_max", "leader_profile", "error_vehicle"});
      SpeedProfile profile = default_leader_profile();
      if (auto it = sc.find("leader_profile"); it != sc.end()) {
        profile = read_profile(r, *it, "scenario.leader_profile");
      }
      spec = build_external_leader(model, r.count(sc, "scenario", "vehicles", 10, 1),
                                   profile, r.number(sc, "scenario", "t_max", 60.0));
    } else if (type == "cut_in") {
      r.only_keys(sc, "scenario",
                  {"type", "model", "parameter_set", "parameters", "t_max",
                   "leader_speed", "events", "error_vehicle"});
      std::vector<CutInEvent> events = default_cutin_events();
      if (auto it = sc.find("events"); it != sc.end()) events = read_events(r, *it);
      spec = build_cutin(model,
                         r.number(sc, "scenario", "leader_speed", kCutInLeaderSpeed),
                         std::move(events),
                         r.number(sc, "scenario", "t_max", 120.0));
    } else {
      r.fail("scenario.type",
             "expected 'start_stop', 'external_leader' or 'cut_in'");
    }
    spec.error_vehicle =
        r.count(sc, "scenario", "error_vehicle", spec.error_vehicle);
    spec.validate();
  } catch (const Error& e) {
    if (e.code() == ErrorCode::kConfig) throw;
    r.fail("scenario", e.what());
  }
  return spec;
}

std::vector<Scheme> read_schemes(const Reader& r, const json& value) {
  if (value.is_string() && value.get<std::string>() == "all") {
    return {std::begin(kAllSchemes), std::end(kAllSchemes)};
  }
  if (!value.is_array() || value.empty()) {
    r.fail("schemes", "expected \"all\" or a non-empty array of scheme names");
  }
  std::vector<Scheme> out;
  for (std::size_t k = 0; k < value.size(); ++k) {
    const std::string path = "schemes[" + std::to_string(k) + "]";
    if (!value[k].is_string()) r.fail(path, "expected a string");
    try {
      const Scheme s = scheme_from_string(value[k].get<std::string>());
      if (std::find(out.begin(), out.end(), s) != out.end()) {
        r.fail(path, "duplicate scheme");
      }
      out.push_back(s);
    } catch (const Error& e) {
      if (e.code() == ErrorCode::kConfig) throw;
      r.fail(path, e.what());
    }
  }
  return out;
}

std::vector<double> read_steps(const Reader& r, const json& value,
                               double record_interval) {
  std::vector<double> steps;
  if (value.is_string() && value.get<std::string>() == "default16") {
    steps = default_step_sizes();
  } else if (value.is_array() && !value.empty()) {
    for (std::size_t k = 0; k < value.size(); ++k) {
      steps.push_back(r.number(value[k], "h_list[" + std::to_string(k) + "]"));
    }
  } else {
    r.fail("h_list", "expected \"default16\" or a non-empty array of steps");
  }
  for (std::size_t k = 0; k < steps.size(); ++k) {
    try {
      steps_per_interval(record_interval, steps[k]);
    } catch (const Error& e) {
      r.fail("h_list[" + std::to_string(k) + "]", e.what());
    }
  }
  return steps;
}

// 1-based line and column of a byte offset.
std::string position(std::string_view text, std::size_t byte) {
  byte = std::min(byte, text.size());
  std::size_t line = 1, col = 1;
  for (std::size_t i = 0; i + 1 < byte; ++i) {
    if (text[i] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  return "line " + std::to_string(line) + ", column " + std::to_string(col);
}

}  // namespace

StudyConfig parse_config(std::string_view text, const std::string& source) {
  json doc;
  try {
    doc = json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    std::string msg = e.what();
    // Drop the library's own "[json.exception.parse_error.101] parse error at
    // line x, column y: " prefix; the position is reported below.
    if (auto p = msg.find(": "); p != std::string::npos) msg = msg.substr(p + 2);
    throw Error(ErrorCode::kConfig,
                source + ": " + position(text, e.byte) + ": " + msg);
  }
  const Reader r(source);
  if (!doc.is_object()) r.fail("", "top level must be an object");
  r.only_keys(doc, "",
              {"name", "scenario", "schemes", "h_list", "output_dir",
               "reference_step"});

  StudyConfig cfg;
  const json& sc = r.object(doc, "", "scenario");
  cfg.scenario = read_scenario(r, sc);
  cfg.name = r.text(doc, "", "name", cfg.scenario.name);
  if (cfg.name.empty() ||
      cfg.name.find_first_of("/\\") != std::string::npos) {
    r.fail("name", "must be non-empty and contain no path separators");
  }
  cfg.scenario.name = cfg.name;
  if (auto it = doc.find("schemes"); it != doc.end()) {
    cfg.schemes = read_schemes(r, *it);
  }
  if (auto it = doc.find("h_list"); it != doc.end()) {
    cfg.steps = read_steps(r, *it, cfg.scenario.record_interval);
  }
  cfg.output_dir = r.text(doc, "", "output_dir", cfg.output_dir);
  cfg.reference_step = r.number(doc, "", "reference_step", cfg.reference_step);
  if (!(cfg.reference_step > 0.0)) r.fail("reference_step", "must be positive");
  try {
    steps_per_interval(cfg.scenario.record_interval, 2.0 * cfg.reference_step);
  } catch (const Error& e) {
    r.fail("reference_step", std::string("twice the step: ") + e.what());
  }
  return cfg;
}

StudyConfig load_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, path + ": cannot open config file");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str(), path);
}

std::vector<std::string> preset_names() {
  return {"smooth", "stop",            "creep",  "idm_plus", "modified_idm",
          "ovm",    "fvdm",            "external_leader", "cut_in"};
}

std::string preset_json(std::string_view name) {
  auto start_stop = [&](const char* model, const char* set, int t_max) {
    std::string s = R"({"name": ")" + std::string(name) +
                    R"(", "scenario": {"type": "start_stop", "model": ")" +
                    model + "\"";
    if (set) s += std::string(R"(, "parameter_set": ")") + set + "\"";
    return s + R"(, "vehicles": 20, "light_distance": 670, "t_max": )" +
           std::to_string(t_max) + "}}";
  };
  if (name == "smooth") return start_stop("idm", "standard", 60);
  if (name == "stop") return start_stop("idm", "standard", 100);
  if (name == "creep") return start_stop("idm", "creep", 100);
  if (name == "idm_plus") return start_stop("idm_plus", "standard", 100);
  if (name == "modified_idm") {
    return start_stop("idm_modified_free", "standard", 100);
  }
  if (name == "ovm") return start_stop("ovm", nullptr, 100);
  if (name == "fvdm") return start_stop("fvdm", nullptr, 100);
  if (name == "external_leader") {
    return R"({"name": "external_leader",
  "scenario": {"type": "external_leader", "model": "idm",
    "parameter_set": "standard", "vehicles": 10, "t_max": 60,
    "leader_profile": {"initial_speed": 14, "segments": [
      {"start": 10, "acceleration": -2}, {"start": 15, "acceleration": 0},
      {"start": 25, "acceleration": 1}, {"start": 35, "acceleration": 0}]}}})";
  }
  if (name == "cut_in") {
    return R"({"name": "cut_in",
  "scenario": {"type": "cut_in", "model": "idm", "parameter_set": "standard",
    "leader_speed": 12, "t_max": 120, "events": [
      {"time": 20, "gap_factor": 0.5, "leader_speed_after": 10},
      {"time": 50, "gap_factor": 0.5, "leader_speed_after": 8},
      {"time": 80, "gap_factor": 0.5, "leader_speed_after": 6}]}})";
  }
  throw Error(ErrorCode::kConfig, "unknown preset '" + std::string(name) + "'");
}

StudyConfig preset_config(std::string_view name) {
  return parse_config(preset_json(name), "preset " + std::string(name));
}

}  // namespace carfollow
