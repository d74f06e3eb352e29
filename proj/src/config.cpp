#include "ylab/config.hpp"

#include <cmath>
#include <limits>
#include <set>

#include "json.hpp"

namespace ylab {

using nlohmann::json;

const char* command_name(Command c) {
  switch (c) {
    case Command::SphereSpec: return "sphere-spec";
    case Command::SurfaceSpec: return "surface-spec";
    case Command::Index: return "index";
    case Command::PathScan: return "path-scan";
    case Command::Branch: return "branch";
  }
  return "?";
}

namespace {

const FNCoords kPinchStart{{3.0, 2.0, 2.0}, {0.0, 0.0, 0.0}, 2};
const FNCoords kPinchEnd{{0.3, 2.0, 2.0}, {0.0, 0.0, 0.0}, 2};

void reject_unknown(const json& obj, const std::string& path, std::initializer_list<const char*> allowed) {
  if (!obj.is_object()) throw ConfigError(path, "expected an object");
  std::set<std::string> keys;
  for (const char* k : allowed) keys.insert(k);
  for (const auto& [k, v] : obj.items())
    if (!keys.count(k)) throw ConfigError(path + "." + k, "unknown key");
}

double get_number(const json& v, const std::string& path, double lo, double hi, bool openLo = false) {
  if (!v.is_number()) throw ConfigError(path, "expected a number");
  const double x = v.get<double>();
  if (!std::isfinite(x) || x < lo || x > hi || (openLo && x == lo)) {
    std::string range = (openLo ? "(" : "[") + json(lo).dump() + ", " + json(hi).dump() + "]";
    throw ConfigError(path, "must lie in " + range);
  }
  return x;
}

long long get_integer(const json& v, const std::string& path, long long lo, long long hi) {
  if (!v.is_number_integer()) throw ConfigError(path, "expected an integer");
  const bool tooBig = v.is_number_unsigned() && v.get<unsigned long long>() > static_cast<unsigned long long>(hi);
  const long long x = tooBig ? hi : v.get<long long>();
  if (tooBig || x < lo || x > hi)
    throw ConfigError(path, "must lie in [" + std::to_string(lo) + ", " + std::to_string(hi) + "]");
  return x;
}

std::string get_string(const json& v, const std::string& path) {
  if (!v.is_string()) throw ConfigError(path, "expected a string");
  return v.get<std::string>();
}

std::array<double, 3> get_triple(const json& v, const std::string& path, bool positive) {
  if (!v.is_array() || v.size() != 3) throw ConfigError(path, "expected an array of 3 numbers");
  std::array<double, 3> out{};
  for (std::size_t i = 0; i < 3; ++i) {
    const std::string p = path + "[" + std::to_string(i) + "]";
    out[i] = positive ? get_number(v[i], p, 0.0, 100.0, true) : get_number(v[i], p, -100.0, 100.0);
  }
  return out;
}

FNCoords get_coords(const json& v, const std::string& path) {
  reject_unknown(v, path, {"lengths", "twists"});
  if (!v.contains("lengths")) throw ConfigError(path + ".lengths", "required");
  FNCoords c;
  c.lengths = get_triple(v["lengths"], path + ".lengths", true);
  if (v.contains("twists")) c.twists = get_triple(v["twists"], path + ".twists", false);
  return c;
}

void apply_preset(RunConfig& c, const std::string& name) {
  c.preset = name;
  if (name == "bolza") {
    c.command = Command::SurfaceSpec;
    c.bolza = true;
    c.hTarget = 0.05;
  } else if (name == "pinch-l1" || name == "m5-branch") {
    c.command = name == "pinch-l1" ? Command::PathScan : Command::Branch;
    c.m = 5;
    c.path.start = kPinchStart;
    c.path.end = kPinchEnd;
    c.path.sampleCount = 20;
  } else {
    throw ConfigError("$.preset", "must be one of bolza, pinch-l1, m5-branch");
  }
}

Command parse_command(const std::string& s) {
  if (s == "sphere-spec") return Command::SphereSpec;
  if (s == "surface-spec") return Command::SurfaceSpec;
  if (s == "index") return Command::Index;
  if (s == "path-scan") return Command::PathScan;
  if (s == "branch") return Command::Branch;
  throw ConfigError("$.command", "must be one of sphere-spec, surface-spec, index, path-scan, branch");
}

json coords_json(const FNCoords& c) { return {{"lengths", c.lengths}, {"twists", c.twists}}; }

}  // namespace

RunConfig parse_config(const std::string& document) {
  json doc;
  try {
    doc = json::parse(document);
  } catch (const json::parse_error& e) {
    throw ConfigError("$", std::string("not valid JSON: ") + e.what());
  }
  reject_unknown(doc, "$",
                 {"command", "preset", "m", "surface", "path", "samples", "hTarget", "eigCount", "tolerances", "sphere",
                  "continuation", "writeNodes", "seed", "threads", "output"});

  RunConfig c;
  bool hasPath = false;
  if (doc.contains("preset")) {
    apply_preset(c, get_string(doc["preset"], "$.preset"));
    hasPath = c.command == Command::PathScan || c.command == Command::Branch;
  }
  if (doc.contains("command")) {
    c.command = parse_command(get_string(doc["command"], "$.command"));
  } else if (c.preset.empty()) {
    throw ConfigError("$.command", "required unless a preset is given");
  }
  if (doc.contains("m")) c.m = static_cast<int>(get_integer(doc["m"], "$.m", 4, 64));
  if (doc.contains("surface")) {
    const json& s = doc["surface"];
    if (s.is_string()) {
      if (s.get<std::string>() != "bolza") throw ConfigError("$.surface", "the only named surface is \"bolza\"");
      c.bolza = true;
    } else {
      c.coords = get_coords(s, "$.surface");
      c.bolza = false;
    }
  }
  if (doc.contains("path")) {
    const json& p = doc["path"];
    reject_unknown(p, "$.path", {"start", "end"});
    if (!p.contains("start")) throw ConfigError("$.path.start", "required");
    if (!p.contains("end")) throw ConfigError("$.path.end", "required");
    c.path.start = get_coords(p["start"], "$.path.start");
    c.path.end = get_coords(p["end"], "$.path.end");
    if (std::min(c.path.start.min_length(), c.path.end.min_length()) < kPinchingFloor)
      throw ConfigError("$.path", "lengths must stay above the pinching floor 0.1");
    hasPath = true;
  }
  if (doc.contains("samples")) c.path.sampleCount = static_cast<int>(get_integer(doc["samples"], "$.samples", 2, 10000));
  if (doc.contains("hTarget")) c.hTarget = get_number(doc["hTarget"], "$.hTarget", 0.0, 0.5, true);
  if (doc.contains("eigCount")) c.eigCount = static_cast<int>(get_integer(doc["eigCount"], "$.eigCount", 1, 500));
  if (doc.contains("tolerances")) {
    const json& t = doc["tolerances"];
    reject_unknown(t, "$.tolerances", {"eig", "refine", "null", "newton"});
    if (t.contains("eig")) c.eigTol = get_number(t["eig"], "$.tolerances.eig", 0.0, 1e-2, true);
    if (t.contains("refine")) c.refineTol = get_number(t["refine"], "$.tolerances.refine", 0.0, 0.5, true);
    if (t.contains("null")) c.nullTol = get_number(t["null"], "$.tolerances.null", 0.0, 1.0);
    if (t.contains("newton")) c.continuation.newtonTol = get_number(t["newton"], "$.tolerances.newton", 0.0, 1e-8, true);
  }
  if (doc.contains("sphere")) {
    const json& s = doc["sphere"];
    reject_unknown(s, "$.sphere", {"n", "jMax"});
    if (s.contains("n")) c.sphereN = static_cast<int>(get_integer(s["n"], "$.sphere.n", 2, 64));
    if (s.contains("jMax")) c.jMax = static_cast<int>(get_integer(s["jMax"], "$.sphere.jMax", 0, 1000));
  }
  if (doc.contains("continuation")) {
    const json& s = doc["continuation"];
    reject_unknown(s, "$.continuation", {"steps", "ds"});
    if (s.contains("steps")) c.continuation.steps = static_cast<int>(get_integer(s["steps"], "$.continuation.steps", 0, 1000));
    if (s.contains("ds")) c.continuation.ds = get_number(s["ds"], "$.continuation.ds", 0.0, 1.0, true);
  }
  if (doc.contains("writeNodes")) {
    if (!doc["writeNodes"].is_boolean()) throw ConfigError("$.writeNodes", "expected a boolean");
    c.writeNodes = doc["writeNodes"].get<bool>();
  }
  if (doc.contains("seed"))
    c.seed = static_cast<std::uint64_t>(get_integer(doc["seed"], "$.seed", 0, std::numeric_limits<long long>::max()));
  if (doc.contains("threads")) c.threads = static_cast<int>(get_integer(doc["threads"], "$.threads", 1, 256));
  if (doc.contains("output")) {
    c.output = get_string(doc["output"], "$.output");
    if (c.output.empty()) throw ConfigError("$.output", "must not be empty");
  }

  if ((c.command == Command::PathScan || c.command == Command::Branch) && !hasPath)
    throw ConfigError("$.path", "required for " + std::string(command_name(c.command)));
  return c;
}

std::string config_to_json(const RunConfig& c) {
  json j = {{"command", command_name(c.command)},
            {"m", c.m},
            {"surface", c.bolza ? json("bolza") : coords_json(c.coords)},
            {"path", {{"start", coords_json(c.path.start)}, {"end", coords_json(c.path.end)}}},
            {"samples", c.path.sampleCount},
            {"hTarget", c.hTarget},
            {"eigCount", c.eigCount},
            {"tolerances",
             {{"eig", c.eigTol}, {"refine", c.refineTol}, {"null", c.nullTol}, {"newton", c.continuation.newtonTol}}},
            {"sphere", {{"n", c.sphereN}, {"jMax", c.jMax}}},
            {"continuation", {{"steps", c.continuation.steps}, {"ds", c.continuation.ds}}},
            {"writeNodes", c.writeNodes},
            {"seed", c.seed},
            {"threads", c.threads}};
  if (!c.preset.empty()) j["preset"] = c.preset;
  return j.dump(2);
}

}  // namespace ylab
