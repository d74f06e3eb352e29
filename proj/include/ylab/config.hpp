#pragma once

// Run configuration for the command-line driver and the pipeline behind it.

#include <cstdint>
#include <iosfwd>
#include <string>

#include "ylab/yamabe.hpp"

namespace ylab {

inline constexpr const char* kVersion = "1.0.0";

enum class Command { SphereSpec, SurfaceSpec, Index, PathScan, Branch };

const char* command_name(Command c);

struct RunConfig {
  Command command = Command::Index;
  std::string preset;   // empty, "bolza", "pinch-l1" or "m5-branch"
  int m = 5;
  bool bolza = true;    // surface is the Bolza surface, else `coords`
  FNCoords coords;
  PathSpec path;
  double hTarget = 0.1;
  int eigCount = 10;
  double eigTol = 1e-8;
  double refineTol = 1e-3;
  double nullTol = 0.0;  // 0: derived from the eigensolver residuals
  int sphereN = 3;
  int jMax = 4;
  ContinuationOptions continuation;
  bool writeNodes = false;
  std::uint64_t seed = 1;
  int threads = 1;
  std::string output = "out";
};

/// Parses and validates a JSON document; unknown keys are rejected. Throws
/// ConfigError carrying the JSON path of the offending field.
RunConfig parse_config(const std::string& document);

/// The configuration as JSON, every field explicit except the output directory
/// (and the preset name when there is none).
std::string config_to_json(const RunConfig& config);

/// Runs the pipeline and writes the result files into config.output. Prints
/// a one-line summary to `summary`. Returns 0, or throws.
int run(const RunConfig& config, std::ostream& summary);

}  // namespace ylab
