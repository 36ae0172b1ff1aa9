#pragma once

// Report assembly shared by the CLI and the acceptance gate.
//
// Every report embeds the run configuration verbatim, plus provenance
// (module versions, arithmetic mode, master seed, input content hashes).
// Reports carry no wall-clock data: byte-identical reruns are part of the
// contract, so timings go to stderr, never into the report body.

#include <cstdint>
#include <string>
#include <vector>

#include "cpslab/arith.hpp"
#include "cpslab/json_io.hpp"
#include "cpslab/version.hpp"

namespace cpslab {

struct RunConfig {
  std::string command;
  std::vector<std::string> inputs;  // input file paths, in argument order
  bool certified = false;
  std::uint64_t seed = 0;
  int grid = 0;
  int n_scen = 0;
  int count = 0;
  std::string scenario;
  std::string out_path;
  double tolerance = kFloatTol;
  Json extra;  // command-specific knobs, echoed as-is

  Json to_json() const {
    Json j;
    j["command"] = command;
    j["inputs"] = inputs;
    j["certified"] = certified;
    j["seed"] = seed;
    j["grid"] = grid;
    j["n_scen"] = n_scen;
    j["count"] = count;
    j["scenario"] = scenario;
    j["out_path"] = out_path;
    j["tolerance"] = tolerance;
    if (!extra.is_null()) j["extra"] = extra;
    return j;
  }
};

inline Json provenance_json(ArithMode mode, std::uint64_t seed,
                            const std::vector<std::string>& input_paths) {
  Json j;
  j["library"] = kLibraryVersion;
  Json mods = Json::object();
  for (const auto& mv : kModuleVersions) mods[mv.name] = mv.version;
  j["modules"] = mods;
  j["arith"] = arith_mode_name(mode);
  j["seed"] = seed;
  Json hashes = Json::object();
  for (const auto& p : input_paths) hashes[p] = fnv1a_hex(read_file_bytes(p));
  j["input_hash"] = hashes;
  return j;
}

inline Json make_report(const RunConfig& cfg, ArithMode mode, Json body) {
  Json j;
  j["config"] = cfg.to_json();
  j["provenance"] = provenance_json(mode, cfg.seed, cfg.inputs);
  j["result"] = std::move(body);
  return j;
}

}  // namespace cpslab
