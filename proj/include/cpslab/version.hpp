#pragma once

// Library and per-module versions, embedded in report provenance so a stored
// report pins the code that produced it.

namespace cpslab {

inline constexpr const char* kLibraryVersion = "1.0.0";

struct ModuleVersion {
  const char* name;
  const char* version;
};

inline constexpr ModuleVersion kModuleVersions[] = {
    {"rational", "1.0.0"},  {"event_tree", "1.0.0"}, {"envelopes", "1.0.0"},
    {"ledger", "1.0.0"},    {"simplex", "1.0.0"},    {"arbitrage", "1.0.0"},
    {"cps", "1.0.0"},       {"doob", "1.0.0"},       {"pathlab", "1.0.0"},
    {"corpus", "1.0.0"},    {"json_io", "1.0.0"},    {"cli", "1.0.0"},
};

}  // namespace cpslab
