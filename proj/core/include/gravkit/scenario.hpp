#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "gravkit/config.hpp"

namespace gravkit {

inline constexpr const char* kToolkitName = "gravkit";
inline constexpr const char* kToolkitVersion = "0.1.0";

struct CheckResult {
    std::string name;
    bool pass = false;
    double measured = 0.0;
    std::string detail;  // expectation and tolerance, human readable
};

struct RunManifest {
    std::string preset;
    std::string reference;  // canonical example the preset reproduces
    std::string model;
    std::uint64_t seed = 0;
    int workers = 1;
    double wall_clock_ms = 0.0;
    std::vector<std::pair<std::string, std::string>> config_echo;  // "section.key" -> value
    std::vector<std::string> outputs;  // file names written to the output directory
    std::vector<CheckResult> checks;

    bool all_pass() const;
    std::string to_json() const;
};

/// Names of the built-in scenario presets.
std::vector<std::string> scenario_presets();

/// The preset's config text (parseable by ConfigFile; also a template for
/// custom configs).
std::string preset_config_text(const std::string& name);

/// Run a scenario described by a parsed config. Outputs are written
/// atomically into out_dir; the manifest (run_manifest.json) is always
/// emitted. Unknown config keys are rejected.
RunManifest run_scenario(ConfigFile cfg, const std::string& out_dir,
                         std::optional<std::uint64_t> seed_override = {},
                         std::optional<int> workers_override = {});

RunManifest run_scenario_preset(const std::string& preset, const std::string& out_dir,
                                std::optional<std::uint64_t> seed_override = {},
                                std::optional<int> workers_override = {});

/// Atomic file write (temp file + rename).
void write_file_atomic(const std::string& dir, const std::string& name,
                       const std::string& contents);

}  // namespace gravkit
