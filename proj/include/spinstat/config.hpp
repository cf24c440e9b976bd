#pragma once

// Run configuration: a keyed-section text file
//
//   [molecule]  spectroscopic constants
//   [catalog]   branches, J_max, injected beta2_half
//   [synth]     line shape, column, snr, seed, averaging, grid
//   [fit]       CL, baseline degree, width fitting
//   [calibrate] Monte-Carlo trial count
//   [output]    file paths
//
// Values are `key = value`; strings may be double-quoted; full-line `#`
// comments are allowed.

#include <cstdint>
#include <filesystem>
#include <string>

#include "spinstat/calibrate.hpp"

namespace spinstat::cli {

inline constexpr const char* kToolName = "spinstat";
inline constexpr const char* kToolVersion = "0.1.0";

struct OutputPaths {
  std::string catalog_csv = "catalog.csv";
  std::string catalog_json = "catalog.json";
  std::string spectrum_csv = "spectrum.csv";
  std::string spectrum_json = "spectrum.json";
  std::string report_json = "bound.json";
  std::string calibration_json = "calibration.json";

  bool operator==(const OutputPaths&) const = default;
};

struct RunConfig {
  bounds::Scenario scenario;
  int calibrate_trials = 200;
  OutputPaths output;

  // Component invariants plus writable output directories.
  void validate() const;
  bool operator==(const RunConfig&) const = default;
};

// Every key, with its current value. Parsing the result yields an equal
// config.
std::string to_text(const RunConfig& c);

// Missing keys keep their defaults; unknown sections or keys are errors.
// Throws ValidationError.
RunConfig parse_config(const std::string& text);
RunConfig load_config(const std::filesystem::path& path);

// FNV-1a of to_text(c), 16 hex digits.
std::string config_hash(const RunConfig& c);

}  // namespace spinstat::cli
