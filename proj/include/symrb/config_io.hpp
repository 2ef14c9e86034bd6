#pragma once

// Run-config files, canonical hashing, dataset CSV + JSON sidecar, result JSON.

#include <cstdint>
#include <string>

#include "json.hpp"
#include "symrb/estimation.hpp"
#include "symrb/protocol.hpp"

namespace symrb {

using Json = nlohmann::json;

constexpr int kConfigSchemaVersion = 1;

struct OutputOptions {
  std::string dir = "out";
  bool svg = true;
};

struct RunConfig {
  Json experiment;  // normalized: every default filled in
  EstimationOptions estimation;
  BootstrapOptions bootstrap;
  OutputOptions output;
  Json snapshot;  // normalized full document
};

// Validates a run-config document.  Unknown keys and malformed values raise
// ConfigError with the offending path.
RunConfig parse_run_config(const Json& doc);
RunConfig load_run_config(const std::string& path);

// Normalized experiment section -> experiment config.
ExperimentConfig experiment_config(const Json& experiment);
Json normalize_experiment(const Json& experiment);

// Experiment section for the built-in single- and two-T setups.
Json preset_experiment(int copies, double epsilon, int max_length, int sequences, long shots, std::uint64_t seed);

// FNV-1a over the compact dump, 16 hex digits.
std::string config_hash(const Json& experiment);

Json matrix_to_json(const CMatrix& m);
CMatrix matrix_from_json(const Json& j, const std::string& path);

// CSV with a leading "# config_hash=..." line; the sidecar is <path>.json.
void write_dataset(const ExperimentDataset& data, const std::string& csv_path);
ExperimentDataset read_dataset(const std::string& csv_path);

Json estimate_to_json(const FidelityEstimate& est, const EstimationModel& model);

}  // namespace symrb
