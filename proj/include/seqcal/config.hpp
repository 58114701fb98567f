#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"
#include "seqcal/acquisition.hpp"
#include "seqcal/engine.hpp"
#include "seqcal/perf.hpp"
#include "seqcal/problem.hpp"

namespace seqcal {

// Raised for malformed or contradictory configuration; the CLI maps it to exit code 2.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A problem spelled out inline instead of picked from the testbed by name.
// `function` still selects the simulator; box, observation and noise are overridable.
struct CustomProblem {
  std::string function;
  std::vector<double> lower;
  std::vector<double> upper;
  std::optional<double> y;
  std::optional<double> noise_var;
};

struct DesignConfig {
  std::string problem = "himmelblau";
  std::optional<CustomProblem> custom;
  AcquisitionSpec spec;
  int n = 100;
  int n0 = 10;
  int b = 1;
  int w = 1;
  int replicates = 1;
  std::uint64_t seed = 1;
  bool mad = true;
  int mad_grid = 50;
  ClockMode clock = ClockMode::Measured;
  std::string out = "out";
};

// Base progress curve plus optional per-batch exponent overrides. The batch
// freezing itself is implied by each cell's b, not chosen here.
struct CurveSpec {
  CurveKind kind = CurveKind::Exponential;
  double exponent = 0.1;
  std::size_t total = 1280;
  std::vector<std::pair<std::size_t, double>> table;
  std::map<int, double> exponent_by_batch;
};

struct PerfConfig {
  CurveSpec curve;
  AcqTimeModel acq;
  RunTimeModel run;
  std::vector<int> batch_sizes{1};
  std::vector<int> worker_counts{1};
  double alpha = 0.1;
  int replicates = 30;
  std::string acq_label = "hybrid";
  std::uint64_t seed = 1;
  std::string out = "out";
};

nlohmann::json load_json_file(const std::filesystem::path& file);

// Manifests embed the original command and resolved config; feeding one back in
// place of a config replays the run. Returns the inner config for manifests
// (checking the command matches) and the document itself otherwise.
const nlohmann::json& unwrap_manifest(const nlohmann::json& doc, const std::string& command);

void apply_design_json(DesignConfig& config, const nlohmann::json& doc);
void apply_perf_json(PerfConfig& config, const nlohmann::json& doc);

nlohmann::json design_to_json(const DesignConfig& config);
nlohmann::json perf_to_json(const PerfConfig& config);

CalibrationProblem make_problem(const DesignConfig& config);
EngineConfig make_engine_config(const DesignConfig& config, int replicate);

// Scenario for one (b, w) cell. The stop count comes from the batch-frozen
// curve at the configured accuracy; InfeasibleTarget propagates as ConfigError.
PerfScenario make_scenario(const PerfConfig& config, int b, int w);

// Per-stage acquisition times from a design stages.csv, for replaying measured
// overhead inside the performance model.
std::vector<std::pair<int, double>> read_measured_acq(const std::filesystem::path& stages_csv);

struct RunManifest {
  std::string command;
  nlohmann::json config;
  std::vector<std::string> artifacts;
  std::string status = "running";
  std::string started;
  std::string finished;
  std::string error;
};

std::string iso_timestamp_now();
void write_manifest(const RunManifest& manifest, const std::filesystem::path& file);

}  // namespace seqcal
