#pragma once

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

#include "wsn/sim_engine.hpp"

namespace wsn {

class PlanParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class PlanValidationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Area {
  double width;
  double height;
};

struct ExperimentPlan {
  std::string name = "plan";
  ScenarioConfig base;
  std::vector<std::uint64_t> seeds{1};
  std::vector<ProtocolMode> modes{ProtocolMode::kEgscfo};
  /// Empty sweeps fall back to the base value.
  std::vector<double> malicious_fractions;
  std::vector<Area> areas;
  std::vector<int> node_counts;
  TraceOptions trace;

  /// Every (scenario, mode) point in expansion order. Seeds are left at the
  /// base value.
  std::vector<ScenarioConfig> scenarios() const;
  std::size_t run_count() const { return scenarios().size() * seeds.size(); }
  std::vector<std::string> violations() const;
};

/// Parses INI text. Missing keys keep their defaults; unknown sections or
/// keys and malformed values raise PlanParseError; invalid combinations raise
/// PlanValidationError listing every problem.
ExperimentPlan parse_plan(const std::string& text, const std::string& source = "<plan>");
ExperimentPlan load_plan(const std::filesystem::path& path);

/// `name` label of one sweep point, used as the scenario part of file names.
std::string scenario_label(const std::string& plan_name, const ScenarioConfig& config);

struct Stat {
  double mean = 0.0;
  double stddev = 0.0;  // sample standard deviation, 0 for a single run
  int n = 0;
};

Stat describe(const std::vector<double>& values);

struct RunOutcome {
  std::string scenario;
  std::uint64_t seed = 0;
  bool ok = false;
  std::string error;
  std::string rounds_csv;  // file names relative to the output directory
  std::string summary_json;
  RunSummary summary;
  std::vector<CycleMetrics> cycles;
};

struct GroupReport {
  std::string scenario;
  ProtocolMode mode = ProtocolMode::kEgscfo;
  double malicious_fraction = 0.0;
  double width = 0.0;
  double height = 0.0;
  int node_count = 0;
  int benign_count = 0;
  int completed = 0;
  int failed = 0;
  Stat lifetime;
  Stat throughput;
  Stat drop_attacks;
  Stat delay_attacks;
  Stat total_attacks;
  Stat timely_rate;
  Stat effective_energy_rate;
  /// Per-cycle malicious-cluster averages across completed runs.
  std::vector<Stat> cycles;
};

struct AggregateReport {
  std::string plan;
  std::vector<GroupReport> groups;
  std::vector<RunOutcome> runs;

  bool all_ok() const;
};

AggregateReport aggregate(const std::vector<ScenarioConfig>& scenarios,
                          const std::vector<RunOutcome>& runs, const std::string& plan_name);

struct ExecuteOptions {
  std::filesystem::path out_dir = "out";
  unsigned jobs = 0;  // 0 picks the hardware concurrency
  bool quiet = true;
};

/// Runs every (scenario, mode, seed) combination, writing raw per-run files
/// and `report.json` under `out_dir`.
AggregateReport execute(const ExperimentPlan& plan, const ExecuteOptions& options);

void write_report_json(const AggregateReport& report, const std::filesystem::path& path);
AggregateReport read_report_json(const std::filesystem::path& path);

/// File names emit_plots writes, in order.
std::vector<std::string> plot_file_names();

/// Writes the plot-data catalogue into `dir`; returns the paths written.
std::vector<std::filesystem::path> emit_plots(const AggregateReport& report,
                                              const std::filesystem::path& dir);

/// Output directory: `cli` if given, else $WSN_SIM_OUT_DIR, else "out".
std::filesystem::path resolve_out_dir(const std::string& cli);

inline constexpr const char* kOutDirEnv = "WSN_SIM_OUT_DIR";

}  // namespace wsn
