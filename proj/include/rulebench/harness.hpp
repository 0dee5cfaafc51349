#pragma once

// Experiment orchestration.
//
// An experiment evaluates every configured agent on every test task of a split
// for `episodes_per_task` episodes. Episode (agent, task i, episode k) uses
//
//   seed = derive_seed(base_seed, {fnv1a64(agent name), i, k})
//
// so adding or removing an agent never changes another agent's episodes. Work
// is scheduled per (agent, task) so stateful learners see their episodes in
// order; results are sorted by (agent, task, episode) before being written, so
// the outputs do not depend on `parallelism`.
//
// Output directory layout:
//   episodes.jsonl   one EpisodeResult per line
//   split.json       split manifest
//   manifest.json    config snapshot, split, seed table, cell status, timestamps

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "rulebench/agents.hpp"
#include "rulebench/io.hpp"
#include "rulebench/splits.hpp"
#include "rulebench/stats.hpp"

namespace rulebench {

inline constexpr const char* kArtifactVersion = "rulebench 1.0.0";

struct ExperimentConfig {
  std::string name = "experiment";
  SplitSpec split;
  std::vector<AgentConfig> agents;
  std::size_t episodes_per_task = 10;
  std::uint64_t base_seed = 0;
  std::filesystem::path output_dir = "runs/experiment";
  std::size_t parallelism = 1;
  // Evaluate tasks from an existing split manifest instead of generating them.
  std::optional<std::filesystem::path> split_manifest;

  void validate() const;
};

ExperimentConfig config_from_json(const Json& j);
Json to_json(const ExperimentConfig& cfg);
ExperimentConfig load_config(const std::filesystem::path& path);

std::uint64_t episode_seed(std::uint64_t base_seed, const std::string& agent,
                           std::size_t task_index, std::size_t episode_index);

// Raised before any episode runs when the split fails verification.
class SplitViolationError : public std::runtime_error {
 public:
  SplitViolationError(const std::string& what, SplitReport report)
      : std::runtime_error(what), report_(std::move(report)) {}
  const SplitReport& report() const { return report_; }

 private:
  SplitReport report_;
};

struct CellRecord {
  std::string agent;
  std::size_t task_index = 0;
  std::size_t episode_index = 0;
  std::uint64_t seed = 0;
  bool ok = true;
  std::string error;
};

struct RunManifest {
  Json config;
  Json split;
  std::vector<CellRecord> cells;
  std::string artifact_version = kArtifactVersion;
  std::string started_at;
  std::string finished_at;

  std::size_t failed_cells() const;
  Json to_json() const;
};

struct RunOutput {
  RunManifest manifest;
  std::vector<EpisodeRecord> episodes;  // canonical order
};

// Builds any agent, including bridge agents.
std::unique_ptr<Agent> make_any_agent(const AgentConfig& cfg, const AgentContext& context);

// Runs and writes outputs under cfg.output_dir. Throws ConfigError on an
// invalid config and SplitViolationError on an invalid split.
RunOutput run_experiment(const ExperimentConfig& cfg);
RunOutput run_experiment(const ExperimentConfig& cfg, const Split& split);

// Runs without touching the filesystem.
RunOutput execute_experiment(const ExperimentConfig& cfg, const Split& split);

std::string render_episode_log(const std::vector<EpisodeRecord>& episodes);

enum class ReportMode : std::uint8_t { id, ood, gap };
enum class ReportFormat : std::uint8_t { text, csv };

struct SummaryRow {
  std::string agent;
  SummaryStats stats;
  Interval ci;
};

struct GapRow {
  std::string agent;
  SummaryStats id;
  SummaryStats ood;
  DropEstimate drop;
};

struct Report {
  std::vector<SummaryRow> summary;  // id / ood modes
  std::vector<GapRow> gap;          // gap mode
  std::vector<std::string> warnings;
  std::string rendered;
};

std::vector<SummaryRow> summary_rows(const std::vector<EpisodeRecord>& episodes);
// Agents present in both inputs, sorted by descending drop.
std::vector<GapRow> gap_rows(const std::vector<EpisodeRecord>& id,
                             const std::vector<EpisodeRecord>& ood,
                             std::vector<std::string>& warnings);

std::string render_summary(const std::vector<SummaryRow>& rows, ReportFormat format);
std::string render_gap(const std::vector<GapRow>& rows, ReportFormat format);

// For gap mode, ID logs come from `log_dir/id` and OOD logs from
// `ood_dir` (default `log_dir/ood`).
Report report(const std::filesystem::path& log_dir, ReportMode mode,
              ReportFormat format = ReportFormat::text,
              std::optional<std::filesystem::path> ood_dir = std::nullopt);

struct TheoryReport {
  std::size_t trials = 0;
  double max_entropy_vs_mi = 0.0;
  double max_entropy_vs_kl = 0.0;
  double max_mi_vs_kl = 0.0;
  double min_information_gain = 0.0;
  std::size_t bound_violations = 0;  // IG above prior entropy or below -1e-12
  double tolerance = 1e-9;

  double max_deviation() const;
  bool pass() const;
  std::string render() const;
};

// Random (belief, state, action) triples: support of 1-16 distinct rules with
// random weights (some zeroed), tape length 3-8.
TheoryReport verify_theory(std::size_t trials, std::uint64_t seed);

}  // namespace rulebench
