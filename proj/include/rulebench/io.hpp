#pragma once

// JSON forms of the benchmark's records. Episode logs are JSON Lines, one
// EpisodeResult per line; tapes use the '0'/'1' text form with cell 0 first and
// actions use "flip(i)" / "no_op".

#include <filesystem>
#include <string>
#include <vector>

#include "json.hpp"
#include "rulebench/agents.hpp"
#include "rulebench/environment.hpp"
#include "rulebench/splits.hpp"

namespace rulebench {

using Json = nlohmann::ordered_json;

class FormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

Json to_json(const TaskSpec& task);
TaskSpec task_from_json(const Json& j);

Json to_json(const Transition& t);
Transition transition_from_json(const Json& j);

// Log record: agent_id, task_index, episode_index, episode_seed, task, success,
// return, steps_used, transitions.
struct EpisodeRecord {
  EpisodeResult result;
  std::size_t task_index = 0;
  std::size_t episode_index = 0;
};

Json to_json(const EpisodeRecord& record);
EpisodeRecord episode_from_json(const Json& j);
std::string to_log_line(const EpisodeRecord& record);
std::vector<EpisodeRecord> read_episode_log(const std::filesystem::path& path);

Json to_json(const SplitSpec& spec);
SplitSpec split_spec_from_json(const Json& j);

// Manifest: protocol, explicit rule lists, lengths, and every task.
Json split_manifest(const Split& split, const SplitSpec* spec = nullptr);
Split split_from_manifest(const Json& j);

Json to_json(const AgentConfig& cfg);
AgentConfig agent_config_from_json(const Json& j);

Json read_json_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, const std::string& text);

}  // namespace rulebench
