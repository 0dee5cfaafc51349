#include <doctest.h>

#include <sys/wait.h>

#include <array>
#include <cstdio>
#include <filesystem>

#include "rulebench/harness.hpp"

using namespace rulebench;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  int status;
  std::string output;
};

Outcome run_cli(const std::string& args) {
  const std::string command = std::string("'") + RULEBENCH_CLI + "' " + args + " 2>&1";
  FILE* pipe = popen(command.c_str(), "r");
  REQUIRE(pipe != nullptr);
  std::string output;
  std::array<char, 4096> buf{};
  while (std::fgets(buf.data(), buf.size(), pipe) != nullptr) output += buf.data();
  const int raw = pclose(pipe);
  return {WIFEXITED(raw) ? WEXITSTATUS(raw) : -1, output};
}

fs::path scratch_dir(const std::string& name) {
  const auto dir = fs::temp_directory_path() / ("rulebench_cli_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

Json base_config(const fs::path& out) {
  auto j = Json::parse(R"({
    "name": "cli",
    "split": {"protocol": "holdout_rule", "candidate_rules": [30, 90, 110, 150],
              "train_lengths": [6], "horizon": 8, "n_train_tasks": 2, "n_test_tasks": 2,
              "split_seed": 1},
    "agents": [{"name": "random", "kind": "random"}, {"name": "belief", "kind": "belief_mpc"}],
    "episodes_per_task": 2, "base_seed": 4, "parallelism": 2
  })");
  j["output_dir"] = out.string();
  return j;
}

}  // namespace

TEST_CASE("run, report and verify-split") {
  const auto dir = scratch_dir("run");
  write_text_file(dir / "config.json", base_config(dir / "out").dump(2));
  auto r = run_cli("run " + (dir / "config.json").string());
  CHECK(r.status == 0);
  CHECK(fs::exists(dir / "out" / "episodes.jsonl"));
  CHECK(fs::exists(dir / "out" / "manifest.json"));

  r = run_cli("report " + (dir / "out").string() + " --mode id");
  CHECK(r.status == 0);
  CHECK(r.output.find("95% CI") != std::string::npos);
  CHECK(r.output.find("belief") != std::string::npos);
  r = run_cli("report " + (dir / "out").string() + " --mode ood --format csv");
  CHECK(r.output.find("agent,mean,std,n,ci_lo,ci_hi") != std::string::npos);

  r = run_cli("verify-split " + (dir / "out" / "split.json").string());
  CHECK(r.status == 0);

  auto manifest = read_json_file(dir / "out" / "split.json");
  manifest["test_tasks"][0]["rule"] = manifest["train_rules"][0];
  write_text_file(dir / "bad_split.json", manifest.dump());
  r = run_cli("verify-split " + (dir / "bad_split.json").string());
  CHECK(r.status == 1);
  CHECK(r.output.find("violation") != std::string::npos);

  auto cfg = base_config(dir / "refused");
  cfg["split_manifest"] = (dir / "bad_split.json").string();
  write_text_file(dir / "refused.json", cfg.dump());
  r = run_cli("run " + (dir / "refused.json").string());
  CHECK(r.status == 1);
  CHECK_FALSE(fs::exists(dir / "refused" / "episodes.jsonl"));
}

TEST_CASE("validation and runtime failures map to exit codes") {
  const auto dir = scratch_dir("codes");
  auto cfg = base_config(dir / "out");
  cfg["agents"][1]["name"] = "random";
  write_text_file(dir / "dup.json", cfg.dump());
  CHECK(run_cli("run " + (dir / "dup.json").string()).status == 1);
  CHECK(run_cli("run " + (dir / "missing.json").string()).status == 1);
  CHECK(run_cli("no-such-command").status == 1);

  cfg = base_config(dir / "crash");
  cfg["agents"].push_back(Json::parse(R"({"name": "dead", "kind": "bridge", "command": "exit 1"})"));
  write_text_file(dir / "crash.json", cfg.dump());
  const auto r = run_cli("run " + (dir / "crash.json").string());
  CHECK(r.status == 2);
  CHECK(fs::exists(dir / "crash" / "episodes.jsonl"));
}

TEST_CASE("verify-theory") {
  auto r = run_cli("verify-theory --trials 200 --seed 3");
  CHECK(r.status == 0);
  CHECK(r.output.find("PASS") != std::string::npos);
  r = run_cli("verify-theory --trials 0");
  CHECK(r.status == 0);
  CHECK(r.output.find("0 trials") != std::string::npos);
}

TEST_CASE("bridge-serve runs an external agent") {
  const auto dir = scratch_dir("bridge");
  write_text_file(dir / "config.json", base_config(dir / "out").dump());
  const std::string agent_cmd = std::string("'") + RULEBENCH_CLI + "' serve-agent random --agent-seed 9";
  const auto r = run_cli("bridge-serve \"" + agent_cmd + "\" --config " + (dir / "config.json").string());
  CHECK(r.status == 0);
  const auto logged = read_episode_log(dir / "out" / "episodes.jsonl");
  CHECK(logged.size() == 4);
  for (const auto& e : logged) CHECK(e.result.agent_id == "bridge");
}
