// Command-line front end. Exit codes: 0 success, 1 validation failure,
// 2 runtime failure.

#include <CLI11.hpp>

#include <cstdlib>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include "rulebench/bridge.hpp"
#include "rulebench/harness.hpp"

namespace rb = rulebench;

namespace {

constexpr int kOk = 0;
constexpr int kInvalid = 1;
constexpr int kRuntime = 2;

std::vector<rb::RuleId> parse_rule_list(const std::string& text) {
  if (text.empty() || text == "all") return rb::RuleId::all();
  std::vector<rb::RuleId> rules;
  std::stringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) rules.emplace_back(std::stoi(item));
  return rules;
}

int finish_run(const rb::RunOutput& out, const rb::ExperimentConfig& cfg) {
  const std::size_t failed = out.manifest.failed_cells();
  std::cout << "wrote " << out.episodes.size() << " episodes to " << cfg.output_dir.string()
            << '\n';
  if (failed > 0) {
    std::cerr << failed << " of " << out.manifest.cells.size()
              << " cells failed; see manifest.json\n";
    return kRuntime;
  }
  return kOk;
}

// Maps library exceptions onto exit codes.
template <typename F>
int guarded(F&& body) {
  try {
    return body();
  } catch (const rb::SplitViolationError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kInvalid;
  } catch (const rb::ConfigError& e) {
    std::cerr << "invalid configuration: " << e.what() << '\n';
    return kInvalid;
  } catch (const rb::FormatError& e) {
    std::cerr << "invalid input: " << e.what() << '\n';
    return kInvalid;
  } catch (const rb::DomainError& e) {
    std::cerr << "invalid input: " << e.what() << '\n';
    return kInvalid;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kRuntime;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Rule-shift benchmark harness for elementary cellular automata"};
  app.require_subcommand(1);
  int status = kOk;

  // run
  auto* run = app.add_subcommand("run", "Run an experiment config");
  std::string run_config;
  std::optional<std::size_t> run_parallelism;
  std::optional<std::string> run_output;
  run->add_option("config", run_config, "Experiment config (JSON)")->required();
  run->add_option("--parallelism", run_parallelism, "Override worker count");
  run->add_option("--output-dir", run_output, "Override output directory");
  run->callback([&] {
    status = guarded([&] {
      auto cfg = rb::load_config(run_config);
      if (run_parallelism) cfg.parallelism = *run_parallelism;
      if (run_output) cfg.output_dir = *run_output;
      return finish_run(rb::run_experiment(cfg), cfg);
    });
  });

  // report
  auto* rep = app.add_subcommand("report", "Summarize episode logs");
  std::string rep_dir;
  std::string rep_mode = "id";
  std::string rep_format = "text";
  std::optional<std::string> rep_ood;
  rep->add_option("log_dir", rep_dir, "Run output directory")->required();
  rep->add_option("--mode", rep_mode, "id, ood or gap")
      ->check(CLI::IsMember({"id", "ood", "gap"}));
  rep->add_option("--format", rep_format, "text or csv")->check(CLI::IsMember({"text", "csv"}));
  rep->add_option("--ood-dir", rep_ood, "OOD run directory for gap mode (default <log_dir>/ood)");
  rep->callback([&] {
    status = guarded([&] {
      const auto mode = rep_mode == "gap"   ? rb::ReportMode::gap
                        : rep_mode == "ood" ? rb::ReportMode::ood
                                            : rb::ReportMode::id;
      const auto format = rep_format == "csv" ? rb::ReportFormat::csv : rb::ReportFormat::text;
      std::optional<std::filesystem::path> ood;
      if (rep_ood) ood = *rep_ood;
      const auto r = rb::report(rep_dir, mode, format, ood);
      std::cout << r.rendered;
      for (const auto& w : r.warnings) std::cerr << "warning: " << w << '\n';
      return kOk;
    });
  });

  // verify-theory
  auto* theory = app.add_subcommand("verify-theory", "Check the three information-gain forms agree");
  std::size_t trials = 1000;
  std::uint64_t theory_seed = 0;
  theory->add_option("--trials", trials, "Number of random trials");
  theory->add_option("--seed", theory_seed, "Random seed");
  theory->callback([&] {
    status = guarded([&] {
      const auto r = rb::verify_theory(trials, theory_seed);
      std::cout << r.render();
      return r.pass() ? kOk : kInvalid;
    });
  });

  // verify-split
  auto* vsplit = app.add_subcommand("verify-split", "Check a split manifest for leakage");
  std::string manifest_path;
  vsplit->add_option("manifest", manifest_path, "split.json")->required();
  vsplit->callback([&] {
    status = guarded([&] {
      const auto j = rb::read_json_file(manifest_path);
      const auto split = rb::split_from_manifest(j);
      const auto check = j.contains("spec")
                             ? rb::verify_split(split, rb::split_spec_from_json(j.at("spec")))
                             : rb::verify_split(split);
      if (check.ok()) {
        std::cout << "ok: " << split.train.size() << " train tasks, " << split.test.size()
                  << " test tasks, protocol " << rb::to_string(split.protocol) << '\n';
        return kOk;
      }
      for (const auto& v : check.violations) std::cout << "violation: " << v.message << '\n';
      return kInvalid;
    });
  });

  // bridge-serve
  auto* bserve = app.add_subcommand("bridge-serve", "Run a config with an external agent process");
  std::string bridge_cmd;
  std::string bridge_config;
  std::string bridge_name = "bridge";
  std::int64_t bridge_timeout_ms = 10000;
  std::optional<std::string> bridge_output;
  bserve->add_option("agent_cmd", bridge_cmd, "Shell command that speaks the bridge protocol")
      ->required();
  bserve->add_option("--config", bridge_config, "Experiment config supplying split and seeds")
      ->required();
  bserve->add_option("--name", bridge_name, "Agent name in logs");
  bserve->add_option("--timeout-ms", bridge_timeout_ms, "Per-response deadline");
  bserve->add_option("--output-dir", bridge_output, "Override output directory");
  bserve->callback([&] {
    status = guarded([&] {
      auto cfg = rb::load_config(bridge_config);
      rb::AgentConfig agent;
      agent.name = bridge_name;
      agent.kind = rb::AgentKind::bridge;
      agent.command = bridge_cmd;
      agent.step_timeout = std::chrono::milliseconds(bridge_timeout_ms);
      cfg.agents = {agent};
      if (bridge_output) cfg.output_dir = *bridge_output;
      return finish_run(rb::run_experiment(cfg), cfg);
    });
  });

  // serve-agent
  auto* sagent = app.add_subcommand("serve-agent", "Expose a built-in agent over stdin/stdout");
  std::string serve_kind;
  std::uint64_t serve_seed = 0;
  int serve_version = rb::kBridgeProtocolVersion;
  std::string serve_rules = "all";
  std::string serve_boundary = "periodic";
  sagent->add_option("kind", serve_kind, "Agent kind")->required();
  sagent->add_option("--agent-seed", serve_seed, "Agent seed");
  sagent->add_option("--protocol-version", serve_version, "Protocol version to speak");
  sagent->add_option("--model-rules", serve_rules, "Comma-separated hypothesis rules or 'all'");
  sagent->add_option("--boundary", serve_boundary, "periodic or fixed_zero");
  sagent->callback([&] {
    status = guarded([&] {
      rb::AgentConfig cfg;
      cfg.kind = rb::parse_agent_kind(serve_kind);
      cfg.name = serve_kind;
      cfg.agent_seed = serve_seed;
      if (cfg.kind == rb::AgentKind::bridge) throw rb::ConfigError("cannot serve a bridge agent");
      rb::AgentContext context;
      context.model_rules = parse_rule_list(serve_rules);
      context.boundary = rb::parse_boundary(serve_boundary);
      auto agent = rb::make_agent(cfg, context);
      return rb::serve_agent(*agent, std::cin, std::cout, serve_version);
    });
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kOk : kInvalid;
  }
  return status;
}
