#include "rulebench/io.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

namespace rulebench {

namespace {

template <typename F>
auto guarded(const char* what, F&& f) {
  try {
    return f();
  } catch (const Json::exception& e) {
    throw FormatError(std::string(what) + ": " + e.what());
  } catch (const DomainError& e) {
    throw FormatError(std::string(what) + ": " + e.what());
  }
}

Json rules_to_json(const std::vector<RuleId>& rules) {
  Json out = Json::array();
  for (auto r : rules) out.push_back(r.value());
  return out;
}

std::vector<RuleId> rules_from_json(const Json& j) {
  std::vector<RuleId> rules;
  for (const auto& v : j) rules.emplace_back(v.get<int>());
  return rules;
}

Json tasks_to_json(const std::vector<TaskSpec>& tasks) {
  Json out = Json::array();
  for (const auto& t : tasks) out.push_back(to_json(t));
  return out;
}

std::vector<TaskSpec> tasks_from_json(const Json& j) {
  std::vector<TaskSpec> tasks;
  for (const auto& t : j) tasks.push_back(task_from_json(t));
  return tasks;
}

}  // namespace

Json to_json(const TaskSpec& task) {
  Json j;
  j["rule"] = task.rule.value();
  j["length"] = task.length;
  j["horizon"] = task.horizon;
  j["target"] = task.target.to_string();
  j["task_seed"] = task.task_seed;
  j["boundary"] = std::string(to_string(task.boundary));
  return j;
}

TaskSpec task_from_json(const Json& j) {
  return guarded("task", [&] {
    TaskSpec t;
    t.rule = RuleId(j.at("rule").get<int>());
    t.length = j.at("length").get<std::size_t>();
    t.horizon = j.at("horizon").get<std::size_t>();
    t.target = Tape::from_string(j.at("target").get<std::string>());
    t.task_seed = j.at("task_seed").get<std::uint64_t>();
    t.boundary = parse_boundary(j.value("boundary", std::string("periodic")));
    t.validate();
    return t;
  });
}

Json to_json(const Transition& t) {
  Json j;
  j["state"] = t.state.to_string();
  j["action"] = t.action.to_string();
  j["next_state"] = t.next_state.to_string();
  return j;
}

Transition transition_from_json(const Json& j) {
  return guarded("transition", [&] {
    return Transition{Tape::from_string(j.at("state").get<std::string>()),
                      Action::parse(j.at("action").get<std::string>()),
                      Tape::from_string(j.at("next_state").get<std::string>())};
  });
}

Json to_json(const EpisodeRecord& record) {
  const auto& r = record.result;
  Json j;
  j["agent_id"] = r.agent_id;
  j["task_index"] = record.task_index;
  j["episode_index"] = record.episode_index;
  j["episode_seed"] = r.episode_seed;
  j["task"] = to_json(r.task);
  j["success"] = r.success;
  j["return"] = r.total_return;
  j["steps_used"] = r.steps_used;
  Json transitions = Json::array();
  for (const auto& t : r.transitions) transitions.push_back(to_json(t));
  j["transitions"] = std::move(transitions);
  return j;
}

EpisodeRecord episode_from_json(const Json& j) {
  return guarded("episode", [&] {
    EpisodeRecord rec;
    auto& r = rec.result;
    r.agent_id = j.at("agent_id").get<std::string>();
    rec.task_index = j.value("task_index", std::size_t{0});
    rec.episode_index = j.value("episode_index", std::size_t{0});
    r.episode_seed = j.at("episode_seed").get<std::uint64_t>();
    r.task = task_from_json(j.at("task"));
    r.success = j.at("success").get<double>();
    r.total_return = j.at("return").get<double>();
    r.steps_used = j.at("steps_used").get<std::size_t>();
    for (const auto& t : j.at("transitions")) r.transitions.push_back(transition_from_json(t));
    if (!(r.success >= 0.0 && r.success <= 1.0)) throw DomainError("success outside [0, 1]");
    if (r.steps_used > r.task.horizon) throw DomainError("steps_used exceeds horizon");
    return rec;
  });
}

std::string to_log_line(const EpisodeRecord& record) { return to_json(record).dump(); }

std::vector<EpisodeRecord> read_episode_log(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open episode log " + path.string());
  std::vector<EpisodeRecord> records;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    try {
      records.push_back(episode_from_json(Json::parse(line)));
    } catch (const std::exception& e) {
      throw FormatError(path.string() + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
  return records;
}

Json to_json(const SplitSpec& spec) {
  Json j;
  j["protocol"] = std::string(to_string(spec.protocol));
  j["candidate_rules"] = rules_to_json(spec.candidate_rules);
  j["train_fraction"] = spec.train_fraction;
  j["train_lengths"] = spec.train_lengths;
  j["test_lengths"] = spec.test_lengths;
  j["horizon"] = spec.horizon;
  if (spec.test_horizon) j["test_horizon"] = *spec.test_horizon;
  j["split_seed"] = spec.split_seed;
  j["n_train_tasks"] = spec.n_train_tasks;
  j["n_test_tasks"] = spec.n_test_tasks;
  j["boundary"] = std::string(to_string(spec.boundary));
  j["require_nonzero_target"] = spec.target.require_nonzero;
  return j;
}

SplitSpec split_spec_from_json(const Json& j) {
  return guarded("split", [&] {
    SplitSpec s;
    if (j.contains("protocol")) s.protocol = parse_protocol(j.at("protocol").get<std::string>());
    if (j.contains("candidate_rules")) {
      const auto& c = j.at("candidate_rules");
      if (c.is_string() && c.get<std::string>() == "all") {
        s.candidate_rules = RuleId::all();
      } else {
        s.candidate_rules = rules_from_json(c);
      }
    }
    s.train_fraction = j.value("train_fraction", s.train_fraction);
    if (j.contains("train_lengths")) {
      s.train_lengths = j.at("train_lengths").get<std::vector<std::size_t>>();
    }
    if (j.contains("test_lengths")) s.test_lengths = j.at("test_lengths").get<std::vector<std::size_t>>();
    s.horizon = j.value("horizon", s.horizon);
    if (j.contains("test_horizon")) s.test_horizon = j.at("test_horizon").get<std::size_t>();
    s.split_seed = j.value("split_seed", s.split_seed);
    s.n_train_tasks = j.value("n_train_tasks", s.n_train_tasks);
    s.n_test_tasks = j.value("n_test_tasks", s.n_test_tasks);
    s.boundary = parse_boundary(j.value("boundary", std::string("periodic")));
    s.target.require_nonzero = j.value("require_nonzero_target", false);
    return s;
  });
}

Json split_manifest(const Split& split, const SplitSpec* spec) {
  Json j;
  j["protocol"] = std::string(to_string(split.protocol));
  if (spec != nullptr) j["spec"] = to_json(*spec);
  j["train_rules"] = rules_to_json(split.train_rules);
  j["test_rules"] = rules_to_json(split.test_rules);
  j["train_tasks"] = tasks_to_json(split.train);
  j["test_tasks"] = tasks_to_json(split.test);
  return j;
}

Split split_from_manifest(const Json& j) {
  return guarded("split manifest", [&] {
    Split s;
    s.protocol = parse_protocol(j.at("protocol").get<std::string>());
    s.train_rules = rules_from_json(j.at("train_rules"));
    s.test_rules = rules_from_json(j.at("test_rules"));
    s.train = tasks_from_json(j.at("train_tasks"));
    s.test = tasks_from_json(j.at("test_tasks"));
    return s;
  });
}

Json to_json(const AgentConfig& cfg) {
  Json j;
  j["name"] = cfg.name;
  j["kind"] = std::string(to_string(cfg.kind));
  j["plan_horizon"] = cfg.plan_horizon;
  j["rollout_budget"] = cfg.rollout_budget;
  j["ig_weight"] = cfg.ig_weight;
  if (std::isinf(cfg.entropy_threshold) && cfg.entropy_threshold > 0) {
    j["entropy_threshold"] = "inf";
  } else {
    j["entropy_threshold"] = cfg.entropy_threshold;
  }
  j["learning_rate"] = cfg.learning_rate;
  j["discount"] = cfg.discount;
  j["exploration"] = cfg.exploration;
  j["agent_seed"] = cfg.agent_seed;
  j["mixture_samples"] = cfg.mixture_samples;
  j["exact_mixture"] = cfg.exact_mixture;
  if (cfg.kind == AgentKind::bridge) {
    j["command"] = cfg.command;
    j["step_timeout_ms"] = cfg.step_timeout.count();
  }
  return j;
}

AgentConfig agent_config_from_json(const Json& j) {
  return guarded("agent", [&] {
    AgentConfig c;
    c.kind = parse_agent_kind(j.at("kind").get<std::string>());
    c.name = j.value("name", std::string(to_string(c.kind)));
    c.plan_horizon = j.value("plan_horizon", c.plan_horizon);
    c.rollout_budget = j.value("rollout_budget", c.rollout_budget);
    c.ig_weight = j.value("ig_weight", c.ig_weight);
    if (j.contains("entropy_threshold")) {
      const auto& t = j.at("entropy_threshold");
      c.entropy_threshold = t.is_string() && t.get<std::string>() == "inf"
                                ? std::numeric_limits<double>::infinity()
                                : t.get<double>();
    }
    c.learning_rate = j.value("learning_rate", c.learning_rate);
    c.discount = j.value("discount", c.discount);
    c.exploration = j.value("exploration", c.exploration);
    c.agent_seed = j.value("agent_seed", c.agent_seed);
    c.mixture_samples = j.value("mixture_samples", c.mixture_samples);
    c.exact_mixture = j.value("exact_mixture", c.exact_mixture);
    c.command = j.value("command", std::string());
    c.step_timeout = std::chrono::milliseconds(j.value("step_timeout_ms", std::int64_t{10000}));
    c.validate();
    return c;
  });
}

Json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open " + path.string());
  try {
    return Json::parse(in);
  } catch (const Json::exception& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw FormatError("cannot write " + path.string());
  out << text;
}

}  // namespace rulebench
