#include "rulebench/environment.hpp"

#include <charconv>
#include <exception>

namespace rulebench {

namespace {

constexpr std::uint64_t kTargetStream = fnv1a64("target");
constexpr std::uint64_t kResetStream = fnv1a64("reset");

}  // namespace

Action Action::from_index(std::size_t index, std::size_t length) {
  if (index > length) {
    throw DomainError("action index " + std::to_string(index) + " out of range for length " +
                      std::to_string(length));
  }
  return index == length ? no_op() : flip(index);
}

std::size_t Action::flip_index() const {
  if (!flip_) throw DomainError("no_op has no flip index");
  return *flip_;
}

std::string Action::to_string() const {
  return flip_ ? "flip(" + std::to_string(*flip_) + ")" : std::string("no_op");
}

Action Action::parse(std::string_view text) {
  if (text == "no_op") return no_op();
  if (text.starts_with("flip(") && text.ends_with(")")) {
    const auto digits = text.substr(5, text.size() - 6);
    std::size_t index = 0;
    const auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), index);
    if (ec == std::errc() && ptr == digits.data() + digits.size() && !digits.empty()) {
      return flip(index);
    }
  }
  throw DomainError("malformed action '" + std::string(text) + "'");
}

void TaskSpec::validate() const {
  if (length < kMinTapeLength) throw DomainError("task length below 3");
  if (horizon < 1) throw DomainError("task horizon must be at least 1");
  if (target.length() != length) throw DomainError("task target length differs from task length");
}

Tape random_tape(Rng& rng, std::size_t length) {
  std::vector<std::uint64_t> words((length + 63) / 64);
  for (auto& w : words) w = rng.next_u64();
  return Tape::from_words(words, length);
}

Tape generate_target(RuleId rule, std::size_t length, std::uint64_t task_seed, Boundary boundary,
                     TargetOptions options) {
  Rng rng(derive_seed(task_seed, {kTargetStream}));
  Tape tape = random_tape(rng, length);
  for (std::size_t i = 0; i < kTargetEvolutionSteps; ++i) tape = step(tape, rule, boundary);
  if (options.require_nonzero) {
    while (tape.all_zero()) tape = random_tape(rng, length);
  }
  return tape;
}

TaskSpec make_task(RuleId rule, std::size_t length, std::size_t horizon, std::uint64_t task_seed,
                   Boundary boundary, TargetOptions options) {
  TaskSpec task{rule,      length, horizon, generate_target(rule, length, task_seed, boundary, options),
                task_seed, boundary};
  task.validate();
  return task;
}

Tape intervene(const Tape& state, const Action& action) {
  if (action.is_no_op()) return state;
  return state.with_flipped(action.flip_index());
}

double match_fraction(const Tape& tape, const Tape& target) {
  return static_cast<double>(tape.count_matches(target)) / static_cast<double>(tape.length());
}

StepOutcome env_step(const Tape& state, const Action& action, const TaskSpec& task,
                     std::size_t step_index) {
  if (state.length() != task.length) {
    throw DomainError("state length " + std::to_string(state.length()) +
                      " does not match task length " + std::to_string(task.length));
  }
  StepOutcome out;
  out.next = step(intervene(state, action), task.rule, task.boundary);
  out.success = out.next == task.target;
  out.reward = out.success ? 1.0 : match_fraction(out.next, task.target);
  out.done = out.success || step_index + 1 >= task.horizon;
  return out;
}

Tape reset(const TaskSpec& task, std::uint64_t episode_seed) {
  Rng rng(derive_seed(task.task_seed, {episode_seed, kResetStream}));
  for (;;) {
    Tape tape = random_tape(rng, task.length);
    if (tape != task.target) return tape;
  }
}

TaskView view_of(const TaskSpec& task) {
  return TaskView{task.length, task.horizon, task.target, task.boundary};
}

EpisodeResult run_episode(const TaskSpec& task, Agent& agent, std::uint64_t episode_seed,
                          std::string agent_id) {
  task.validate();
  EpisodeResult result;
  result.task = task;
  result.agent_id = std::move(agent_id);
  result.episode_seed = episode_seed;
  result.transitions.reserve(task.horizon);

  auto context = [&] {
    return "agent '" + result.agent_id + "' failed on rule " + std::to_string(task.rule.value()) +
           " (task_seed " + std::to_string(task.task_seed) + ", episode_seed " +
           std::to_string(episode_seed) + ", step " + std::to_string(result.steps_used) + ")";
  };

  try {
    EpisodeStart start{view_of(task), reset(task, episode_seed), episode_seed, std::nullopt};
    if (agent.needs_true_rule()) start.true_rule = task.rule;
    Tape state = start.observation;
    agent.begin_episode(start);

    for (std::size_t t = 0; t < task.horizon; ++t) {
      const Action action = agent.act(state);
      if (!action.is_no_op() && action.flip_index() >= task.length) {
        throw DomainError("agent returned " + action.to_string() + " for length " +
                          std::to_string(task.length));
      }
      StepOutcome outcome = env_step(state, action, task, t);
      Transition transition{state, action, outcome.next};
      result.total_return += outcome.reward;
      result.steps_used = t + 1;
      agent.observe(transition, outcome.reward, outcome.done);
      result.transitions.push_back(std::move(transition));
      state = std::move(outcome.next);
      if (outcome.success) result.success = 1.0;
      if (outcome.done) break;
    }
    agent.end_episode();
  } catch (const std::exception& e) {
    std::throw_with_nested(EpisodeError(context() + ": " + e.what()));
  }
  return result;
}

}  // namespace rulebench
