#pragma once

// Episodic rule-control environment. Each step applies an intervention to the
// observed tape and then advances it one step under the task's hidden rule:
//
//   next = step(intervene(state, action), task.rule)
//
// Reward is the fraction of cells matching the task target; an episode
// succeeds when the tape equals the target within the horizon.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "rulebench/ca.hpp"
#include "rulebench/random.hpp"

namespace rulebench {

inline constexpr std::size_t kDefaultLength = 16;
inline constexpr std::size_t kDefaultHorizon = 32;
inline constexpr std::size_t kTargetEvolutionSteps = 8;

// Either a single-cell flip or a no-op. Action indices enumerate flips first
// (index i flips cell i) and the no-op last (index == length).
class Action {
 public:
  static Action no_op() { return Action(); }
  static Action flip(std::size_t index) { return Action(index); }
  static Action from_index(std::size_t index, std::size_t length);
  static std::size_t count(std::size_t length) { return length + 1; }

  bool is_no_op() const { return !flip_; }
  std::size_t flip_index() const;
  std::size_t index(std::size_t length) const { return flip_ ? *flip_ : length; }

  // "flip(3)" / "no_op"
  std::string to_string() const;
  static Action parse(std::string_view text);

  friend bool operator==(const Action&, const Action&) = default;

 private:
  Action() = default;
  explicit Action(std::size_t index) : flip_(index) {}
  std::optional<std::size_t> flip_;
};

struct TaskSpec {
  RuleId rule;
  std::size_t length = kDefaultLength;
  std::size_t horizon = kDefaultHorizon;
  Tape target;
  std::uint64_t task_seed = 0;
  Boundary boundary = Boundary::periodic;

  void validate() const;
  friend bool operator==(const TaskSpec&, const TaskSpec&) = default;
};

// Uniform over all 2^length tapes; one raw draw per 64-cell word.
Tape random_tape(Rng& rng, std::size_t length);

struct TargetOptions {
  // When the evolved target is all-zero, fall back to a uniform non-zero tape.
  bool require_nonzero = false;
};

// Target: a uniform random tape drawn from task_seed, evolved 8 steps under the
// task's own rule.
Tape generate_target(RuleId rule, std::size_t length, std::uint64_t task_seed,
                     Boundary boundary = Boundary::periodic, TargetOptions options = {});

TaskSpec make_task(RuleId rule, std::size_t length, std::size_t horizon, std::uint64_t task_seed,
                   Boundary boundary = Boundary::periodic, TargetOptions options = {});

struct Transition {
  Tape state;
  Action action = Action::no_op();
  Tape next_state;

  friend bool operator==(const Transition&, const Transition&) = default;
};

struct EpisodeResult {
  TaskSpec task;
  std::string agent_id;
  double success = 0.0;
  double total_return = 0.0;
  std::size_t steps_used = 0;
  std::vector<Transition> transitions;
  std::uint64_t episode_seed = 0;

  friend bool operator==(const EpisodeResult&, const EpisodeResult&) = default;
};

Tape intervene(const Tape& state, const Action& action);

struct StepOutcome {
  Tape next;
  double reward = 0.0;
  bool success = false;
  bool done = false;
};

double match_fraction(const Tape& tape, const Tape& target);

// `step_index` is the zero-based index of this step within the episode; the
// episode is done on success or when step_index + 1 reaches the horizon.
StepOutcome env_step(const Tape& state, const Action& action, const TaskSpec& task,
                     std::size_t step_index = 0);

// Uniform tape seeded by (task_seed, episode_seed), redrawn until it differs
// from the target.
Tape reset(const TaskSpec& task, std::uint64_t episode_seed);

// What an agent may see about a task. The rule stays hidden.
struct TaskView {
  std::size_t length = 0;
  std::size_t horizon = 0;
  Tape target;
  Boundary boundary = Boundary::periodic;
};

TaskView view_of(const TaskSpec& task);

struct EpisodeStart {
  TaskView task;
  Tape observation;
  std::uint64_t episode_seed = 0;
  // Set only for agents that declare needs_true_rule().
  std::optional<RuleId> true_rule;
};

class Agent {
 public:
  virtual ~Agent() = default;

  virtual void begin_episode(const EpisodeStart& start) = 0;
  virtual Action act(const Tape& observation) = 0;
  virtual void observe(const Transition& transition, double reward, bool done) {
    (void)transition;
    (void)reward;
    (void)done;
  }
  virtual void end_episode() {}

  virtual bool needs_true_rule() const { return false; }
};

class EpisodeError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

EpisodeResult run_episode(const TaskSpec& task, Agent& agent, std::uint64_t episode_seed,
                          std::string agent_id = "agent");

}  // namespace rulebench
