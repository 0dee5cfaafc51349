#pragma once

// Reference agents: uniform random, random-shooting MPC with the true rule
// (oracle), MPC over the exact rule posterior with an optional one-step
// information-gain bonus, an entropy-gated explore/plan fallback, and tabular
// Q-learning.

#include <chrono>
#include <cstddef>
#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "rulebench/belief.hpp"
#include "rulebench/environment.hpp"
#include "rulebench/random.hpp"
#include "rulebench/splits.hpp"

namespace rulebench {

enum class AgentKind : std::uint8_t {
  random,
  oracle_mpc,
  belief_mpc,
  belief_mpc_ig,
  fallback_mpc,
  tabular_q,
  bridge,
};

std::string_view to_string(AgentKind kind);
AgentKind parse_agent_kind(std::string_view text);

inline constexpr std::size_t kMaxTabularLength = 12;

struct AgentConfig {
  std::string name;
  AgentKind kind = AgentKind::random;
  std::size_t plan_horizon = 8;
  std::size_t rollout_budget = 256;
  double ig_weight = 0.0;
  double entropy_threshold = 1.0;
  double learning_rate = 0.1;
  double discount = 0.9;
  double exploration = 0.1;
  std::uint64_t agent_seed = 0;
  // Rules drawn from the belief per decision; ignored when exact_mixture applies.
  std::size_t mixture_samples = 8;
  // Plan under the full posterior when at most 16 rules carry mass.
  bool exact_mixture = false;
  // Bridge agents only.
  std::string command;
  std::chrono::milliseconds step_timeout{10000};

  void validate() const;
};

inline constexpr std::size_t kExactMixtureLimit = 16;

struct WeightedRules {
  std::vector<RuleId> rules;
  std::vector<double> weights;  // normalized
  Boundary boundary = Boundary::periodic;
};

// Random-shooting MPC. Draws rollout_budget action sequences of length
// plan_horizon (or enumerates all of them when the budget covers
// (L+1)^plan_horizon); sampled sequence i starts with action i mod (L+1) so
// every first action is scored. A sequence's score is its expected cumulative
// match fraction under the weighted rules, with reaching the target absorbing
// at reward 1, plus first_action_bonus[first action] when given. Returns the
// first action of the best sequence; ties go to the lowest action index
// (no-op last).
Action plan_mpc(const WeightedRules& model, const Tape& state, const Tape& target,
                const AgentConfig& cfg, Rng& rng, std::span<const double> first_action_bonus = {});

Action act_random(const Tape& state, Rng& rng);

// Planning model drawn from a belief: the exact posterior when allowed, else
// min(mixture_samples, rules with mass) rules sampled without replacement by
// weight and renormalized.
WeightedRules planning_model(const Belief& belief, const AgentConfig& cfg, Rng& rng);

// One-step IG of every action, indexed by action index.
std::vector<double> action_information_gains(const Belief& belief, const Tape& state);

Action act_belief_mpc(const Belief& belief, const Tape& state, const Tape& target,
                      const AgentConfig& cfg, Rng& rng);

enum class FallbackMode : std::uint8_t { explore, plan };

struct FallbackDecision {
  Action action;
  FallbackMode mode;
};

// Explores with the max-IG action while entropy(belief) > entropy_threshold,
// otherwise plans like belief_mpc.
FallbackDecision act_fallback(const Belief& belief, const Tape& state, const Tape& target,
                              const AgentConfig& cfg, Rng& rng);

// Tabular Q-learning over tapes of length <= 12, indexed by the packed state.
// Unseen states start at zero; greedy ties go to the lowest action index.
class TabularQ {
 public:
  TabularQ(std::size_t length, double learning_rate, double discount, double exploration);

  Action act(const Tape& state, Rng& rng);
  void observe(const Tape& state, const Action& action, double reward, const Tape& next, bool done);

  double value(const Tape& state, const Action& action) const;
  std::size_t visited_states() const { return table_.size(); }

 private:
  std::vector<double>& row(const Tape& state);

  std::size_t length_;
  double learning_rate_;
  double discount_;
  double exploration_;
  std::unordered_map<std::uint64_t, std::vector<double>> table_;
};

// Everything an agent may know beyond the task view: the hypothesis set it was
// trained on (the split's train rules).
struct AgentContext {
  std::vector<RuleId> model_rules;
  Boundary boundary = Boundary::periodic;
};

// Counters exposed for tests and diagnostics.
struct AgentStats {
  std::size_t decisions = 0;
  std::size_t explore_decisions = 0;
  std::size_t inconsistent_observations = 0;
};

class ReferenceAgent : public Agent {
 public:
  virtual const AgentStats& stats() const = 0;
};

// Builds any in-process agent; AgentKind::bridge is handled by the harness.
std::unique_ptr<ReferenceAgent> make_agent(const AgentConfig& cfg, const AgentContext& context);

}  // namespace rulebench
