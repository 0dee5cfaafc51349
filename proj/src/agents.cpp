#include "rulebench/agents.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <optional>

namespace rulebench {

namespace {

constexpr double kTieTolerance = 1e-12;

// (base)^exponent, saturating at `cap + 1`.
std::size_t saturating_power(std::size_t base, std::size_t exponent, std::size_t cap) {
  std::size_t result = 1;
  for (std::size_t i = 0; i < exponent; ++i) {
    if (result > cap / base) return cap + 1;
    result *= base;
  }
  return result;
}

// Cumulative match-fraction return of one action sequence under one rule, for
// tapes that fit in a single word. Reaching the target is absorbing.
double rollout_word(std::uint64_t state, std::uint64_t target, std::size_t length,
                    std::span<const std::size_t> actions, int rule, Boundary boundary) {
  const std::uint64_t mask = kernel::low_mask(length);
  const double inv_length = 1.0 / static_cast<double>(length);
  double total = 0.0;
  for (std::size_t h = 0; h < actions.size(); ++h) {
    const std::size_t a = actions[h];
    if (a < length) state ^= std::uint64_t{1} << a;
    state = kernel::step_word(state, length, rule, boundary);
    const auto mismatches = std::popcount((state ^ target) & mask);
    total += static_cast<double>(static_cast<int>(length) - mismatches) * inv_length;
    // Reaching the target ends the episode; the remaining steps count as matched.
    if (mismatches == 0) {
      total += static_cast<double>(actions.size() - h - 1);
      break;
    }
  }
  return total;
}

double rollout_tape(const Tape& start, const Tape& target, std::span<const std::size_t> actions,
                    RuleId rule, Boundary boundary) {
  Tape state = start;
  double total = 0.0;
  for (std::size_t h = 0; h < actions.size(); ++h) {
    state = step(intervene(state, Action::from_index(actions[h], state.length())), rule, boundary);
    total += match_fraction(state, target);
    if (state == target) {
      total += static_cast<double>(actions.size() - h - 1);
      break;
    }
  }
  return total;
}

std::size_t argmax_lowest_index(std::span<const double> values) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < values.size(); ++i) {
    if (values[i] > values[best] + kTieTolerance) best = i;
  }
  return best;
}

}  // namespace

std::string_view to_string(AgentKind kind) {
  switch (kind) {
    case AgentKind::random:
      return "random";
    case AgentKind::oracle_mpc:
      return "oracle_mpc";
    case AgentKind::belief_mpc:
      return "belief_mpc";
    case AgentKind::belief_mpc_ig:
      return "belief_mpc_ig";
    case AgentKind::fallback_mpc:
      return "fallback_mpc";
    case AgentKind::tabular_q:
      return "tabular_q";
    case AgentKind::bridge:
      return "bridge";
  }
  return "unknown";
}

AgentKind parse_agent_kind(std::string_view text) {
  for (auto kind : {AgentKind::random, AgentKind::oracle_mpc, AgentKind::belief_mpc,
                    AgentKind::belief_mpc_ig, AgentKind::fallback_mpc, AgentKind::tabular_q,
                    AgentKind::bridge}) {
    if (text == to_string(kind)) return kind;
  }
  throw ConfigError("unknown agent kind '" + std::string(text) + "'");
}

void AgentConfig::validate() const {
  const std::string who = "agent '" + name + "': ";
  if (plan_horizon < 1) throw ConfigError(who + "plan_horizon must be at least 1");
  if (rollout_budget < 1) throw ConfigError(who + "rollout_budget must be at least 1");
  if (!(ig_weight >= 0.0)) throw ConfigError(who + "ig_weight must be non-negative");
  if (std::isnan(entropy_threshold)) throw ConfigError(who + "entropy_threshold is NaN");
  if (!(discount >= 0.0 && discount < 1.0)) throw ConfigError(who + "discount must lie in [0, 1)");
  if (!(exploration >= 0.0 && exploration <= 1.0)) {
    throw ConfigError(who + "exploration must lie in [0, 1]");
  }
  if (!(learning_rate > 0.0 && learning_rate <= 1.0)) {
    throw ConfigError(who + "learning_rate must lie in (0, 1]");
  }
  if (mixture_samples < 1) throw ConfigError(who + "mixture_samples must be at least 1");
  if (kind == AgentKind::bridge && command.empty()) throw ConfigError(who + "bridge needs a command");
  if (step_timeout.count() <= 0) throw ConfigError(who + "step_timeout must be positive");
}

Action plan_mpc(const WeightedRules& model, const Tape& state, const Tape& target,
                const AgentConfig& cfg, Rng& rng, std::span<const double> first_action_bonus) {
  if (model.rules.empty() || model.rules.size() != model.weights.size()) {
    throw DomainError("planning model is empty or misaligned");
  }
  if (cfg.rollout_budget < 1 || cfg.plan_horizon < 1) {
    throw ConfigError("rollout_budget and plan_horizon must be at least 1");
  }
  const std::size_t length = state.length();
  const std::size_t n_actions = Action::count(length);
  if (!first_action_bonus.empty() && first_action_bonus.size() != n_actions) {
    throw DomainError("first-action bonus must cover every action");
  }

  const bool packed = length <= 64;
  const std::uint64_t state_bits = packed ? state.bits() : 0;
  const std::uint64_t target_bits = packed ? target.bits() : 0;

  auto score = [&](std::span<const std::size_t> seq) {
    double total = 0.0;
    for (std::size_t m = 0; m < model.rules.size(); ++m) {
      if (model.weights[m] <= 0.0) continue;
      const double ret =
          packed ? rollout_word(state_bits, target_bits, length, seq, model.rules[m].value(),
                                model.boundary)
                 : rollout_tape(state, target, seq, model.rules[m], model.boundary);
      total += model.weights[m] * ret;
    }
    if (!first_action_bonus.empty()) total += first_action_bonus[seq[0]];
    return total;
  };

  double best_score = -std::numeric_limits<double>::infinity();
  std::size_t best_first = n_actions;
  auto consider = [&](std::span<const std::size_t> seq) {
    const double s = score(seq);
    if (s > best_score + kTieTolerance ||
        (std::abs(s - best_score) <= kTieTolerance && seq[0] < best_first)) {
      best_score = std::max(s, best_score);
      best_first = seq[0];
    }
  };

  std::vector<std::size_t> seq(cfg.plan_horizon, 0);
  const std::size_t space = saturating_power(n_actions, cfg.plan_horizon, cfg.rollout_budget);
  if (space <= cfg.rollout_budget) {
    // Exhaustive odometer, first action most significant.
    for (std::size_t k = 0; k < space; ++k) {
      consider(seq);
      for (std::size_t d = seq.size(); d-- > 0;) {
        if (++seq[d] < n_actions) break;
        seq[d] = 0;
      }
    }
  } else {
    for (std::size_t k = 0; k < cfg.rollout_budget; ++k) {
      seq[0] = k % n_actions;
      for (std::size_t d = 1; d < seq.size(); ++d) {
        seq[d] = static_cast<std::size_t>(rng.uniform_below(n_actions));
      }
      consider(seq);
    }
  }
  return Action::from_index(best_first, length);
}

Action act_random(const Tape& state, Rng& rng) {
  const std::size_t n = Action::count(state.length());
  return Action::from_index(static_cast<std::size_t>(rng.uniform_below(n)), state.length());
}

WeightedRules planning_model(const Belief& belief, const AgentConfig& cfg, Rng& rng) {
  WeightedRules model;
  model.boundary = belief.boundary();
  std::vector<RuleId> rules;
  std::vector<double> weights;
  for (std::size_t i = 0; i < belief.size(); ++i) {
    if (belief.probs()[i] > 0.0) {
      rules.push_back(belief.support()[i]);
      weights.push_back(belief.probs()[i]);
    }
  }

  const bool exact = cfg.exact_mixture && rules.size() <= kExactMixtureLimit;
  const std::size_t k = std::min(cfg.mixture_samples, rules.size());
  if (exact || k == rules.size()) {
    model.rules = std::move(rules);
    model.weights = std::move(weights);
  } else {
    std::vector<bool> taken(rules.size(), false);
    double remaining = 1.0;
    for (std::size_t pick = 0; pick < k; ++pick) {
      const double u = rng.uniform01() * remaining;
      double acc = 0.0;
      std::size_t chosen = rules.size();
      std::size_t last_free = rules.size();
      for (std::size_t i = 0; i < rules.size(); ++i) {
        if (taken[i]) continue;
        last_free = i;
        acc += weights[i];
        if (u < acc) {
          chosen = i;
          break;
        }
      }
      if (chosen == rules.size()) chosen = last_free;
      taken[chosen] = true;
      remaining -= weights[chosen];
      model.rules.push_back(rules[chosen]);
      model.weights.push_back(weights[chosen]);
    }
  }

  double sum = 0.0;
  for (double w : model.weights) sum += w;
  for (double& w : model.weights) w /= sum;
  return model;
}

std::vector<double> action_information_gains(const Belief& belief, const Tape& state) {
  const std::size_t n = Action::count(state.length());
  std::vector<double> gains(n, 0.0);
  for (std::size_t a = 0; a < n; ++a) {
    gains[a] = info_gain_entropy(belief, state, Action::from_index(a, state.length()));
  }
  return gains;
}

Action act_belief_mpc(const Belief& belief, const Tape& state, const Tape& target,
                      const AgentConfig& cfg, Rng& rng) {
  const WeightedRules model = planning_model(belief, cfg, rng);
  if (cfg.kind == AgentKind::belief_mpc_ig && cfg.ig_weight > 0.0) {
    auto bonus = action_information_gains(belief, state);
    for (double& b : bonus) b *= cfg.ig_weight;
    return plan_mpc(model, state, target, cfg, rng, bonus);
  }
  return plan_mpc(model, state, target, cfg, rng);
}

FallbackDecision act_fallback(const Belief& belief, const Tape& state, const Tape& target,
                              const AgentConfig& cfg, Rng& rng) {
  if (entropy(belief) > cfg.entropy_threshold) {
    const auto gains = action_information_gains(belief, state);
    return {Action::from_index(argmax_lowest_index(gains), state.length()), FallbackMode::explore};
  }
  return {act_belief_mpc(belief, state, target, cfg, rng), FallbackMode::plan};
}

TabularQ::TabularQ(std::size_t length, double learning_rate, double discount, double exploration)
    : length_(length), learning_rate_(learning_rate), discount_(discount), exploration_(exploration) {
  if (length > kMaxTabularLength) {
    throw ConfigError("tabular Q supports tapes of length <= 12, got " + std::to_string(length));
  }
}

std::vector<double>& TabularQ::row(const Tape& state) {
  if (state.length() != length_) throw DomainError("state length differs from Q-table length");
  auto [it, inserted] = table_.try_emplace(state.bits());
  if (inserted) it->second.assign(Action::count(length_), 0.0);
  return it->second;
}

double TabularQ::value(const Tape& state, const Action& action) const {
  auto it = table_.find(state.bits());
  return it == table_.end() ? 0.0 : it->second[action.index(length_)];
}

Action TabularQ::act(const Tape& state, Rng& rng) {
  auto& q = row(state);
  // At exploration 1 no coin is drawn, so the action stream equals act_random's.
  if (exploration_ >= 1.0 || (exploration_ > 0.0 && rng.uniform01() < exploration_)) {
    return act_random(state, rng);
  }
  return Action::from_index(argmax_lowest_index(q), length_);
}

void TabularQ::observe(const Tape& state, const Action& action, double reward, const Tape& next,
                       bool done) {
  double bootstrap = 0.0;
  if (!done && discount_ > 0.0) {
    const auto& next_row = row(next);
    bootstrap = discount_ * *std::max_element(next_row.begin(), next_row.end());
  }
  double& q = row(state)[action.index(length_)];
  q += learning_rate_ * (reward + bootstrap - q);
}

namespace {

class RandomAgent final : public ReferenceAgent {
 public:
  explicit RandomAgent(AgentConfig cfg) : cfg_(std::move(cfg)) {}

  void begin_episode(const EpisodeStart& start) override {
    rng_.emplace(derive_seed(cfg_.agent_seed, {start.episode_seed}));
  }
  Action act(const Tape& observation) override {
    ++stats_.decisions;
    return act_random(observation, *rng_);
  }
  const AgentStats& stats() const override { return stats_; }

 private:
  AgentConfig cfg_;
  std::optional<Rng> rng_;
  AgentStats stats_;
};

class OracleAgent final : public ReferenceAgent {
 public:
  explicit OracleAgent(AgentConfig cfg) : cfg_(std::move(cfg)) {}

  bool needs_true_rule() const override { return true; }
  void begin_episode(const EpisodeStart& start) override {
    if (!start.true_rule) throw DomainError("oracle agent started without the true rule");
    model_ = WeightedRules{{*start.true_rule}, {1.0}, start.task.boundary};
    target_ = start.task.target;
    rng_.emplace(derive_seed(cfg_.agent_seed, {start.episode_seed}));
  }
  Action act(const Tape& observation) override {
    ++stats_.decisions;
    return plan_mpc(model_, observation, target_, cfg_, *rng_);
  }
  const AgentStats& stats() const override { return stats_; }

 private:
  AgentConfig cfg_;
  WeightedRules model_;
  Tape target_;
  std::optional<Rng> rng_;
  AgentStats stats_;
};

// belief_mpc, belief_mpc_ig and fallback_mpc. On an observation no hypothesis
// explains, the belief restarts from the uniform prior.
class BeliefAgent final : public ReferenceAgent {
 public:
  BeliefAgent(AgentConfig cfg, AgentContext context)
      : cfg_(std::move(cfg)), context_(std::move(context)) {
    if (context_.model_rules.empty()) {
      throw ConfigError("agent '" + cfg_.name + "' needs a non-empty hypothesis set");
    }
  }

  void begin_episode(const EpisodeStart& start) override {
    prior_.emplace(Belief::uniform(context_.model_rules, start.task.boundary));
    belief_ = prior_;
    target_ = start.task.target;
    rng_.emplace(derive_seed(cfg_.agent_seed, {start.episode_seed}));
  }

  Action act(const Tape& observation) override {
    ++stats_.decisions;
    if (cfg_.kind == AgentKind::fallback_mpc) {
      const auto decision = act_fallback(*belief_, observation, target_, cfg_, *rng_);
      if (decision.mode == FallbackMode::explore) ++stats_.explore_decisions;
      return decision.action;
    }
    return act_belief_mpc(*belief_, observation, target_, cfg_, *rng_);
  }

  void observe(const Transition& transition, double, bool) override {
    try {
      belief_ = posterior_update(*belief_, transition);
    } catch (const InferenceError&) {
      ++stats_.inconsistent_observations;
      belief_ = prior_;
    }
  }

  const AgentStats& stats() const override { return stats_; }

 private:
  AgentConfig cfg_;
  AgentContext context_;
  std::optional<Belief> prior_;
  std::optional<Belief> belief_;
  Tape target_;
  std::optional<Rng> rng_;
  AgentStats stats_;
};

// One Q-table shared by every episode this instance plays.
class TabularQAgent final : public ReferenceAgent {
 public:
  explicit TabularQAgent(AgentConfig cfg) : cfg_(std::move(cfg)) {}

  void begin_episode(const EpisodeStart& start) override {
    if (!q_) {
      q_.emplace(start.task.length, cfg_.learning_rate, cfg_.discount, cfg_.exploration);
    }
    rng_.emplace(derive_seed(cfg_.agent_seed, {start.episode_seed}));
  }
  Action act(const Tape& observation) override {
    ++stats_.decisions;
    return q_->act(observation, *rng_);
  }
  void observe(const Transition& t, double reward, bool done) override {
    q_->observe(t.state, t.action, reward, t.next_state, done);
  }
  const AgentStats& stats() const override { return stats_; }

 private:
  AgentConfig cfg_;
  std::optional<TabularQ> q_;
  std::optional<Rng> rng_;
  AgentStats stats_;
};

}  // namespace

std::unique_ptr<ReferenceAgent> make_agent(const AgentConfig& cfg, const AgentContext& context) {
  cfg.validate();
  switch (cfg.kind) {
    case AgentKind::random:
      return std::make_unique<RandomAgent>(cfg);
    case AgentKind::oracle_mpc:
      return std::make_unique<OracleAgent>(cfg);
    case AgentKind::belief_mpc:
    case AgentKind::belief_mpc_ig:
    case AgentKind::fallback_mpc:
      return std::make_unique<BeliefAgent>(cfg, context);
    case AgentKind::tabular_q:
      return std::make_unique<TabularQAgent>(cfg);
    case AgentKind::bridge:
      break;
  }
  throw ConfigError("agent kind '" + std::string(to_string(cfg.kind)) +
                    "' is not an in-process agent");
}

}  // namespace rulebench
