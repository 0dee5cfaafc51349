#include "rulebench/belief.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <set>

namespace rulebench {

namespace {

constexpr double kSumTolerance = 1e-12;

double plogp(double p) { return p > 0.0 ? p * std::log2(p) : 0.0; }

}  // namespace

Belief::Belief(std::vector<RuleId> support, std::vector<double> probs, Boundary boundary)
    : support_(std::move(support)), probs_(std::move(probs)), boundary_(boundary) {
  if (support_.empty()) throw DomainError("belief support is empty");
  if (support_.size() != probs_.size()) throw DomainError("belief support and probs differ in size");
  if (std::set<RuleId>(support_.begin(), support_.end()).size() != support_.size()) {
    throw DomainError("belief support has duplicate rules");
  }
  double sum = 0.0;
  for (double p : probs_) {
    if (!(p >= 0.0)) throw DomainError("belief probabilities must be non-negative");
    sum += p;
  }
  if (std::abs(sum - 1.0) > kSumTolerance) throw DomainError("belief probabilities do not sum to 1");
}

Belief Belief::uniform(std::vector<RuleId> support, Boundary boundary) {
  std::vector<double> weights(support.size(), 1.0);
  return from_weights(std::move(support), std::move(weights), boundary);
}

Belief Belief::delta(RuleId rule, Boundary boundary) { return Belief({rule}, {1.0}, boundary); }

Belief Belief::from_weights(std::vector<RuleId> support, std::vector<double> weights,
                            Boundary boundary) {
  const double sum = std::accumulate(weights.begin(), weights.end(), 0.0);
  if (!(sum > 0.0)) throw DomainError("belief weights must have a positive sum");
  for (auto& w : weights) w /= sum;
  return Belief(std::move(support), std::move(weights), boundary);
}

double Belief::probability(RuleId rule) const {
  auto it = std::find(support_.begin(), support_.end(), rule);
  return it == support_.end() ? 0.0 : probs_[static_cast<std::size_t>(it - support_.begin())];
}

std::size_t Belief::positive_count() const {
  return static_cast<std::size_t>(
      std::count_if(probs_.begin(), probs_.end(), [](double p) { return p > 0.0; }));
}

std::vector<Tape> predictions(const Belief& belief, const Tape& state, const Action& action) {
  const Tape edited = intervene(state, action);
  std::vector<Tape> out;
  out.reserve(belief.size());
  for (auto rule : belief.support()) out.push_back(step(edited, rule, belief.boundary()));
  return out;
}

Belief posterior_update(const Belief& belief, const Transition& transition) {
  if (transition.state.length() != transition.next_state.length()) {
    throw DomainError("transition tapes differ in length");
  }
  const auto predicted = predictions(belief, transition.state, transition.action);
  std::vector<double> weights(belief.size(), 0.0);
  double evidence = 0.0;
  for (std::size_t i = 0; i < belief.size(); ++i) {
    if (belief.probs()[i] > 0.0 && predicted[i] == transition.next_state) {
      weights[i] = belief.probs()[i];
      evidence += weights[i];
    }
  }
  if (!(evidence > 0.0)) {
    throw InferenceError("transition " + transition.state.to_string() + " --" +
                         transition.action.to_string() + "--> " +
                         transition.next_state.to_string() +
                         " is inconsistent with every rule in the hypothesis set");
  }
  for (auto& w : weights) w /= evidence;
  return Belief({belief.support().begin(), belief.support().end()}, std::move(weights),
                belief.boundary());
}

double entropy_bits(std::span<const double> probs) {
  double h = 0.0;
  for (double p : probs) h -= plogp(p);
  return h;
}

double entropy(const Belief& belief) { return entropy_bits(belief.probs()); }

double kl_bits(std::span<const double> posterior, std::span<const double> prior) {
  double kl = 0.0;
  for (std::size_t i = 0; i < posterior.size(); ++i) {
    if (posterior[i] > 0.0) kl += posterior[i] * (std::log2(posterior[i]) - std::log2(prior[i]));
  }
  return kl;
}

PredictiveDistribution predictive(const Belief& belief, const Tape& state, const Action& action) {
  const auto predicted = predictions(belief, state, action);
  std::map<Tape, double> mass;
  for (std::size_t i = 0; i < belief.size(); ++i) {
    if (belief.probs()[i] > 0.0) mass[predicted[i]] += belief.probs()[i];
  }
  PredictiveDistribution dist;
  for (auto& [tape, p] : mass) {
    dist.outcomes.push_back(tape);
    dist.probs.push_back(p);
  }
  return dist;
}

double info_gain_entropy(const Belief& belief, const Tape& state, const Action& action) {
  const auto dist = predictive(belief, state, action);
  double expected_posterior = 0.0;
  for (std::size_t o = 0; o < dist.outcomes.size(); ++o) {
    const Belief post = posterior_update(belief, {state, action, dist.outcomes[o]});
    expected_posterior += dist.probs[o] * entropy(post);
  }
  return entropy(belief) - expected_posterior;
}

double info_gain_mi(const Belief& belief, const Tape& state, const Action& action) {
  const auto predicted = predictions(belief, state, action);

  // Columns: distinct predicted tapes in first-seen order.
  std::vector<Tape> columns;
  std::vector<std::size_t> column_of(belief.size(), 0);
  for (std::size_t i = 0; i < belief.size(); ++i) {
    auto it = std::find(columns.begin(), columns.end(), predicted[i]);
    column_of[i] = static_cast<std::size_t>(it - columns.begin());
    if (it == columns.end()) columns.push_back(predicted[i]);
  }

  std::vector<std::vector<double>> joint(belief.size(), std::vector<double>(columns.size(), 0.0));
  for (std::size_t i = 0; i < belief.size(); ++i) joint[i][column_of[i]] = belief.probs()[i];

  std::vector<double> marginal(columns.size(), 0.0);
  for (const auto& row : joint) {
    for (std::size_t c = 0; c < row.size(); ++c) marginal[c] += row[c];
  }

  double conditional = 0.0;
  for (std::size_t i = 0; i < belief.size(); ++i) {
    const double pz = belief.probs()[i];
    if (pz <= 0.0) continue;
    std::vector<double> row(joint[i].size());
    std::transform(joint[i].begin(), joint[i].end(), row.begin(), [pz](double v) { return v / pz; });
    conditional += pz * entropy_bits(row);
  }
  return entropy_bits(marginal) - conditional;
}

double info_gain_kl(const Belief& belief, const Tape& state, const Action& action) {
  const auto dist = predictive(belief, state, action);
  double expected = 0.0;
  for (std::size_t o = 0; o < dist.outcomes.size(); ++o) {
    if (dist.probs[o] <= 0.0) continue;
    const Belief post = posterior_update(belief, {state, action, dist.outcomes[o]});
    expected += dist.probs[o] * kl_bits(post.probs(), belief.probs());
  }
  return expected;
}

}  // namespace rulebench
