#pragma once

// Exact Bayesian inference over a finite set of candidate rules.
//
// Dynamics are deterministic given the rule, so the likelihood of a transition
// (s, a, s') under rule z is 1 if step(intervene(s, a), z) == s' and 0
// otherwise. All expectations below are exact sums over the finite predictive
// distribution. Entropies and divergences are in bits.

#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

#include "rulebench/ca.hpp"
#include "rulebench/environment.hpp"

namespace rulebench {

class InferenceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class Belief {
 public:
  // Probabilities must be non-negative and sum to 1 within 1e-12; support must
  // be non-empty without duplicates.
  Belief(std::vector<RuleId> support, std::vector<double> probs,
         Boundary boundary = Boundary::periodic);

  static Belief uniform(std::vector<RuleId> support, Boundary boundary = Boundary::periodic);
  static Belief delta(RuleId rule, Boundary boundary = Boundary::periodic);
  // Normalizes non-negative weights with a positive sum.
  static Belief from_weights(std::vector<RuleId> support, std::vector<double> weights,
                             Boundary boundary = Boundary::periodic);

  std::span<const RuleId> support() const { return support_; }
  std::span<const double> probs() const { return probs_; }
  Boundary boundary() const { return boundary_; }
  std::size_t size() const { return support_.size(); }

  double probability(RuleId rule) const;
  std::size_t positive_count() const;

 private:
  std::vector<RuleId> support_;
  std::vector<double> probs_;
  Boundary boundary_;
};

struct PredictiveDistribution {
  std::vector<Tape> outcomes;  // distinct, ascending
  std::vector<double> probs;
};

// Each rule's prediction for (s, a), aligned with belief.support().
std::vector<Tape> predictions(const Belief& belief, const Tape& state, const Action& action);

// Throws InferenceError when no rule with positive mass explains the transition.
Belief posterior_update(const Belief& belief, const Transition& transition);

double entropy_bits(std::span<const double> probs);
double entropy(const Belief& belief);
// KL(posterior || prior); terms with posterior mass 0 contribute 0.
double kl_bits(std::span<const double> posterior, std::span<const double> prior);

PredictiveDistribution predictive(const Belief& belief, const Tape& state, const Action& action);

// Prior entropy minus expected posterior entropy.
double info_gain_entropy(const Belief& belief, const Tape& state, const Action& action);
// I(z; s') = H(s') - sum_z p(z) H(s' | z), from the joint table p(z, s').
double info_gain_mi(const Belief& belief, const Tape& state, const Action& action);
// Expected KL from prior to posterior over predictive outcomes.
double info_gain_kl(const Belief& belief, const Tape& state, const Action& action);

}  // namespace rulebench
