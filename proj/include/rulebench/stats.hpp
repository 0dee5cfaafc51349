#pragma once

// Reporting statistics: normal-approximation confidence intervals (z = 1.96 at
// the 95% level), ID-minus-OOD drop intervals, Welch and paired t-tests,
// percentile bootstrap, and per-agent summaries of episode logs.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "rulebench/environment.hpp"

namespace rulebench {

struct SummaryStats {
  double mean = 0.0;
  double std = 0.0;  // sample standard deviation (n - 1 denominator)
  std::size_t n = 1;

  void validate() const;
};

SummaryStats summary_of(std::span<const double> samples);

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
  double level = 0.95;
  bool clipped = false;
};

// Two-sided z multiplier; exactly 1.96 at level 0.95.
double z_for_level(double level);

Interval ci_normal(const SummaryStats& stats, double level = 0.95, bool clip = false);

struct DropEstimate {
  double drop = 0.0;
  Interval interval;  // never clipped
};

// drop = id.mean - ood.mean, half-width z * sqrt(id.std^2/id.n + ood.std^2/ood.n).
DropEstimate drop_ci(const SummaryStats& id, const SummaryStats& ood, double level = 0.95);

enum class TestKind : std::uint8_t { welch, paired };

struct TestResult {
  double statistic = 0.0;
  double dof = 0.0;
  double p_value = 1.0;
  TestKind kind = TestKind::welch;
};

// Regularized incomplete beta I_x(a, b) by continued fraction.
double regularized_incomplete_beta(double a, double b, double x);
double student_t_cdf(double t, double dof);
double student_t_two_sided_p(double t, double dof);

// Zero standard error: equal means give statistic 0 and p = 1; different means
// give an infinite statistic and p = 0.
TestResult welch_t(std::span<const double> a, std::span<const double> b);
// One-sample t on a - b over the pairs, with the same zero-variance conventions.
TestResult paired_t(std::span<const std::pair<double, double>> pairs);

// Percentile bootstrap of the mean. Resample b draws n indices with
// Rng(seed).uniform_below(n); endpoints are linearly interpolated order
// statistics at (1 - level)/2 and (1 + level)/2.
Interval bootstrap_ci(std::span<const double> samples, std::size_t resamples = 10000,
                      double level = 0.95, std::uint64_t seed = 0);

enum class GroupBy : std::uint8_t { agent, agent_task };

struct GroupStats {
  std::string agent;
  std::optional<std::string> task;  // "rule/length/task_seed" when grouped by task
  SummaryStats stats;
};

// Groups by agent (or agent and task), sorted by descending mean, then key.
std::vector<GroupStats> summarize(std::span<const EpisodeResult> results, GroupBy group_by);

std::string task_key(const TaskSpec& task);

// Decimal rounding with ties to even.
double round_half_even(double value, int decimals);
std::string format_fixed(double value, int decimals = 3);

}  // namespace rulebench
