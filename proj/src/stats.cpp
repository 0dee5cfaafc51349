#include "rulebench/stats.hpp"

#include <algorithm>
#include <cfenv>
#include <cmath>
#include <cstdio>
#include <limits>
#include <map>
#include <stdexcept>

#include "rulebench/random.hpp"

namespace rulebench {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

double sample_variance(std::span<const double> xs, double mean) {
  double ss = 0.0;
  for (double x : xs) ss += (x - mean) * (x - mean);
  return ss / static_cast<double>(xs.size() - 1);
}

double mean_of(std::span<const double> xs) {
  double s = 0.0;
  for (double x : xs) s += x;
  return s / static_cast<double>(xs.size());
}

// Continued fraction for I_x(a, b), modified Lentz.
double beta_continued_fraction(double a, double b, double x) {
  constexpr int kMaxIterations = 500;
  constexpr double kEps = 1e-16;
  constexpr double kTiny = 1e-300;
  const double qab = a + b;
  const double qap = a + 1.0;
  const double qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::abs(d) < kTiny) d = kTiny;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= kMaxIterations; ++m) {
    const double m2 = 2.0 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::abs(del - 1.0) < kEps) break;
  }
  return h;
}

}  // namespace

void SummaryStats::validate() const {
  if (!(std >= 0.0)) throw DomainError("summary std must be non-negative");
  if (n < 1) throw DomainError("summary n must be at least 1");
}

SummaryStats summary_of(std::span<const double> samples) {
  if (samples.empty()) throw DomainError("cannot summarize an empty sample");
  SummaryStats s;
  s.n = samples.size();
  s.mean = mean_of(samples);
  s.std = samples.size() > 1 ? std::sqrt(sample_variance(samples, s.mean)) : 0.0;
  return s;
}

double z_for_level(double level) {
  if (!(level > 0.0 && level < 1.0)) throw DomainError("confidence level must lie in (0, 1)");
  if (level == 0.95) return 1.96;
  const double target = 0.5 + level / 2.0;
  double lo = 0.0;
  double hi = 40.0;
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    (normal_cdf(mid) < target ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

Interval ci_normal(const SummaryStats& stats, double level, bool clip) {
  stats.validate();
  const double half = z_for_level(level) * stats.std / std::sqrt(static_cast<double>(stats.n));
  Interval ci{stats.mean - half, stats.mean + half, level, clip};
  if (clip) {
    ci.lo = std::clamp(ci.lo, 0.0, 1.0);
    ci.hi = std::clamp(ci.hi, 0.0, 1.0);
  }
  return ci;
}

DropEstimate drop_ci(const SummaryStats& id, const SummaryStats& ood, double level) {
  id.validate();
  ood.validate();
  const double var = id.std * id.std / static_cast<double>(id.n) +
                     ood.std * ood.std / static_cast<double>(ood.n);
  const double half = z_for_level(level) * std::sqrt(var);
  const double drop = id.mean - ood.mean;
  return {drop, Interval{drop - half, drop + half, level, false}};
}

double regularized_incomplete_beta(double a, double b, double x) {
  if (!(a > 0.0 && b > 0.0)) throw DomainError("incomplete beta needs a, b > 0");
  if (x <= 0.0) return 0.0;
  if (x >= 1.0) return 1.0;
  const double log_front =
      std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) + a * std::log(x) + b * std::log1p(-x);
  const double front = std::exp(log_front);
  if (x < (a + 1.0) / (a + b + 2.0)) return front * beta_continued_fraction(a, b, x) / a;
  return 1.0 - front * beta_continued_fraction(b, a, 1.0 - x) / b;
}

double student_t_two_sided_p(double t, double dof) {
  if (!(dof > 0.0)) throw DomainError("t-distribution needs positive degrees of freedom");
  if (std::isinf(t)) return 0.0;
  if (t == 0.0) return 1.0;
  const double x = dof / (dof + t * t);
  return std::clamp(regularized_incomplete_beta(dof / 2.0, 0.5, x), 0.0, 1.0);
}

double student_t_cdf(double t, double dof) {
  if (std::isinf(t)) return t > 0 ? 1.0 : 0.0;
  const double tail = 0.5 * student_t_two_sided_p(t, dof);
  return t >= 0.0 ? 1.0 - tail : tail;
}

TestResult welch_t(std::span<const double> a, std::span<const double> b) {
  if (a.size() < 2 || b.size() < 2) throw DomainError("Welch's t-test needs at least 2 samples per side");
  const double ma = mean_of(a);
  const double mb = mean_of(b);
  const double na = static_cast<double>(a.size());
  const double nb = static_cast<double>(b.size());
  const double va = sample_variance(a, ma) / na;
  const double vb = sample_variance(b, mb) / nb;
  TestResult r;
  r.kind = TestKind::welch;
  const double se2 = va + vb;
  if (se2 == 0.0) {
    r.dof = na + nb - 2.0;
    r.statistic = ma == mb ? 0.0 : (ma > mb ? kInf : -kInf);
    r.p_value = ma == mb ? 1.0 : 0.0;
    return r;
  }
  r.statistic = (ma - mb) / std::sqrt(se2);
  r.dof = se2 * se2 / (va * va / (na - 1.0) + vb * vb / (nb - 1.0));
  r.p_value = student_t_two_sided_p(r.statistic, r.dof);
  return r;
}

TestResult paired_t(std::span<const std::pair<double, double>> pairs) {
  if (pairs.size() < 2) throw DomainError("paired t-test needs at least 2 pairs");
  std::vector<double> diffs;
  diffs.reserve(pairs.size());
  for (const auto& [x, y] : pairs) diffs.push_back(x - y);
  const double n = static_cast<double>(diffs.size());
  const double m = mean_of(diffs);
  const double var = sample_variance(diffs, m);
  TestResult r;
  r.kind = TestKind::paired;
  r.dof = n - 1.0;
  if (var == 0.0) {
    r.statistic = m == 0.0 ? 0.0 : (m > 0.0 ? kInf : -kInf);
    r.p_value = m == 0.0 ? 1.0 : 0.0;
    return r;
  }
  r.statistic = m / std::sqrt(var / n);
  r.p_value = student_t_two_sided_p(r.statistic, r.dof);
  return r;
}

Interval bootstrap_ci(std::span<const double> samples, std::size_t resamples, double level,
                      std::uint64_t seed) {
  if (samples.empty()) throw DomainError("bootstrap needs at least one sample");
  if (resamples < 1) throw DomainError("bootstrap needs at least one resample");
  if (!(level > 0.0 && level < 1.0)) throw DomainError("confidence level must lie in (0, 1)");
  const std::size_t n = samples.size();
  // Means are accumulated as offsets from samples[0] so constant input stays exact.
  const double anchor = samples[0];
  Rng rng(seed);
  std::vector<double> means(resamples);
  for (auto& m : means) {
    double offset = 0.0;
    for (std::size_t j = 0; j < n; ++j) offset += samples[rng.uniform_below(n)] - anchor;
    m = anchor + offset / static_cast<double>(n);
  }
  std::sort(means.begin(), means.end());
  auto quantile = [&](double q) {
    const double h = q * static_cast<double>(resamples - 1);
    const auto lo = static_cast<std::size_t>(std::floor(h));
    const std::size_t hi = std::min(lo + 1, resamples - 1);
    return means[lo] + (h - static_cast<double>(lo)) * (means[hi] - means[lo]);
  };
  const double alpha = 1.0 - level;
  return Interval{quantile(alpha / 2.0), quantile(1.0 - alpha / 2.0), level, false};
}

std::string task_key(const TaskSpec& task) {
  return std::to_string(task.rule.value()) + "/" + std::to_string(task.length) + "/" +
         std::to_string(task.task_seed);
}

std::vector<GroupStats> summarize(std::span<const EpisodeResult> results, GroupBy group_by) {
  std::map<std::pair<std::string, std::string>, std::vector<double>> groups;
  for (const auto& r : results) {
    std::string task = group_by == GroupBy::agent_task ? task_key(r.task) : std::string();
    groups[{r.agent_id, std::move(task)}].push_back(r.success);
  }
  std::vector<GroupStats> table;
  table.reserve(groups.size());
  for (const auto& [key, values] : groups) {
    GroupStats g{key.first, std::nullopt, summary_of(values)};
    if (group_by == GroupBy::agent_task) g.task = key.second;
    table.push_back(std::move(g));
  }
  std::stable_sort(table.begin(), table.end(),
                   [](const GroupStats& a, const GroupStats& b) { return a.stats.mean > b.stats.mean; });
  return table;
}

double round_half_even(double value, int decimals) {
  const double scale = std::pow(10.0, decimals);
  // Snap away binary representation noise before deciding ties.
  const double scaled = std::round(value * scale * 1e6) / 1e6;
  const int saved = std::fegetround();
  std::fesetround(FE_TONEAREST);
  const double rounded = std::nearbyint(scaled);
  std::fesetround(saved);
  const double out = rounded / scale;
  return out == 0.0 ? 0.0 : out;
}

std::string format_fixed(double value, int decimals) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", decimals, round_half_even(value, decimals));
  return buf;
}

}  // namespace rulebench
