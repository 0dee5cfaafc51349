#include "rulebench/harness.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <ctime>
#include <map>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>

#include "rulebench/belief.hpp"
#include "rulebench/bridge.hpp"

namespace rulebench {

namespace fs = std::filesystem;

namespace {

std::string utc_timestamp() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

bool canonical_less(const EpisodeRecord& a, const EpisodeRecord& b) {
  return std::tie(a.result.agent_id, a.task_index, a.episode_index) <
         std::tie(b.result.agent_id, b.task_index, b.episode_index);
}

bool canonical_less(const CellRecord& a, const CellRecord& b) {
  return std::tie(a.agent, a.task_index, a.episode_index) <
         std::tie(b.agent, b.task_index, b.episode_index);
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

std::string render_aligned(const std::vector<std::vector<std::string>>& rows) {
  std::vector<std::size_t> widths;
  for (const auto& row : rows) {
    widths.resize(std::max(widths.size(), row.size()), 0);
    for (std::size_t c = 0; c < row.size(); ++c) widths[c] = std::max(widths[c], row[c].size());
  }
  std::ostringstream out;
  for (const auto& row : rows) {
    std::string line;
    for (std::size_t c = 0; c < row.size(); ++c) {
      if (c > 0) line += "  ";
      // First column left-aligned, numbers right-aligned.
      const std::string pad(widths[c] - row[c].size(), ' ');
      line += c == 0 ? row[c] + pad : pad + row[c];
    }
    while (!line.empty() && line.back() == ' ') line.pop_back();
    out << line << '\n';
  }
  return out.str();
}

std::string render_csv(const std::vector<std::vector<std::string>>& rows) {
  std::ostringstream out;
  for (const auto& row : rows) {
    for (std::size_t c = 0; c < row.size(); ++c) {
      if (c > 0) out << ',';
      out << csv_field(row[c]);
    }
    out << '\n';
  }
  return out.str();
}

std::string interval_text(const Interval& ci) {
  return "[" + format_fixed(ci.lo) + ", " + format_fixed(ci.hi) + "]";
}

std::string level_label(double level) {
  return format_fixed(level * 100.0, 0) + "% CI";
}

std::vector<EpisodeRecord> load_log_dir(const fs::path& dir, std::vector<std::string>& warnings) {
  const fs::path log = dir / "episodes.jsonl";
  if (!fs::exists(log)) {
    warnings.push_back("no episode log at " + log.string());
    return {};
  }
  auto records = read_episode_log(log);
  if (records.empty()) warnings.push_back("episode log " + log.string() + " is empty");
  return records;
}

}  // namespace

void ExperimentConfig::validate() const {
  if (episodes_per_task < 1) throw ConfigError("episodes_per_task must be at least 1");
  if (parallelism < 1) throw ConfigError("parallelism must be at least 1");
  if (agents.empty()) throw ConfigError("experiment has no agents");
  std::set<std::string> names;
  for (const auto& a : agents) {
    if (a.name.empty()) throw ConfigError("agent names must be non-empty");
    if (!names.insert(a.name).second) throw ConfigError("duplicate agent name '" + a.name + "'");
    a.validate();
  }
  if (!split_manifest) split.validate();
}

ExperimentConfig config_from_json(const Json& j) {
  ExperimentConfig cfg;
  try {
    cfg.name = j.value("name", cfg.name);
    if (j.contains("split")) cfg.split = split_spec_from_json(j.at("split"));
    for (const auto& a : j.at("agents")) cfg.agents.push_back(agent_config_from_json(a));
    cfg.episodes_per_task = j.value("episodes_per_task", cfg.episodes_per_task);
    cfg.base_seed = j.value("base_seed", cfg.base_seed);
    cfg.output_dir = j.value("output_dir", cfg.output_dir.string());
    cfg.parallelism = j.value("parallelism", cfg.parallelism);
    if (j.contains("split_manifest")) cfg.split_manifest = j.at("split_manifest").get<std::string>();
  } catch (const Json::exception& e) {
    throw ConfigError(std::string("experiment config: ") + e.what());
  } catch (const FormatError& e) {
    throw ConfigError(e.what());
  }
  cfg.validate();
  return cfg;
}

Json to_json(const ExperimentConfig& cfg) {
  Json j;
  j["name"] = cfg.name;
  j["split"] = to_json(cfg.split);
  Json agents = Json::array();
  for (const auto& a : cfg.agents) agents.push_back(to_json(a));
  j["agents"] = std::move(agents);
  j["episodes_per_task"] = cfg.episodes_per_task;
  j["base_seed"] = cfg.base_seed;
  j["output_dir"] = cfg.output_dir.string();
  j["parallelism"] = cfg.parallelism;
  if (cfg.split_manifest) j["split_manifest"] = cfg.split_manifest->string();
  return j;
}

ExperimentConfig load_config(const fs::path& path) {
  try {
    return config_from_json(read_json_file(path));
  } catch (const FormatError& e) {
    throw ConfigError(e.what());
  }
}

std::uint64_t episode_seed(std::uint64_t base_seed, const std::string& agent,
                           std::size_t task_index, std::size_t episode_index) {
  return derive_seed(base_seed, {fnv1a64(agent), task_index, episode_index});
}

std::size_t RunManifest::failed_cells() const {
  return static_cast<std::size_t>(
      std::count_if(cells.begin(), cells.end(), [](const CellRecord& c) { return !c.ok; }));
}

Json RunManifest::to_json() const {
  Json j;
  j["artifact_version"] = artifact_version;
  j["started_at"] = started_at;
  j["finished_at"] = finished_at;
  j["config"] = config;
  j["split"] = split;
  Json table = Json::array();
  for (const auto& c : cells) {
    Json row;
    row["agent"] = c.agent;
    row["task_index"] = c.task_index;
    row["episode_index"] = c.episode_index;
    row["seed"] = c.seed;
    row["status"] = c.ok ? "ok" : "failed";
    if (!c.ok) row["error"] = c.error;
    table.push_back(std::move(row));
  }
  j["cells"] = std::move(table);
  j["failed_cells"] = failed_cells();
  return j;
}

std::unique_ptr<Agent> make_any_agent(const AgentConfig& cfg, const AgentContext& context) {
  if (cfg.kind == AgentKind::bridge) return std::make_unique<BridgeAgent>(cfg);
  return make_agent(cfg, context);
}

RunOutput execute_experiment(const ExperimentConfig& cfg, const Split& split) {
  cfg.validate();
  for (const auto& a : cfg.agents) {
    if (a.kind != AgentKind::tabular_q) continue;
    for (const auto& t : split.test) {
      if (t.length > kMaxTabularLength) {
        throw ConfigError("agent '" + a.name + "' is tabular_q but task length " +
                          std::to_string(t.length) + " exceeds 12");
      }
    }
  }

  RunOutput out;
  out.manifest.config = to_json(cfg);
  out.manifest.split = split_manifest(split, cfg.split_manifest ? nullptr : &cfg.split);
  out.manifest.started_at = utc_timestamp();

  AgentContext context;
  context.model_rules = split.train_rules;
  if (!split.test.empty()) context.boundary = split.test.front().boundary;

  struct Unit {
    std::size_t agent_index;
    std::size_t task_index;
  };
  std::vector<Unit> units;
  for (std::size_t a = 0; a < cfg.agents.size(); ++a) {
    for (std::size_t t = 0; t < split.test.size(); ++t) units.push_back({a, t});
  }

  std::mutex collector_mutex;
  std::vector<EpisodeRecord> episodes;
  std::vector<CellRecord> cells;

  auto run_unit = [&](const Unit& unit) {
    const AgentConfig& acfg = cfg.agents[unit.agent_index];
    const TaskSpec& task = split.test[unit.task_index];
    std::vector<EpisodeRecord> local_episodes;
    std::vector<CellRecord> local_cells;

    std::unique_ptr<Agent> agent;
    std::string creation_error;
    try {
      agent = make_any_agent(acfg, context);
    } catch (const std::exception& e) {
      creation_error = e.what();
    }

    for (std::size_t k = 0; k < cfg.episodes_per_task; ++k) {
      CellRecord cell{acfg.name, unit.task_index, k,
                      episode_seed(cfg.base_seed, acfg.name, unit.task_index, k), true, {}};
      if (!agent) {
        cell.ok = false;
        cell.error = creation_error;
      } else {
        try {
          EpisodeRecord rec{run_episode(task, *agent, cell.seed, acfg.name), unit.task_index, k};
          local_episodes.push_back(std::move(rec));
        } catch (const std::exception& e) {
          cell.ok = false;
          cell.error = e.what();
        }
      }
      local_cells.push_back(std::move(cell));
    }

    std::lock_guard lock(collector_mutex);
    for (auto& e : local_episodes) episodes.push_back(std::move(e));
    for (auto& c : local_cells) cells.push_back(std::move(c));
  };

  const std::size_t workers = std::min(cfg.parallelism, std::max<std::size_t>(units.size(), 1));
  std::atomic<std::size_t> next{0};
  {
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        for (std::size_t i = next.fetch_add(1); i < units.size(); i = next.fetch_add(1)) {
          run_unit(units[i]);
        }
      });
    }
  }

  std::sort(episodes.begin(), episodes.end(),
            [](const EpisodeRecord& a, const EpisodeRecord& b) { return canonical_less(a, b); });
  std::sort(cells.begin(), cells.end(),
            [](const CellRecord& a, const CellRecord& b) { return canonical_less(a, b); });
  out.episodes = std::move(episodes);
  out.manifest.cells = std::move(cells);
  out.manifest.finished_at = utc_timestamp();
  return out;
}

std::string render_episode_log(const std::vector<EpisodeRecord>& episodes) {
  std::string text;
  for (const auto& e : episodes) {
    text += to_log_line(e);
    text += '\n';
  }
  return text;
}

RunOutput run_experiment(const ExperimentConfig& cfg, const Split& split) {
  cfg.validate();
  const SplitReport check = cfg.split_manifest ? verify_split(split) : verify_split(split, cfg.split);
  if (!check.ok()) {
    std::string msg = "split failed verification:";
    for (const auto& v : check.violations) msg += "\n  " + v.message;
    throw SplitViolationError(msg, check);
  }
  RunOutput out = execute_experiment(cfg, split);
  fs::create_directories(cfg.output_dir);
  write_text_file(cfg.output_dir / "episodes.jsonl", render_episode_log(out.episodes));
  write_text_file(cfg.output_dir / "split.json", out.manifest.split.dump(2) + "\n");
  write_text_file(cfg.output_dir / "manifest.json", out.manifest.to_json().dump(2) + "\n");
  return out;
}

RunOutput run_experiment(const ExperimentConfig& cfg) {
  cfg.validate();
  if (cfg.split_manifest) {
    Split split;
    try {
      split = split_from_manifest(read_json_file(*cfg.split_manifest));
    } catch (const FormatError& e) {
      throw ConfigError(e.what());
    }
    return run_experiment(cfg, split);
  }
  return run_experiment(cfg, make_split(cfg.split));
}

std::vector<SummaryRow> summary_rows(const std::vector<EpisodeRecord>& episodes) {
  std::vector<EpisodeResult> results;
  results.reserve(episodes.size());
  for (const auto& e : episodes) results.push_back(e.result);
  std::vector<SummaryRow> rows;
  for (const auto& g : summarize(results, GroupBy::agent)) {
    rows.push_back({g.agent, g.stats, ci_normal(g.stats, 0.95, true)});
  }
  return rows;
}

std::vector<GapRow> gap_rows(const std::vector<EpisodeRecord>& id,
                             const std::vector<EpisodeRecord>& ood,
                             std::vector<std::string>& warnings) {
  std::map<std::string, SummaryStats> id_stats;
  std::map<std::string, SummaryStats> ood_stats;
  for (const auto& r : summary_rows(id)) id_stats[r.agent] = r.stats;
  for (const auto& r : summary_rows(ood)) ood_stats[r.agent] = r.stats;

  std::vector<GapRow> rows;
  for (const auto& [agent, s] : id_stats) {
    auto it = ood_stats.find(agent);
    if (it == ood_stats.end()) {
      warnings.push_back("agent '" + agent + "' has ID results only; omitted from gap table");
      continue;
    }
    rows.push_back({agent, s, it->second, drop_ci(s, it->second)});
  }
  for (const auto& [agent, s] : ood_stats) {
    if (!id_stats.contains(agent)) {
      warnings.push_back("agent '" + agent + "' has OOD results only; omitted from gap table");
    }
  }
  std::stable_sort(rows.begin(), rows.end(),
                   [](const GapRow& a, const GapRow& b) { return a.drop.drop > b.drop.drop; });
  return rows;
}

std::string render_summary(const std::vector<SummaryRow>& rows, ReportFormat format) {
  std::vector<std::vector<std::string>> table;
  if (format == ReportFormat::csv) {
    table.push_back({"agent", "mean", "std", "n", "ci_lo", "ci_hi"});
    for (const auto& r : rows) {
      table.push_back({r.agent, format_fixed(r.stats.mean), format_fixed(r.stats.std),
                       std::to_string(r.stats.n), format_fixed(r.ci.lo), format_fixed(r.ci.hi)});
    }
    return render_csv(table);
  }
  table.push_back({"agent", "mean", "std", "n", level_label(rows.empty() ? 0.95 : rows[0].ci.level)});
  for (const auto& r : rows) {
    table.push_back({r.agent, format_fixed(r.stats.mean), format_fixed(r.stats.std),
                     std::to_string(r.stats.n), interval_text(r.ci)});
  }
  return render_aligned(table);
}

std::string render_gap(const std::vector<GapRow>& rows, ReportFormat format) {
  std::vector<std::vector<std::string>> table;
  if (format == ReportFormat::csv) {
    table.push_back({"agent", "id_mean", "ood_mean", "drop", "ci_lo", "ci_hi"});
    for (const auto& r : rows) {
      table.push_back({r.agent, format_fixed(r.id.mean), format_fixed(r.ood.mean),
                       format_fixed(r.drop.drop), format_fixed(r.drop.interval.lo),
                       format_fixed(r.drop.interval.hi)});
    }
    return render_csv(table);
  }
  table.push_back({"agent", "ID mean", "OOD mean", "drop", "95% CI (drop)"});
  for (const auto& r : rows) {
    table.push_back({r.agent, format_fixed(r.id.mean), format_fixed(r.ood.mean),
                     format_fixed(r.drop.drop), interval_text(r.drop.interval)});
  }
  return render_aligned(table);
}

Report report(const fs::path& log_dir, ReportMode mode, ReportFormat format,
              std::optional<fs::path> ood_dir) {
  Report rep;
  if (mode == ReportMode::gap) {
    const auto id = load_log_dir(log_dir / "id", rep.warnings);
    const auto ood = load_log_dir(ood_dir.value_or(log_dir / "ood"), rep.warnings);
    rep.gap = gap_rows(id, ood, rep.warnings);
    rep.rendered = render_gap(rep.gap, format);
  } else {
    rep.summary = summary_rows(load_log_dir(log_dir, rep.warnings));
    rep.rendered = render_summary(rep.summary, format);
  }
  return rep;
}

double TheoryReport::max_deviation() const {
  return std::max({max_entropy_vs_mi, max_entropy_vs_kl, max_mi_vs_kl});
}

bool TheoryReport::pass() const { return max_deviation() <= tolerance && bound_violations == 0; }

std::string TheoryReport::render() const {
  std::ostringstream out;
  char buf[64];
  auto sci = [&](double v) {
    std::snprintf(buf, sizeof buf, "%.3e", v);
    return std::string(buf);
  };
  out << "information-gain identity check\n";
  if (trials == 0) out << "0 trials (vacuous)\n";
  out << "trials                 " << trials << '\n';
  out << "max |IG_H - IG_MI|     " << sci(max_entropy_vs_mi) << '\n';
  out << "max |IG_H - IG_KL|     " << sci(max_entropy_vs_kl) << '\n';
  out << "max |IG_MI - IG_KL|    " << sci(max_mi_vs_kl) << '\n';
  out << "min IG                 " << sci(min_information_gain) << '\n';
  out << "bound violations       " << bound_violations << '\n';
  out << "tolerance              " << sci(tolerance) << '\n';
  out << "result                 " << (pass() ? "PASS" : "FAIL") << '\n';
  return out.str();
}

TheoryReport verify_theory(std::size_t trials, std::uint64_t seed) {
  TheoryReport rep;
  rep.trials = trials;
  Rng rng(seed);
  std::vector<RuleId> pool = RuleId::all();
  for (std::size_t trial = 0; trial < trials; ++trial) {
    const auto k = static_cast<std::size_t>(1 + rng.uniform_below(16));
    // Partial Fisher-Yates: the first k entries become a uniform k-subset.
    for (std::size_t i = 0; i < k; ++i) {
      const auto j = i + static_cast<std::size_t>(rng.uniform_below(pool.size() - i));
      std::swap(pool[i], pool[j]);
    }
    std::vector<RuleId> support(pool.begin(), pool.begin() + static_cast<std::ptrdiff_t>(k));
    std::vector<double> weights(k);
    for (auto& w : weights) w = rng.uniform01() < 0.2 ? 0.0 : rng.uniform01() + 1e-3;
    if (std::all_of(weights.begin(), weights.end(), [](double w) { return w == 0.0; })) {
      weights[rng.uniform_below(k)] = 1.0;
    }
    const Belief belief = Belief::from_weights(std::move(support), std::move(weights));
    const auto length = static_cast<std::size_t>(3 + rng.uniform_below(6));
    const Tape state = random_tape(rng, length);
    const Action action =
        Action::from_index(static_cast<std::size_t>(rng.uniform_below(length + 1)), length);

    const double ig_h = info_gain_entropy(belief, state, action);
    const double ig_mi = info_gain_mi(belief, state, action);
    const double ig_kl = info_gain_kl(belief, state, action);
    rep.max_entropy_vs_mi = std::max(rep.max_entropy_vs_mi, std::abs(ig_h - ig_mi));
    rep.max_entropy_vs_kl = std::max(rep.max_entropy_vs_kl, std::abs(ig_h - ig_kl));
    rep.max_mi_vs_kl = std::max(rep.max_mi_vs_kl, std::abs(ig_mi - ig_kl));
    const double lowest = std::min({ig_h, ig_mi, ig_kl});
    rep.min_information_gain = trial == 0 ? lowest : std::min(rep.min_information_gain, lowest);
    const double prior_entropy = entropy(belief);
    if (lowest < -1e-12 || std::max({ig_h, ig_mi, ig_kl}) > prior_entropy + 1e-12) {
      ++rep.bound_violations;
    }
  }
  return rep;
}

}  // namespace rulebench
