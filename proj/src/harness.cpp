#include "tocucrl/harness.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include <json.hpp>

#include "tocucrl/benchmark.hpp"
#include "tocucrl/instance_io.hpp"

namespace tocucrl {

using nlohmann::json;

namespace {

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot open '" + path + "'");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

void write_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw UsageError("cannot write '" + path.string() + "'");
  out << text;
}

std::string sanitize(std::string text) {
  for (char& c : text) {
    if (c == ',' || c == '\n' || c == '\r') c = ';';
  }
  return text;
}

std::string file_tag(std::string oracle) {
  for (char& c : oracle) {
    if (c == ':') c = '-';
  }
  return oracle;
}

}  // namespace

ExperimentConfig parse_experiment_config(const std::string& json_text) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::exception& e) {
    throw UsageError(std::string("config JSON: ") + e.what());
  }
  ExperimentConfig config;
  try {
    config.instance = doc.at("instance").get<std::string>();
    config.reward = doc.at("reward").get<std::string>();
    if (doc.contains("oracle")) {
      config.oracles.clear();
      const json& o = doc["oracle"];
      if (o.is_array()) {
        for (const json& item : o) {
          config.oracles.push_back(oracle_from_keyword(item.get<std::string>()));
        }
      } else {
        config.oracles.push_back(oracle_from_keyword(o.get<std::string>()));
      }
    }
    if (doc.contains("Q")) {
      const json& q = doc["Q"];
      config.q = q.is_number() ? format_real(q.get<double>()) : q.get<std::string>();
    }
    config.delta = doc.value("delta", config.delta);
    const json& t = doc.at("T");
    if (t.is_array()) {
      config.horizons = t.get<std::vector<std::size_t>>();
    } else {
      config.horizons = {t.get<std::size_t>()};
    }
    const json& seeds = doc.at("seeds");
    if (seeds.is_array()) {
      config.seeds = seeds.get<std::vector<std::uint64_t>>();
    } else {
      const auto start = seeds.value("start", std::uint64_t{0});
      const auto count = seeds.at("count").get<std::uint64_t>();
      for (std::uint64_t i = 0; i < count; ++i) config.seeds.push_back(start + i);
    }
    if (doc.contains("opt")) {
      const json& opt = doc["opt"];
      if (opt.is_string()) {
        if (opt.get<std::string>() != "solve") {
          throw UsageError("config: opt must be a number or \"solve\"");
        }
        config.solve_opt = true;
      } else {
        config.opt = opt.get<double>();
      }
    }
    config.out_dir = doc.value("out_dir", std::string());
    config.write_traces = doc.value("traces", true);
    config.anytime = doc.value("anytime", false);
    config.aperiodicity = doc.value("aperiodicity", config.aperiodicity);
  } catch (const json::exception& e) {
    throw UsageError(std::string("config JSON: ") + e.what());
  }
  if (config.seeds.empty()) throw UsageError("config: seeds must be nonempty");
  if (config.horizons.empty()) throw UsageError("config: T must be nonempty");
  for (std::size_t i = 0; i < config.horizons.size(); ++i) {
    if (config.horizons[i] == 0 || (i > 0 && config.horizons[i] <= config.horizons[i - 1])) {
      throw UsageError("config: T values must be positive and increasing");
    }
  }
  if (config.oracles.empty()) throw UsageError("config: no oracle");
  return config;
}

ExperimentConfig load_experiment_config(const std::string& path) {
  return parse_experiment_config(read_file(path));
}

double resolve_q(const std::string& text, const RewardSpec& spec) {
  if (text == "L") return spec.lipschitz();
  if (text == "inf" || text == "Inf" || text == "infinity") return kInf;
  try {
    std::size_t used = 0;
    const double q = std::stod(text, &used);
    if (used != text.size() || !(q >= 0.0)) throw UsageError("");
    return q;
  } catch (const std::exception&) {
    throw UsageError("Q must be a number >= 0, \"L\" or \"inf\", got '" + text + "'");
  }
}

bool CampaignSummary::any_failed() const {
  return std::any_of(runs.begin(), runs.end(), [](const RunRow& r) { return r.status != "ok"; });
}

namespace {

struct Job {
  OracleKind oracle;
  std::uint64_t seed;
  std::size_t horizon;
};

RunRow execute(const ExperimentConfig& config, const MdpInstance& instance,
               const RewardSpec& spec, double q, std::optional<double> opt, const Job& job) {
  RunRow row;
  row.oracle = to_string(job.oracle);
  row.seed = job.seed;
  row.horizon = job.horizon;
  try {
    AgentConfig agent;
    agent.delta = config.delta;
    agent.q = q;
    agent.oracle = job.oracle;
    agent.seed = job.seed;
    agent.opt = opt;
    agent.aperiodicity = config.aperiodicity;
    agent.check_bounds = false;
    bool covered = true;
    EpisodeObserver observer = [&](const EpisodeRecord&, const ConfidenceRegions& regions) {
      if (covered && !regions_contain(regions, instance)) covered = false;
    };
    const bool tmd = job.oracle == OracleKind::kTmdL2 || job.oracle == OracleKind::kTmdEntropy;
    RunResult result =
        config.anytime && tmd
            ? run_anytime_tmd(instance, spec, agent, mirror_map_for(job.oracle, spec),
                              job.horizon, observer)
            : run(instance, spec, agent, job.horizon, observer);
    row.reward = result.final_reward();
    row.regret = result.final_regret();
    row.episodes = result.num_episodes();
    row.bound = result.episode_bound;
    row.covered = covered;
    for (const TrajectoryStep& st : result.trajectory.steps()) {
      if (instance.action(st.state, st.action).name == "exit") ++row.n_alt;
    }
    if (static_cast<double>(row.episodes) > row.bound + 1e-9) {
      row.status = "bound";
      row.error = "episode count exceeds the cap";
    }
    if (config.write_traces && !config.out_dir.empty()) {
      const auto dir = std::filesystem::path(config.out_dir) / "runs";
      const std::string stem = file_tag(row.oracle) + "_s" + std::to_string(job.seed) + "_T" +
                               std::to_string(job.horizon);
      std::ofstream steps(dir / (stem + "_steps.csv"));
      write_steps_csv(steps, result);
      std::ofstream episodes(dir / (stem + "_episodes.csv"));
      write_episodes_csv(episodes, result);
    }
  } catch (const std::exception& e) {
    row.status = "error";
    row.error = sanitize(e.what());
  }
  return row;
}

}  // namespace

CampaignSummary run_campaign(const ExperimentConfig& config) {
  const MdpInstance instance = instance_from_keyword(config.instance);
  const RewardSpec spec = reward_from_keyword(config.reward);
  const double q = resolve_q(config.q, spec);
  CampaignSummary summary;
  summary.opt = config.opt;
  if (config.solve_opt) summary.opt = solve_offline(instance, spec).opt;

  if (!config.out_dir.empty()) {
    std::filesystem::create_directories(config.out_dir);
    if (config.write_traces) {
      std::filesystem::create_directories(std::filesystem::path(config.out_dir) / "runs");
    }
  }

  std::vector<Job> jobs;
  for (OracleKind oracle : config.oracles) {
    for (std::size_t horizon : config.horizons) {
      for (std::uint64_t seed : config.seeds) jobs.push_back({oracle, seed, horizon});
    }
  }
  summary.runs.resize(jobs.size());
  const auto count = static_cast<std::ptrdiff_t>(jobs.size());
#pragma omp parallel for schedule(dynamic)
  for (std::ptrdiff_t i = 0; i < count; ++i) {
    summary.runs[i] = execute(config, instance, spec, q, summary.opt, jobs[i]);
  }
  summary.rows = aggregate(summary.runs);

  if (!config.out_dir.empty()) {
    const std::filesystem::path dir(config.out_dir);
    write_file(dir / "runs.csv", runs_csv(summary.runs));
    write_file(dir / "summary.csv", summary_csv(summary.rows));
  }
  return summary;
}

CampaignSummary compare_oracles(const ExperimentConfig& config) {
  CampaignSummary summary = run_campaign(config);
  if (!config.out_dir.empty()) {
    write_file(std::filesystem::path(config.out_dir) / "compare.csv", compare_csv(summary.rows));
  }
  return summary;
}

double quantile(std::vector<double> values, double q) {
  if (values.empty()) return std::nan("");
  std::sort(values.begin(), values.end());
  const double h = q * static_cast<double>(values.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const std::size_t hi = std::min(lo + 1, values.size() - 1);
  return values[lo] + (h - static_cast<double>(lo)) * (values[hi] - values[lo]);
}

std::vector<SummaryRow> aggregate(const std::vector<RunRow>& runs) {
  // Keyed by (oracle position of first appearance, T).
  std::vector<std::string> oracle_order;
  std::map<std::pair<std::size_t, std::size_t>, std::vector<const RunRow*>> groups;
  for (const RunRow& r : runs) {
    auto it = std::find(oracle_order.begin(), oracle_order.end(), r.oracle);
    const auto idx = static_cast<std::size_t>(it - oracle_order.begin());
    if (it == oracle_order.end()) oracle_order.push_back(r.oracle);
    groups[{idx, r.horizon}].push_back(&r);
  }
  std::vector<SummaryRow> rows;
  for (const auto& [key, members] : groups) {
    SummaryRow row;
    row.oracle = oracle_order[key.first];
    row.horizon = key.second;
    row.runs = members.size();
    std::vector<double> regrets;
    double reward = 0.0;
    double episodes = 0.0;
    double n_alt = 0.0;
    std::size_t covered = 0;
    std::size_t measured = 0;
    for (const RunRow* r : members) {
      if (r->status != "ok") ++row.failed;
      if (r->status == "error") continue;
      ++measured;
      regrets.push_back(r->regret);
      reward += r->reward;
      episodes += static_cast<double>(r->episodes);
      n_alt += static_cast<double>(r->n_alt);
      row.max_episodes = std::max(row.max_episodes, r->episodes);
      row.max_bound = std::max(row.max_bound, r->bound);
      if (static_cast<double>(r->episodes) > r->bound + 1e-9) ++row.bound_violations;
      if (r->covered) ++covered;
    }
    if (measured > 0) {
      const double n = static_cast<double>(measured);
      double sum = 0.0;
      for (double x : regrets) sum += x;
      row.mean_regret = sum / n;
      row.median_regret = quantile(regrets, 0.5);
      row.p90_regret = quantile(regrets, 0.9);
      row.mean_reward = reward / n;
      row.mean_episodes = episodes / n;
      row.coverage = static_cast<double>(covered) / n;
      row.mean_n_alt = n_alt / n;
    } else {
      row.mean_regret = row.median_regret = row.p90_regret = std::nan("");
      row.mean_reward = row.mean_episodes = row.coverage = row.mean_n_alt = std::nan("");
    }
    rows.push_back(row);
  }
  return rows;
}

std::string runs_csv(const std::vector<RunRow>& runs) {
  std::ostringstream out;
  out << "oracle,seed,T,status,g,regret,episodes,bound,covered,n_alt,error\n";
  for (const RunRow& r : runs) {
    out << r.oracle << ',' << r.seed << ',' << r.horizon << ',' << r.status << ','
        << format_real(r.reward) << ',' << format_real(r.regret) << ',' << r.episodes << ','
        << format_real(r.bound) << ',' << (r.covered ? 1 : 0) << ',' << r.n_alt << ','
        << sanitize(r.error) << '\n';
  }
  return out.str();
}

std::vector<RunRow> parse_runs_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  std::getline(in, line);
  std::vector<RunRow> runs;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::string cell;
    std::istringstream fields(line);
    while (std::getline(fields, cell, ',')) cells.push_back(cell);
    if (line.back() == ',') cells.emplace_back();
    if (cells.size() != 11) throw UsageError("runs.csv: malformed row '" + line + "'");
    RunRow r;
    r.oracle = cells[0];
    r.seed = std::stoull(cells[1]);
    r.horizon = std::stoull(cells[2]);
    r.status = cells[3];
    r.reward = std::strtod(cells[4].c_str(), nullptr);
    r.regret = std::strtod(cells[5].c_str(), nullptr);
    r.episodes = std::stoull(cells[6]);
    r.bound = std::strtod(cells[7].c_str(), nullptr);
    r.covered = cells[8] == "1";
    r.n_alt = std::stoull(cells[9]);
    r.error = cells[10];
    runs.push_back(std::move(r));
  }
  return runs;
}

std::string summary_csv(const std::vector<SummaryRow>& rows) {
  std::ostringstream out;
  out << "oracle,T,runs,failed,mean_regret,median_regret,p90_regret,mean_g,mean_episodes,"
         "max_episodes,max_bound,bound_violations,coverage,mean_n_alt\n";
  for (const SummaryRow& r : rows) {
    out << r.oracle << ',' << r.horizon << ',' << r.runs << ',' << r.failed << ','
        << format_real(r.mean_regret) << ',' << format_real(r.median_regret) << ','
        << format_real(r.p90_regret) << ',' << format_real(r.mean_reward) << ','
        << format_real(r.mean_episodes) << ',' << r.max_episodes << ','
        << format_real(r.max_bound) << ',' << r.bound_violations << ','
        << format_real(r.coverage) << ',' << format_real(r.mean_n_alt) << '\n';
  }
  return out.str();
}

std::string compare_csv(const std::vector<SummaryRow>& rows) {
  std::vector<std::string> oracles;
  std::map<std::size_t, std::map<std::string, double>> table;
  for (const SummaryRow& r : rows) {
    if (std::find(oracles.begin(), oracles.end(), r.oracle) == oracles.end()) {
      oracles.push_back(r.oracle);
    }
    table[r.horizon][r.oracle] = r.mean_regret;
  }
  std::ostringstream out;
  out << "T";
  for (const std::string& o : oracles) out << ",regret_" << o;
  out << '\n';
  for (const auto& [horizon, cols] : table) {
    out << horizon;
    for (const std::string& o : oracles) {
      out << ',';
      if (auto it = cols.find(o); it != cols.end()) out << format_real(it->second);
    }
    out << '\n';
  }
  return out.str();
}

std::string reaggregate(const std::string& runs_csv_text) {
  return summary_csv(aggregate(parse_runs_csv(runs_csv_text)));
}

double clopper_pearson_lower(std::size_t successes, std::size_t trials, double alpha) {
  if (trials == 0 || successes == 0) return 0.0;
  if (successes > trials) throw UsageError("clopper_pearson_lower: successes > trials");
  const double n = static_cast<double>(trials);
  // P(X >= successes | p), increasing in p.
  auto upper_tail = [&](double p) {
    double total = 0.0;
    for (std::size_t j = successes; j <= trials; ++j) {
      const double x = static_cast<double>(j);
      total += std::exp(std::lgamma(n + 1) - std::lgamma(x + 1) - std::lgamma(n - x + 1) +
                        x * std::log(p) + (n - x) * std::log1p(-p));
    }
    return total;
  };
  double lo = 0.0;
  double hi = 1.0;
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    (upper_tail(mid) < alpha ? lo : hi) = mid;
  }
  return lo;
}

}  // namespace tocucrl
