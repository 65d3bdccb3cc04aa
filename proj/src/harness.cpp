#include "udn/harness.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <istream>
#include <numeric>
#include <optional>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "udn/baselines.hpp"
#include "udn/clustering.hpp"
#include "udn/csv.hpp"
#include "udn/safeguard.hpp"
#include "udn/seeding.hpp"

namespace udn::harness {
namespace {

constexpr std::uint64_t kControlStream = 0xC0;
constexpr std::uint64_t kQLearningStream = 0x51;
constexpr std::uint64_t kTrainerStream = 0x7A;

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

[[noreturn]] void bad_value(const std::string& key, const std::string& value) {
  throw std::invalid_argument("config: bad value for '" + key + "': '" + value + "'");
}

double to_double(const std::string& key, const std::string& v) {
  std::size_t used = 0;
  double out = 0.0;
  try {
    out = std::stod(v, &used);
  } catch (const std::exception&) {
    bad_value(key, v);
  }
  if (used != v.size()) bad_value(key, v);
  return out;
}

std::uint64_t to_uint(const std::string& key, const std::string& v) {
  if (v.empty() || v.find_first_not_of("0123456789") != std::string::npos) bad_value(key, v);
  try {
    return std::stoull(v);
  } catch (const std::exception&) {
    bad_value(key, v);
  }
}

bool to_bool(const std::string& key, const std::string& v) {
  if (v == "1" || v == "true" || v == "yes" || v == "on") return true;
  if (v == "0" || v == "false" || v == "no" || v == "off") return false;
  bad_value(key, v);
}

std::vector<std::size_t> to_sizes(const std::string& key, const std::string& v) {
  std::vector<std::size_t> out;
  std::stringstream ss(v);
  std::string part;
  while (std::getline(ss, part, ',')) out.push_back(to_uint(key, trim(part)));
  if (out.empty()) bad_value(key, v);
  return out;
}

std::vector<int> all_ids(std::size_t n) {
  std::vector<int> ids(n);
  std::iota(ids.begin(), ids.end(), 0);
  return ids;
}

std::vector<std::vector<int>> stage_clusters(const ExperimentConfig& c,
                                             const env::Scenario& scenario,
                                             std::span<const double> avg_loads,
                                             clustering::Selection* selection) {
  if (c.mode == Mode::kCentralized) return {all_ids(scenario.n_sbs())};
  auto sel = clustering::cluster_scenario(scenario, avg_loads);
  auto clusters = sel.best.clusters();
  if (selection) *selection = std::move(sel);
  return clusters;
}

std::ofstream open_out(const std::string& dir, const std::string& name) {
  std::ofstream f(std::filesystem::path(dir) / name);
  if (!f) throw std::runtime_error("cannot write " + dir + "/" + name);
  return f;
}

}  // namespace

// ---- enums -------------------------------------------------------------------------------

std::string to_string(Controller c) {
  switch (c) {
    case Controller::kNoMlb: return "nomlb";
    case Controller::kRuleStatic: return "rule-static";
    case Controller::kRuleAdaptive: return "rule-adaptive";
    case Controller::kQLearning: return "qlearning";
    case Controller::kDrlSbp: return "drl-sbp";
    case Controller::kDrlMbp: return "drl-mbp";
  }
  return "unknown";
}

std::string to_string(Mode m) { return m == Mode::kTwoLayer ? "two-layer" : "centralized"; }
std::string to_string(Schedule s) { return s == Schedule::kRoundRobin ? "round-robin" : "async"; }

Controller parse_controller(const std::string& s) {
  for (auto c : {Controller::kNoMlb, Controller::kRuleStatic, Controller::kRuleAdaptive,
                 Controller::kQLearning, Controller::kDrlSbp, Controller::kDrlMbp})
    if (to_string(c) == s) return c;
  throw std::invalid_argument("unknown controller '" + s + "'");
}

Mode parse_mode(const std::string& s) {
  if (s == "two-layer") return Mode::kTwoLayer;
  if (s == "centralized") return Mode::kCentralized;
  throw std::invalid_argument("unknown mode '" + s + "'");
}

Schedule parse_schedule(const std::string& s) {
  if (s == "round-robin") return Schedule::kRoundRobin;
  if (s == "async") return Schedule::kAsync;
  throw std::invalid_argument("unknown schedule '" + s + "'");
}

bool is_drl(Controller c) { return c == Controller::kDrlSbp || c == Controller::kDrlMbp; }

// ---- configuration ---------------------------------------------------------------------------

void ExperimentConfig::validate() const {
  std::vector<std::string> bad;
  auto check = [&](bool ok, const char* field, const char* rule) {
    if (!ok) bad.push_back(std::string(field) + " (" + rule + ")");
  };
  check(n_sbs >= 1, "n_sbs", "must be >= 1");
  check(area > 0.0, "area", "must be > 0");
  check(cbr >= 0.0 && std::isfinite(cbr), "cbr", "must be finite and >= 0");
  check(n_prb > 0, "n_prb", "must be > 0");
  check(prb_cap > 0.0, "prb_cap", "must be > 0");
  check(gamma >= 0.0 && gamma <= 1.0, "gamma", "must be in [0, 1]");
  check(tau > 0.0 && tau <= 1.0, "tau", "must be in (0, 1]");
  check(batch >= 1, "batch", "must be >= 1");
  check(replay >= batch, "replay", "must be >= batch");
  check(actor_lr > 0.0, "actor_lr", "must be > 0");
  check(critic_lr > 0.0, "critic_lr", "must be > 0");
  check(!hidden.empty() && std::all_of(hidden.begin(), hidden.end(), [](auto h) { return h > 0; }),
        "hidden", "needs positive sizes");
  check(noise_sigma >= 0.0, "noise_sigma", "must be >= 0");
  check(seeds >= 1, "seeds", "must be >= 1");
  check(steps >= 1, "steps", "must be >= 1");
  check(stage_length >= 1, "stage_length", "must be >= 1");
  check(moving_window >= 1, "moving_window", "must be >= 1");
  check(final_window >= 1, "final_window", "must be >= 1");
  check(stages >= 1, "stages", "must be >= 1");
  check(!safeguard || is_drl(controller), "safeguard", "needs a drl-* controller");
  check(!out.empty(), "out", "must be non-empty");
  if (!bad.empty()) {
    std::string msg = "invalid config:";
    for (std::size_t i = 0; i < bad.size(); ++i) msg += (i ? ", " : " ") + bad[i];
    throw std::invalid_argument(msg);
  }
}

agent::AgentConfig ExperimentConfig::agent_config() const {
  agent::AgentConfig a;
  a.hidden = hidden;
  a.gamma = gamma;
  a.tau = tau;
  a.batch = batch;
  a.replay_capacity = replay;
  a.actor_opt = {optimizer, actor_lr};
  a.critic_opt = {optimizer, critic_lr};
  a.max_staleness = staleness;
  return a;
}

env::ChannelParams ExperimentConfig::channel() const {
  env::ChannelParams ch;
  ch.prb_cap = prb_cap;
  return ch;
}

void set_field(ExperimentConfig& c, const std::string& key, const std::string& value) {
  const std::string& v = value;
  if (key == "n_sbs") c.n_sbs = to_uint(key, v);
  else if (key == "n_users") c.n_users = to_uint(key, v);
  else if (key == "area") c.area = to_double(key, v);
  else if (key == "cbr") c.cbr = to_double(key, v);
  else if (key == "n_prb") c.n_prb = static_cast<int>(to_uint(key, v));
  else if (key == "prb_cap") c.prb_cap = to_double(key, v);
  else if (key == "controller") {
    try { c.controller = parse_controller(v); } catch (const std::invalid_argument&) { bad_value(key, v); }
  } else if (key == "mode") {
    try { c.mode = parse_mode(v); } catch (const std::invalid_argument&) { bad_value(key, v); }
  } else if (key == "schedule") {
    try { c.schedule = parse_schedule(v); } catch (const std::invalid_argument&) { bad_value(key, v); }
  } else if (key == "gamma") c.gamma = to_double(key, v);
  else if (key == "tau") c.tau = to_double(key, v);
  else if (key == "batch") c.batch = to_uint(key, v);
  else if (key == "replay") c.replay = to_uint(key, v);
  else if (key == "actor_lr") c.actor_lr = to_double(key, v);
  else if (key == "critic_lr") c.critic_lr = to_double(key, v);
  else if (key == "optimizer") {
    if (v == "adam") c.optimizer = nn::OptimizerKind::kAdam;
    else if (v == "sgd") c.optimizer = nn::OptimizerKind::kPlain;
    else bad_value(key, v);
  } else if (key == "staleness") c.staleness = to_uint(key, v);
  else if (key == "hidden") c.hidden = to_sizes(key, v);
  else if (key == "noise_sigma") c.noise_sigma = to_double(key, v);
  else if (key == "seeds") c.seeds = to_uint(key, v);
  else if (key == "first_seed") c.first_seed = to_uint(key, v);
  else if (key == "steps") c.steps = to_uint(key, v);
  else if (key == "stage_length") c.stage_length = to_uint(key, v);
  else if (key == "moving_window") c.moving_window = to_uint(key, v);
  else if (key == "final_window") c.final_window = to_uint(key, v);
  else if (key == "safeguard") c.safeguard = to_bool(key, v);
  else if (key == "stages") c.stages = to_uint(key, v);
  else if (key == "eval_horizon") c.eval_horizon = to_uint(key, v);
  else if (key == "training_log") c.write_training_log = to_bool(key, v);
  else if (key == "out") c.out = v;
  else throw std::invalid_argument("config: unknown key '" + key + "'");
}

ExperimentConfig parse_config(std::istream& is, ExperimentConfig base) {
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw std::invalid_argument("config: line " + std::to_string(lineno) + " is not key = value");
    set_field(base, trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
  }
  return base;
}

ExperimentConfig load_config(const std::string& path, ExperimentConfig base) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("config: cannot open " + path);
  return parse_config(f, std::move(base));
}

void write_config(std::ostream& os, const ExperimentConfig& c) {
  auto num = [](double v) { return csv::format_double(v); };
  std::string hidden;
  for (std::size_t i = 0; i < c.hidden.size(); ++i)
    hidden += (i ? "," : "") + std::to_string(c.hidden[i]);
  os << "n_sbs = " << c.n_sbs << "\nn_users = " << c.n_users << "\narea = " << num(c.area)
     << "\ncbr = " << num(c.cbr) << "\nn_prb = " << c.n_prb << "\nprb_cap = " << num(c.prb_cap)
     << "\ncontroller = " << to_string(c.controller) << "\nmode = " << to_string(c.mode)
     << "\nschedule = " << to_string(c.schedule) << "\ngamma = " << num(c.gamma)
     << "\ntau = " << num(c.tau) << "\nbatch = " << c.batch << "\nreplay = " << c.replay
     << "\nactor_lr = " << num(c.actor_lr) << "\ncritic_lr = " << num(c.critic_lr)
     << "\noptimizer = " << (c.optimizer == nn::OptimizerKind::kAdam ? "adam" : "sgd")
     << "\nstaleness = " << c.staleness << "\nhidden = " << hidden
     << "\nnoise_sigma = " << num(c.noise_sigma) << "\nseeds = " << c.seeds
     << "\nfirst_seed = " << c.first_seed << "\nsteps = " << c.steps
     << "\nstage_length = " << c.stage_length << "\nmoving_window = " << c.moving_window
     << "\nfinal_window = " << c.final_window << "\nsafeguard = " << (c.safeguard ? 1 : 0)
     << "\nstages = " << c.stages << "\neval_horizon = " << c.eval_horizon
     << "\ntraining_log = " << (c.write_training_log ? 1 : 0) << "\nout = " << c.out << '\n';
}

// ---- metrics ------------------------------------------------------------------------------------

void MetricsSeries::append(const env::StepResult& r) {
  rewards.push_back(r.reward);
  max_loads.push_back(r.metrics.max_load);
  load_stds.push_back(population_std(r.metrics.loads));
  ho_success.push_back(r.metrics.ho_success);
  ho_fail.push_back(r.metrics.ho_fail);
  loads.push_back(r.metrics.loads);
}

std::vector<double> moving_average(std::span<const double> series, std::size_t window) {
  if (series.empty()) throw std::invalid_argument("moving_average: empty series");
  if (window == 0) throw std::invalid_argument("moving_average: window must be >= 1");
  std::vector<double> out(series.size());
  for (std::size_t t = 0; t < series.size(); ++t) {
    const std::size_t start = t + 1 >= window ? t + 1 - window : 0;
    double sum = 0.0;
    for (std::size_t i = start; i <= t; ++i) sum += series[i];
    out[t] = sum / static_cast<double>(t + 1 - start);
  }
  return out;
}

double hfr(long long fails, long long successes) {
  const long long attempts = fails + successes;
  return attempts == 0 ? 0.0 : static_cast<double>(fails) / static_cast<double>(attempts);
}

double hfr(const MetricsSeries& m) {
  const long long f = std::accumulate(m.ho_fail.begin(), m.ho_fail.end(), 0LL);
  const long long s = std::accumulate(m.ho_success.begin(), m.ho_success.end(), 0LL);
  return hfr(f, s);
}

double population_std(std::span<const double> values) {
  if (values.empty()) throw std::invalid_argument("population_std: no values");
  const double mu = mean(values);
  double ss = 0.0;
  for (double v : values) ss += (v - mu) * (v - mu);
  return std::sqrt(ss / static_cast<double>(values.size()));
}

double load_std(std::span<const std::vector<double>> loads_per_step) {
  if (loads_per_step.empty()) throw std::invalid_argument("load_std: no steps");
  double sum = 0.0;
  for (const auto& l : loads_per_step) sum += population_std(l);
  return sum / static_cast<double>(loads_per_step.size());
}

double mean(std::span<const double> v) {
  if (v.empty()) throw std::invalid_argument("mean: empty series");
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

double tail_mean(std::span<const double> v, std::size_t window) {
  const std::size_t n = std::min(window, v.size());
  return mean(v.subspan(v.size() - n));
}

double normalized_gain(std::span<const double> controller, std::span<const double> baseline) {
  if (controller.size() != baseline.size())
    throw std::invalid_argument("normalized_gain: series lengths differ");
  const double base = mean(baseline);
  return (mean(controller) - base) / base;
}

RunSummary summarize(const MetricsSeries& m, const ExperimentConfig& c, std::uint64_t seed,
                     std::size_t num_clusters) {
  RunSummary s;
  s.seed = seed;
  s.controller = c.controller;
  s.mode = c.mode;
  s.steps = m.size();
  s.mean_reward = mean(m.rewards);
  s.final_reward = tail_mean(m.rewards, c.final_window);
  s.mean_max_load = mean(m.max_loads);
  s.final_max_load = tail_mean(m.max_loads, c.final_window);
  s.hfr = hfr(m);
  s.load_std = mean(m.load_stds);
  s.num_clusters = num_clusters;
  return s;
}

void write_summary_csv(std::ostream& os, std::span<const RunSummary> rows) {
  csv::Writer w(os, {"seed", "controller", "mode", "steps", "mean_reward", "final_reward",
                     "mean_max_load", "final_max_load", "hfr", "load_std", "num_clusters"});
  for (const auto& r : rows)
    w.row(r.seed, to_string(r.controller), to_string(r.mode), r.steps, r.mean_reward,
          r.final_reward, r.mean_max_load, r.final_max_load, r.hfr, r.load_std, r.num_clusters);
}

void write_steps_csv(std::ostream& os, const MetricsSeries& m) {
  csv::Writer w(os, {"step", "reward", "max_load", "ho_success", "ho_fail", "load_std"});
  for (std::size_t t = 0; t < m.size(); ++t)
    w.row(t, m.rewards[t], m.max_loads[t], m.ho_success[t], m.ho_fail[t], m.load_stds[t]);
}

// ---- runs -------------------------------------------------------------------------------------------

env::Scenario build_scenario(const ExperimentConfig& c, std::uint64_t seed) {
  env::CellDefaults cells;
  cells.n_prb = c.n_prb;
  return env::generate_scenario(seed, c.n_sbs, c.n_users, c.area, c.cbr, c.channel(), cells);
}

namespace {

agent::TrainerOptions trainer_options(const ExperimentConfig& c, std::uint64_t seed) {
  agent::TrainerOptions o;
  o.agent = c.agent_config();
  o.behaviors = c.controller == Controller::kDrlMbp ? agent::multi_behavior_set()
                                                    : agent::single_behavior_set();
  for (auto& b : o.behaviors) b.noise_sigma = c.noise_sigma;
  o.seed = derive_seed(seed, {kTrainerStream});
  return o;
}

void write_clustering(const std::string& dir, const clustering::Selection& sel,
                      const std::vector<std::vector<int>>& clusters, std::size_t n_sbs) {
  auto f = open_out(dir, "clustering.csv");
  csv::Writer w(f, {"sbs_id", "cluster_index"});
  std::vector<int> membership(n_sbs, 0);
  for (std::size_t h = 0; h < clusters.size(); ++h)
    for (int id : clusters[h]) membership[static_cast<std::size_t>(id)] = static_cast<int>(h);
  for (std::size_t i = 0; i < n_sbs; ++i) w.row(i, membership[i]);
  auto g = open_out(dir, "clustering_candidates.csv");
  clustering::write_candidates_csv(g, sel);
}

class TrainingLog {
 public:
  explicit TrainingLog(std::ostream* os) {
    if (os) w_.emplace(*os, std::vector<std::string>{"iteration", "worker", "behavior", "cluster",
                                                     "reward", "critic_loss"});
  }
  void add(const agent::WorkerReport& r) {
    if (!w_) return;
    for (std::size_t c = 0; c < r.clusters.size(); ++c) {
      const auto& cr = r.clusters[c];
      w_->row(r.iteration, r.worker, agent::to_string(r.behavior), c, cr.reward,
              cr.submitted ? csv::format_double(cr.critic_loss) : std::string());
    }
  }

 private:
  std::optional<csv::Writer> w_;
};

SeedRun run_safeguarded(const ExperimentConfig& c, std::uint64_t seed, const std::string& dir,
                        const std::shared_ptr<const env::Scenario>& scenario) {
  safeguard::SafeguardOptions o;
  o.stage_length = c.stage_length;
  o.stages = c.stages;
  o.eval.horizon = c.eval_horizon ? c.eval_horizon : c.stage_length;
  o.trainer = trainer_options(c, seed);
  o.online_seed = derive_seed(seed, {kControlStream});
  o.centralized = c.mode == Mode::kCentralized;

  SeedRun run;
  std::size_t stage = 0;
  const auto sg = safeguard::run_safeguard(
      scenario, o, [&](std::size_t, const env::StepResult& r) { run.metrics.append(r); },
      [&](const safeguard::LedgerRow& row, const agent::Policy& online, const agent::Policy& offline) {
        run.adopted_scores.push_back(row.adopted_score);
        run.decisions.push_back(safeguard::to_string(row.decision));
        run.online_scores.push_back(row.online_score);
        run.offline_scores.push_back(row.offline_score);
        if (!dir.empty()) {
          auto f = open_out(dir, "policy_online_stage_" + std::to_string(stage) + ".txt");
          agent::save_policy(f, online);
          auto g = open_out(dir, "policy_offline_stage_" + std::to_string(stage) + ".txt");
          agent::save_policy(g, offline);
        }
        ++stage;
      });
  run.clusters = sg.online.clusters;
  if (!dir.empty()) {
    auto f = open_out(dir, "stages.csv");
    safeguard::write_ledger_csv(f, sg.ledger);
  }
  run.summary = summarize(run.metrics, c, seed, run.clusters.size());
  return run;
}

}  // namespace

SeedRun run_seed(const ExperimentConfig& c, std::uint64_t seed, const std::string& dir) {
  c.validate();
  if (!dir.empty()) std::filesystem::create_directories(dir);
  auto scenario = std::make_shared<const env::Scenario>(build_scenario(c, seed));
  if (c.safeguard) {
    auto run = run_safeguarded(c, seed, dir, scenario);
    if (!dir.empty()) {
      auto f = open_out(dir, "steps.csv");
      write_steps_csv(f, run.metrics);
    }
    return run;
  }

  env::NetworkState live(scenario, derive_seed(seed, {kControlStream}));
  const std::size_t n = scenario->n_sbs();

  clustering::Selection selection;
  const std::vector<double> initial(live.loads().begin(), live.loads().end());
  auto clusters = stage_clusters(c, *scenario, initial, &selection);
  if (!dir.empty() && c.mode == Mode::kTwoLayer) write_clustering(dir, selection, clusters, n);

  auto pairs_for = [&](const std::vector<std::vector<int>>& cl) {
    return c.mode == Mode::kCentralized ? baselines::all_pairs(n) : baselines::pairs_within(cl);
  };
  baselines::PairList pairs = pairs_for(clusters);

  std::optional<baselines::QTable> qtable;
  std::vector<std::vector<int>> q_neighbors;
  std::mt19937_64 q_rng(derive_seed(seed, {kQLearningStream}));
  if (c.controller == Controller::kQLearning) {
    qtable.emplace();
    q_neighbors = baselines::nearest_neighbors(clustering::sbs_positions(*scenario),
                                               qtable->params().neighbors);
  }

  std::unique_ptr<agent::Trainer> trainer;
  if (is_drl(c.controller))
    trainer = std::make_unique<agent::Trainer>(scenario, clusters, trainer_options(c, seed));

  std::optional<std::ofstream> log_file;
  if (!dir.empty() && trainer && c.write_training_log) log_file = open_out(dir, "training.csv");
  TrainingLog log(log_file ? &*log_file : nullptr);

  SeedRun run;
  clustering::LoadHistory history;

  auto live_step = [&]() {
    env::StepResult result;
    switch (c.controller) {
      case Controller::kNoMlb:
        result = live.step(baselines::no_mlb(live.cio()));
        break;
      case Controller::kRuleStatic:
        result = live.step(baselines::rule_static(live.loads(), live.cio(), pairs));
        break;
      case Controller::kRuleAdaptive:
        result = live.step(baselines::rule_adaptive(live.loads(), live.cio(), pairs));
        break;
      case Controller::kQLearning: {
        const auto d = baselines::qlearning_act(*qtable, live.loads(), live.cio(), q_neighbors, q_rng);
        result = live.step(d.cio);
        const auto next = baselines::q_observe(live.loads(), q_neighbors, qtable->params());
        baselines::qlearning_update(*qtable, d.observation, d.action, result.reward, next);
        break;
      }
      case Controller::kDrlSbp:
      case Controller::kDrlMbp:
        result = live.step(agent::policy_action(trainer->policy(), live));
        break;
    }
    run.metrics.append(result);
    history.append(result.metrics.loads);
  };

  std::size_t done = 0;
  std::size_t stage = 0;
  while (done < c.steps) {
    const std::size_t len = std::min(c.stage_length, c.steps - done);
    history = {};
    history.stage_start = done;
    if (trainer && c.schedule == Schedule::kAsync) {
      trainer->run_async(len, [&](std::size_t) { live_step(); },
                         [&](const agent::WorkerReport& r) { log.add(r); });
    } else {
      for (std::size_t t = 0; t < len; ++t) {
        if (trainer)
          for (const auto& r : trainer->step_round_robin()) log.add(r);
        live_step();
      }
    }
    done += len;
    if (trainer && !dir.empty()) {
      auto f = open_out(dir, "policy_stage_" + std::to_string(stage) + ".txt");
      agent::save_policy(f, trainer->policy());
    }
    ++stage;
    if (done < c.steps) {
      clusters = stage_clusters(c, *scenario, clustering::stage_averaged_load(history), &selection);
      pairs = pairs_for(clusters);
      if (trainer) trainer->set_clusters(clusters);
    }
  }

  run.clusters = clusters;
  run.summary = summarize(run.metrics, c, seed, clusters.size());
  if (!dir.empty()) {
    auto f = open_out(dir, "steps.csv");
    write_steps_csv(f, run.metrics);
  }
  return run;
}

ExperimentResult run_experiment(const ExperimentConfig& c) {
  c.validate();
  std::filesystem::create_directories(c.out);
  {
    auto f = open_out(c.out, "config.txt");
    write_config(f, c);
  }
  ExperimentResult result;
  std::vector<RunSummary> rows;
  for (std::size_t i = 0; i < c.seeds; ++i) {
    const std::uint64_t seed = c.first_seed + i;
    const auto dir = (std::filesystem::path(c.out) / ("seed_" + std::to_string(seed))).string();
    result.runs.push_back(run_seed(c, seed, dir));
    rows.push_back(result.runs.back().summary);
  }
  auto f = open_out(c.out, "summary.csv");
  write_summary_csv(f, rows);
  return result;
}

}  // namespace udn::harness
