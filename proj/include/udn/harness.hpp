#pragma once

// Experiment orchestration: configuration, seeded runs of every controller,
// metrics (handover failure ratio, moving-averaged reward, load spread) and
// CSV emission.

#include <cstddef>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <map>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "udn/agent.hpp"
#include "udn/env.hpp"

namespace udn::harness {

enum class Controller { kNoMlb, kRuleStatic, kRuleAdaptive, kQLearning, kDrlSbp, kDrlMbp };
enum class Mode { kTwoLayer, kCentralized };
enum class Schedule { kRoundRobin, kAsync };

std::string to_string(Controller c);
std::string to_string(Mode m);
std::string to_string(Schedule s);
Controller parse_controller(const std::string& s);
Mode parse_mode(const std::string& s);
Schedule parse_schedule(const std::string& s);
bool is_drl(Controller c);

struct ExperimentConfig {
  // scenario
  std::size_t n_sbs = 12;
  std::size_t n_users = 200;
  double area = 300.0;
  double cbr = 112000.0;  // bits/s per user
  int n_prb = 24;
  double prb_cap = 2.0;
  // controller
  Controller controller = Controller::kNoMlb;
  Mode mode = Mode::kTwoLayer;
  Schedule schedule = Schedule::kRoundRobin;
  // learning
  double gamma = 0.99;
  double tau = 0.001;
  std::size_t batch = 64;
  std::size_t replay = 100000;
  double actor_lr = 1e-4;
  double critic_lr = 1e-3;
  nn::OptimizerKind optimizer = nn::OptimizerKind::kAdam;
  std::uint64_t staleness = 10;
  std::vector<std::size_t> hidden{400, 300};
  double noise_sigma = 1.0;
  // run shape
  std::size_t seeds = 5;
  std::uint64_t first_seed = 1;
  std::size_t steps = 4000;
  std::size_t stage_length = 10000;
  std::size_t moving_window = 200;
  std::size_t final_window = 1000;
  bool safeguard = false;
  std::size_t stages = 5;
  std::size_t eval_horizon = 0;  // 0: one stage
  bool write_training_log = true;
  std::string out = "out";

  // Throws std::invalid_argument listing every bad field by name.
  void validate() const;

  agent::AgentConfig agent_config() const;
  env::ChannelParams channel() const;
};

// Flat "key = value" text, '#' starts a comment. Unknown keys and bad values
// are reported by name.
ExperimentConfig parse_config(std::istream& is, ExperimentConfig base = {});
ExperimentConfig load_config(const std::string& path, ExperimentConfig base = {});
void set_field(ExperimentConfig& c, const std::string& key, const std::string& value);
void write_config(std::ostream& os, const ExperimentConfig& c);

// ---- metrics ------------------------------------------------------------------------

struct MetricsSeries {
  std::vector<double> rewards;
  std::vector<double> max_loads;
  std::vector<double> load_stds;  // population std across SBSs, per step
  std::vector<int> ho_success;
  std::vector<int> ho_fail;
  std::vector<std::vector<double>> loads;  // per step, per SBS

  std::size_t size() const { return rewards.size(); }
  void append(const env::StepResult& r);
};

// Mean of the last `window` values at every t; the first entries average the
// available prefix.
std::vector<double> moving_average(std::span<const double> series, std::size_t window);
// Blocked over attempted handovers; 0 when nothing was attempted.
double hfr(const MetricsSeries& m);
double hfr(long long fails, long long successes);
double population_std(std::span<const double> values);
// Population std across SBSs, averaged over steps.
double load_std(std::span<const std::vector<double>> loads_per_step);
// (mean(controller) - mean(baseline)) / mean(baseline)
double normalized_gain(std::span<const double> controller, std::span<const double> baseline);
double mean(std::span<const double> v);
// Mean of the last `window` entries (all of them if shorter).
double tail_mean(std::span<const double> v, std::size_t window);

struct RunSummary {
  std::uint64_t seed = 0;
  Controller controller = Controller::kNoMlb;
  Mode mode = Mode::kTwoLayer;
  std::size_t steps = 0;
  double mean_reward = 0.0;
  double final_reward = 0.0;  // moving average over the final window at the last step
  double mean_max_load = 0.0;
  double final_max_load = 0.0;
  double hfr = 0.0;
  double load_std = 0.0;
  std::size_t num_clusters = 0;
};

RunSummary summarize(const MetricsSeries& m, const ExperimentConfig& c, std::uint64_t seed,
                     std::size_t num_clusters);

// ---- runs -----------------------------------------------------------------------------

struct SeedRun {
  RunSummary summary;
  MetricsSeries metrics;
  std::vector<std::vector<int>> clusters;  // clustering of the final stage
  std::vector<double> adopted_scores;      // safeguard runs only
  std::vector<std::string> decisions;      // safeguard runs only
  std::vector<double> online_scores;       // safeguard runs only
  std::vector<double> offline_scores;      // safeguard runs only
};

struct ExperimentResult {
  std::vector<SeedRun> runs;
};

// Scenario used for `seed` under this configuration.
env::Scenario build_scenario(const ExperimentConfig& c, std::uint64_t seed);

// Runs one seed. When `dir` is non-empty, per-seed CSVs go there.
SeedRun run_seed(const ExperimentConfig& c, std::uint64_t seed, const std::string& dir = {});

// Every seed, each in out/seed_<s>/, plus out/summary.csv and out/config.txt.
ExperimentResult run_experiment(const ExperimentConfig& c);

// "seed,controller,mode,steps,mean_reward,final_reward,mean_max_load,final_max_load,hfr,load_std,num_clusters"
void write_summary_csv(std::ostream& os, std::span<const RunSummary> rows);
// "step,reward,max_load,ho_success,ho_fail,load_std"
void write_steps_csv(std::ostream& os, const MetricsSeries& m);

}  // namespace udn::harness
