// Command-line driver: seeded experiment runs, the staged safeguard run,
// scenario generation and one-shot clustering.

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <numeric>

#include "udn/clustering.hpp"
#include "udn/harness.hpp"

using namespace udn;

namespace {

struct Common {
  std::string config;
  std::string controller;
  std::string mode;
  std::string schedule;
  std::size_t seeds = 0;
  std::uint64_t first_seed = 0;
  std::size_t steps = 0;
  double cbr = -1.0;
  std::size_t n_sbs = 0;
  std::size_t n_users = 0;
  std::string out;
  std::vector<std::string> sets;
};

void add_common(CLI::App* app, Common& c) {
  app->add_option("--config", c.config, "key = value configuration file");
  app->add_option("--controller", c.controller,
                  "nomlb | rule-static | rule-adaptive | qlearning | drl-sbp | drl-mbp");
  app->add_option("--mode", c.mode, "two-layer | centralized");
  app->add_option("--schedule", c.schedule, "round-robin | async");
  app->add_option("--seeds", c.seeds, "number of seeds");
  app->add_option("--first-seed", c.first_seed, "first seed");
  app->add_option("--steps", c.steps, "steps per seed");
  app->add_option("--cbr", c.cbr, "constant bit rate per user (bit/s)");
  app->add_option("--n-sbs", c.n_sbs, "number of SBSs");
  app->add_option("--n-users", c.n_users, "number of users");
  app->add_option("--out", c.out, "output directory");
  app->add_option("--set", c.sets, "extra key=value override (repeatable)");
}

harness::ExperimentConfig resolve(const Common& c) {
  harness::ExperimentConfig cfg;
  if (!c.config.empty()) cfg = harness::load_config(c.config, cfg);
  if (!c.controller.empty()) cfg.controller = harness::parse_controller(c.controller);
  if (!c.mode.empty()) cfg.mode = harness::parse_mode(c.mode);
  if (!c.schedule.empty()) cfg.schedule = harness::parse_schedule(c.schedule);
  if (c.seeds) cfg.seeds = c.seeds;
  if (c.first_seed) cfg.first_seed = c.first_seed;
  if (c.steps) cfg.steps = c.steps;
  if (c.cbr >= 0.0) cfg.cbr = c.cbr;
  if (c.n_sbs) cfg.n_sbs = c.n_sbs;
  if (c.n_users) cfg.n_users = c.n_users;
  if (!c.out.empty()) cfg.out = c.out;
  for (const auto& kv : c.sets) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) throw std::invalid_argument("--set expects key=value, got '" + kv + "'");
    harness::set_field(cfg, kv.substr(0, eq), kv.substr(eq + 1));
  }
  cfg.validate();
  return cfg;
}

void print_summary(const harness::ExperimentResult& r) {
  std::vector<harness::RunSummary> rows;
  for (const auto& run : r.runs) rows.push_back(run.summary);
  harness::write_summary_csv(std::cout, rows);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Load balancing in ultra-dense networks: experiments and tools"};
  app.require_subcommand(1);

  Common run_opts;
  auto* run = app.add_subcommand("run", "run a controller over seeds and write CSVs");
  add_common(run, run_opts);

  Common sg_opts;
  std::size_t stages = 0;
  std::size_t stage_length = 0;
  auto* sg = app.add_subcommand("safeguard", "staged run with offline evaluation and policy swap");
  add_common(sg, sg_opts);
  sg->add_option("--stages", stages, "number of stages");
  sg->add_option("--stage-length", stage_length, "steps per stage");

  Common sc_opts;
  std::uint64_t sc_seed = 1;
  std::string sc_file;
  auto* sc = app.add_subcommand("scenario", "generate a scenario and print it");
  add_common(sc, sc_opts);
  sc->add_option("--seed", sc_seed, "scenario seed");
  sc->add_option("--file", sc_file, "write to this file instead of stdout");

  Common cl_opts;
  std::uint64_t cl_seed = 1;
  auto* cl = app.add_subcommand("cluster", "cluster a scenario by its initial loads");
  add_common(cl, cl_opts);
  cl->add_option("--seed", cl_seed, "scenario seed");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run) {
      const auto cfg = resolve(run_opts);
      print_summary(harness::run_experiment(cfg));
    } else if (*sg) {
      auto cfg = resolve(sg_opts);
      cfg.safeguard = true;
      if (stages) cfg.stages = stages;
      if (stage_length) cfg.stage_length = stage_length;
      if (!harness::is_drl(cfg.controller)) cfg.controller = harness::Controller::kDrlMbp;
      cfg.validate();
      print_summary(harness::run_experiment(cfg));
    } else if (*sc) {
      const auto cfg = resolve(sc_opts);
      const auto scenario = harness::build_scenario(cfg, sc_seed);
      if (sc_file.empty()) {
        env::write_scenario(std::cout, scenario);
      } else {
        std::ofstream f(sc_file);
        if (!f) throw std::runtime_error("cannot write " + sc_file);
        env::write_scenario(f, scenario);
      }
    } else if (*cl) {
      const auto cfg = resolve(cl_opts);
      auto scenario = std::make_shared<const env::Scenario>(harness::build_scenario(cfg, cl_seed));
      env::NetworkState state(scenario, cl_seed);
      const auto sel = clustering::cluster_scenario(*scenario, state.loads());
      clustering::write_candidates_csv(std::cout, sel);
      std::cout << '\n';
      clustering::write_assignment_csv(std::cout, sel.best);
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
