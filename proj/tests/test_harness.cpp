#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "udn/csv.hpp"
#include "udn/harness.hpp"

using namespace udn;
using namespace udn::harness;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::ostringstream os;
  os << f.rdbuf();
  return os.str();
}

fs::path scratch(const std::string& name) {
  const auto p = fs::temp_directory_path() / ("udn_harness_" + name);
  fs::remove_all(p);
  return p;
}

ExperimentConfig small(Controller c, const fs::path& out) {
  ExperimentConfig cfg;
  cfg.n_sbs = 6;
  cfg.n_users = 60;
  cfg.area = 200.0;
  cfg.controller = c;
  cfg.seeds = 2;
  cfg.steps = 60;
  cfg.stage_length = 30;
  cfg.final_window = 20;
  cfg.hidden = {16, 8};
  cfg.batch = 8;
  cfg.replay = 500;
  cfg.out = out.string();
  return cfg;
}

// Every regular file below `dir`, relative path -> bytes.
std::map<std::string, std::string> tree(const fs::path& dir) {
  std::map<std::string, std::string> out;
  for (const auto& e : fs::recursive_directory_iterator(dir))
    if (e.is_regular_file()) out[fs::relative(e.path(), dir).string()] = slurp(e.path());
  return out;
}

}  // namespace

TEST_CASE("config: parse, comments and field-named errors") {
  std::istringstream is(
      "# experiment\n"
      "controller = drl-mbp\n"
      "mode=centralized   # trailing comment\n"
      "hidden = 32,16\n"
      "cbr = 64000\n"
      "optimizer = sgd\n");
  const auto c = parse_config(is);
  CHECK(c.controller == Controller::kDrlMbp);
  CHECK(c.mode == Mode::kCentralized);
  CHECK(c.hidden == std::vector<std::size_t>{32, 16});
  CHECK(c.cbr == 64000.0);
  CHECK(c.optimizer == nn::OptimizerKind::kPlain);

  std::ostringstream os;
  write_config(os, c);
  std::istringstream back(os.str());
  const auto d = parse_config(back);
  CHECK(d.controller == c.controller);
  CHECK(d.hidden == c.hidden);
  CHECK(d.cbr == c.cbr);

  ExperimentConfig e;
  CHECK_THROWS_WITH_AS(set_field(e, "bogus", "1"), doctest::Contains("bogus"), std::invalid_argument);
  CHECK_THROWS_WITH_AS(set_field(e, "gamma", "abc"), doctest::Contains("gamma"),
                       std::invalid_argument);
  CHECK_THROWS_WITH_AS(set_field(e, "controller", "magic"), doctest::Contains("controller"),
                       std::invalid_argument);
  std::istringstream noeq("steps 10\n");
  CHECK_THROWS_AS(parse_config(noeq), std::invalid_argument);

  e.gamma = 1.5;
  e.steps = 0;
  try {
    e.validate();
    FAIL("validate accepted a bad config");
  } catch (const std::invalid_argument& ex) {
    const std::string msg = ex.what();
    CHECK(msg.find("gamma") != std::string::npos);
    CHECK(msg.find("steps") != std::string::npos);
  }
  ExperimentConfig f;
  f.safeguard = true;
  CHECK_THROWS_WITH_AS(f.validate(), doctest::Contains("safeguard"), std::invalid_argument);
}

TEST_CASE("controller names round-trip") {
  for (auto c : {Controller::kNoMlb, Controller::kRuleStatic, Controller::kRuleAdaptive,
                 Controller::kQLearning, Controller::kDrlSbp, Controller::kDrlMbp})
    CHECK(parse_controller(to_string(c)) == c);
  CHECK(parse_mode("two-layer") == Mode::kTwoLayer);
  CHECK(parse_schedule("async") == Schedule::kAsync);
  CHECK_THROWS_AS(parse_mode("flat"), std::invalid_argument);
}

TEST_CASE("moving_average: identity at window 1, prefix mean for long windows") {
  const std::vector<double> x{3, 1, 4, 1, 5, 9, 2, 6};
  CHECK(moving_average(x, 1) == x);
  const auto p = moving_average(x, 100);
  double sum = 0.0;
  for (std::size_t t = 0; t < x.size(); ++t) {
    sum += x[t];
    CHECK(p[t] == doctest::Approx(sum / static_cast<double>(t + 1)).epsilon(1e-15));
  }
  const auto m = moving_average(x, 3);
  CHECK(m[1] == doctest::Approx(2.0));
  CHECK(m[4] == doctest::Approx((4.0 + 1.0 + 5.0) / 3.0));
  CHECK(m[7] == doctest::Approx((9.0 + 2.0 + 6.0) / 3.0));
}

TEST_CASE("normalized_gain, population_std and hfr") {
  const std::vector<double> base(10, 1.351), ctrl(10, 1.82), twice(10, 2.702);
  CHECK(normalized_gain(ctrl, base) == doctest::Approx(0.347).epsilon(1e-3));
  CHECK(normalized_gain(twice, base) == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(normalized_gain(base, base) == 0.0);
  CHECK_THROWS_AS(normalized_gain(std::vector<double>(9, 1.0), base), std::invalid_argument);

  CHECK(population_std(std::vector<double>{2, 4, 4, 4, 5, 5, 7, 9}) == doctest::Approx(2.0));
  CHECK(population_std(std::vector<double>{0.3}) == 0.0);
  CHECK(hfr(1, 3) == doctest::Approx(0.25));
  CHECK(hfr(0, 0) == 0.0);
}

TEST_CASE("noMLB run: summary matches the per-step CSV and no learning artifacts") {
  const auto out = scratch("nomlb");
  const auto cfg = small(Controller::kNoMlb, out);
  const auto res = run_experiment(cfg);
  REQUIRE(res.runs.size() == 2);
  const auto summary = csv::read_file((out / "summary.csv").string());
  CHECK(summary.header ==
        std::vector<std::string>{"seed", "controller", "mode", "steps", "mean_reward",
                                 "final_reward", "mean_max_load", "final_max_load", "hfr",
                                 "load_std", "num_clusters"});
  REQUIRE(summary.rows.size() == 2);
  for (std::size_t r = 0; r < 2; ++r) {
    const auto dir = out / ("seed_" + summary.rows[r][0]);
    CHECK(fs::exists(dir / "steps.csv"));
    CHECK_FALSE(fs::exists(dir / "training.csv"));
    CHECK_FALSE(fs::exists(dir / "policy_stage_0.txt"));
    const auto steps = csv::read_file((dir / "steps.csv").string());
    REQUIRE(steps.rows.size() == cfg.steps);
    MetricsSeries m;
    std::vector<double> rewards, max_loads, stds;
    long long ok = 0, fail = 0;
    for (std::size_t t = 0; t < steps.rows.size(); ++t) {
      CHECK(steps.number(t, "step") == static_cast<double>(t));
      rewards.push_back(steps.number(t, "reward"));
      max_loads.push_back(steps.number(t, "max_load"));
      stds.push_back(steps.number(t, "load_std"));
      ok += static_cast<long long>(steps.number(t, "ho_success"));
      fail += static_cast<long long>(steps.number(t, "ho_fail"));
    }
    CHECK(summary.number(r, "mean_reward") == mean(rewards));
    CHECK(summary.number(r, "final_reward") == tail_mean(rewards, cfg.final_window));
    CHECK(summary.number(r, "mean_max_load") == mean(max_loads));
    CHECK(summary.number(r, "final_max_load") == tail_mean(max_loads, cfg.final_window));
    CHECK(summary.number(r, "load_std") == mean(stds));
    CHECK(summary.number(r, "hfr") == hfr(fail, ok));
    CHECK(summary.number(r, "mean_max_load") > 0.0);
  }
  fs::remove_all(out);
}

TEST_CASE("fixed seed reruns are byte-identical") {
  for (auto c : {Controller::kRuleAdaptive, Controller::kQLearning, Controller::kDrlMbp}) {
    const auto a = scratch("det_a"), b = scratch("det_b");
    auto cfg = small(c, a);
    cfg.seeds = 1;
    run_experiment(cfg);
    cfg.out = b.string();
    run_experiment(cfg);
    auto ta = tree(a), tb = tree(b);
    ta.erase("config.txt");
    tb.erase("config.txt");
    CHECK(ta.size() > 1);
    CHECK(ta == tb);
    fs::remove_all(a);
    fs::remove_all(b);
  }
}

TEST_CASE("DRL-MBP and DRL-SBP summaries share a schema row for row") {
  const auto a = scratch("mbp"), b = scratch("sbp");
  run_experiment(small(Controller::kDrlMbp, a));
  run_experiment(small(Controller::kDrlSbp, b));
  const auto sa = csv::read_file((a / "summary.csv").string());
  const auto sb = csv::read_file((b / "summary.csv").string());
  CHECK(sa.header == sb.header);
  REQUIRE(sa.rows.size() == sb.rows.size());
  for (std::size_t r = 0; r < sa.rows.size(); ++r) CHECK(sa.rows[r][0] == sb.rows[r][0]);
  const auto ta = csv::read_file((a / "seed_1" / "training.csv").string());
  const auto tb = csv::read_file((b / "seed_1" / "training.csv").string());
  CHECK(ta.header == tb.header);
  CHECK(fs::exists(a / "seed_1" / "clustering.csv"));
  CHECK(fs::exists(a / "seed_1" / "policy_stage_1.txt"));
  fs::remove_all(a);
  fs::remove_all(b);
}

TEST_CASE("safeguarded run writes a stage ledger") {
  const auto out = scratch("sg");
  auto cfg = small(Controller::kDrlMbp, out);
  cfg.seeds = 1;
  cfg.safeguard = true;
  cfg.stages = 3;
  cfg.stage_length = 20;
  cfg.eval_horizon = 15;
  const auto res = run_experiment(cfg);
  const auto ledger = csv::read_file((out / "seed_1" / "stages.csv").string());
  REQUIRE(ledger.rows.size() == 3);
  for (std::size_t k = 1; k < 3; ++k)
    CHECK(ledger.number(k, "adopted_score") >= ledger.number(k - 1, "adopted_score"));
  CHECK(res.runs[0].metrics.size() == 60);
  fs::remove_all(out);
}
