#include "udn/safeguard.hpp"

#include <ostream>
#include <stdexcept>

#include "udn/clustering.hpp"
#include "udn/csv.hpp"

namespace udn::safeguard {
namespace {

std::vector<std::vector<int>> branch_clusters(const env::Scenario& scenario,
                                              std::span<const double> avg_loads,
                                              const SafeguardOptions& options) {
  if (options.centralized) {
    std::vector<int> all(scenario.n_sbs());
    for (std::size_t i = 0; i < all.size(); ++i) all[i] = static_cast<int>(i);
    return {all};
  }
  return clustering::cluster_scenario(scenario, avg_loads, options.cluster_candidates)
      .best.clusters();
}

}  // namespace

double evaluate_policy(const agent::Policy& policy, const std::shared_ptr<const env::Scenario>& scenario,
                       const EvalProtocol& protocol) {
  if (protocol.horizon == 0) throw std::invalid_argument("evaluate_policy: horizon must be >= 1");
  if (protocol.seeds.empty()) throw std::invalid_argument("evaluate_policy: needs a seed");
  double total = 0.0;
  for (std::uint64_t seed : protocol.seeds) {
    env::NetworkState state(scenario, seed, protocol.mobility);
    double sum = 0.0;
    for (std::size_t t = 0; t < protocol.horizon; ++t)
      sum += state.step(agent::policy_action(policy, state)).reward;
    total += sum / static_cast<double>(protocol.horizon);
  }
  return total / static_cast<double>(protocol.seeds.size());
}

std::string to_string(Decision d) { return d == Decision::kSwap ? "SWAP" : "KEEP"; }

Decision stage_boundary(const StageRecord& record) {
  if (!record.online_score || !record.offline_score)
    throw std::invalid_argument("stage_boundary: both scores are required");
  return *record.offline_score > *record.online_score ? Decision::kSwap : Decision::kKeep;
}

void write_ledger_csv(std::ostream& os, std::span<const LedgerRow> rows) {
  csv::Writer w(os, {"stage", "online_score", "offline_score", "decision", "adopted_score"});
  for (const auto& r : rows)
    w.row(r.stage, r.online_score, r.offline_score, to_string(r.decision), r.adopted_score);
}

void SafeguardOptions::validate() const {
  if (stage_length == 0) throw std::invalid_argument("safeguard: stage_length must be >= 1");
  if (stages == 0) throw std::invalid_argument("safeguard: stages must be >= 1");
  if (eval.horizon == 0) throw std::invalid_argument("safeguard: evaluation horizon must be >= 1");
  trainer.agent.validate();
}

SafeguardRun run_safeguard(const std::shared_ptr<const env::Scenario>& scenario,
                           const SafeguardOptions& options, const StepObserver& on_step,
                           const StageObserver& on_stage) {
  options.validate();
  env::NetworkState live(scenario, options.online_seed, options.trainer.mobility);
  const std::vector<double> initial(live.loads().begin(), live.loads().end());
  agent::Trainer offline(scenario, branch_clusters(*scenario, initial, options), options.trainer);

  SafeguardRun run;  // online starts as noMLB
  std::size_t step = 0;
  for (std::size_t k = 0; k < options.stages; ++k) {
    clustering::LoadHistory history;
    history.stage_start = step;
    for (std::size_t t = 0; t < options.stage_length; ++t, ++step) {
      offline.step_round_robin();
      const auto result = live.step(agent::policy_action(run.online, live));
      history.append(result.metrics.loads);
      if (on_step) on_step(step, result);
    }

    StageRecord record{k, run.online, offline.policy(), std::nullopt, std::nullopt};
    record.online_score = evaluate_policy(record.online, scenario, options.eval);
    record.offline_score = evaluate_policy(record.offline, scenario, options.eval);
    LedgerRow row{k, *record.online_score, *record.offline_score, stage_boundary(record), 0.0};
    if (row.decision == Decision::kSwap) run.online = record.offline;
    row.adopted_score = row.decision == Decision::kSwap ? row.offline_score : row.online_score;
    run.ledger.push_back(row);
    if (on_stage) on_stage(row, run.online, record.offline);

    if (k + 1 < options.stages)
      offline.set_clusters(
          branch_clusters(*scenario, clustering::stage_averaged_load(history), options));
  }
  return run;
}

}  // namespace udn::safeguard
