#pragma once

// Offline-evaluation safeguard: an offline branch keeps learning while the
// online branch runs the deployed policy; at every stage boundary both
// policies are scored on the same seeded replicas and the online policy is
// replaced only by a strictly better one.

#include <cstddef>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "udn/agent.hpp"
#include "udn/env.hpp"

namespace udn::safeguard {

struct EvalProtocol {
  std::size_t horizon = 10000;
  std::vector<std::uint64_t> seeds{9001, 9002, 9003};  // mobility seeds of the replicas
  env::MobilityOptions mobility;
};

// Mean per-step reward of the deterministic policy over every seeded replica.
double evaluate_policy(const agent::Policy& policy, const std::shared_ptr<const env::Scenario>& scenario,
                       const EvalProtocol& protocol);

enum class Decision { kKeep, kSwap };
std::string to_string(Decision d);

struct StageRecord {
  std::size_t stage = 0;
  agent::Policy online;
  agent::Policy offline;
  std::optional<double> online_score;
  std::optional<double> offline_score;
};

// SWAP iff the offline score is strictly higher. Throws on a missing score.
Decision stage_boundary(const StageRecord& record);

struct LedgerRow {
  std::size_t stage = 0;
  double online_score = 0.0;
  double offline_score = 0.0;
  Decision decision = Decision::kKeep;
  double adopted_score = 0.0;  // score of the online policy after the decision
};

// "stage,online_score,offline_score,decision,adopted_score"
void write_ledger_csv(std::ostream& os, std::span<const LedgerRow> rows);

struct SafeguardOptions {
  std::size_t stage_length = 10000;
  std::size_t stages = 5;
  EvalProtocol eval;
  agent::TrainerOptions trainer;
  std::uint64_t online_seed = 1;  // mobility seed of the live network
  std::vector<std::size_t> cluster_candidates;  // empty: default range
  bool centralized = false;

  void validate() const;
};

struct SafeguardRun {
  std::vector<LedgerRow> ledger;
  agent::Policy online;  // policy deployed at the end
};

// Called after every live step and after every stage decision.
using StepObserver = std::function<void(std::size_t step, const env::StepResult& result)>;
using StageObserver = std::function<void(const LedgerRow& row, const agent::Policy& online,
                                         const agent::Policy& offline)>;

// Runs both branches for options.stages stages. The online branch starts on
// noMLB; the offline branch re-clusters from the live loads of every stage.
SafeguardRun run_safeguard(const std::shared_ptr<const env::Scenario>& scenario,
                           const SafeguardOptions& options, const StepObserver& on_step = {},
                           const StageObserver& on_stage = {});

}  // namespace udn::safeguard
