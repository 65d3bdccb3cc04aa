#pragma once

// Comparison controllers: two load-difference rules that walk the CIOs of
// neighboring SBS pairs, a tabular Q-learner around the most overloaded SBS,
// and the no-op noMLB policy.

#include <cstddef>
#include <map>
#include <random>
#include <span>
#include <utility>
#include <vector>

#include "udn/env.hpp"

namespace udn::baselines {

using env::CioMatrix;

// Unordered SBS pairs (i < j), kept in lexicographic order.
using PairList = std::vector<std::pair<int, int>>;

PairList all_pairs(std::size_t n_sbs);
// Pairs whose two SBSs share a cluster.
PairList pairs_within(std::span<const std::vector<int>> clusters);
// Each SBS with its k nearest SBSs (pairs deduplicated).
PairList nearest_pairs(std::span<const env::Vec2> positions, std::size_t k);

// For every SBS, the ids of its k nearest other SBSs, closest first (ties to lower id).
std::vector<std::vector<int>> nearest_neighbors(std::span<const env::Vec2> positions,
                                                std::size_t k);

struct RuleParams {
  double dead_zone = 0.1;        // |load_i - load_j| at or below this is left alone
  double static_step_db = 1.0;
  double adaptive_gain = 10.0;   // dB per unit of load difference
  double adaptive_min_db = 0.5;
  double adaptive_max_db = 3.0;
};

// Walks O_ij down by a fixed step when SBS i carries more than the dead zone
// above SBS j (and symmetrically), clamped to the bounds.
CioMatrix rule_static(std::span<const double> loads, const CioMatrix& cio, const PairList& pairs,
                      const RuleParams& params = {});
// Same walk with step clamp(gain * load difference, min, max).
CioMatrix rule_adaptive(std::span<const double> loads, const CioMatrix& cio, const PairList& pairs,
                        const RuleParams& params = {});

CioMatrix no_mlb(const CioMatrix& cio);

// ---- tabular Q-learning ------------------------------------------------------

struct QLearningParams {
  double epsilon = 0.1;
  double alpha = 0.5;
  double gamma = 0.99;
  double bin_width = 0.1;
  int max_bin = 20;          // loads beyond max_bin * bin_width share the top bin
  std::size_t neighbors = 6;
  double step_db = 1.0;
};

// Discretized view: the most overloaded SBS, its nearest neighbors, and the
// load bins of all of them. The key is {target, bin(target), bin(n_1), ...}.
struct QObservation {
  int target = 0;
  std::vector<int> neighbors;
  std::vector<int> key;
};

class QTable {
 public:
  explicit QTable(QLearningParams params = {}) : params_(params) {}

  const QLearningParams& params() const { return params_; }
  // Unseen entries read as zero.
  double value(const std::vector<int>& key, std::size_t action) const;
  void set(const std::vector<int>& key, std::size_t action, double v);
  double max_value(const std::vector<int>& key, std::size_t n_actions) const;
  // Highest-valued action, ties to the first in enumeration order.
  std::size_t greedy(const std::vector<int>& key, std::size_t n_actions) const;
  std::size_t entries() const;

 private:
  QLearningParams params_;
  std::map<std::vector<int>, std::vector<double>> table_;
};

// 3^k joint actions over k neighbor links.
std::size_t action_count(std::size_t links);
// Per-link step in {-1, 0, +1}; link 0 is the least significant base-3 digit,
// so action 0 is "all -1".
std::vector<int> decode_action(std::size_t action, std::size_t links);

QObservation q_observe(std::span<const double> loads,
                       std::span<const std::vector<int>> neighbor_table,
                       const QLearningParams& params);

// Adds step_db * decode_action(a)[k] to O_{target, neighbor_k}, clamped.
CioMatrix apply_q_action(const CioMatrix& cio, const QObservation& obs, std::size_t action,
                         double step_db);

struct QDecision {
  QObservation observation;
  std::size_t action = 0;
  CioMatrix cio;
};

// Epsilon-greedy choice around the most overloaded SBS.
QDecision qlearning_act(const QTable& table, std::span<const double> loads, const CioMatrix& cio,
                        std::span<const std::vector<int>> neighbor_table, std::mt19937_64& rng);

// Q(s,a) += alpha * (r + gamma * max_a' Q(s',a') - Q(s,a)); the bootstrap term
// is dropped when `terminal` is set.
void qlearning_update(QTable& table, const QObservation& s, std::size_t action, double reward,
                      const QObservation& next, bool terminal = false);

}  // namespace udn::baselines
