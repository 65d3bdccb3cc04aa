#include "udn/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <stdexcept>

namespace udn::baselines {
namespace {

double sq_dist(env::Vec2 a, env::Vec2 b) {
  const double dx = a.x - b.x;
  const double dy = a.y - b.y;
  return dx * dx + dy * dy;
}

template <typename StepFn>
CioMatrix walk_pairs(std::span<const double> loads, const CioMatrix& cio, const PairList& pairs,
                     double dead_zone, StepFn step_for) {
  if (loads.size() != cio.size()) throw std::invalid_argument("rule: loads/CIO size mismatch");
  CioMatrix out = cio;
  for (const auto& [a, b] : pairs) {
    const auto i = static_cast<std::size_t>(a);
    const auto j = static_cast<std::size_t>(b);
    const double diff = loads[i] - loads[j];
    if (diff > dead_zone) {
      out.set_clamped(i, j, out(i, j) - step_for(diff));
    } else if (-diff > dead_zone) {
      out.set_clamped(j, i, out(j, i) - step_for(-diff));
    }
  }
  return out;
}

}  // namespace

PairList all_pairs(std::size_t n_sbs) {
  PairList out;
  for (std::size_t i = 0; i < n_sbs; ++i)
    for (std::size_t j = i + 1; j < n_sbs; ++j)
      out.emplace_back(static_cast<int>(i), static_cast<int>(j));
  return out;
}

PairList pairs_within(std::span<const std::vector<int>> clusters) {
  std::set<std::pair<int, int>> unique;
  for (const auto& c : clusters)
    for (std::size_t a = 0; a < c.size(); ++a)
      for (std::size_t b = a + 1; b < c.size(); ++b)
        unique.emplace(std::min(c[a], c[b]), std::max(c[a], c[b]));
  return {unique.begin(), unique.end()};
}

std::vector<std::vector<int>> nearest_neighbors(std::span<const env::Vec2> positions,
                                                std::size_t k) {
  const std::size_t n = positions.size();
  std::vector<std::vector<int>> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<int> others;
    for (std::size_t j = 0; j < n; ++j)
      if (j != i) others.push_back(static_cast<int>(j));
    std::stable_sort(others.begin(), others.end(), [&](int a, int b) {
      return sq_dist(positions[i], positions[static_cast<std::size_t>(a)]) <
             sq_dist(positions[i], positions[static_cast<std::size_t>(b)]);
    });
    others.resize(std::min(k, others.size()));
    out[i] = std::move(others);
  }
  return out;
}

PairList nearest_pairs(std::span<const env::Vec2> positions, std::size_t k) {
  std::set<std::pair<int, int>> unique;
  const auto table = nearest_neighbors(positions, k);
  for (std::size_t i = 0; i < table.size(); ++i)
    for (int j : table[i])
      unique.emplace(std::min(static_cast<int>(i), j), std::max(static_cast<int>(i), j));
  return {unique.begin(), unique.end()};
}

CioMatrix rule_static(std::span<const double> loads, const CioMatrix& cio, const PairList& pairs,
                      const RuleParams& params) {
  return walk_pairs(loads, cio, pairs, params.dead_zone,
                    [&](double) { return params.static_step_db; });
}

CioMatrix rule_adaptive(std::span<const double> loads, const CioMatrix& cio, const PairList& pairs,
                        const RuleParams& params) {
  return walk_pairs(loads, cio, pairs, params.dead_zone, [&](double diff) {
    return std::clamp(params.adaptive_gain * diff, params.adaptive_min_db, params.adaptive_max_db);
  });
}

CioMatrix no_mlb(const CioMatrix& cio) { return CioMatrix(cio.size(), cio.bounds()); }

// ---- tabular Q-learning ------------------------------------------------------

double QTable::value(const std::vector<int>& key, std::size_t action) const {
  const auto it = table_.find(key);
  if (it == table_.end() || action >= it->second.size()) return 0.0;
  return it->second[action];
}

void QTable::set(const std::vector<int>& key, std::size_t action, double v) {
  if (!std::isfinite(v)) throw std::invalid_argument("QTable: non-finite value");
  auto& row = table_[key];
  if (row.size() <= action) row.resize(action + 1, 0.0);
  row[action] = v;
}

double QTable::max_value(const std::vector<int>& key, std::size_t n_actions) const {
  return value(key, greedy(key, n_actions));
}

std::size_t QTable::greedy(const std::vector<int>& key, std::size_t n_actions) const {
  const auto it = table_.find(key);
  if (it == table_.end()) return 0;
  std::size_t best = 0;
  double best_v = value(key, 0);
  for (std::size_t a = 1; a < n_actions; ++a) {
    const double v = a < it->second.size() ? it->second[a] : 0.0;
    if (v > best_v) {
      best_v = v;
      best = a;
    }
  }
  return best;
}

std::size_t QTable::entries() const {
  std::size_t n = 0;
  for (const auto& [key, row] : table_) n += row.size();
  return n;
}

std::size_t action_count(std::size_t links) {
  std::size_t n = 1;
  for (std::size_t i = 0; i < links; ++i) n *= 3;
  return n;
}

std::vector<int> decode_action(std::size_t action, std::size_t links) {
  if (action >= action_count(links)) throw std::out_of_range("decode_action: action out of range");
  std::vector<int> steps(links);
  for (std::size_t k = 0; k < links; ++k) {
    steps[k] = static_cast<int>(action % 3) - 1;
    action /= 3;
  }
  return steps;
}

QObservation q_observe(std::span<const double> loads,
                       std::span<const std::vector<int>> neighbor_table,
                       const QLearningParams& params) {
  if (loads.empty() || loads.size() != neighbor_table.size())
    throw std::invalid_argument("q_observe: loads/neighbor table size mismatch");
  auto bin = [&](double load) {
    return std::min(static_cast<int>(std::floor(load / params.bin_width)), params.max_bin);
  };
  QObservation obs;
  obs.target = static_cast<int>(std::max_element(loads.begin(), loads.end()) - loads.begin());
  const auto& nb = neighbor_table[static_cast<std::size_t>(obs.target)];
  obs.neighbors.assign(nb.begin(),
                       nb.begin() + static_cast<std::ptrdiff_t>(std::min(params.neighbors, nb.size())));
  obs.key = {obs.target, bin(loads[static_cast<std::size_t>(obs.target)])};
  for (int j : obs.neighbors) obs.key.push_back(bin(loads[static_cast<std::size_t>(j)]));
  return obs;
}

CioMatrix apply_q_action(const CioMatrix& cio, const QObservation& obs, std::size_t action,
                         double step_db) {
  CioMatrix out = cio;
  const auto steps = decode_action(action, obs.neighbors.size());
  const auto t = static_cast<std::size_t>(obs.target);
  for (std::size_t k = 0; k < steps.size(); ++k) {
    const auto j = static_cast<std::size_t>(obs.neighbors[k]);
    out.set_clamped(t, j, out(t, j) + step_db * steps[k]);
  }
  return out;
}

QDecision qlearning_act(const QTable& table, std::span<const double> loads, const CioMatrix& cio,
                        std::span<const std::vector<int>> neighbor_table, std::mt19937_64& rng) {
  const auto& p = table.params();
  QDecision d;
  d.observation = q_observe(loads, neighbor_table, p);
  const std::size_t n_actions = action_count(d.observation.neighbors.size());
  std::uniform_real_distribution<double> coin(0.0, 1.0);
  if (coin(rng) < p.epsilon) {
    d.action = std::uniform_int_distribution<std::size_t>(0, n_actions - 1)(rng);
  } else {
    d.action = table.greedy(d.observation.key, n_actions);
  }
  d.cio = apply_q_action(cio, d.observation, d.action, p.step_db);
  return d;
}

void qlearning_update(QTable& table, const QObservation& s, std::size_t action, double reward,
                      const QObservation& next, bool terminal) {
  if (!std::isfinite(reward)) throw std::invalid_argument("qlearning_update: non-finite reward");
  const auto& p = table.params();
  const double bootstrap =
      terminal ? 0.0 : table.max_value(next.key, action_count(next.neighbors.size()));
  const double q = table.value(s.key, action);
  table.set(s.key, action, q + p.alpha * (reward + p.gamma * bootstrap - q));
}

}  // namespace udn::baselines
