#include "udn/clustering.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <ostream>
#include <stdexcept>

namespace udn::clustering {
namespace {

double sq_dist(Vec2 a, Vec2 b) {
  const double dx = a.x - b.x;
  const double dy = a.y - b.y;
  return dx * dx + dy * dy;
}

std::vector<int> assign_nearest(std::span<const Vec2> positions, std::span<const Vec2> centroids) {
  std::vector<int> membership(positions.size(), 0);
  for (std::size_t i = 0; i < positions.size(); ++i) {
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t h = 0; h < centroids.size(); ++h) {
      const double d = sq_dist(positions[i], centroids[h]);
      if (d < best) {
        best = d;
        membership[i] = static_cast<int>(h);
      }
    }
  }
  return membership;
}

// Moves the point farthest from its own centroid into each empty cluster.
void repair_empty(std::span<const Vec2> positions, std::vector<int>& membership,
                  std::vector<Vec2>& centroids) {
  const std::size_t k = centroids.size();
  for (std::size_t h = 0; h < k; ++h) {
    std::vector<std::size_t> counts(k, 0);
    for (int m : membership) ++counts[static_cast<std::size_t>(m)];
    if (counts[h] > 0) continue;
    std::size_t pick = positions.size();
    double far = -1.0;
    for (std::size_t i = 0; i < positions.size(); ++i) {
      const auto owner = static_cast<std::size_t>(membership[i]);
      if (counts[owner] < 2) continue;
      const double d = sq_dist(positions[i], centroids[owner]);
      if (d > far) {
        far = d;
        pick = i;
      }
    }
    if (pick == positions.size()) throw std::logic_error("k-means: cannot repair empty cluster");
    membership[pick] = static_cast<int>(h);
    centroids[h] = positions[pick];
  }
}

std::vector<Vec2> cluster_means(std::span<const Vec2> positions, std::span<const int> membership,
                                std::size_t k) {
  std::vector<Vec2> sums(k);
  std::vector<std::size_t> counts(k, 0);
  for (std::size_t i = 0; i < positions.size(); ++i) {
    const auto h = static_cast<std::size_t>(membership[i]);
    sums[h].x += positions[i].x;
    sums[h].y += positions[i].y;
    ++counts[h];
  }
  for (std::size_t h = 0; h < k; ++h) {
    sums[h].x /= static_cast<double>(counts[h]);
    sums[h].y /= static_cast<double>(counts[h]);
  }
  return sums;
}

}  // namespace

void LoadHistory::append(std::span<const double> loads) {
  if (series.empty()) series.resize(loads.size());
  if (loads.size() != series.size()) throw std::invalid_argument("LoadHistory: width mismatch");
  for (std::size_t i = 0; i < loads.size(); ++i) series[i].push_back(loads[i]);
}

void LoadHistory::validate() const {
  if (series.empty() || series.front().empty())
    throw std::invalid_argument("LoadHistory: empty history");
  for (const auto& s : series) {
    if (s.size() != series.front().size())
      throw std::invalid_argument("LoadHistory: ragged series");
    for (double v : s)
      if (!(v >= 0.0)) throw std::invalid_argument("LoadHistory: negative or NaN load");
  }
}

std::vector<int> ClusterAssignment::members(std::size_t h) const {
  std::vector<int> out;
  for (std::size_t i = 0; i < membership.size(); ++i)
    if (membership[i] == static_cast<int>(h)) out.push_back(static_cast<int>(i));
  return out;
}

std::vector<std::vector<int>> ClusterAssignment::clusters() const {
  std::vector<std::vector<int>> out(num_clusters);
  for (std::size_t i = 0; i < membership.size(); ++i)
    out[static_cast<std::size_t>(membership[i])].push_back(static_cast<int>(i));
  return out;
}

std::vector<double> stage_averaged_load(const LoadHistory& history) {
  history.validate();
  std::vector<double> avg;
  avg.reserve(history.n_sbs());
  for (const auto& s : history.series)
    avg.push_back(std::accumulate(s.begin(), s.end(), 0.0) / static_cast<double>(s.size()));
  return avg;
}

std::vector<Vec2> init_centroids(std::span<const double> avg_loads, std::span<const Vec2> positions,
                                 std::size_t num_clusters) {
  if (avg_loads.size() != positions.size())
    throw std::invalid_argument("init_centroids: loads/positions size mismatch");
  if (num_clusters == 0 || num_clusters > positions.size())
    throw std::invalid_argument("init_centroids: cluster count must be in [1, N]");
  std::vector<std::size_t> order(positions.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return avg_loads[a] > avg_loads[b]; });
  std::vector<Vec2> out;
  out.reserve(num_clusters);
  for (std::size_t h = 0; h < num_clusters; ++h) out.push_back(positions[order[h]]);
  return out;
}

double sum_squared_error(std::span<const Vec2> positions, std::span<const int> membership,
                         std::span<const Vec2> centroids) {
  double sse = 0.0;
  for (std::size_t i = 0; i < positions.size(); ++i)
    sse += sq_dist(positions[i], centroids[static_cast<std::size_t>(membership[i])]);
  return sse;
}

ClusterAssignment run_kmeans(std::span<const Vec2> positions, std::span<const Vec2> initial_centroids,
                             KMeansOptions options) {
  if (initial_centroids.empty()) throw std::invalid_argument("run_kmeans: no centroids");
  if (initial_centroids.size() > positions.size())
    throw std::invalid_argument("run_kmeans: more centroids than points");

  ClusterAssignment a;
  a.num_clusters = initial_centroids.size();
  a.centroids.assign(initial_centroids.begin(), initial_centroids.end());
  for (std::size_t it = 0; it < options.max_iterations; ++it) {
    a.membership = assign_nearest(positions, a.centroids);
    repair_empty(positions, a.membership, a.centroids);
    auto next = cluster_means(positions, a.membership, a.num_clusters);
    a.sse_trace.push_back(sum_squared_error(positions, a.membership, next));
    ++a.iterations;
    const bool unchanged = next == a.centroids;
    a.centroids = std::move(next);
    if (unchanged) break;
  }
  return a;
}

double calinski_harabasz(const ClusterAssignment& assignment, std::span<const Vec2> positions) {
  const std::size_t n = positions.size();
  const std::size_t k = assignment.num_clusters;
  if (k < 2 || k >= n)
    throw std::invalid_argument("calinski_harabasz: needs 1 < H < N");
  const auto centroids = cluster_means(positions, assignment.membership, k);
  Vec2 overall;
  for (const auto& p : positions) {
    overall.x += p.x;
    overall.y += p.y;
  }
  overall.x /= static_cast<double>(n);
  overall.y /= static_cast<double>(n);

  std::vector<std::size_t> counts(k, 0);
  for (int m : assignment.membership) ++counts[static_cast<std::size_t>(m)];
  double ssb = 0.0;
  for (std::size_t h = 0; h < k; ++h)
    ssb += static_cast<double>(counts[h]) * sq_dist(centroids[h], overall);
  const double ssw = sum_squared_error(positions, assignment.membership, centroids);
  if (ssw == 0.0) return std::numeric_limits<double>::infinity();
  return (ssb / static_cast<double>(k - 1)) / (ssw / static_cast<double>(n - k));
}

Selection select_num_clusters(std::span<const Vec2> positions, std::span<const double> avg_loads,
                              std::span<const std::size_t> candidates, KMeansOptions options) {
  if (candidates.empty()) throw std::invalid_argument("select_num_clusters: empty range");
  Selection sel;
  double best = -std::numeric_limits<double>::infinity();
  for (std::size_t h : candidates) {
    if (h < 2 || h + 1 > positions.size())
      throw std::invalid_argument("select_num_clusters: candidate outside {2..N-1}");
    auto a = run_kmeans(positions, init_centroids(avg_loads, positions, h), options);
    const double score = calinski_harabasz(a, positions);
    sel.candidates.push_back({h, score});
    // Strictly greater keeps the smaller H on ties when candidates are ascending.
    if (score > best || (score == best && h < sel.best.num_clusters)) {
      best = score;
      sel.best = std::move(a);
    }
  }
  return sel;
}

std::vector<std::size_t> default_cluster_range(std::size_t n_sbs) {
  std::vector<std::size_t> out;
  for (std::size_t h = 2; h <= std::min<std::size_t>(6, n_sbs - 1) && n_sbs >= 3; ++h)
    out.push_back(h);
  return out;
}

void write_assignment_csv(std::ostream& os, const ClusterAssignment& a) {
  os << "sbs_id,cluster_index\n";
  for (std::size_t i = 0; i < a.membership.size(); ++i) os << i << "," << a.membership[i] << "\n";
}

void write_candidates_csv(std::ostream& os, const Selection& s) {
  os << "num_clusters,ch_score,selected\n";
  const auto old = os.precision(17);
  for (const auto& c : s.candidates)
    os << c.num_clusters << "," << c.score << ","
       << (c.num_clusters == s.best.num_clusters ? 1 : 0) << "\n";
  os.precision(old);
}

std::vector<Vec2> sbs_positions(const env::Scenario& scenario) {
  std::vector<Vec2> out;
  out.reserve(scenario.n_sbs());
  for (const auto& c : scenario.sbs_list) out.push_back(c.position);
  return out;
}

Selection cluster_scenario(const env::Scenario& scenario, std::span<const double> avg_loads,
                           std::span<const std::size_t> candidates) {
  const auto positions = sbs_positions(scenario);
  if (positions.size() < 3) {
    Selection sel;
    sel.best = run_kmeans(positions, std::span<const Vec2>(positions.data(), 1));
    return sel;
  }
  if (candidates.empty()) {
    const auto range = default_cluster_range(positions.size());
    return select_num_clusters(positions, avg_loads, range);
  }
  return select_num_clusters(positions, avg_loads, candidates);
}

}  // namespace udn::clustering
