#pragma once

// Top-layer, load-driven clustering of SBSs: rank cells by their load over the
// previous stage, seed k-means with the most loaded cells, group by location,
// and pick the cluster count by the Calinski-Harabasz index.

#include <cstddef>
#include <iosfwd>
#include <span>
#include <vector>

#include "udn/env.hpp"

namespace udn::clustering {

using env::Vec2;

// Per-SBS load series over one stage; series[i][t] is SBS i at stage step t.
struct LoadHistory {
  std::vector<std::vector<double>> series;
  std::size_t stage_start = 0;

  std::size_t n_sbs() const { return series.size(); }
  std::size_t length() const { return series.empty() ? 0 : series.front().size(); }
  void append(std::span<const double> loads);
  void validate() const;
};

struct ClusterAssignment {
  std::size_t num_clusters = 0;
  std::vector<int> membership;  // SBS id -> cluster index
  std::vector<Vec2> centroids;
  std::vector<double> sse_trace;  // SSE after every assignment pass
  std::size_t iterations = 0;

  // Members of cluster h in ascending SBS id order.
  std::vector<int> members(std::size_t h) const;
  std::vector<std::vector<int>> clusters() const;
};

struct KMeansOptions {
  std::size_t max_iterations = 100;
};

std::vector<double> stage_averaged_load(const LoadHistory& history);

// Positions of the `num_clusters` most loaded SBSs (ties to lower id).
std::vector<Vec2> init_centroids(std::span<const double> avg_loads, std::span<const Vec2> positions,
                                 std::size_t num_clusters);

ClusterAssignment run_kmeans(std::span<const Vec2> positions, std::span<const Vec2> initial_centroids,
                             KMeansOptions options = {});

double sum_squared_error(std::span<const Vec2> positions, std::span<const int> membership,
                         std::span<const Vec2> centroids);

// (SSB / (H - 1)) / (SSW / (N - H)); +infinity when SSW is zero.
double calinski_harabasz(const ClusterAssignment& assignment, std::span<const Vec2> positions);

struct CandidateScore {
  std::size_t num_clusters = 0;
  double score = 0.0;
};

struct Selection {
  ClusterAssignment best;
  std::vector<CandidateScore> candidates;
};

Selection select_num_clusters(std::span<const Vec2> positions, std::span<const double> avg_loads,
                              std::span<const std::size_t> candidates, KMeansOptions options = {});

// Default candidate range {2, ..., min(6, N - 1)}.
std::vector<std::size_t> default_cluster_range(std::size_t n_sbs);

// CSV exports: "sbs_id,cluster_index" and "num_clusters,ch_score,selected".
void write_assignment_csv(std::ostream& os, const ClusterAssignment& a);
void write_candidates_csv(std::ostream& os, const Selection& s);

std::vector<Vec2> sbs_positions(const env::Scenario& scenario);

// Clusters a scenario's SBSs from their averaged loads. Empty `candidates`
// means default_cluster_range; networks with fewer than three SBSs become a
// single cluster without a search.
Selection cluster_scenario(const env::Scenario& scenario, std::span<const double> avg_loads,
                           std::span<const std::size_t> candidates = {});

}  // namespace udn::clustering
