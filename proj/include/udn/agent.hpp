#pragma once

// Off-policy deterministic actor-critic for per-cluster CIO control.
//
// Each cluster of SBSs gets one actor (state -> strict upper triangle of the
// cluster's CIO matrix) and one critic (state, action -> value), owned by a
// parameter server. Workers each drive their own environment replica with one
// behavior policy, keep local network copies, guiding copies and a replay
// buffer per cluster, and submit mini-batch gradients to the servers.
//
// Gradient sets always hold ascent directions: for the critic that is
// (1/K) sum (y - Q) dQ/dw, for the actor (1/K) sum dpi/dtheta . dQ/da.

#include <cstddef>
#include <cstdint>
#include <deque>
#include <functional>
#include <iosfwd>
#include <memory>
#include <mutex>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "udn/baselines.hpp"
#include "udn/env.hpp"
#include "udn/nn.hpp"

namespace udn::agent {

using env::CioMatrix;
using env::StateVector;
using nn::DenseNetwork;
using nn::GradientSet;

struct Transition {
  std::vector<double> state;       // flattened StateVector
  std::vector<double> action;      // cluster CIO upper triangle
  double reward = 0.0;
  std::vector<double> next_state;
};

// Bounded FIFO; index 0 is the oldest stored transition.
class ReplayBuffer {
 public:
  explicit ReplayBuffer(std::size_t capacity = 100000);

  std::size_t size() const { return items_.size(); }
  std::size_t capacity() const { return capacity_; }
  bool empty() const { return items_.empty(); }
  void push(Transition t);
  const Transition& at(std::size_t i) const;
  void clear();

 private:
  std::deque<Transition> items_;
  std::size_t capacity_ = 0;
};

// K indices drawn uniformly with replacement.
std::vector<const Transition*> sample_uniform(const ReplayBuffer& replay, std::size_t k,
                                              std::mt19937_64& rng);

enum class BehaviorKind { kNoisyTarget, kRuleStatic, kRuleAdaptive, kUniformRandom };

std::string to_string(BehaviorKind kind);
BehaviorKind parse_behavior(const std::string& name);

struct BehaviorPolicy {
  BehaviorKind kind = BehaviorKind::kNoisyTarget;
  double noise_sigma = 1.0;  // dB, noisy-target only
  baselines::RuleParams rules;
};

// Ensembles used by the two DRL controllers.
std::vector<BehaviorPolicy> multi_behavior_set();
std::vector<BehaviorPolicy> single_behavior_set();

struct AgentConfig {
  std::vector<std::size_t> hidden{400, 300};
  double gamma = 0.99;
  double tau = 0.001;
  std::size_t batch = 64;
  std::size_t replay_capacity = 100000;
  nn::OptimizerConfig actor_opt{nn::OptimizerKind::kAdam, 1e-4};
  nn::OptimizerConfig critic_opt{nn::OptimizerKind::kAdam, 1e-3};
  std::uint64_t max_staleness = 10;
  double final_layer_scale = 3e-3;
  // Network inputs see centered loads times this factor and CIO actions divided
  // by the CIO bound, so every feature spans roughly [-1, 1].
  double load_input_scale = 5.0;
  // Server iterations during which only the critic is updated.
  std::uint64_t actor_warmup = 0;

  void validate() const;
};

std::size_t state_dim(std::size_t cluster_size);
std::size_t action_dim(std::size_t cluster_size);

DenseNetwork make_actor(std::size_t cluster_size, env::CioBounds bounds, const AgentConfig& config,
                        std::mt19937_64& rng);
DenseNetwork make_critic(std::size_t cluster_size, env::CioBounds bounds, const AgentConfig& config,
                         std::mt19937_64& rng);

std::vector<double> critic_input(std::span<const double> state, std::span<const double> action);

// Deterministic target policy for one cluster (local indices 0..m-1).
CioMatrix select_action(const DenseNetwork& actor, const StateVector& state, env::CioBounds bounds);

// Action of a behavior policy as a cluster upper triangle. `current` is the
// cluster's CIO matrix now in force, which the rule policies walk from.
std::vector<double> behavior_action(const BehaviorPolicy& policy, const StateVector& state,
                                    const DenseNetwork& actor, const CioMatrix& current,
                                    std::mt19937_64& rng);

// r + gamma * Q_guide(s', pi_guide(s'))
double td_target(const Transition& t, const DenseNetwork& guide_actor,
                 const DenseNetwork& guide_critic, double gamma);

struct CriticGradient {
  GradientSet grad;
  double loss = 0.0;  // mean squared TD error over the batch
};

CriticGradient critic_minibatch_gradient(std::span<const Transition* const> batch,
                                         const DenseNetwork& critic,
                                         const DenseNetwork& guide_actor,
                                         const DenseNetwork& guide_critic, double gamma);
GradientSet actor_minibatch_gradient(std::span<const Transition* const> batch,
                                     const DenseNetwork& actor, const DenseNetwork& critic);

// One-transition forms: (y - Q) dQ/dw and dpi/dtheta . dQ/da.
GradientSet critic_sample_gradient(const Transition& t, const DenseNetwork& critic,
                                   const DenseNetwork& guide_actor,
                                   const DenseNetwork& guide_critic, double gamma);
GradientSet actor_sample_gradient(const Transition& t, const DenseNetwork& actor,
                                  const DenseNetwork& critic);

// ---- parameter server ---------------------------------------------------------

struct Submission {
  GradientSet actor;
  GradientSet critic;
  std::uint64_t timestamp = 0;
};

struct ApplyReport {
  std::size_t applied = 0;
  std::size_t dropped = 0;
};

// Global actor/critic of one cluster. Every method is atomic with respect to
// the others, so readers never see a half-applied update.
class ParameterServer {
 public:
  ParameterServer(DenseNetwork actor, DenseNetwork critic, const AgentConfig& config);

  std::uint64_t iteration() const;
  // Bitwise copy of the global parameters; returns the iteration they belong to.
  std::uint64_t sync_into(DenseNetwork& actor, DenseNetwork& critic) const;
  DenseNetwork actor() const;
  DenseNetwork critic() const;

  // Drops submissions older than max_staleness iterations, sums the rest into
  // one optimizer step per network, then advances the iteration counter. The
  // actor step is skipped while the iteration is below the actor warm-up.
  ApplyReport apply(std::span<const Submission> submissions);

 private:
  mutable std::mutex mu_;
  DenseNetwork actor_;
  DenseNetwork critic_;
  nn::Optimizer actor_opt_;
  nn::Optimizer critic_opt_;
  std::uint64_t iteration_ = 0;
  std::uint64_t max_staleness_ = 10;
  std::uint64_t actor_warmup_ = 0;
};

// ---- per-cluster policies ------------------------------------------------------

// Deployed target policy: one actor per cluster. No clusters means noMLB.
struct Policy {
  std::vector<std::vector<int>> clusters;
  std::vector<DenseNetwork> actors;

  bool is_no_mlb() const { return clusters.empty(); }
  friend bool operator==(const Policy&, const Policy&) = default;
};

// Writes a cluster's upper triangle into the matching entries of `global`.
void embed_cluster_action(CioMatrix& global, std::span<const int> members,
                          std::span<const double> upper);
// Restriction of `global` to the cluster members, in member order.
CioMatrix cluster_cio(const CioMatrix& global, std::span<const int> members);

// Composed CIO matrix; pairs that straddle clusters stay at zero.
CioMatrix policy_action(const Policy& policy, const env::NetworkState& state);

void save_policy(std::ostream& os, const Policy& policy);
Policy load_policy(std::istream& is);

// ---- workers and training --------------------------------------------------------

struct TrainerOptions {
  AgentConfig agent;
  std::vector<BehaviorPolicy> behaviors = multi_behavior_set();
  std::uint64_t seed = 1;
  env::MobilityOptions mobility;
};

// One worker's view of one cluster after an iteration.
struct ClusterReport {
  double reward = 0.0;
  bool submitted = false;
  double critic_loss = 0.0;
};

struct WorkerReport {
  std::size_t worker = 0;
  BehaviorKind behavior = BehaviorKind::kNoisyTarget;
  std::uint64_t iteration = 0;  // worker-local step count after this iteration
  std::vector<ClusterReport> clusters;
};

class Trainer {
 public:
  Trainer(std::shared_ptr<const env::Scenario> scenario, std::vector<std::vector<int>> clusters,
          TrainerOptions options);
  ~Trainer();
  Trainer(const Trainer&) = delete;
  Trainer& operator=(const Trainer&) = delete;

  const std::vector<std::vector<int>>& clusters() const { return clusters_; }
  std::size_t worker_count() const { return workers_.size(); }
  const ParameterServer& server(std::size_t cluster) const { return *servers_[cluster]; }
  const ReplayBuffer& replay(std::size_t worker, std::size_t cluster) const;
  const env::NetworkState& worker_env(std::size_t worker) const;

  // Switches to a new clustering. A new cluster inherits the global networks
  // of the old cluster with the same size and the largest member overlap;
  // others start from fresh networks. Replays restart empty.
  void set_clusters(std::vector<std::vector<int>> clusters);

  // Every worker runs one iteration in index order against the same global
  // parameters; each server then applies all of the round's submissions as
  // one update. Bit-reproducible for a fixed seed.
  std::vector<WorkerReport> step_round_robin();

  // Runs `steps` iterations on every worker in its own thread. `on_step(t)`
  // runs on the calling thread once every worker has finished iteration t.
  void run_async(std::size_t steps, const std::function<void(std::size_t)>& on_step,
                 const std::function<void(const WorkerReport&)>& on_report = {});

  // Current global actors as a deployable policy.
  Policy policy() const;

 private:
  struct Local;
  struct Worker;

  // Submissions go straight to the servers, or into `deferred` (one list per
  // cluster) when it is non-null.
  WorkerReport worker_iteration(Worker& w, std::vector<std::vector<Submission>>* deferred);
  void build_servers(const std::vector<std::unique_ptr<ParameterServer>>* previous,
                     const std::vector<std::vector<int>>* previous_clusters);
  void build_locals();

  std::shared_ptr<const env::Scenario> scenario_;
  std::vector<std::vector<int>> clusters_;
  TrainerOptions options_;
  std::uint64_t generation_ = 0;  // bumps on every re-clustering
  std::vector<std::unique_ptr<ParameterServer>> servers_;
  std::vector<std::unique_ptr<Worker>> workers_;
};

}  // namespace udn::agent
