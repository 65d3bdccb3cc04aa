#include "udn/agent.hpp"

#include <algorithm>
#include <condition_variable>
#include <deque>
#include <exception>
#include <istream>
#include <ostream>
#include <stdexcept>
#include <thread>

#include "udn/seeding.hpp"

namespace udn::agent {
namespace {

void require(bool ok, const std::string& what) {
  if (!ok) throw std::invalid_argument(what);
}

// Row-major batch of critic inputs [state | action].
std::vector<double> stack_inputs(std::span<const Transition* const> batch, bool next,
                                 std::span<const double> actions, std::size_t action_dim) {
  std::vector<double> out;
  const std::size_t sd = batch.front()->state.size();
  out.reserve(batch.size() * (sd + action_dim));
  for (std::size_t b = 0; b < batch.size(); ++b) {
    const auto& s = next ? batch[b]->next_state : batch[b]->state;
    out.insert(out.end(), s.begin(), s.end());
    if (actions.empty()) {
      out.insert(out.end(), batch[b]->action.begin(), batch[b]->action.end());
    } else {
      const auto a = actions.subspan(b * action_dim, action_dim);
      out.insert(out.end(), a.begin(), a.end());
    }
  }
  return out;
}

std::vector<double> stack_states(std::span<const Transition* const> batch, bool next) {
  std::vector<double> out;
  for (const auto* t : batch) {
    const auto& s = next ? t->next_state : t->state;
    out.insert(out.end(), s.begin(), s.end());
  }
  return out;
}

void check_batch(std::span<const Transition* const> batch, const DenseNetwork& actor_like,
                 std::size_t action_dim) {
  require(!batch.empty(), "minibatch: empty batch");
  for (const auto* t : batch) {
    require(t->state.size() == actor_like.input_dim() &&
                t->next_state.size() == actor_like.input_dim() && t->action.size() == action_dim,
            "minibatch: transition dimensions do not match the networks");
  }
}

}  // namespace

// ---- replay -----------------------------------------------------------------------

ReplayBuffer::ReplayBuffer(std::size_t capacity) {
  require(capacity > 0, "replay: capacity must be positive");
  capacity_ = capacity;
}

void ReplayBuffer::push(Transition t) {
  if (items_.size() == capacity_) items_.pop_front();
  items_.push_back(std::move(t));
}

const Transition& ReplayBuffer::at(std::size_t i) const {
  if (i >= items_.size()) throw std::out_of_range("replay: index out of range");
  return items_[i];
}

void ReplayBuffer::clear() { items_.clear(); }

std::vector<const Transition*> sample_uniform(const ReplayBuffer& replay, std::size_t k,
                                              std::mt19937_64& rng) {
  require(k > 0, "sample_uniform: K must be positive");
  require(replay.size() >= k, "sample_uniform: replay holds fewer than K transitions");
  std::uniform_int_distribution<std::size_t> pick(0, replay.size() - 1);
  std::vector<const Transition*> out(k);
  for (auto& p : out) p = &replay.at(pick(rng));
  return out;
}

// ---- behavior policies --------------------------------------------------------------

std::string to_string(BehaviorKind kind) {
  switch (kind) {
    case BehaviorKind::kNoisyTarget: return "noisy-target";
    case BehaviorKind::kRuleStatic: return "rule-static";
    case BehaviorKind::kRuleAdaptive: return "rule-adaptive";
    case BehaviorKind::kUniformRandom: return "uniform-random";
  }
  return "unknown";
}

BehaviorKind parse_behavior(const std::string& name) {
  for (auto k : {BehaviorKind::kNoisyTarget, BehaviorKind::kRuleStatic,
                 BehaviorKind::kRuleAdaptive, BehaviorKind::kUniformRandom})
    if (to_string(k) == name) return k;
  throw std::invalid_argument("unknown behavior policy '" + name + "'");
}

std::vector<BehaviorPolicy> multi_behavior_set() {
  std::vector<BehaviorPolicy> set(3);
  set[1].kind = BehaviorKind::kRuleStatic;
  set[2].kind = BehaviorKind::kRuleAdaptive;
  return set;
}

std::vector<BehaviorPolicy> single_behavior_set() { return {BehaviorPolicy{}}; }

void AgentConfig::validate() const {
  require(!hidden.empty(), "agent: needs at least one hidden layer");
  for (std::size_t h : hidden) require(h > 0, "agent: hidden sizes must be positive");
  require(gamma >= 0.0 && gamma <= 1.0, "agent: gamma must be in [0, 1]");
  require(tau > 0.0 && tau <= 1.0, "agent: tau must be in (0, 1]");
  require(batch >= 1, "agent: batch must be at least 1");
  require(replay_capacity >= batch, "agent: replay capacity must hold one batch");
  require(std::isfinite(load_input_scale) && load_input_scale > 0.0,
          "agent: load input scale must be finite and positive");
  actor_opt.validate();
  critic_opt.validate();
}

std::size_t state_dim(std::size_t cluster_size) { return 2 * cluster_size; }
std::size_t action_dim(std::size_t cluster_size) { return CioMatrix::pair_count(cluster_size); }

namespace {

// Per-feature input factors: loads, edge fractions, then (critic only) actions.
std::vector<double> input_scale(std::size_t m, env::CioBounds bounds, const AgentConfig& config,
                                bool with_action) {
  std::vector<double> s(m, config.load_input_scale);
  s.resize(2 * m, 1.0);
  if (with_action) s.resize(2 * m + action_dim(m), 1.0 / std::max(-bounds.lo, bounds.hi));
  return s;
}

}  // namespace

DenseNetwork make_actor(std::size_t cluster_size, env::CioBounds bounds, const AgentConfig& config,
                        std::mt19937_64& rng) {
  require(cluster_size >= 2, "make_actor: a cluster needs at least two SBSs");
  std::vector<std::size_t> sizes{state_dim(cluster_size)};
  sizes.insert(sizes.end(), config.hidden.begin(), config.hidden.end());
  sizes.push_back(action_dim(cluster_size));
  DenseNetwork net(sizes, nn::OutputActivation::kScaledTanh, bounds.lo, bounds.hi);
  net.initialize(rng, config.final_layer_scale);
  net.set_input_scale(input_scale(cluster_size, bounds, config, false));
  return net;
}

DenseNetwork make_critic(std::size_t cluster_size, env::CioBounds bounds, const AgentConfig& config,
                         std::mt19937_64& rng) {
  require(cluster_size >= 2, "make_critic: a cluster needs at least two SBSs");
  std::vector<std::size_t> sizes{state_dim(cluster_size) + action_dim(cluster_size)};
  sizes.insert(sizes.end(), config.hidden.begin(), config.hidden.end());
  sizes.push_back(1);
  DenseNetwork net(sizes, nn::OutputActivation::kIdentity);
  net.initialize(rng);
  net.set_input_scale(input_scale(cluster_size, bounds, config, true));
  return net;
}

std::vector<double> critic_input(std::span<const double> state, std::span<const double> action) {
  std::vector<double> x(state.begin(), state.end());
  x.insert(x.end(), action.begin(), action.end());
  return x;
}

CioMatrix select_action(const DenseNetwork& actor, const StateVector& state, env::CioBounds bounds) {
  const auto flat = state.flatten();
  const auto upper = actor.forward(flat);
  return CioMatrix::from_upper_triangle(state.centered_loads.size(), upper, bounds);
}

std::vector<double> behavior_action(const BehaviorPolicy& policy, const StateVector& state,
                                    const DenseNetwork& actor, const CioMatrix& current,
                                    std::mt19937_64& rng) {
  const std::size_t m = state.centered_loads.size();
  require(current.size() == m, "behavior_action: CIO matrix does not match the cluster");
  const auto bounds = current.bounds();
  switch (policy.kind) {
    case BehaviorKind::kNoisyTarget: {
      auto a = actor.forward(state.flatten());
      if (policy.noise_sigma > 0.0) {
        std::normal_distribution<double> noise(0.0, policy.noise_sigma);
        for (double& v : a) v = std::clamp(v + noise(rng), bounds.lo, bounds.hi);
      }
      return a;
    }
    case BehaviorKind::kRuleStatic:
      return baselines::rule_static(state.centered_loads, current, baselines::all_pairs(m),
                                    policy.rules)
          .upper_triangle();
    case BehaviorKind::kRuleAdaptive:
      return baselines::rule_adaptive(state.centered_loads, current, baselines::all_pairs(m),
                                      policy.rules)
          .upper_triangle();
    case BehaviorKind::kUniformRandom: {
      std::uniform_real_distribution<double> u(bounds.lo, bounds.hi);
      std::vector<double> a(action_dim(m));
      for (double& v : a) v = u(rng);
      return a;
    }
  }
  throw std::logic_error("behavior_action: unknown policy kind");
}

// ---- gradients -------------------------------------------------------------------------

double td_target(const Transition& t, const DenseNetwork& guide_actor,
                 const DenseNetwork& guide_critic, double gamma) {
  const auto next_action = guide_actor.forward(t.next_state);
  const auto q = guide_critic.forward(critic_input(t.next_state, next_action));
  return t.reward + gamma * q[0];
}

CriticGradient critic_minibatch_gradient(std::span<const Transition* const> batch,
                                         const DenseNetwork& critic,
                                         const DenseNetwork& guide_actor,
                                         const DenseNetwork& guide_critic, double gamma) {
  const std::size_t ad = guide_actor.output_dim();
  check_batch(batch, guide_actor, ad);
  const std::size_t k = batch.size();

  nn::ForwardCache next_actor, next_critic, cache;
  guide_actor.forward_batch(k, stack_states(batch, true), next_actor);
  guide_critic.forward_batch(k, stack_inputs(batch, true, next_actor.output(), ad), next_critic);
  critic.forward_batch(k, stack_inputs(batch, false, {}, ad), cache);

  const auto q_next = next_critic.output();
  const auto q = cache.output();
  const double scale = 1.0 / static_cast<double>(k);
  std::vector<double> upstream(k);
  CriticGradient out;
  for (std::size_t b = 0; b < k; ++b) {
    const double y = batch[b]->reward + gamma * q_next[b];
    const double err = y - q[b];
    upstream[b] = err * scale;
    out.loss += err * err;
  }
  out.loss *= scale;
  out.grad.assign_zero(critic.param_count());
  critic.backward_batch(cache, upstream, &out.grad.values, nullptr);
  return out;
}

GradientSet actor_minibatch_gradient(std::span<const Transition* const> batch,
                                     const DenseNetwork& actor, const DenseNetwork& critic) {
  const std::size_t ad = actor.output_dim();
  check_batch(batch, actor, ad);
  require(critic.input_dim() == actor.input_dim() + ad, "actor gradient: critic shape mismatch");
  const std::size_t k = batch.size();
  const std::size_t sd = actor.input_dim();

  nn::ForwardCache actor_cache, critic_cache;
  actor.forward_batch(k, stack_states(batch, false), actor_cache);
  critic.forward_batch(k, stack_inputs(batch, false, actor_cache.output(), ad), critic_cache);

  const std::vector<double> ones(k, 1.0);
  std::vector<double> dx;
  critic.backward_batch(critic_cache, ones, nullptr, &dx);

  const double scale = 1.0 / static_cast<double>(k);
  std::vector<double> upstream(k * ad);
  for (std::size_t b = 0; b < k; ++b)
    for (std::size_t j = 0; j < ad; ++j)
      upstream[b * ad + j] = dx[b * (sd + ad) + sd + j] * scale;

  GradientSet g;
  g.assign_zero(actor.param_count());
  actor.backward_batch(actor_cache, upstream, &g.values, nullptr);
  return g;
}

GradientSet critic_sample_gradient(const Transition& t, const DenseNetwork& critic,
                                   const DenseNetwork& guide_actor,
                                   const DenseNetwork& guide_critic, double gamma) {
  const double y = td_target(t, guide_actor, guide_critic, gamma);
  const auto x = critic_input(t.state, t.action);
  const double err = y - critic.forward(x)[0];
  return critic.param_gradient(x, std::span<const double>(&err, 1));
}

GradientSet actor_sample_gradient(const Transition& t, const DenseNetwork& actor,
                                  const DenseNetwork& critic) {
  const auto a = actor.forward(t.state);
  const auto dq = critic.input_gradient(critic_input(t.state, a));
  const std::span<const double> da(dq.data() + t.state.size(), a.size());
  return actor.param_gradient(t.state, da);
}

// ---- parameter server ---------------------------------------------------------------------

ParameterServer::ParameterServer(DenseNetwork actor, DenseNetwork critic, const AgentConfig& config)
    : actor_(std::move(actor)),
      critic_(std::move(critic)),
      actor_opt_(config.actor_opt),
      critic_opt_(config.critic_opt),
      max_staleness_(config.max_staleness),
      actor_warmup_(config.actor_warmup) {}

std::uint64_t ParameterServer::iteration() const {
  std::lock_guard lock(mu_);
  return iteration_;
}

std::uint64_t ParameterServer::sync_into(DenseNetwork& actor, DenseNetwork& critic) const {
  std::lock_guard lock(mu_);
  nn::copy_params(actor, actor_);
  nn::copy_params(critic, critic_);
  return iteration_;
}

DenseNetwork ParameterServer::actor() const {
  std::lock_guard lock(mu_);
  return actor_;
}

DenseNetwork ParameterServer::critic() const {
  std::lock_guard lock(mu_);
  return critic_;
}

ApplyReport ParameterServer::apply(std::span<const Submission> submissions) {
  std::lock_guard lock(mu_);
  ApplyReport report;
  std::vector<GradientSet> actor_grads, critic_grads;
  for (const auto& s : submissions) {
    if (s.timestamp + max_staleness_ < iteration_) {
      ++report.dropped;
      continue;
    }
    actor_grads.push_back(s.actor);
    critic_grads.push_back(s.critic);
  }
  // Both checks run before either network moves, so a bad submission leaves
  // the server untouched.
  for (const auto& g : actor_grads)
    if (!g.finite()) throw nn::DivergenceError("parameter server: non-finite actor gradient");
  for (const auto& g : critic_grads)
    if (!g.finite()) throw nn::DivergenceError("parameter server: non-finite critic gradient");
  if (iteration_ >= actor_warmup_) nn::apply_gradients(actor_, actor_grads, actor_opt_);
  nn::apply_gradients(critic_, critic_grads, critic_opt_);
  report.applied = actor_grads.size();
  ++iteration_;
  return report;
}

// ---- policies --------------------------------------------------------------------------------

void embed_cluster_action(CioMatrix& global, std::span<const int> members,
                          std::span<const double> upper) {
  const std::size_t m = members.size();
  require(upper.size() == action_dim(m), "embed_cluster_action: action size mismatch");
  std::size_t k = 0;
  for (std::size_t a = 0; a < m; ++a)
    for (std::size_t b = a + 1; b < m; ++b)
      global.set(static_cast<std::size_t>(members[a]), static_cast<std::size_t>(members[b]),
                 upper[k++]);
}

CioMatrix cluster_cio(const CioMatrix& global, std::span<const int> members) {
  const std::size_t m = members.size();
  std::vector<double> dense(m * m);
  for (std::size_t a = 0; a < m; ++a)
    for (std::size_t b = 0; b < m; ++b)
      dense[a * m + b] =
          global(static_cast<std::size_t>(members[a]), static_cast<std::size_t>(members[b]));
  return CioMatrix::from_dense(m, std::move(dense), global.bounds());
}

CioMatrix policy_action(const Policy& policy, const env::NetworkState& state) {
  CioMatrix cio(state.n_sbs(), state.scenario().cio_bounds);
  for (std::size_t c = 0; c < policy.clusters.size(); ++c) {
    const auto& members = policy.clusters[c];
    const auto s = env::observe_state(state, members);
    embed_cluster_action(cio, members, policy.actors[c].forward(s.flatten()));
  }
  return cio;
}

void save_policy(std::ostream& os, const Policy& policy) {
  os << "udn-policy 1\nclusters " << policy.clusters.size() << '\n';
  for (const auto& c : policy.clusters) {
    os << c.size();
    for (int id : c) os << ' ' << id;
    os << '\n';
  }
  for (const auto& a : policy.actors) nn::save_network(os, a);
}

Policy load_policy(std::istream& is) {
  std::string tag, kw;
  int version = 0;
  std::size_t h = 0;
  if (!(is >> tag >> version >> kw >> h) || tag != "udn-policy" || version != 1 || kw != "clusters")
    throw std::runtime_error("policy checkpoint: bad header");
  Policy p;
  p.clusters.resize(h);
  for (auto& c : p.clusters) {
    std::size_t m = 0;
    if (!(is >> m)) throw std::runtime_error("policy checkpoint: truncated cluster list");
    c.resize(m);
    for (int& id : c)
      if (!(is >> id)) throw std::runtime_error("policy checkpoint: truncated cluster list");
  }
  for (std::size_t i = 0; i < h; ++i) p.actors.push_back(nn::load_network(is));
  return p;
}

// ---- trainer -------------------------------------------------------------------------------------

struct Trainer::Local {
  DenseNetwork actor, critic, guide_actor, guide_critic;
  ReplayBuffer replay;
};

struct Trainer::Worker {
  std::size_t index = 0;
  BehaviorPolicy behavior;
  env::NetworkState env;
  std::mt19937_64 rng;
  std::vector<Local> locals;
  std::uint64_t iteration = 0;
};

namespace {

std::vector<std::vector<int>> controllable(std::vector<std::vector<int>> clusters) {
  std::vector<std::vector<int>> out;
  for (auto& c : clusters) {
    std::sort(c.begin(), c.end());
    if (c.size() >= 2) out.push_back(std::move(c));
  }
  return out;
}

std::size_t overlap(const std::vector<int>& a, const std::vector<int>& b) {
  std::size_t n = 0;
  for (int x : a) n += static_cast<std::size_t>(std::count(b.begin(), b.end(), x));
  return n;
}

}  // namespace

Trainer::Trainer(std::shared_ptr<const env::Scenario> scenario,
                 std::vector<std::vector<int>> clusters, TrainerOptions options)
    : scenario_(std::move(scenario)), clusters_(controllable(std::move(clusters))),
      options_(std::move(options)) {
  options_.agent.validate();
  require(!options_.behaviors.empty(), "trainer: needs at least one behavior policy");
  for (std::size_t i = 0; i < options_.behaviors.size(); ++i) {
    auto w = std::make_unique<Worker>(Worker{
        i, options_.behaviors[i],
        env::NetworkState(scenario_, derive_seed(options_.seed, {1, i}), options_.mobility),
        std::mt19937_64(derive_seed(options_.seed, {2, i})),
        {},
        0});
    workers_.push_back(std::move(w));
  }
  build_servers(nullptr, nullptr);
  build_locals();
}

Trainer::~Trainer() = default;

const ReplayBuffer& Trainer::replay(std::size_t worker, std::size_t cluster) const {
  return workers_.at(worker)->locals.at(cluster).replay;
}

const env::NetworkState& Trainer::worker_env(std::size_t worker) const {
  return workers_.at(worker)->env;
}

void Trainer::build_servers(const std::vector<std::unique_ptr<ParameterServer>>* previous,
                            const std::vector<std::vector<int>>* previous_clusters) {
  std::vector<bool> taken(previous_clusters ? previous_clusters->size() : 0, false);
  std::vector<std::unique_ptr<ParameterServer>> servers;
  for (std::size_t c = 0; c < clusters_.size(); ++c) {
    const auto& members = clusters_[c];
    std::optional<std::size_t> donor;
    std::size_t best = 0;
    for (std::size_t o = 0; o < taken.size(); ++o) {
      const auto& old = (*previous_clusters)[o];
      if (taken[o] || old.size() != members.size()) continue;
      const std::size_t ov = overlap(old, members);
      if (!donor || ov > best) {
        donor = o;
        best = ov;
      }
    }
    if (donor) {
      taken[*donor] = true;
      const auto& src = *(*previous)[*donor];
      servers.push_back(std::make_unique<ParameterServer>(src.actor(), src.critic(), options_.agent));
    } else {
      std::mt19937_64 rng(derive_seed(options_.seed, {3, generation_, c}));
      auto actor = make_actor(members.size(), scenario_->cio_bounds, options_.agent, rng);
      auto critic = make_critic(members.size(), scenario_->cio_bounds, options_.agent, rng);
      servers.push_back(
          std::make_unique<ParameterServer>(std::move(actor), std::move(critic), options_.agent));
    }
  }
  servers_ = std::move(servers);
}

void Trainer::build_locals() {
  for (auto& w : workers_) {
    w->locals.clear();
    for (std::size_t c = 0; c < clusters_.size(); ++c) {
      Local l{servers_[c]->actor(), servers_[c]->critic(), servers_[c]->actor(),
              servers_[c]->critic(), ReplayBuffer(options_.agent.replay_capacity)};
      w->locals.push_back(std::move(l));
    }
  }
}

void Trainer::set_clusters(std::vector<std::vector<int>> clusters) {
  auto previous = std::move(servers_);
  auto previous_clusters = std::move(clusters_);
  clusters_ = controllable(std::move(clusters));
  ++generation_;
  build_servers(&previous, &previous_clusters);
  build_locals();
}

WorkerReport Trainer::worker_iteration(Worker& w, std::vector<std::vector<Submission>>* deferred) {
  const auto& cfg = options_.agent;
  const std::size_t h = clusters_.size();
  WorkerReport report;
  report.worker = w.index;
  report.behavior = w.behavior.kind;
  report.clusters.resize(h);

  std::vector<std::uint64_t> stamp(h);
  std::vector<StateVector> states(h);
  CioMatrix action(w.env.n_sbs(), scenario_->cio_bounds);
  std::vector<std::vector<double>> local_actions(h);
  for (std::size_t c = 0; c < h; ++c) {
    auto& l = w.locals[c];
    stamp[c] = servers_[c]->sync_into(l.actor, l.critic);
    nn::soft_update(l.guide_actor, l.actor, cfg.tau);
    nn::soft_update(l.guide_critic, l.critic, cfg.tau);
    states[c] = env::observe_state(w.env, clusters_[c]);
    local_actions[c] = behavior_action(w.behavior, states[c], l.actor,
                                       cluster_cio(w.env.cio(), clusters_[c]), w.rng);
    embed_cluster_action(action, clusters_[c], local_actions[c]);
  }

  const auto result = w.env.step(action);
  ++w.iteration;
  report.iteration = w.iteration;

  for (std::size_t c = 0; c < h; ++c) {
    auto& l = w.locals[c];
    std::vector<double> member_loads;
    for (int id : clusters_[c]) member_loads.push_back(result.metrics.loads[static_cast<std::size_t>(id)]);
    const double r = env::reward(member_loads);
    report.clusters[c].reward = r;
    l.replay.push({states[c].flatten(), std::move(local_actions[c]), r,
                   env::observe_state(w.env, clusters_[c]).flatten()});
    if (l.replay.size() < cfg.batch) continue;

    const auto batch = sample_uniform(l.replay, cfg.batch, w.rng);
    auto critic = critic_minibatch_gradient(batch, l.critic, l.guide_actor, l.guide_critic, cfg.gamma);
    Submission s{actor_minibatch_gradient(batch, l.actor, l.critic), std::move(critic.grad),
                 stamp[c]};
    s.actor.timestamp = s.critic.timestamp = stamp[c];
    if (deferred) {
      (*deferred)[c].push_back(std::move(s));
    } else {
      servers_[c]->apply(std::span<const Submission>(&s, 1));
    }
    report.clusters[c].submitted = true;
    report.clusters[c].critic_loss = critic.loss;
  }
  return report;
}

std::vector<WorkerReport> Trainer::step_round_robin() {
  std::vector<WorkerReport> out;
  out.reserve(workers_.size());
  std::vector<std::vector<Submission>> pending(clusters_.size());
  for (auto& w : workers_) out.push_back(worker_iteration(*w, &pending));
  for (std::size_t c = 0; c < clusters_.size(); ++c) servers_[c]->apply(pending[c]);
  return out;
}

void Trainer::run_async(std::size_t steps, const std::function<void(std::size_t)>& on_step,
                        const std::function<void(const WorkerReport&)>& on_report) {
  std::mutex mu;
  std::condition_variable cv;
  std::vector<std::size_t> progress(workers_.size(), 0);
  std::exception_ptr failure;
  bool stop = false;

  std::vector<std::thread> threads;
  for (std::size_t i = 0; i < workers_.size(); ++i) {
    threads.emplace_back([&, i] {
      try {
        for (std::size_t t = 0; t < steps; ++t) {
          {
            std::lock_guard lock(mu);
            if (stop) return;
          }
          auto report = worker_iteration(*workers_[i], nullptr);
          std::lock_guard lock(mu);
          if (on_report) on_report(report);
          progress[i] = t + 1;
          cv.notify_all();
        }
      } catch (...) {
        std::lock_guard lock(mu);
        if (!failure) failure = std::current_exception();
        stop = true;
        cv.notify_all();
      }
    });
  }

  try {
    for (std::size_t t = 0; t < steps; ++t) {
      {
        std::unique_lock lock(mu);
        cv.wait(lock, [&] {
          return stop || std::all_of(progress.begin(), progress.end(),
                                     [&](std::size_t p) { return p > t; });
        });
        if (stop) break;
      }
      if (on_step) on_step(t);
    }
  } catch (...) {
    std::lock_guard lock(mu);
    if (!failure) failure = std::current_exception();
    stop = true;
  }
  for (auto& th : threads) th.join();
  if (failure) std::rethrow_exception(failure);
}

Policy Trainer::policy() const {
  Policy p;
  p.clusters = clusters_;
  for (const auto& s : servers_) p.actors.push_back(s->actor());
  return p;
}

}  // namespace udn::agent
