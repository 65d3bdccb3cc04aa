#pragma once

// Discrete-time downlink simulator for an ultra-dense small-cell network:
// geometry, log-distance path loss with slow shadowing, random-walk mobility,
// A3 handovers biased by cell individual offsets (CIOs) with load-based
// admission control, and PRB-load accounting.

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <memory>
#include <optional>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace udn::env {

struct Vec2 {
  double x = 0.0;
  double y = 0.0;
  friend bool operator==(const Vec2&, const Vec2&) = default;
};

struct ChannelParams {
  double pl_intercept = 128.1;  // dB
  double pl_slope = 37.6;       // dB per decade (distance in km)
  double pl_min_km = 0.035;
  double shadow_sigma = 8.0;  // dB
  double noise_dbm = -174.0 + 10.0 * 5.255272505103306;  // thermal noise in one 180 kHz PRB
  double prb_bandwidth = 180e3;                            // Hz
  double hysteresis = 3.0;                                 // dB
  double prb_cap = 2.0;  // max PRBs a single user may claim
  double admission_threshold = 0.8;
  double edge_gap_db = 6.0;  // serving-vs-best-neighbor gap that marks an edge user

  void validate() const;
  friend bool operator==(const ChannelParams&, const ChannelParams&) = default;
};

struct CioBounds {
  double lo = -6.0;
  double hi = 6.0;
  friend bool operator==(const CioBounds&, const CioBounds&) = default;
};

// Carrier defaults stamped onto every generated SBS.
struct CellDefaults {
  double tx_power_dbm = 46.0;
  int n_prb = 24;
};

struct SmallCell {
  int id = 0;
  Vec2 position;
  double tx_power_dbm = 46.0;
  int n_prb = 24;
  double load = 0.0;
  friend bool operator==(const SmallCell&, const SmallCell&) = default;
};

struct User {
  int id = 0;
  Vec2 position;
  double speed = 1.0;    // m/s
  double heading = 0.0;  // radians
  double demand = 0.0;   // bits/s, constant bit rate
  int serving_cell = 0;
  std::vector<double> shadowing_db;  // one entry per SBS, fixed for the scenario
  friend bool operator==(const User&, const User&) = default;
};

struct Scenario {
  std::vector<SmallCell> sbs_list;
  std::vector<User> users;
  double area_side = 300.0;
  ChannelParams channel;
  CioBounds cio_bounds;
  std::uint64_t seed = 0;

  std::size_t n_sbs() const { return sbs_list.size(); }
  std::size_t n_users() const { return users.size(); }
  void validate() const;
  friend bool operator==(const Scenario&, const Scenario&) = default;
};

// Antisymmetric matrix of per-pair handover offsets in dB.
class CioMatrix {
 public:
  CioMatrix() = default;
  CioMatrix(std::size_t n, CioBounds bounds);

  // Builds from the strict upper triangle in row-major (0,1),(0,2),...,(n-2,n-1) order.
  static CioMatrix from_upper_triangle(std::size_t n, std::span<const double> values,
                                       CioBounds bounds);
  // Raw dense values, not validated; use validate() before trusting it.
  static CioMatrix from_dense(std::size_t n, std::vector<double> values, CioBounds bounds);

  static std::size_t pair_count(std::size_t n) { return n * (n - 1) / 2; }

  std::size_t size() const { return n_; }
  CioBounds bounds() const { return bounds_; }
  double operator()(std::size_t i, std::size_t j) const { return offsets_[i * n_ + j]; }

  // Sets O_ij = v and O_ji = -v. Throws if v is outside the bounds.
  void set(std::size_t i, std::size_t j, double v);
  // Same, clamping v into the bounds first.
  void set_clamped(std::size_t i, std::size_t j, double v);

  std::vector<double> upper_triangle() const;
  bool is_valid() const;
  void validate() const;

  friend bool operator==(const CioMatrix&, const CioMatrix&) = default;

 private:
  std::size_t n_ = 0;
  CioBounds bounds_;
  std::vector<double> offsets_;
};

struct StateVector {
  std::vector<double> centered_loads;
  std::vector<double> edge_fractions;

  std::size_t dim() const { return centered_loads.size() + edge_fractions.size(); }
  // [centered loads..., edge fractions...]
  std::vector<double> flatten() const;
  static StateVector unflatten(std::span<const double> v);
  friend bool operator==(const StateVector&, const StateVector&) = default;
};

enum class HandoverOutcome { kSuccess, kBlocked };

struct HandoverEvent {
  int user = 0;
  int source = 0;
  int target = 0;
  HandoverOutcome outcome = HandoverOutcome::kSuccess;
};

struct StepMetrics {
  int ho_success = 0;
  int ho_fail = 0;
  double max_load = 0.0;
  std::vector<double> loads;
};

struct StepResult {
  double reward = 0.0;
  StepMetrics metrics;
};

struct MobilityOptions {
  double dt = 1.0;  // seconds per step; 0 freezes every user
  double heading_resample_prob = 0.2;
};

class InvalidAction : public std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// ---- scenario construction -------------------------------------------------

Scenario generate_scenario(std::uint64_t seed, std::size_t n_sbs, std::size_t n_users,
                           double area_side, double demand, const ChannelParams& channel = {},
                           CellDefaults cells = {});

void write_scenario(std::ostream& os, const Scenario& s);
Scenario read_scenario(std::istream& is);

// ---- channel and load model ------------------------------------------------

double path_loss(double d_km, const ChannelParams& ch = {});
double rsrp(const User& user, const SmallCell& sbs, const ChannelParams& ch = {});
// Linear SINR of `user` on its serving cell; every other cell interferes at full power.
double sinr(const User& user, const Scenario& scenario);
// SINR if the user were served by `serving`, given its RSRP row over all cells.
double sinr_from_rsrp(std::span<const double> rsrp_row_dbm, std::size_t serving, double noise_dbm);
double prb_rate(double sinr_linear, double bandwidth_hz);
double required_prbs(double demand, double rate, double cap);
double cell_load(const SmallCell& sbs, std::span<const double> user_prbs);
double reward(std::span<const double> loads);

// Best neighbor j of `serving` with F_j - F_i > O_ij + Hys (ties to lower id).
std::optional<std::size_t> handover_target(std::span<const double> rsrp_row_dbm,
                                           std::size_t serving, const CioMatrix& cio,
                                           double hysteresis);

// ---- simulation state ------------------------------------------------------

class NetworkState {
 public:
  NetworkState(std::shared_ptr<const Scenario> scenario, std::uint64_t mobility_seed,
               MobilityOptions mobility = {});

  const Scenario& scenario() const { return *scenario_; }
  std::shared_ptr<const Scenario> scenario_ptr() const { return scenario_; }
  std::size_t n_sbs() const { return scenario_->n_sbs(); }
  std::size_t n_users() const { return users_.size(); }

  const std::vector<User>& users() const { return users_; }
  std::span<const double> loads() const { return loads_; }
  const CioMatrix& cio() const { return cio_; }
  std::span<const double> rsrp_row(std::size_t user) const;
  double user_sinr(std::size_t user) const { return sinr_[user]; }
  double user_prbs(std::size_t user) const { return prbs_[user]; }
  std::uint64_t time() const { return t_; }

  // Applies `action` as the CIO matrix, advances mobility by one step, runs
  // handovers and recomputes loads. Throws InvalidAction on a bad matrix.
  StepResult step(const CioMatrix& action);

  // Pins one user (tests and scripted scenarios).
  void place_user(std::size_t user, Vec2 position, int serving_cell);
  // Recomputes channel, rates and loads from current positions/associations.
  void refresh();

 private:
  friend std::vector<HandoverEvent> evaluate_handovers(NetworkState&, const CioMatrix&,
                                                       const ChannelParams&);
  void move_users();
  void update_channel();
  void update_loads();

  std::shared_ptr<const Scenario> scenario_;
  MobilityOptions mobility_;
  std::mt19937_64 rng_;
  std::vector<User> users_;
  CioMatrix cio_;
  std::vector<double> rsrp_;  // users x cells, dBm
  std::vector<double> sinr_;  // on the serving cell, linear
  std::vector<double> prbs_;  // required PRBs on the serving cell
  std::vector<double> loads_;
  std::uint64_t t_ = 0;
};

// A3 evaluation over all users in ascending id order. Admitted handovers are
// applied to the state immediately, so later admission checks see them.
std::vector<HandoverEvent> evaluate_handovers(NetworkState& state, const CioMatrix& cio,
                                              const ChannelParams& channel);

// Observation for a cluster of SBS ids (order preserved).
StateVector observe_state(const NetworkState& state, std::span<const int> cluster);

}  // namespace udn::env
