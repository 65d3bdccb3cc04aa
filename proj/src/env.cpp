#include "udn/env.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <limits>
#include <numbers>
#include <ostream>
#include <sstream>

#include "udn/kernels.hpp"

namespace udn::env {
namespace {

double dbm_to_mw(double dbm) { return std::pow(10.0, dbm / 10.0); }

double distance_km(Vec2 a, Vec2 b) { return std::hypot(a.x - b.x, a.y - b.y) / 1000.0; }

void require(bool ok, const std::string& what) {
  if (!ok) throw std::invalid_argument(what);
}

std::size_t strongest_cell(std::span<const double> row) {
  return static_cast<std::size_t>(std::max_element(row.begin(), row.end()) - row.begin());
}

}  // namespace

// ---- validation ------------------------------------------------------------

void ChannelParams::validate() const {
  require(pl_min_km > 0.0, "channel: pl_min_km must be positive");
  require(shadow_sigma >= 0.0, "channel: shadow_sigma must be non-negative");
  require(std::isfinite(noise_dbm), "channel: noise_dbm must be finite");
  require(prb_bandwidth > 0.0, "channel: prb_bandwidth must be positive");
  require(hysteresis > 0.0, "channel: hysteresis must be positive");
  require(prb_cap > 0.0, "channel: prb_cap must be positive");
  require(admission_threshold > 0.0, "channel: admission_threshold must be positive");
  require(edge_gap_db >= 0.0, "channel: edge_gap_db must be non-negative");
}

void Scenario::validate() const {
  require(!sbs_list.empty(), "scenario: needs at least one SBS");
  require(area_side > 0.0, "scenario: area_side must be positive");
  require(cio_bounds.lo <= 0.0 && cio_bounds.hi >= 0.0 && cio_bounds.lo < cio_bounds.hi,
          "scenario: CIO bounds must bracket zero");
  channel.validate();
  auto inside = [&](Vec2 p) {
    return p.x >= 0.0 && p.x <= area_side && p.y >= 0.0 && p.y <= area_side;
  };
  for (std::size_t i = 0; i < sbs_list.size(); ++i) {
    const auto& c = sbs_list[i];
    require(c.id == static_cast<int>(i), "scenario: SBS ids must be 0..N-1 in order");
    require(inside(c.position), "scenario: SBS outside the area");
    require(c.n_prb > 0, "scenario: n_prb must be positive");
    require(std::isfinite(c.tx_power_dbm), "scenario: tx power must be finite");
    require(c.load >= 0.0, "scenario: negative load");
  }
  for (std::size_t u = 0; u < users.size(); ++u) {
    const auto& usr = users[u];
    require(usr.id == static_cast<int>(u), "scenario: user ids must be 0..U-1 in order");
    require(inside(usr.position), "scenario: user outside the area");
    require(usr.serving_cell >= 0 && usr.serving_cell < static_cast<int>(sbs_list.size()),
            "scenario: user served by unknown SBS");
    require(usr.shadowing_db.size() == sbs_list.size(), "scenario: shadowing size mismatch");
    require(usr.demand >= 0.0, "scenario: negative demand");
  }
}

// ---- CIO matrix ------------------------------------------------------------

CioMatrix::CioMatrix(std::size_t n, CioBounds bounds)
    : n_(n), bounds_(bounds), offsets_(n * n, 0.0) {}

CioMatrix CioMatrix::from_upper_triangle(std::size_t n, std::span<const double> values,
                                         CioBounds bounds) {
  if (values.size() != pair_count(n))
    throw InvalidAction("CIO upper triangle has wrong length");
  CioMatrix m(n, bounds);
  std::size_t k = 0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) m.set(i, j, values[k++]);
  return m;
}

CioMatrix CioMatrix::from_dense(std::size_t n, std::vector<double> values, CioBounds bounds) {
  if (values.size() != n * n) throw InvalidAction("CIO matrix has wrong size");
  CioMatrix m;
  m.n_ = n;
  m.bounds_ = bounds;
  m.offsets_ = std::move(values);
  return m;
}

void CioMatrix::set(std::size_t i, std::size_t j, double v) {
  if (i == j) {
    if (v != 0.0) throw InvalidAction("CIO diagonal must be zero");
    return;
  }
  if (!(v >= bounds_.lo && v <= bounds_.hi)) throw InvalidAction("CIO value out of bounds");
  offsets_[i * n_ + j] = v;
  offsets_[j * n_ + i] = -v;
}

void CioMatrix::set_clamped(std::size_t i, std::size_t j, double v) {
  if (i == j) return;
  set(i, j, std::clamp(v, bounds_.lo, bounds_.hi));
}

std::vector<double> CioMatrix::upper_triangle() const {
  std::vector<double> out;
  out.reserve(pair_count(n_));
  for (std::size_t i = 0; i < n_; ++i)
    for (std::size_t j = i + 1; j < n_; ++j) out.push_back(offsets_[i * n_ + j]);
  return out;
}

bool CioMatrix::is_valid() const {
  if (offsets_.size() != n_ * n_) return false;
  for (std::size_t i = 0; i < n_; ++i) {
    if (offsets_[i * n_ + i] != 0.0) return false;
    for (std::size_t j = i + 1; j < n_; ++j) {
      const double v = offsets_[i * n_ + j];
      if (!(v >= bounds_.lo && v <= bounds_.hi)) return false;
      if (offsets_[j * n_ + i] != -v) return false;
    }
  }
  return true;
}

void CioMatrix::validate() const {
  if (!is_valid()) throw InvalidAction("CIO matrix violates antisymmetry or bounds");
}

// ---- state vector ----------------------------------------------------------

std::vector<double> StateVector::flatten() const {
  std::vector<double> v(centered_loads);
  v.insert(v.end(), edge_fractions.begin(), edge_fractions.end());
  return v;
}

StateVector StateVector::unflatten(std::span<const double> v) {
  if (v.size() % 2 != 0) throw std::invalid_argument("state vector must have even length");
  const std::size_t n = v.size() / 2;
  return StateVector{{v.begin(), v.begin() + n}, {v.begin() + n, v.end()}};
}

// ---- channel and load model ------------------------------------------------

double path_loss(double d_km, const ChannelParams& ch) {
  return ch.pl_intercept + ch.pl_slope * std::log10(std::max(d_km, ch.pl_min_km));
}

double rsrp(const User& user, const SmallCell& sbs, const ChannelParams& ch) {
  const double shadow = static_cast<std::size_t>(sbs.id) < user.shadowing_db.size()
                            ? user.shadowing_db[sbs.id]
                            : 0.0;
  return sbs.tx_power_dbm - path_loss(distance_km(user.position, sbs.position), ch) + shadow;
}

double sinr_from_rsrp(std::span<const double> rsrp_row_dbm, std::size_t serving,
                      double noise_dbm) {
  double interference = dbm_to_mw(noise_dbm);
  for (std::size_t j = 0; j < rsrp_row_dbm.size(); ++j)
    if (j != serving) interference += dbm_to_mw(rsrp_row_dbm[j]);
  return dbm_to_mw(rsrp_row_dbm[serving]) / interference;
}

double sinr(const User& user, const Scenario& scenario) {
  std::vector<double> row;
  row.reserve(scenario.n_sbs());
  for (const auto& c : scenario.sbs_list) row.push_back(rsrp(user, c, scenario.channel));
  return sinr_from_rsrp(row, static_cast<std::size_t>(user.serving_cell),
                        scenario.channel.noise_dbm);
}

double prb_rate(double sinr_linear, double bandwidth_hz) {
  return bandwidth_hz * std::log2(1.0 + sinr_linear);
}

double required_prbs(double demand, double rate, double cap) {
  if (demand <= 0.0) return 0.0;
  if (rate <= 0.0) return cap;
  return std::min(demand / rate, cap);
}

double cell_load(const SmallCell& sbs, std::span<const double> user_prbs) {
  double total = 0.0;
  for (double p : user_prbs) total += p;
  return total / static_cast<double>(sbs.n_prb);
}

double reward(std::span<const double> loads) {
  if (loads.empty()) throw std::invalid_argument("reward: empty load vector");
  const double peak = *std::max_element(loads.begin(), loads.end());
  if (peak < 0.01) return 100.0;
  return 1.0 / peak;
}

std::optional<std::size_t> handover_target(std::span<const double> rsrp_row_dbm,
                                           std::size_t serving, const CioMatrix& cio,
                                           double hysteresis) {
  std::optional<std::size_t> best;
  double best_margin = 0.0;
  const double fi = rsrp_row_dbm[serving];
  for (std::size_t j = 0; j < rsrp_row_dbm.size(); ++j) {
    if (j == serving) continue;
    const double margin = rsrp_row_dbm[j] - fi - cio(serving, j) - hysteresis;
    if (margin > 0.0 && (!best || margin > best_margin)) {
      best = j;
      best_margin = margin;
    }
  }
  return best;
}

// ---- scenario construction -------------------------------------------------

Scenario generate_scenario(std::uint64_t seed, std::size_t n_sbs, std::size_t n_users,
                           double area_side, double demand, const ChannelParams& channel,
                           CellDefaults cells) {
  require(n_sbs >= 1, "generate_scenario: n_sbs must be at least 1");
  require(area_side > 0.0, "generate_scenario: area_side must be positive");
  require(demand >= 0.0, "generate_scenario: demand must be non-negative");

  Scenario s;
  s.area_side = area_side;
  s.seed = seed;
  s.channel = channel;
  s.channel.validate();
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> pos(0.0, area_side);
  std::uniform_real_distribution<double> speed(1.0, 10.0);
  std::uniform_real_distribution<double> heading(0.0, 2.0 * std::numbers::pi);
  std::normal_distribution<double> shadow(0.0, s.channel.shadow_sigma);

  s.sbs_list.resize(n_sbs);
  for (std::size_t i = 0; i < n_sbs; ++i) {
    auto& c = s.sbs_list[i];
    c.id = static_cast<int>(i);
    c.tx_power_dbm = cells.tx_power_dbm;
    c.n_prb = cells.n_prb;
    c.position.x = pos(rng);
    c.position.y = pos(rng);
  }
  s.users.resize(n_users);
  for (std::size_t u = 0; u < n_users; ++u) {
    auto& usr = s.users[u];
    usr.id = static_cast<int>(u);
    usr.position.x = pos(rng);
    usr.position.y = pos(rng);
    usr.speed = speed(rng);
    usr.heading = heading(rng);
    usr.demand = demand;
    usr.shadowing_db.resize(n_sbs);
    for (auto& v : usr.shadowing_db) v = shadow(rng);
  }

  std::vector<double> row(n_sbs);
  std::vector<double> used(n_sbs, 0.0);
  for (auto& usr : s.users) {
    for (std::size_t i = 0; i < n_sbs; ++i) row[i] = rsrp(usr, s.sbs_list[i], s.channel);
    const std::size_t best = strongest_cell(row);
    usr.serving_cell = static_cast<int>(best);
    const double rate =
        prb_rate(sinr_from_rsrp(row, best, s.channel.noise_dbm), s.channel.prb_bandwidth);
    used[best] += required_prbs(usr.demand, rate, s.channel.prb_cap);
  }
  for (std::size_t i = 0; i < n_sbs; ++i)
    s.sbs_list[i].load = used[i] / static_cast<double>(s.sbs_list[i].n_prb);
  return s;
}

// Line format, one record per line:
//   udn-scenario 1
//   area <side> / seed <n> / cio <lo> <hi>
//   channel <11 numbers>
//   sbs <id> <x> <y> <tx_dbm> <n_prb>
//   user <id> <x> <y> <demand> <speed> <heading> <serving> <shadow_0> ... <shadow_N-1>
void write_scenario(std::ostream& os, const Scenario& s) {
  std::ostringstream out;
  out.precision(17);
  out << "udn-scenario 1\n";
  out << "area " << s.area_side << "\n";
  out << "seed " << s.seed << "\n";
  out << "cio " << s.cio_bounds.lo << " " << s.cio_bounds.hi << "\n";
  const auto& c = s.channel;
  out << "channel " << c.pl_intercept << " " << c.pl_slope << " " << c.pl_min_km << " "
      << c.shadow_sigma << " " << c.noise_dbm << " " << c.prb_bandwidth << " " << c.hysteresis
      << " " << c.prb_cap << " " << c.admission_threshold << " " << c.edge_gap_db << "\n";
  for (const auto& b : s.sbs_list)
    out << "sbs " << b.id << " " << b.position.x << " " << b.position.y << " " << b.tx_power_dbm
        << " " << b.n_prb << "\n";
  for (const auto& u : s.users) {
    out << "user " << u.id << " " << u.position.x << " " << u.position.y << " " << u.demand << " "
        << u.speed << " " << u.heading << " " << u.serving_cell;
    for (double v : u.shadowing_db) out << " " << v;
    out << "\n";
  }
  os << out.str();
}

Scenario read_scenario(std::istream& is) {
  Scenario s;
  std::string line;
  bool header = false;
  std::vector<std::string> user_lines;
  while (std::getline(is, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::istringstream in(line);
    std::string tag;
    in >> tag;
    if (tag == "udn-scenario") {
      int version = 0;
      in >> version;
      require(version == 1, "read_scenario: unsupported version");
      header = true;
    } else if (tag == "area") {
      in >> s.area_side;
    } else if (tag == "seed") {
      in >> s.seed;
    } else if (tag == "cio") {
      in >> s.cio_bounds.lo >> s.cio_bounds.hi;
    } else if (tag == "channel") {
      auto& c = s.channel;
      in >> c.pl_intercept >> c.pl_slope >> c.pl_min_km >> c.shadow_sigma >> c.noise_dbm >>
          c.prb_bandwidth >> c.hysteresis >> c.prb_cap >> c.admission_threshold >> c.edge_gap_db;
    } else if (tag == "sbs") {
      SmallCell b;
      in >> b.id >> b.position.x >> b.position.y >> b.tx_power_dbm >> b.n_prb;
      s.sbs_list.push_back(b);
    } else if (tag == "user") {
      user_lines.push_back(line);
      continue;
    } else {
      throw std::invalid_argument("read_scenario: unknown record '" + tag + "'");
    }
    require(!in.fail(), "read_scenario: malformed line: " + line);
  }
  require(header, "read_scenario: missing header");
  for (const auto& ul : user_lines) {
    std::istringstream in(ul);
    std::string tag;
    User u;
    in >> tag >> u.id >> u.position.x >> u.position.y >> u.demand >> u.speed >> u.heading >>
        u.serving_cell;
    u.shadowing_db.resize(s.sbs_list.size());
    for (auto& v : u.shadowing_db) in >> v;
    require(!in.fail(), "read_scenario: malformed line: " + ul);
    s.users.push_back(std::move(u));
  }
  s.validate();

  // Loads are derived, not stored.
  std::vector<double> used(s.n_sbs(), 0.0);
  std::vector<double> row(s.n_sbs());
  for (const auto& u : s.users) {
    for (std::size_t i = 0; i < s.n_sbs(); ++i) row[i] = rsrp(u, s.sbs_list[i], s.channel);
    const auto serving = static_cast<std::size_t>(u.serving_cell);
    const double rate =
        prb_rate(sinr_from_rsrp(row, serving, s.channel.noise_dbm), s.channel.prb_bandwidth);
    used[serving] += required_prbs(u.demand, rate, s.channel.prb_cap);
  }
  for (std::size_t i = 0; i < s.n_sbs(); ++i)
    s.sbs_list[i].load = used[i] / static_cast<double>(s.sbs_list[i].n_prb);
  return s;
}

// ---- network state ---------------------------------------------------------

NetworkState::NetworkState(std::shared_ptr<const Scenario> scenario, std::uint64_t mobility_seed,
                           MobilityOptions mobility)
    : scenario_(std::move(scenario)),
      mobility_(mobility),
      rng_(mobility_seed),
      users_(scenario_->users),
      cio_(scenario_->n_sbs(), scenario_->cio_bounds) {
  scenario_->validate();
  refresh();
}

std::span<const double> NetworkState::rsrp_row(std::size_t user) const {
  return std::span<const double>(rsrp_).subspan(user * n_sbs(), n_sbs());
}

void NetworkState::place_user(std::size_t user, Vec2 position, int serving_cell) {
  require(serving_cell >= 0 && serving_cell < static_cast<int>(n_sbs()),
          "place_user: unknown serving cell");
  users_.at(user).position = position;
  users_[user].serving_cell = serving_cell;
  refresh();
}

void NetworkState::refresh() {
  update_channel();
  update_loads();
}

void NetworkState::move_users() {
  const double side = scenario_->area_side;
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (auto& u : users_) {
    // Two draws per user per step regardless of outcome keeps every replica on
    // the same random stream no matter what the controller does.
    const double coin = unit(rng_);
    const double fresh = unit(rng_) * 2.0 * std::numbers::pi;
    if (coin < mobility_.heading_resample_prob) u.heading = fresh;
    const double step = u.speed * mobility_.dt;
    double x = u.position.x + step * std::cos(u.heading);
    double y = u.position.y + step * std::sin(u.heading);
    if (x < 0.0) {
      x = -x;
      u.heading = std::numbers::pi - u.heading;
    } else if (x > side) {
      x = 2.0 * side - x;
      u.heading = std::numbers::pi - u.heading;
    }
    if (y < 0.0) {
      y = -y;
      u.heading = -u.heading;
    } else if (y > side) {
      y = 2.0 * side - y;
      u.heading = -u.heading;
    }
    u.position = {std::clamp(x, 0.0, side), std::clamp(y, 0.0, side)};
  }
}

void NetworkState::update_channel() {
  const std::size_t n = n_sbs();
  const std::size_t nu = users_.size();
  std::vector<double> user_xy(2 * nu), cell_xy(2 * n), tx(n), shadow(nu * n);
  for (std::size_t u = 0; u < nu; ++u) {
    user_xy[2 * u] = users_[u].position.x;
    user_xy[2 * u + 1] = users_[u].position.y;
    std::copy(users_[u].shadowing_db.begin(), users_[u].shadowing_db.end(),
              shadow.begin() + static_cast<std::ptrdiff_t>(u * n));
  }
  for (std::size_t i = 0; i < n; ++i) {
    const auto& c = scenario_->sbs_list[i];
    cell_xy[2 * i] = c.position.x;
    cell_xy[2 * i + 1] = c.position.y;
    tx[i] = c.tx_power_dbm;
  }
  const auto& ch = scenario_->channel;
  rsrp_.resize(nu * n);
  kernels::omp::received_power({nu, n},
                               {user_xy, cell_xy, tx, shadow, ch.pl_intercept, ch.pl_slope,
                                ch.pl_min_km},
                               rsrp_);
}

void NetworkState::update_loads() {
  const auto& ch = scenario_->channel;
  const std::size_t n = n_sbs();
  sinr_.assign(users_.size(), 0.0);
  prbs_.assign(users_.size(), 0.0);
  std::vector<double> used(n, 0.0);
  for (std::size_t u = 0; u < users_.size(); ++u) {
    const auto serving = static_cast<std::size_t>(users_[u].serving_cell);
    sinr_[u] = sinr_from_rsrp(rsrp_row(u), serving, ch.noise_dbm);
    prbs_[u] = required_prbs(users_[u].demand, prb_rate(sinr_[u], ch.prb_bandwidth), ch.prb_cap);
    used[serving] += prbs_[u];
  }
  loads_.resize(n);
  for (std::size_t i = 0; i < n; ++i)
    loads_[i] = used[i] / static_cast<double>(scenario_->sbs_list[i].n_prb);
}

StepResult NetworkState::step(const CioMatrix& action) {
  if (action.size() != n_sbs()) throw InvalidAction("CIO matrix dimension mismatch");
  action.validate();
  cio_ = action;
  if (mobility_.dt > 0.0) move_users();
  ++t_;
  update_channel();
  update_loads();
  const auto events = evaluate_handovers(*this, cio_, scenario_->channel);
  update_loads();

  StepResult r;
  for (const auto& e : events) {
    if (e.outcome == HandoverOutcome::kSuccess) {
      ++r.metrics.ho_success;
    } else {
      ++r.metrics.ho_fail;
    }
  }
  r.metrics.loads = loads_;
  r.metrics.max_load = *std::max_element(loads_.begin(), loads_.end());
  r.reward = reward(loads_);
  return r;
}

std::vector<HandoverEvent> evaluate_handovers(NetworkState& state, const CioMatrix& cio,
                                              const ChannelParams& channel) {
  cio.validate();
  std::vector<HandoverEvent> events;
  const auto& cells = state.scenario().sbs_list;
  for (std::size_t u = 0; u < state.users_.size(); ++u) {
    auto& user = state.users_[u];
    const auto source = static_cast<std::size_t>(user.serving_cell);
    const auto row = state.rsrp_row(u);
    const auto target = handover_target(row, source, cio, channel.hysteresis);
    if (!target) continue;

    HandoverEvent e{user.id, static_cast<int>(source), static_cast<int>(*target),
                    HandoverOutcome::kSuccess};
    if (state.loads_[*target] > channel.admission_threshold) {
      e.outcome = HandoverOutcome::kBlocked;
    } else {
      const double s = sinr_from_rsrp(row, *target, channel.noise_dbm);
      const double prbs =
          required_prbs(user.demand, prb_rate(s, channel.prb_bandwidth), channel.prb_cap);
      state.loads_[source] -= state.prbs_[u] / static_cast<double>(cells[source].n_prb);
      state.loads_[source] = std::max(state.loads_[source], 0.0);
      state.loads_[*target] += prbs / static_cast<double>(cells[*target].n_prb);
      state.sinr_[u] = s;
      state.prbs_[u] = prbs;
      user.serving_cell = static_cast<int>(*target);
    }
    events.push_back(e);
  }
  return events;
}

StateVector observe_state(const NetworkState& state, std::span<const int> cluster) {
  if (cluster.empty()) throw std::invalid_argument("observe_state: empty cluster");
  const std::size_t n = state.n_sbs();
  const double gap = state.scenario().channel.edge_gap_db;

  std::vector<int> members(n, 0), edge(n, 0);
  for (std::size_t u = 0; u < state.n_users(); ++u) {
    const auto serving = static_cast<std::size_t>(state.users()[u].serving_cell);
    const auto row = state.rsrp_row(u);
    double best_other = -std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < n; ++j)
      if (j != serving) best_other = std::max(best_other, row[j]);
    ++members[serving];
    if (row[serving] - best_other < gap) ++edge[serving];
  }

  StateVector s;
  double mean = 0.0;
  for (int id : cluster) mean += state.loads()[static_cast<std::size_t>(id)];
  mean /= static_cast<double>(cluster.size());
  for (int id : cluster) {
    const auto i = static_cast<std::size_t>(id);
    s.centered_loads.push_back(state.loads()[i] - mean);
    s.edge_fractions.push_back(members[i] == 0 ? 0.0
                                               : static_cast<double>(edge[i]) / members[i]);
  }
  return s;
}

}  // namespace udn::env
