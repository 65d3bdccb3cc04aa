#include <doctest.h>

#include <boost/multiprecision/cpp_dec_float.hpp>

#include <cmath>
#include <memory>
#include <numeric>
#include <random>
#include <sstream>

#include "udn/env.hpp"

using namespace udn::env;

namespace {

using Big = boost::multiprecision::cpp_dec_float_50;

// Independent high-precision evaluation of the log-distance law.
double path_loss_oracle(double d_km) {
  const Big d = Big(d_km < 0.035 ? 0.035 : d_km);
  const Big pl = Big("128.1") + Big("37.6") * boost::multiprecision::log10(d);
  return pl.convert_to<double>();
}

std::shared_ptr<const Scenario> small_scenario(std::uint64_t seed, std::size_t n_sbs = 6,
                                               std::size_t users = 60, double demand = 112000) {
  return std::make_shared<const Scenario>(generate_scenario(seed, n_sbs, users, 300.0, demand));
}

CioMatrix random_cio(std::size_t n, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-6.0, 6.0);
  CioMatrix m(n, {});
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) m.set(i, j, u(rng));
  return m;
}

}  // namespace

TEST_CASE("path_loss: agrees with a 50-digit evaluation and clamps short distances") {
  for (double d : {0.001, 0.01, 0.035, 0.05, 0.1, 0.2, 0.4243}) {
    CHECK(path_loss(d) == doctest::Approx(path_loss_oracle(d)).epsilon(1e-14));
  }
  // Below the 35 m floor the loss is flat.
  CHECK(path_loss(0.01) == path_loss(0.035));
  CHECK(path_loss(0.035) == doctest::Approx(73.356958).epsilon(1e-8));
  CHECK(path_loss(0.1) == doctest::Approx(90.5).epsilon(1e-12));
}

TEST_CASE("prb_rate and required_prbs") {
  CHECK(prb_rate(1.0, 180e3) == doctest::Approx(180e3));
  CHECK(prb_rate(3.0, 180e3) == doctest::Approx(360e3));
  CHECK(required_prbs(112000, 224000, 2.0) == doctest::Approx(0.5));
  CHECK(required_prbs(112000, 1000, 2.0) == 2.0);  // capped
  CHECK(required_prbs(112000, 0.0, 2.0) == 2.0);
  CHECK(required_prbs(0.0, 1000, 2.0) == 0.0);
}

TEST_CASE("sinr_from_rsrp: full-buffer interference from every other cell") {
  const std::vector<double> row{-70.0, -80.0, -80.0};
  const double noise = -120.0;
  const double mw = [](double dbm) { return std::pow(10.0, dbm / 10.0); }(-70.0);
  const double interf = 2 * std::pow(10.0, -8.0) + std::pow(10.0, -12.0);
  CHECK(sinr_from_rsrp(row, 0, noise) == doctest::Approx(mw / interf).epsilon(1e-12));
}

TEST_CASE("reward: inverse of the peak load, capped for idle networks") {
  CHECK(reward(std::vector<double>{0.2, 0.5, 0.25}) == doctest::Approx(2.0));
  CHECK(reward(std::vector<double>{0.0, 0.005}) == 100.0);
  CHECK(reward(std::vector<double>{0.01}) == doctest::Approx(100.0));
  CHECK_THROWS_AS(reward(std::vector<double>{}), std::invalid_argument);
}

TEST_CASE("CioMatrix: antisymmetric, bounded, upper triangle round trip") {
  CioMatrix m(4, {});
  m.set(0, 2, 3.5);
  CHECK(m(0, 2) == 3.5);
  CHECK(m(2, 0) == -3.5);
  CHECK_THROWS_AS(m.set(1, 3, 6.5), InvalidAction);
  m.set_clamped(1, 3, 9.0);
  CHECK(m(1, 3) == 6.0);
  CHECK(m(3, 1) == -6.0);

  const std::vector<double> tri{1, 2, 3, 4, 5, -6};
  const auto r = CioMatrix::from_upper_triangle(4, tri, {});
  CHECK(r.upper_triangle() == tri);
  CHECK(r(2, 3) == -6);
  CHECK(r(3, 2) == 6);
  CHECK_THROWS_AS(CioMatrix::from_upper_triangle(4, std::vector<double>{1, 2}, {}), InvalidAction);

  auto bad = CioMatrix::from_dense(2, {0.0, 1.0, 1.0, 0.0}, {});
  CHECK_FALSE(bad.is_valid());
  CHECK_THROWS_AS(bad.validate(), InvalidAction);
}

TEST_CASE("handover_target: A3 margin with offset and hysteresis, ties to the lower id") {
  CioMatrix cio(3, {});
  const std::vector<double> row{-80.0, -77.5, -76.0};
  // Margins: cell 1: 2.5 - 3 < 0, cell 2: 4 - 3 = 1 > 0.
  CHECK(handover_target(row, 0, cio, 3.0) == std::optional<std::size_t>(2));
  cio.set(0, 2, 1.5);  // O_02 = 1.5 kills cell 2's margin
  CHECK_FALSE(handover_target(row, 0, cio, 3.0).has_value());
  cio.set(0, 1, -1.0);  // O_01 = -1 opens cell 1: 2.5 + 1 - 3 = 0.5
  CHECK(handover_target(row, 0, cio, 3.0) == std::optional<std::size_t>(1));

  CioMatrix zero(3, {});
  const std::vector<double> tie{-80.0, -75.0, -75.0};
  CHECK(handover_target(tie, 0, zero, 3.0) == std::optional<std::size_t>(1));
}

TEST_CASE("handover_target: no pair of cells can trigger in both directions") {
  std::mt19937_64 rng(77);
  std::uniform_real_distribution<double> power(-110.0, -60.0);
  std::uniform_real_distribution<double> hys(0.01, 6.0);
  for (int trial = 0; trial < 2000; ++trial) {
    const std::size_t n = 2 + trial % 7;
    std::vector<double> row(n);
    for (auto& v : row) v = power(rng);
    const auto cio = random_cio(n, rng);
    const double h = hys(rng);
    for (std::size_t i = 0; i < n; ++i) {
      const auto t = handover_target(row, i, cio, h);
      if (!t) continue;
      const auto back = handover_target(row, *t, cio, h);
      CHECK_FALSE((back && *back == i));
    }
  }
}

TEST_CASE("generate_scenario: valid, deterministic and seed sensitive") {
  const auto a = generate_scenario(5, 12, 200, 300.0, 112000);
  const auto b = generate_scenario(5, 12, 200, 300.0, 112000);
  const auto c = generate_scenario(6, 12, 200, 300.0, 112000);
  CHECK_NOTHROW(a.validate());
  CHECK(a == b);
  CHECK_FALSE(a == c);
  CHECK(a.n_sbs() == 12);
  CHECK(a.n_users() == 200);
  for (const auto& u : a.users) {
    CHECK(u.demand == 112000);
    CHECK(u.speed >= 1.0);
    CHECK(u.speed <= 10.0);
  }
  CHECK_THROWS_AS(generate_scenario(1, 0, 10, 300.0, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(generate_scenario(1, 3, 10, -1.0, 1.0), std::invalid_argument);
}

TEST_CASE("write_scenario / read_scenario round trip is exact") {
  const auto a = generate_scenario(9, 5, 40, 250.0, 80000);
  std::stringstream ss;
  write_scenario(ss, a);
  const auto b = read_scenario(ss);
  CHECK(a == b);
  std::stringstream junk("not a scenario\n");
  CHECK_THROWS(read_scenario(junk));
}

TEST_CASE("NetworkState: loads are summed PRBs over the PRB budget") {
  NetworkState s(small_scenario(3), 1);
  std::vector<double> used(s.n_sbs(), 0.0);
  for (std::size_t u = 0; u < s.n_users(); ++u)
    used[static_cast<std::size_t>(s.users()[u].serving_cell)] += s.user_prbs(u);
  for (std::size_t i = 0; i < s.n_sbs(); ++i)
    CHECK(s.loads()[i] == doctest::Approx(used[i] / s.scenario().sbs_list[i].n_prb).epsilon(1e-12));
}

TEST_CASE("NetworkState: step keeps users inside the area and reports consistent metrics") {
  auto sc = small_scenario(4);
  NetworkState s(sc, 2);
  std::mt19937_64 rng(8);
  for (int t = 0; t < 300; ++t) {
    const auto r = s.step(random_cio(s.n_sbs(), rng));
    for (const auto& u : s.users()) {
      CHECK(u.position.x >= 0.0);
      CHECK(u.position.x <= sc->area_side);
      CHECK(u.position.y >= 0.0);
      CHECK(u.position.y <= sc->area_side);
    }
    CHECK(r.metrics.loads.size() == s.n_sbs());
    CHECK(r.metrics.max_load ==
          *std::max_element(r.metrics.loads.begin(), r.metrics.loads.end()));
    CHECK(r.reward == reward(r.metrics.loads));
    CHECK(r.metrics.ho_success >= 0);
    CHECK(r.metrics.ho_fail >= 0);
  }
  CHECK(s.time() == 300);
}

TEST_CASE("NetworkState: mobility draws do not depend on the chosen offsets") {
  auto sc = small_scenario(5);
  NetworkState a(sc, 42), b(sc, 42);
  std::mt19937_64 rng(1);
  for (int t = 0; t < 100; ++t) {
    a.step(CioMatrix(a.n_sbs(), {}));
    b.step(random_cio(b.n_sbs(), rng));
    for (std::size_t u = 0; u < a.n_users(); ++u) CHECK(a.users()[u].position == b.users()[u].position);
  }
}

TEST_CASE("NetworkState: rejects malformed actions") {
  NetworkState s(small_scenario(6), 1);
  CHECK_THROWS_AS(s.step(CioMatrix(s.n_sbs() + 1, {})), InvalidAction);
  CHECK_THROWS_AS(s.step(CioMatrix::from_dense(s.n_sbs(),
                                               std::vector<double>(s.n_sbs() * s.n_sbs(), 1.0), {})),
                  InvalidAction);
}

TEST_CASE("evaluate_handovers: admission control blocks overloaded targets") {
  // Two cells 100 m apart; every user sits next to cell 1 but is served by
  // cell 0, so every user wants to move. Demand is high enough that cell 1
  // crosses the admission threshold after a few admissions.
  Scenario sc;
  sc.sbs_list = {{0, {100, 150}, 46.0, 24, 0.0}, {1, {200, 150}, 46.0, 24, 0.0}};
  sc.area_side = 300.0;
  for (int u = 0; u < 20; ++u) {
    User usr;
    usr.id = u;
    usr.position = {200.0, 150.0};
    usr.demand = 2.0e6;
    usr.serving_cell = 0;
    usr.shadowing_db = {0.0, 0.0};
    sc.users.push_back(usr);
  }
  NetworkState s(std::make_shared<const Scenario>(sc), 1, MobilityOptions{0.0, 0.2});
  const auto events = evaluate_handovers(s, CioMatrix(2, {}), sc.channel);
  REQUIRE(events.size() == 20);
  int ok = 0, blocked = 0;
  for (const auto& e : events) (e.outcome == HandoverOutcome::kSuccess ? ok : blocked)++;
  CHECK(ok > 0);
  CHECK(blocked > 0);
  // Admissions stop as soon as cell 1 is above the threshold, and only then.
  bool seen_block = false;
  for (const auto& e : events) {
    if (e.outcome == HandoverOutcome::kBlocked) seen_block = true;
    if (seen_block) CHECK(e.outcome == HandoverOutcome::kBlocked);
  }
  CHECK(s.loads()[1] > sc.channel.admission_threshold);
}

TEST_CASE("observe_state: centered loads sum to zero and edge fractions are fractions") {
  NetworkState s(small_scenario(7, 8, 120), 3);
  const std::vector<int> cluster{1, 4, 6, 7};
  const auto st = observe_state(s, cluster);
  REQUIRE(st.centered_loads.size() == 4);
  CHECK(std::accumulate(st.centered_loads.begin(), st.centered_loads.end(), 0.0) ==
        doctest::Approx(0.0).epsilon(1e-12));
  for (double e : st.edge_fractions) {
    CHECK(e >= 0.0);
    CHECK(e <= 1.0);
  }
  const auto flat = st.flatten();
  CHECK(StateVector::unflatten(flat) == st);
  CHECK_THROWS_AS(observe_state(s, std::vector<int>{}), std::invalid_argument);
}
