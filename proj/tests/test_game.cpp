#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstddef>
#include <vector>

#include "laa/game.hpp"
#include "laa/mac.hpp"

using namespace laa;

namespace {

// J SBSs, each with one UE at unit gain; symmetric weak cross gains.
GameContext make_ctx(std::size_t J, std::size_t C, std::size_t T,
                     double sbs_load = 0.2, double wlan_load = 0.2) {
  GameContext ctx;
  ctx.env.gains.assign(J, {1e-9});
  ctx.env.cross_gain.assign(J, std::vector<double>(J, 1e-11));
  for (std::size_t j = 0; j < J; ++j) ctx.env.cross_gain[j][j] = 0.0;
  ctx.sbs_demand = LoadMatrix(J, T, sbs_load);
  ctx.wlan_demand = LoadMatrix(C, T, wlan_load);
  ctx.max_aggregated = 1;
  return ctx;
}

Profile zero_profile(std::size_t J, std::size_t C, std::size_t T) {
  return Profile(J, ActionSchedule(C, T));
}

}  // namespace

TEST_CASE("base_utility: zero schedule earns nothing") {
  GameContext ctx = make_ctx(2, 2, 3);
  Profile p = zero_profile(2, 2, 3);
  CHECK(base_utility(ctx, p, 0) == 0.0);
  CHECK(base_utility(ctx, p, 1) == 0.0);
}

TEST_CASE("base_utility: lone SBS, one channel, T=1 reduces to alpha*xi*r") {
  GameContext ctx = make_ctx(1, 1, 1);
  Profile p = zero_profile(1, 1, 1);
  p[0].x_at(0, 0) = 1;
  p[0].alpha_at(0, 0) = 0.2;
  const double r = laa_rate(ctx.env, 0, 0.0);
  CHECK(base_utility(ctx, p, 0) == doctest::Approx(0.2 * ctx.xi * r));
}

TEST_CASE("base_utility: co-channel interferer can only hurt") {
  GameContext ctx = make_ctx(2, 1, 1);
  Profile alone = zero_profile(2, 1, 1);
  alone[0].x_at(0, 0) = 1;
  alone[0].alpha_at(0, 0) = 0.3;
  Profile crowded = alone;
  crowded[1].x_at(0, 0) = 1;
  crowded[1].alpha_at(0, 0) = 0.3;
  CHECK(base_utility(ctx, crowded, 0) < base_utility(ctx, alone, 0));
}

TEST_CASE("wlan_airtime branches") {
  GameContext ctx = make_ctx(1, 1, 1, 0.2, 0.4);
  Profile p = zero_profile(1, 1, 1);
  SUBCASE("no SBS on the channel: demand served in full") {
    CHECK(wlan_airtime(ctx, p, 0, 0) == doctest::Approx(0.4));
  }
  SUBCASE("SBSs occupy the whole cap: floored at zero") {
    p[0].x_at(0, 0) = 1;
    p[0].alpha_at(0, 0) = 0.9;
    CHECK(wlan_airtime(ctx, p, 0, 0) == 0.0);
  }
  SUBCASE("partial occupancy caps the leftover") {
    ctx.wlan_demand.at(0, 0) = 0.5;
    p[0].x_at(0, 0) = 1;
    p[0].alpha_at(0, 0) = 0.6;
    CHECK(wlan_airtime(ctx, p, 0, 0) == doctest::Approx(0.3));
  }
}

TEST_CASE("check_constraints: exact-demand schedule is clean") {
  GameContext ctx = make_ctx(1, 1, 2, 0.2);
  Profile p = zero_profile(1, 1, 2);
  for (std::size_t t = 0; t < 2; ++t) {
    p[0].x_at(0, t) = 1;
    p[0].alpha_at(0, t) = ctx.dm.required_airtime(ctx.sbs_demand.at(0, t));
  }
  const ViolationReport r = check_constraints(ctx, p);
  CHECK(r.alpha_le_x == 0.0);
  CHECK(r.aggregation == 0.0);
  CHECK(r.feasibility == 0.0);
  CHECK(r.demand_prefix == 0.0);
  CHECK(r.occupancy == 0.0);
  CHECK(r.inter_operator == 0.0);
}

TEST_CASE("check_constraints: alpha above x flags the access constraint") {
  GameContext ctx = make_ctx(1, 2, 1);
  Profile p = zero_profile(1, 2, 1);
  p[0].alpha_at(1, 0) = 0.25;  // x stays 0
  const ViolationReport r = check_constraints(ctx, p);
  CHECK(r.alpha_le_x == doctest::Approx(0.25));
}

TEST_CASE("check_constraints: aggregation cap counts active channels") {
  GameContext ctx = make_ctx(1, 3, 1);
  ctx.max_aggregated = 1;
  Profile p = zero_profile(1, 3, 1);
  p[0].x_at(0, 0) = 1;
  p[0].x_at(2, 0) = 1;
  CHECK(check_constraints(ctx, p).aggregation == doctest::Approx(1.0));
}

TEST_CASE("check_constraints: cumulative overshoot of demand is reported") {
  GameContext ctx = make_ctx(1, 1, 2, 0.1);
  Profile p = zero_profile(1, 1, 2);
  p[0].x_at(0, 0) = 1;
  p[0].alpha_at(0, 0) = 0.35;  // needs only 0.1 by t=0, 0.2 by t=1
  const ViolationReport r = check_constraints(ctx, p);
  CHECK(r.demand_prefix == doctest::Approx(0.25));
}

TEST_CASE("check_constraints: symmetric co-channel twins are operator-fair") {
  GameContext ctx = make_ctx(2, 1, 2, 0.3);
  Profile p = zero_profile(2, 1, 2);
  for (std::size_t j = 0; j < 2; ++j)
    for (std::size_t t = 0; t < 2; ++t) {
      p[j].x_at(0, t) = 1;
      p[j].alpha_at(0, t) = 0.2;
    }
  CHECK(check_constraints(ctx, p).inter_operator == 0.0);
}

TEST_CASE("penalized utility decomposes exactly into base minus penalties") {
  GameContext ctx = make_ctx(2, 2, 3, 0.3, 0.4);
  PenaltyCoefficients rho{3.0, 5.0, 7.0};
  Profile p = zero_profile(2, 2, 3);
  // Deliberately messy profile with violations.
  for (std::size_t j = 0; j < 2; ++j)
    for (std::size_t c = 0; c < 2; ++c)
      for (std::size_t t = 0; t < 3; ++t) {
        p[j].x_at(c, t) = static_cast<std::uint8_t>((j + c + t) % 2);
        p[j].alpha_at(c, t) = 0.1 + 0.15 * static_cast<double>((j + 2 * c + t) % 4);
      }
  for (std::size_t j = 0; j < 2; ++j) {
    const double lhs = penalized_utility(ctx, p, j, rho) + penalty_terms(ctx, p, j, rho);
    CHECK(lhs == doctest::Approx(base_utility(ctx, p, j)).epsilon(1e-12));
  }
}

TEST_CASE("zero penalty coefficients reduce to the base utility") {
  GameContext ctx = make_ctx(2, 1, 1, 0.0, 0.0);
  Profile p = zero_profile(2, 1, 1);
  for (std::size_t j = 0; j < 2; ++j) {
    p[j].x_at(0, 0) = 1;
    p[j].alpha_at(0, 0) = 0.9;  // grossly violating occupancy
  }
  PenaltyCoefficients zero{0.0, 0.0, 0.0};
  CHECK(penalized_utility(ctx, p, 0, zero) ==
        doctest::Approx(base_utility(ctx, p, 0)));
}

TEST_CASE("occupancy overshoot of 0.1 with rho1=10 costs exactly 0.1") {
  GameContext ctx = make_ctx(2, 1, 1, 1.0, 0.0);  // no WLAN demand
  Profile p = zero_profile(2, 1, 1);
  for (std::size_t j = 0; j < 2; ++j) {
    p[j].x_at(0, 0) = 1;
    p[j].alpha_at(0, 0) = 0.5;  // total occupancy 1.0 vs t_max 0.9
  }
  PenaltyCoefficients rho{10.0, 0.0, 0.0};
  CHECK(penalty_terms(ctx, p, 0, rho) == doctest::Approx(10.0 * 0.1 * 0.1));
  CHECK(penalized_utility(ctx, p, 0, rho) ==
        doctest::Approx(base_utility(ctx, p, 0) - 0.1));
}

TEST_CASE("penalized utility strictly decreases in the violated rho") {
  GameContext ctx = make_ctx(2, 1, 1, 1.0, 0.0);
  Profile p = zero_profile(2, 1, 1);
  for (std::size_t j = 0; j < 2; ++j) {
    p[j].x_at(0, 0) = 1;
    p[j].alpha_at(0, 0) = 0.5;
  }
  double prev = penalized_utility(ctx, p, 0, {1.0, 0.0, 0.0});
  for (double r1 : {2.0, 4.0, 8.0}) {
    const double cur = penalized_utility(ctx, p, 0, {r1, 0.0, 0.0});
    CHECK(cur < prev);
    prev = cur;
  }
}

TEST_CASE("expected_utility: degenerate strategies equal the pure profile") {
  GameContext ctx = make_ctx(2, 2, 1, 0.3, 0.2);
  PenaltyCoefficients rho{1.0, 1.0, 1.0};
  Profile p = zero_profile(2, 2, 1);
  p[0].x_at(0, 0) = 1;
  p[0].alpha_at(0, 0) = 0.3;
  p[1].x_at(1, 0) = 1;
  p[1].alpha_at(1, 0) = 0.3;
  std::vector<MixedStrategy> strat(2);
  strat[0].support = {p[0]};
  strat[0].probs = {1.0};
  strat[1].support = {p[1]};
  strat[1].probs = {1.0};
  const ExpectedUtility eu = expected_utility(ctx, strat, 0, rho);
  CHECK(eu.exact);
  CHECK(eu.std_error == 0.0);
  CHECK(eu.value == doctest::Approx(penalized_utility(ctx, p, 0, rho)));
}

TEST_CASE("expected_utility: zero-probability atoms contribute nothing") {
  GameContext ctx = make_ctx(1, 1, 1, 0.3, 0.2);
  PenaltyCoefficients rho{1.0, 1.0, 1.0};
  ActionSchedule on(1, 1), off(1, 1);
  on.x_at(0, 0) = 1;
  on.alpha_at(0, 0) = 0.3;
  std::vector<MixedStrategy> strat(1);
  strat[0].support = {on, off};
  strat[0].probs = {1.0, 0.0};
  Profile pure = {on};
  CHECK(expected_utility(ctx, strat, 0, rho).value ==
        doctest::Approx(penalized_utility(ctx, pure, 0, rho)));
}

TEST_CASE("expected_utility: Monte-Carlo agrees with exact enumeration") {
  GameContext ctx = make_ctx(2, 2, 1, 0.3, 0.2);
  PenaltyCoefficients rho{2.0, 2.0, 2.0};
  std::vector<MixedStrategy> strat(2);
  for (std::size_t j = 0; j < 2; ++j) {
    for (std::size_t c = 0; c < 2; ++c) {
      ActionSchedule a(2, 1);
      a.x_at(c, 0) = 1;
      a.alpha_at(c, 0) = 0.25;
      strat[j].support.push_back(a);
    }
    strat[j].support.push_back(ActionSchedule(2, 1));  // idle atom, Z=3
    strat[j].probs = {0.5, 0.3, 0.2};
  }
  const ExpectedUtility exact = expected_utility(ctx, strat, 0, rho);
  CHECK(exact.exact);
  const ExpectedUtility mc =
      expected_utility(ctx, strat, 0, rho, 100000, 17, /*exact_threshold=*/1);
  CHECK_FALSE(mc.exact);
  CHECK(mc.std_error > 0.0);
  CHECK(std::abs(mc.value - exact.value) < 3.0 * mc.std_error);
}

TEST_CASE("incremental penalty update grows only the violated coefficients") {
  PenaltyCoefficients rho{1.0, 2.0, 3.0};
  SUBCASE("clean report is a no-op") {
    const PenaltyCoefficients out =
        incremental_penalty_update(rho, ViolationReport{}, 1e-3, 10.0);
    CHECK(out.rho1 == 1.0);
    CHECK(out.rho2 == 2.0);
    CHECK(out.rho3 == 3.0);
  }
  SUBCASE("only the inter-technology gap is violated") {
    ViolationReport rep;
    rep.inter_technology = 0.5;
    const PenaltyCoefficients out =
        incremental_penalty_update(rho, rep, 1e-3, 10.0);
    CHECK(out.rho1 == 1.0);
    CHECK(out.rho2 == 2.0);
    CHECK(out.rho3 == doctest::Approx(30.0));
  }
  SUBCASE("persistent violation grows geometrically") {
    ViolationReport rep;
    rep.inter_technology = 0.5;
    PenaltyCoefficients cur = rho;
    for (int k = 0; k < 4; ++k) cur = incremental_penalty_update(cur, rep, 1e-3, 10.0);
    CHECK(cur.rho3 == doctest::Approx(3.0 * 1e4));
  }
  SUBCASE("growth must exceed 1") {
    CHECK_THROWS_AS(incremental_penalty_update(rho, ViolationReport{}, 1e-3, 1.0),
                    std::invalid_argument);
  }
}

TEST_CASE("feasible_channel_vectors enumerates the capped vocabulary") {
  SUBCASE("C=3, cap 1: empty plus the three singletons, ascending") {
    const auto v = feasible_channel_vectors(3, 1);
    REQUIRE(v.size() == 4);
    CHECK(v[0] == std::vector<std::uint8_t>{0, 0, 0});
    CHECK(v[1] == std::vector<std::uint8_t>{1, 0, 0});
    CHECK(v[2] == std::vector<std::uint8_t>{0, 1, 0});
    CHECK(v[3] == std::vector<std::uint8_t>{0, 0, 1});
  }
  SUBCASE("C=2, cap 2: the full power set") {
    CHECK(feasible_channel_vectors(2, 2).size() == 4);
  }
  SUBCASE("cap larger than C clips to C") {
    CHECK(feasible_channel_vectors(2, 7).size() == 4);
  }
  SUBCASE("C=3, cap 2 drops only the all-ones vector") {
    CHECK(feasible_channel_vectors(3, 2).size() == 7);
  }
}

TEST_CASE("best_response_gap: no candidates beyond the current action") {
  GameContext ctx = make_ctx(1, 2, 1, 0.3, 0.2);
  Profile p = zero_profile(1, 2, 1);
  p[0].x_at(0, 0) = 1;
  p[0].alpha_at(0, 0) = 0.3;
  CHECK(best_response_gap(ctx, p, 0, {p[0]}, {1.0, 1.0, 1.0}) == 0.0);
}

TEST_CASE("best_response_gap: moving off a congested channel pays") {
  GameContext ctx = make_ctx(2, 2, 1, 0.3, 0.0);
  ctx.env.cross_gain[0][1] = ctx.env.cross_gain[1][0] = 1e-9;  // strong coupling
  Profile p = zero_profile(2, 2, 1);
  for (std::size_t j = 0; j < 2; ++j) {
    p[j].x_at(0, 0) = 1;  // both parked on channel 0; channel 1 free
    p[j].alpha_at(0, 0) = 0.3;
  }
  ActionSchedule move(2, 1);
  move.x_at(1, 0) = 1;
  move.alpha_at(1, 0) = 0.3;
  CHECK(best_response_gap(ctx, p, 0, {p[0], move}, {1.0, 1.0, 1.0}) > 0.0);
}

TEST_CASE("pure equilibria at J=2, C=3, T=1 use disjoint channels") {
  GameContext ctx = make_ctx(2, 3, 1, 0.3, 0.0);
  ctx.env.cross_gain[0][1] = ctx.env.cross_gain[1][0] = 1e-9;
  const PenaltyCoefficients rho{1.0, 1.0, 1.0};
  // Candidate actions: stay idle or serve full demand on one channel.
  std::vector<ActionSchedule> acts;
  acts.emplace_back(3, 1);
  for (std::size_t c = 0; c < 3; ++c) {
    ActionSchedule a(3, 1);
    a.x_at(c, 0) = 1;
    a.alpha_at(c, 0) = 0.3;
    acts.push_back(a);
  }
  std::size_t ne_count = 0;
  for (std::size_t i = 0; i < acts.size(); ++i)
    for (std::size_t k = 0; k < acts.size(); ++k) {
      Profile p = {acts[i], acts[k]};
      const bool ne = best_response_gap(ctx, p, 0, acts, rho) == 0.0 &&
                      best_response_gap(ctx, p, 1, acts, rho) == 0.0;
      if (!ne) continue;
      ++ne_count;
      // Every pure equilibrium has both SBSs active on distinct channels.
      CHECK(i >= 1);
      CHECK(k >= 1);
      CHECK(i != k);
    }
  CHECK(ne_count == 6);  // 3 * 2 ordered disjoint assignments
}
