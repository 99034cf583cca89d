#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <stdexcept>
#include <vector>

#include "laa/baselines.hpp"
#include "laa/mac.hpp"

using namespace laa;

namespace {

GameContext make_ctx(std::size_t J, std::size_t C, double sbs_load,
                     double wlan_load) {
  GameContext ctx;
  ctx.env.gains.assign(J, {1e-9});
  ctx.env.cross_gain.assign(J, std::vector<double>(J, 1e-11));
  for (std::size_t j = 0; j < J; ++j) ctx.env.cross_gain[j][j] = 0.0;
  ctx.sbs_demand = LoadMatrix(J, 1, sbs_load);
  ctx.wlan_demand = LoadMatrix(C, 1, wlan_load);
  ctx.max_aggregated = 1;
  return ctx;
}

double total_alpha(const Profile& p, std::size_t j) {
  double s = 0.0;
  for (std::size_t c = 0; c < p[j].channels; ++c) s += p[j].alpha_at(c, 0);
  return s;
}

}  // namespace

TEST_CASE("ActionGrid validation") {
  CHECK_NOTHROW(ActionGrid::default_grid().validate());
  CHECK(ActionGrid::default_grid().alpha_levels.size() == 11);
  ActionGrid bad;
  bad.alpha_levels = {0.1, 0.2};
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
  bad.alpha_levels = {0.0, 0.2, 0.2};
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
  bad.alpha_levels = {0.0, 1.5};
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
}

TEST_CASE("reactive: lone SBS with idle WLAN serves its demand in full") {
  GameContext ctx = make_ctx(1, 1, 0.3, 0.0);
  const Profile p = reactive_allocate(ctx);
  CHECK(p[0].x_at(0, 0) == 1);
  CHECK(p[0].alpha_at(0, 0) == doctest::Approx(0.3));
}

TEST_CASE("reactive: symmetric demand at priority ratio 1 splits evenly") {
  GameContext ctx = make_ctx(1, 1, 0.8, 0.8);  // jointly infeasible, symmetric
  const Profile p = reactive_allocate(ctx);
  CHECK(p[0].alpha_at(0, 0) == doctest::Approx(ctx.fc.t_max / 2.0));
  CHECK(wlan_airtime(ctx, p, 0, 0) == doctest::Approx(ctx.fc.t_max / 2.0));
}

TEST_CASE("reactive: overload is capped, never deferred") {
  GameContext ctx = make_ctx(1, 1, 2.0, 0.0);
  const Profile p = reactive_allocate(ctx);
  CHECK(p[0].alpha_at(0, 0) == doctest::Approx(ctx.fc.t_max));
  const ViolationReport r = check_constraints(ctx, p);
  CHECK(r.occupancy <= 1e-12);
}

TEST_CASE("reactive: co-channel SBS shares scale with their needs") {
  GameContext ctx = make_ctx(2, 1, 0.0, 0.0);
  ctx.sbs_demand.at(0, 0) = 0.2;
  ctx.sbs_demand.at(1, 0) = 0.4;
  const Profile p = reactive_allocate(ctx);
  CHECK(p[0].alpha_at(0, 0) == doctest::Approx(0.2));
  CHECK(p[1].alpha_at(0, 0) == doctest::Approx(0.4));
}

TEST_CASE("reactive is stateless across calls") {
  GameContext ctx = make_ctx(2, 2, 0.4, 0.2);
  const Profile a = reactive_allocate(ctx);
  const Profile b = reactive_allocate(ctx);
  CHECK(a == b);
}

TEST_CASE("pf and tnt coincide for a single SBS") {
  GameContext ctx = make_ctx(1, 2, 0.4, 0.1);
  const ActionGrid grid = ActionGrid::default_grid();
  const CentralSolution pf = pf_solve(ctx, grid);
  const CentralSolution tnt = tnt_solve(ctx, grid);
  CHECK(pf.profile == tnt.profile);
  CHECK(total_alpha(pf.profile, 0) == doctest::Approx(0.4));
}

TEST_CASE("two symmetric SBSs, two channels: PF assigns disjoint channels") {
  GameContext ctx = make_ctx(2, 2, 0.4, 0.0);
  ctx.env.cross_gain[0][1] = ctx.env.cross_gain[1][0] = 1e-9;
  const CentralSolution pf = pf_solve(ctx, ActionGrid::default_grid());
  std::size_t c0 = 99, c1 = 99;
  for (std::size_t c = 0; c < 2; ++c) {
    if (pf.profile[0].x_at(c, 0)) c0 = c;
    if (pf.profile[1].x_at(c, 0)) c1 = c;
  }
  REQUIRE(c0 != 99);
  REQUIRE(c1 != 99);
  CHECK(c0 != c1);
}

TEST_CASE("zero demand yields a zero allocation from the searches") {
  GameContext ctx = make_ctx(2, 2, 0.4, 0.1);
  ctx.sbs_demand.at(1, 0) = 0.0;
  const CentralSolution pf = pf_solve(ctx, ActionGrid::default_grid());
  CHECK(total_alpha(pf.profile, 1) == 0.0);
}

TEST_CASE("tnt favors the strong SBS at least as much as pf") {
  GameContext ctx = make_ctx(2, 1, 0.9, 0.0);
  ctx.env.gains[0] = {1e-9};   // strong link
  ctx.env.gains[1] = {1e-11};  // weak link
  const ActionGrid grid = ActionGrid::default_grid();
  const CentralSolution pf = pf_solve(ctx, grid);
  const CentralSolution tnt = tnt_solve(ctx, grid);
  CHECK(total_alpha(tnt.profile, 0) >= total_alpha(pf.profile, 0));
}

TEST_CASE("search results satisfy the hard constraints") {
  GameContext ctx = make_ctx(3, 2, 0.5, 0.2);
  for (const CentralSolution& sol :
       {pf_solve(ctx, ActionGrid::default_grid()),
        tnt_solve(ctx, ActionGrid::default_grid())}) {
    const ViolationReport r = check_constraints(ctx, sol.profile);
    CHECK(r.alpha_le_x <= 1e-12);
    CHECK(r.aggregation <= 1e-12);
    CHECK(r.feasibility <= 1e-12);
    CHECK(r.demand_prefix <= 1e-12);
    CHECK(r.occupancy <= 1e-12);
  }
}

TEST_CASE("parallel and serial searches agree exactly") {
  GameContext ctx = make_ctx(3, 2, 0.5, 0.2);
  ctx.env.cross_gain[0][1] = ctx.env.cross_gain[1][0] = 1e-10;
  const ActionGrid grid = ActionGrid::default_grid();
  const CentralSolution a = pf_solve(ctx, grid);
  const CentralSolution b = pf_solve_serial(ctx, grid);
  CHECK(a.profile == b.profile);
  CHECK(a.objective == doctest::Approx(b.objective).epsilon(1e-14));
  const CentralSolution c = tnt_solve(ctx, grid);
  const CentralSolution d = tnt_solve_serial(ctx, grid);
  CHECK(c.profile == d.profile);
}

TEST_CASE("exhaustive re-enumeration confirms optimality on a small instance") {
  GameContext ctx = make_ctx(2, 2, 0.3, 0.1);
  ActionGrid grid;
  grid.alpha_levels = {0.0, 0.1, 0.2, 0.3};
  const CentralSolution sol = tnt_solve(ctx, grid);
  CHECK(sol.profiles_searched <= 10000);

  // Independent re-enumeration over the same action sets.
  const auto a0 = grid_actions(ctx, grid, 0);
  const auto a1 = grid_actions(ctx, grid, 1);
  CHECK(a0.size() * a1.size() == sol.profiles_searched);
  double best = -1.0;
  for (const ActionSchedule& x : a0)
    for (const ActionSchedule& y : a1) {
      Profile p = {x, y};
      double occ_ok = true;
      for (std::size_t c = 0; c < 2; ++c)
        if (p[0].alpha_at(c, 0) + p[1].alpha_at(c, 0) > ctx.fc.t_max + 1e-12)
          occ_ok = false;
      if (!occ_ok) continue;
      best = std::max(best, base_utility(ctx, p, 0) + base_utility(ctx, p, 1));
    }
  CHECK(sol.objective == doctest::Approx(best).epsilon(1e-12));
}

TEST_CASE("oversized search spaces are rejected with guidance") {
  GameContext ctx = make_ctx(8, 3, 1.0, 0.0);
  ctx.max_aggregated = 3;
  CHECK_THROWS_WITH_AS(pf_solve(ctx, ActionGrid::default_grid()),
                       doctest::Contains("coarsen the grid"),
                       std::runtime_error);
}

TEST_CASE("multi-epoch contexts are rejected") {
  GameContext ctx = make_ctx(1, 1, 0.3, 0.0);
  ctx.sbs_demand = LoadMatrix(1, 2, 0.3);
  ctx.wlan_demand = LoadMatrix(1, 2, 0.0);
  CHECK_THROWS_AS(reactive_allocate(ctx), std::invalid_argument);
  CHECK_THROWS_AS(pf_solve(ctx, ActionGrid::default_grid()),
                  std::invalid_argument);
}
