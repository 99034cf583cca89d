#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <stdexcept>
#include <vector>

#include "laa/metrics.hpp"

using namespace laa;

namespace {

GameContext make_ctx(std::size_t J, std::size_t C, std::size_t T,
                     double sbs_load, double wlan_load) {
  GameContext ctx;
  ctx.env.gains.assign(J, {1e-9});
  ctx.env.cross_gain.assign(J, std::vector<double>(J, 0.0));
  ctx.sbs_demand = LoadMatrix(J, T, sbs_load);
  ctx.wlan_demand = LoadMatrix(C, T, wlan_load);
  return ctx;
}

}  // namespace

TEST_CASE("jain_index hand values") {
  CHECK(jain_index({0.5, 0.5}) == doctest::Approx(1.0));
  CHECK(jain_index({1.0, 0.0}) == doctest::Approx(0.5));
  CHECK(jain_index({0.6, 0.3, 0.3}) == doctest::Approx(1.44 / (3.0 * 0.54)));
}

TEST_CASE("jain_index is scale invariant and maximal only at equality") {
  const std::vector<double> l = {0.2, 0.5, 0.7};
  std::vector<double> scaled;
  for (double v : l) scaled.push_back(3.7 * v);
  CHECK(jain_index(scaled) == doctest::Approx(jain_index(l)).epsilon(1e-12));
  CHECK(jain_index(l) < 1.0);
  CHECK(jain_index({0.4, 0.4, 0.4, 0.4}) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("jain_index rejects empty and all-zero input") {
  CHECK_THROWS_AS(jain_index({}), std::domain_error);
  CHECK_THROWS_AS(jain_index({0.0, 0.0}), std::domain_error);
}

TEST_CASE("served_proportion: exact cover, empty schedule, over-provision") {
  GameContext ctx = make_ctx(1, 1, 2, 0.3, 0.0);
  Profile p(1, ActionSchedule(1, 2));

  CHECK(served_proportion(ctx, p, ServiceScope::lte) == 0.0);

  for (std::size_t t = 0; t < 2; ++t) {
    p[0].x_at(0, t) = 1;
    p[0].alpha_at(0, t) = 0.3;
  }
  CHECK(served_proportion(ctx, p, ServiceScope::lte) == doctest::Approx(1.0));

  for (std::size_t t = 0; t < 2; ++t) p[0].alpha_at(0, t) = 0.6;  // 2x needed
  CHECK(served_proportion(ctx, p, ServiceScope::lte) == doctest::Approx(1.0));
}

TEST_CASE("served_proportion: late airtime can clear an earlier backlog") {
  GameContext ctx = make_ctx(1, 1, 2, 0.3, 0.0);
  Profile p(1, ActionSchedule(1, 2));
  p[0].x_at(0, 1) = 1;
  p[0].alpha_at(0, 1) = 0.6;  // nothing at t=0, double at t=1
  CHECK(served_proportion(ctx, p, ServiceScope::lte) == doctest::Approx(1.0));
  CHECK(per_sbs_served_proportion(ctx, p)[0] == doctest::Approx(1.0));
}

TEST_CASE("served_proportion: wifi scope uses leftover airtime per epoch") {
  GameContext ctx = make_ctx(1, 1, 1, 0.0, 0.6);
  Profile p(1, ActionSchedule(1, 1));
  p[0].x_at(0, 0) = 1;
  p[0].alpha_at(0, 0) = 0.5;  // leaves 0.4 of t_max 0.9 for WLAN
  CHECK(served_proportion(ctx, p, ServiceScope::wifi) ==
        doctest::Approx(0.4 / 0.6));
}

TEST_CASE("served_proportion: monotone in a single alpha entry") {
  GameContext ctx = make_ctx(1, 1, 1, 0.5, 0.0);
  Profile p(1, ActionSchedule(1, 1));
  p[0].x_at(0, 0) = 1;
  double prev = -1.0;
  for (double a : {0.0, 0.2, 0.4, 0.6}) {
    p[0].alpha_at(0, 0) = a;
    const double s = served_proportion(ctx, p, ServiceScope::lte);
    CHECK(s >= prev);
    prev = s;
  }
}

TEST_CASE("served_proportion throws on zero offered load") {
  GameContext ctx = make_ctx(1, 1, 1, 0.0, 0.0);
  Profile p(1, ActionSchedule(1, 1));
  CHECK_THROWS_AS(served_proportion(ctx, p, ServiceScope::total),
                  std::domain_error);
}

TEST_CASE("airtime_ratio hand values and infinity sentinel") {
  CHECK(airtime_ratio({0.1, 0.1}, {0.1, 0.1}, 2, 2) == doctest::Approx(1.0));
  CHECK(airtime_ratio({0.2}, {0.1}, 1, 1) == doctest::Approx(2.0));
  CHECK(std::isinf(airtime_ratio({0.2}, {0.0}, 1, 1)));
  CHECK_THROWS_AS(airtime_ratio({}, {}, 0, 1), std::invalid_argument);
}

TEST_CASE("gain hand values and zero-baseline guard") {
  CHECK(gain(0.7, 0.7) == 0.0);
  CHECK(gain(1.2 * 0.5, 0.5) == doctest::Approx(0.2));
  CHECK_THROWS_AS(gain(1.0, 0.0), std::domain_error);
}
