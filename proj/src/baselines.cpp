#include "laa/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace laa {

namespace {

constexpr double kLogGuard = 1e-9;
constexpr std::size_t kMaxProfiles = 10000000;

void require_single_epoch(const GameContext& ctx) {
  if (ctx.horizon() != 1)
    throw std::invalid_argument("baselines: context must have T = 1");
}

double objective_of(const GameContext& ctx, const Profile& profile,
                    CentralObjective obj) {
  // Coupled occupancy: the WLAN term is already floored, so only the SBS sum
  // can overshoot t_max.
  for (std::size_t c = 0; c < ctx.channel_count(); ++c) {
    double sbs_total = 0.0;
    for (const ActionSchedule& a : profile) sbs_total += a.alpha_at(c, 0);
    if (sbs_total > ctx.fc.t_max + 1e-12)
      return -std::numeric_limits<double>::infinity();
  }
  double total = 0.0;
  for (std::size_t j = 0; j < profile.size(); ++j) {
    const double r = base_utility(ctx, profile, j);
    total += obj == CentralObjective::proportional_fairness
                 ? std::log(r + kLogGuard)
                 : r;
  }
  return total;
}

struct Best {
  double objective = -std::numeric_limits<double>::infinity();
  std::size_t index = 0;
  bool valid = false;

  void consider(double obj, std::size_t idx) {
    if (!valid || obj > objective || (obj == objective && idx < index)) {
      objective = obj;
      index = idx;
      valid = true;
    }
  }
};

CentralSolution search(const GameContext& ctx, const ActionGrid& grid,
                       CentralObjective obj, bool parallel) {
  require_single_epoch(ctx);
  grid.validate();
  const std::size_t J = ctx.sbs_count();

  std::vector<std::vector<ActionSchedule>> actions(J);
  std::size_t total = 1;
  for (std::size_t j = 0; j < J; ++j) {
    actions[j] = grid_actions(ctx, grid, j);
    if (actions[j].empty())
      throw std::runtime_error("baselines: empty action set for an SBS");
    if (total > kMaxProfiles / actions[j].size())
      throw std::runtime_error(
          "baselines: search space exceeds 1e7 profiles; coarsen the grid");
    total *= actions[j].size();
  }

  auto decode = [&](std::size_t idx, Profile& out) {
    for (std::size_t j = 0; j < J; ++j) {
      out[j] = actions[j][idx % actions[j].size()];
      idx /= actions[j].size();
    }
  };

  Best best;
  if (parallel) {
#ifdef _OPENMP
    const int n_threads = omp_get_max_threads();
    std::vector<Best> locals(n_threads);
#pragma omp parallel
    {
      const int tid = omp_get_thread_num();
      Profile profile(J);
#pragma omp for schedule(static)
      for (long long i = 0; i < static_cast<long long>(total); ++i) {
        decode(static_cast<std::size_t>(i), profile);
        locals[tid].consider(objective_of(ctx, profile, obj),
                             static_cast<std::size_t>(i));
      }
    }
    for (const Best& b : locals)
      if (b.valid) best.consider(b.objective, b.index);
#else
    parallel = false;
#endif
  }
  if (!parallel) {
    Profile profile(J);
    for (std::size_t i = 0; i < total; ++i) {
      decode(i, profile);
      best.consider(objective_of(ctx, profile, obj), i);
    }
  }

  CentralSolution sol;
  sol.profiles_searched = total;
  sol.objective = best.objective;
  sol.profile.resize(J);
  decode(best.index, sol.profile);
  return sol;
}

}  // namespace

ActionGrid ActionGrid::default_grid() {
  ActionGrid g;
  for (int i = 0; i <= 10; ++i) g.alpha_levels.push_back(i / 10.0);
  return g;
}

void ActionGrid::validate() const {
  if (alpha_levels.empty() || alpha_levels.front() != 0.0)
    throw std::invalid_argument("ActionGrid: levels must start at 0");
  for (std::size_t i = 0; i < alpha_levels.size(); ++i) {
    if (alpha_levels[i] < 0.0 || alpha_levels[i] > 1.0)
      throw std::invalid_argument("ActionGrid: levels must lie in [0,1]");
    if (i > 0 && alpha_levels[i] <= alpha_levels[i - 1])
      throw std::invalid_argument("ActionGrid: levels must be strictly increasing");
  }
}

std::vector<ActionSchedule> grid_actions(const GameContext& ctx,
                                         const ActionGrid& grid,
                                         std::size_t j) {
  require_single_epoch(ctx);
  const std::size_t C = ctx.channel_count();
  const double need = ctx.dm.required_airtime(ctx.sbs_demand.at(j, 0));
  const auto vocab = feasible_channel_vectors(C, ctx.max_aggregated);

  std::vector<ActionSchedule> out;
  for (const auto& x : vocab) {
    std::vector<std::size_t> selected;
    for (std::size_t c = 0; c < C; ++c)
      if (x[c]) selected.push_back(c);

    std::vector<std::size_t> level(selected.size(), 0);
    while (true) {
      double alpha_sum = 0.0;
      for (std::size_t k = 0; k < selected.size(); ++k)
        alpha_sum += grid.alpha_levels[level[k]];
      if (alpha_sum <= need + 1e-12) {  // cumulative-demand cap (T = 1)
        ActionSchedule a(C, 1);
        for (std::size_t c = 0; c < C; ++c) a.x_at(c, 0) = x[c];
        for (std::size_t k = 0; k < selected.size(); ++k)
          a.alpha_at(selected[k], 0) = grid.alpha_levels[level[k]];
        out.push_back(std::move(a));
      }
      std::size_t k = 0;
      for (; k < selected.size(); ++k) {
        if (++level[k] < grid.alpha_levels.size()) break;
        level[k] = 0;
      }
      if (k == selected.size()) break;
    }
  }
  return out;
}

Profile reactive_allocate(const GameContext& ctx) {
  require_single_epoch(ctx);
  const std::size_t J = ctx.sbs_count(), C = ctx.channel_count();

  std::vector<double> need(J);
  for (std::size_t j = 0; j < J; ++j)
    need[j] = ctx.dm.required_airtime(ctx.sbs_demand.at(j, 0));
  std::vector<double> wlan_need(C);
  for (std::size_t c = 0; c < C; ++c)
    wlan_need[c] = ctx.dm.required_airtime(ctx.wlan_demand.at(c, 0));

  // Greedy channel selection: SBSs in index order pick the channels with the
  // most LTE headroom left, ties broken by lowest channel index.
  std::vector<double> committed(C, 0.0);  // LTE demand steered to channel
  std::vector<std::vector<std::size_t>> on_channel(C);
  std::vector<std::vector<std::size_t>> picks(J);
  const std::size_t mc = std::min<std::size_t>(ctx.max_aggregated, C);
  for (std::size_t j = 0; j < J; ++j) {
    if (need[j] <= 0.0) continue;
    std::vector<std::size_t> order(C);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      const double ra = ctx.fc.t_max - wlan_need[a] - committed[a];
      const double rb = ctx.fc.t_max - wlan_need[b] - committed[b];
      if (ra != rb) return ra > rb;
      return a < b;
    });
    for (std::size_t k = 0; k < mc; ++k) {
      picks[j].push_back(order[k]);
      on_channel[order[k]].push_back(j);
      committed[order[k]] += need[j] / static_cast<double>(mc);
    }
  }

  Profile profile(J, ActionSchedule(C, 1));
  for (std::size_t c = 0; c < C; ++c) {
    double lte_need = 0.0;
    for (std::size_t j : on_channel[c])
      lte_need += need[j] / static_cast<double>(picks[j].size());
    const double w_need = wlan_need[c];
    double lte_share = lte_need;
    if (lte_need + w_need > ctx.fc.t_max) {
      // Capacity binds: instantaneous priority-weighted equal split.
      const double wl = ctx.fc.p_lte * lte_need;
      const double ww = ctx.fc.p_wifi * w_need;
      lte_share = wl + ww > 0.0 ? ctx.fc.t_max * wl / (wl + ww) : 0.0;
    }
    for (std::size_t j : on_channel[c]) {
      const double mine = need[j] / static_cast<double>(picks[j].size());
      const double frac = lte_need > 0.0 ? mine / lte_need : 0.0;
      profile[j].x_at(c, 0) = 1;
      profile[j].alpha_at(c, 0) = lte_share * frac;
    }
  }
  return profile;
}

CentralSolution pf_solve(const GameContext& ctx, const ActionGrid& grid) {
  return search(ctx, grid, CentralObjective::proportional_fairness, true);
}
CentralSolution tnt_solve(const GameContext& ctx, const ActionGrid& grid) {
  return search(ctx, grid, CentralObjective::total_throughput, true);
}
CentralSolution pf_solve_serial(const GameContext& ctx, const ActionGrid& grid) {
  return search(ctx, grid, CentralObjective::proportional_fairness, false);
}
CentralSolution tnt_solve_serial(const GameContext& ctx, const ActionGrid& grid) {
  return search(ctx, grid, CentralObjective::total_throughput, false);
}

}  // namespace laa
