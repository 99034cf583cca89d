#pragma once

#include <vector>

#include "laa/game.hpp"

namespace laa {

// Discretization for the exhaustive single-epoch searches.
struct ActionGrid {
  std::vector<double> alpha_levels;  // strictly increasing, includes 0

  static ActionGrid default_grid();  // 0.0 .. 1.0 step 0.1
  void validate() const;
};

// Serve-now allocation with instantaneous equal-weighted fairness between
// technologies and among co-channel SBSs; greedy channel selection by
// residual capacity, ties to the lowest channel index. ctx must have T = 1.
Profile reactive_allocate(const GameContext& ctx);

enum class CentralObjective { proportional_fairness, total_throughput };

struct CentralSolution {
  Profile profile;
  double objective = 0.0;
  std::size_t profiles_searched = 0;
};

// Exact exhaustive argmax over the grid, constraints (9)-(12) enforced.
// OpenMP-parallel over profile chunks with a deterministic argmax reduction
// (lexicographically smallest profile index wins ties).
CentralSolution pf_solve(const GameContext& ctx, const ActionGrid& grid);
CentralSolution tnt_solve(const GameContext& ctx, const ActionGrid& grid);

// Serial reference implementations; must agree with the parallel kernels.
CentralSolution pf_solve_serial(const GameContext& ctx, const ActionGrid& grid);
CentralSolution tnt_solve_serial(const GameContext& ctx, const ActionGrid& grid);

// Single-SBS action list used by the searches (also useful for
// best-response audits over the same discretization).
std::vector<ActionSchedule> grid_actions(const GameContext& ctx,
                                         const ActionGrid& grid,
                                         std::size_t j);

}  // namespace laa
