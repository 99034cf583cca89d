#pragma once

#include <cstdint>
#include <vector>

#include "laa/mac.hpp"

namespace laa {

struct SlotSimConfig {
  ChannelOccupancy occ;
  MacParams mac;
  std::uint64_t n_slots = 1000000;  // >= 1e5 for statistical validity
  std::uint64_t seed = 1;
};

struct NodeStats {
  double tau_hat = 0.0;       // attempts / slots
  double q_hat = 0.0;         // 1 - successes / attempts
  double airtime_hat = 0.0;   // successes / slots
  double tau_ci = 0.0;        // 95% half-width
};

struct EmpiricalStats {
  std::vector<NodeStats> waps;
  std::vector<NodeStats> sbss;
  double idle_fraction = 0.0;
  std::uint64_t idle_slots = 0;
  std::uint64_t success_slots = 0;
  std::uint64_t collision_slots = 0;
  std::uint64_t n_slots = 0;
};

// Saturated slot-scale contention sim: WAPs run binary exponential backoff
// (double CW on collision up to cw_max, reset on success), SBSs redraw from a
// fixed CW. Counters tick once per MAC slot.
EmpiricalStats simulate_slots(const SlotSimConfig& cfg);

struct ComparisonCell {
  const char* quantity;
  std::size_t node;
  double analytic;
  double empirical;
  double rel_err;
  bool pass;
};

struct ComparisonReport {
  std::vector<ComparisonCell> cells;
  bool all_pass = true;
};

ComparisonReport compare(const StationaryPoint& analytic,
                         const EmpiricalStats& empirical, double rel_tol);

}  // namespace laa
