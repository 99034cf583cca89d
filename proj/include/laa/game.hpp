#pragma once

#include <cstdint>
#include <vector>

#include "laa/mac.hpp"
#include "laa/traffic.hpp"

namespace laa {

// One SBS's channel-selection / channel-access plan over C channels x T epochs.
struct ActionSchedule {
  std::size_t channels = 0;
  std::size_t horizon = 0;
  std::vector<std::uint8_t> x;  // C*T, row-major by channel
  std::vector<double> alpha;    // C*T

  ActionSchedule() = default;
  ActionSchedule(std::size_t c, std::size_t t)
      : channels(c), horizon(t), x(c * t, 0), alpha(c * t, 0.0) {}

  std::uint8_t& x_at(std::size_t c, std::size_t t) { return x[c * horizon + t]; }
  std::uint8_t x_at(std::size_t c, std::size_t t) const { return x[c * horizon + t]; }
  double& alpha_at(std::size_t c, std::size_t t) { return alpha[c * horizon + t]; }
  double alpha_at(std::size_t c, std::size_t t) const { return alpha[c * horizon + t]; }

  bool operator==(const ActionSchedule&) const = default;
};

struct FairnessConfig {
  double p_lte = 1.0;
  double p_wifi = 1.0;
  double t_max = 0.9;  // strictly less than 1 under LBT
};

struct PenaltyCoefficients {
  double rho1 = 1.0;  // occupancy cap
  double rho2 = 1.0;  // inter-operator fairness
  double rho3 = 1.0;  // inter-technology fairness
};

// Linear demand<->airtime conversion: f(L) = L / r_ref, f^-1(a) = a * r_ref.
struct DemandModel {
  double r_ref = 1.0;  // load units served per epoch at full airtime

  double required_airtime(double load) const { return load / r_ref; }
  double served_load(double alpha) const { return alpha * r_ref; }
};

struct ViolationReport {
  // Hard per-player constraints, max violation magnitude.
  double alpha_le_x = 0.0;     // (9)
  double aggregation = 0.0;    // (10)
  double feasibility = 0.0;    // x binary / alpha box (12 feasibility)
  double demand_prefix = 0.0;  // (11) cumulative airtime overshoot
  // Coupled constraints.
  double occupancy = 0.0;         // (12) t_max overshoot, airtime units
  double inter_operator = 0.0;    // (13) max relative ratio gap
  double inter_technology = 0.0;  // (14) max relative ratio gap

  bool coupled_satisfied(double tol) const {
    return occupancy <= tol && inter_operator <= tol && inter_technology <= tol;
  }
  bool hard_satisfied(double tol) const {
    return alpha_le_x <= tol && aggregation <= tol && feasibility <= tol &&
           demand_prefix <= tol;
  }
};

struct MixedStrategy {
  std::vector<ActionSchedule> support;
  std::vector<double> probs;
};

// Everything the utilities need besides the strategy profile itself.
struct GameContext {
  RadioEnvironment env;
  FairnessConfig fc;
  DemandModel dm;
  double xi = 0.95;          // reservation-overhead data fraction
  LoadMatrix sbs_demand;     // J x T
  LoadMatrix wlan_demand;    // C x T
  std::size_t max_aggregated = 1;  // M_c

  std::size_t sbs_count() const { return sbs_demand.rows; }
  std::size_t channel_count() const { return wlan_demand.rows; }
  std::size_t horizon() const { return sbs_demand.cols; }
};

using Profile = std::vector<ActionSchedule>;  // one schedule per SBS

// Eq. (5) rate of SBS j on channel c at epoch t with interference from the
// other SBSs active on c at t in `profile`.
double rate_at(const GameContext& ctx, const Profile& profile, std::size_t j,
               std::size_t c, std::size_t t);

// Eq. (6): u_j = sum_t sum_c alpha * xi * r.
double base_utility(const GameContext& ctx, const Profile& profile,
                    std::size_t j);

// Airtime left for WLAN on channel c at epoch t, floored at 0.
double wlan_airtime(const GameContext& ctx, const Profile& profile,
                    std::size_t c, std::size_t t);

ViolationReport check_constraints(const GameContext& ctx,
                                  const Profile& profile);

// Eq. (20). penalized = base - rho1*occ^2 - rho2*op_gaps^2/T^2 - rho3*tech_gaps^2/T^2.
double penalized_utility(const GameContext& ctx, const Profile& profile,
                         std::size_t j, const PenaltyCoefficients& rho);

// Sum of the three penalty terms alone (decomposition checks).
double penalty_terms(const GameContext& ctx, const Profile& profile,
                     std::size_t j, const PenaltyCoefficients& rho);

struct ExpectedUtility {
  double value = 0.0;
  double std_error = 0.0;  // 0 when computed by exact enumeration
  bool exact = true;
};

ExpectedUtility expected_utility(const GameContext& ctx,
                                 const std::vector<MixedStrategy>& strategies,
                                 std::size_t j, const PenaltyCoefficients& rho,
                                 std::size_t n_samples = 100000,
                                 std::uint64_t seed = 1,
                                 std::size_t exact_threshold = 100000);

PenaltyCoefficients incremental_penalty_update(const PenaltyCoefficients& rho,
                                               const ViolationReport& report,
                                               double tol, double growth);

// All x in {0,1}^C with sum(x) <= min(max_aggregated, C), in increasing
// integer order (bit c = channel c). Shared vocabulary of the discrete policy
// head and the baseline search grids.
std::vector<std::vector<std::uint8_t>> feasible_channel_vectors(
    std::size_t channels, std::size_t max_aggregated);

// Max unilateral improvement of SBS j over the candidate set, clamped at 0.
double best_response_gap(const GameContext& ctx, const Profile& profile,
                         std::size_t j,
                         const std::vector<ActionSchedule>& candidates,
                         const PenaltyCoefficients& rho);

}  // namespace laa
