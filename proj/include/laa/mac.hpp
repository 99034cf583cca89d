#pragma once

#include <cstdint>
#include <vector>

namespace laa {

// DCF/LBT contention constants. cw_max = 2^m * cw_min.
struct MacParams {
  double cw_min = 15.0;
  int m = 6;  // backoff stages; cw_max = 2^m * cw_min = 960 (capped at 1023 elsewhere)
  double payload_bits = 12000.0;  // E[D_w]
  double idle_slot_s = 9e-6;      // theta
  double busy_slot_s = 3e-4;      // T_b
  double sifs_s = 16e-6;
  double difs_s = 34e-6;
  double ack_bits = 256.0;

  void validate() const;
};

// Contenders on one unlicensed channel for one epoch.
struct ChannelOccupancy {
  int channel = 0;
  std::size_t wap_count = 0;
  std::vector<double> sbs_cws;  // fixed CW per active SBS
};

struct StationaryPoint {
  double tau_w = 0.0;  // common WAP attempt probability (symmetric WAPs)
  double q_w = 0.0;    // WAP collision probability
  std::size_t wap_count = 0;
  std::vector<double> tau_sbs;
  double p_idle = 1.0;
  double p_busy = 0.0;
  double residual = 0.0;
};

// Linear-scale radio quantities for Eq. (5) style rate evaluation.
struct RadioEnvironment {
  double tx_power_dbm = 20.0;
  double noise_psd_dbm_hz = -92.0;
  double bandwidth_hz = 20e6;
  // gains[j][k]: channel gain from SBS j to its UE k, identical across channels.
  std::vector<std::vector<double>> gains;
  // cross_gain[i][j]: aggregate gain from SBS i's transmission into SBS j's
  // UEs when both are active on the same channel.
  std::vector<std::vector<double>> cross_gain;

  std::size_t ue_count(std::size_t j) const { return gains.at(j).size(); }
};

double dbm_to_watt(double dbm);
double path_loss_db(double distance_m);   // 15.3 + 50 log10(d)
double path_gain(double distance_m);      // linear 10^(-PL/10)

// Eq. (1); the q = 1/2 singularity is removable and evaluated as its limit.
double wifi_tau(double q, const MacParams& p);

// tau = 2 / (CW + 1) for a fixed-CW LBT SBS.
double laa_tau(double cw);

StationaryPoint solve_stationary(const ChannelOccupancy& occ, const MacParams& p,
                                 double tol = 1e-10, int max_iter = 10000);

// Eq. (2): per-WAP throughput in bits/s.
double wifi_throughput(const StationaryPoint& sp, const ChannelOccupancy& occ,
                       const MacParams& p);

// Eq. (3): alpha_j = tau_j * prod_{i != j}(1 - tau_i) * prod_w (1 - tau_w).
double laa_airtime(const StationaryPoint& sp, std::size_t sbs_index);

// Fraction of obtained airtime carrying data: 1 - overhead / burst, clamped
// to [0, 1]. Burst length is 10 subframes (priority class 1).
double data_fraction(double subframe_s, double reservation_overhead_s);

// Eq. (5): sum-rate of all UEs of SBS j with interference power I (watts).
double laa_rate(const RadioEnvironment& env, std::size_t j,
                double interference_w);

// Total interference power at SBS j's UEs from the given co-channel
// transmitting SBS indices.
double interference_power(const RadioEnvironment& env, std::size_t j,
                          const std::vector<std::size_t>& interferers);

// Eq. (4) for one epoch: R_j = sum_c alpha * xi * r.
double sbs_throughput(const std::vector<double>& alpha_per_channel,
                      const std::vector<double>& xi_per_channel,
                      const std::vector<double>& rate_per_channel);

// Largest integer CW whose equilibrium airtime against the other contenders
// in occ still meets alpha_target. Solo case inverts laa_tau exactly.
double cw_from_alpha(double alpha_target, const ChannelOccupancy& occ,
                     const MacParams& p, double cw_max = 1023.0);

}  // namespace laa
