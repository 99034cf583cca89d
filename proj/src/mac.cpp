#include "laa/mac.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace laa {

void MacParams::validate() const {
  if (cw_min < 1.0) throw std::invalid_argument("MacParams: cw_min must be >= 1");
  if (m < 0) throw std::invalid_argument("MacParams: m must be >= 0");
  if (!(idle_slot_s > 0.0) || !(busy_slot_s > 0.0) || idle_slot_s >= busy_slot_s)
    throw std::invalid_argument("MacParams: requires 0 < idle_slot < busy_slot");
}

double dbm_to_watt(double dbm) { return std::pow(10.0, (dbm - 30.0) / 10.0); }

double path_loss_db(double distance_m) {
  return 15.3 + 50.0 * std::log10(distance_m);
}

double path_gain(double distance_m) {
  return std::pow(10.0, -path_loss_db(distance_m) / 10.0);
}

double wifi_tau(double q, const MacParams& p) {
  if (q < 0.0 || q > 1.0) throw std::domain_error("wifi_tau: q outside [0,1]");
  const double one_minus_2q = 1.0 - 2.0 * q;
  if (std::abs(one_minus_2q) < 1e-9) {
    // Removable 0/0 at q = 1/2; L'Hopital limit of Eq. (1).
    return 2.0 / ((p.cw_min + 1.0) + p.cw_min * p.m / 2.0);
  }
  const double denom = one_minus_2q * (p.cw_min + 1.0) +
                       q * p.cw_min * (1.0 - std::pow(2.0 * q, p.m));
  return 2.0 * one_minus_2q / denom;
}

double laa_tau(double cw) {
  if (cw < 1.0) throw std::domain_error("laa_tau: cw must be >= 1");
  return 2.0 / (cw + 1.0);
}

StationaryPoint solve_stationary(const ChannelOccupancy& occ, const MacParams& p,
                                 double tol, int max_iter) {
  if (tol <= 0.0) throw std::invalid_argument("solve_stationary: tol must be > 0");

  StationaryPoint sp;
  sp.wap_count = occ.wap_count;
  sp.tau_sbs.reserve(occ.sbs_cws.size());
  double prod_sbs = 1.0;
  for (double cw : occ.sbs_cws) {
    const double tau = laa_tau(cw);
    sp.tau_sbs.push_back(tau);
    prod_sbs *= 1.0 - tau;
  }

  const std::size_t W = occ.wap_count;
  if (W == 0) {
    sp.tau_w = 0.0;
    sp.q_w = 0.0;
    sp.residual = 0.0;
  } else {
    // Damped fixed point on (tau_w, q_w); all WAPs are symmetric.
    constexpr double kDamping = 0.5;
    double tau = wifi_tau(0.0, p);
    double q_prev = 0.0;
    bool converged = false;
    for (int it = 0; it < max_iter; ++it) {
      const double q =
          1.0 - std::pow(1.0 - tau, static_cast<double>(W - 1)) * prod_sbs;
      sp.residual = std::abs(q - q_prev);
      if (it > 0 && sp.residual <= tol) {
        sp.tau_w = tau;
        sp.q_w = q;
        converged = true;
        break;
      }
      q_prev = q;
      tau = (1.0 - kDamping) * tau + kDamping * wifi_tau(q, p);
    }
    if (!converged)
      throw std::runtime_error("solve_stationary: no convergence, residual " +
                               std::to_string(sp.residual));
  }

  sp.p_idle = std::pow(1.0 - sp.tau_w, static_cast<double>(W)) * prod_sbs;
  sp.p_busy = 1.0 - sp.p_idle;
  return sp;
}

double wifi_throughput(const StationaryPoint& sp, const ChannelOccupancy& occ,
                       const MacParams& p) {
  if (occ.wap_count == 0) return 0.0;
  double prod_sbs = 1.0;
  for (double tau : sp.tau_sbs) prod_sbs *= 1.0 - tau;
  const double p_succ =
      sp.tau_w *
      std::pow(1.0 - sp.tau_w, static_cast<double>(occ.wap_count - 1)) * prod_sbs;
  const double mean_slot = sp.p_idle * p.idle_slot_s + sp.p_busy * p.busy_slot_s;
  if (!(mean_slot > 0.0)) throw std::runtime_error("wifi_throughput: zero mean slot");
  return p_succ * p.payload_bits / mean_slot;
}

double laa_airtime(const StationaryPoint& sp, std::size_t sbs_index) {
  if (sbs_index >= sp.tau_sbs.size())
    throw std::out_of_range("laa_airtime: sbs_index");
  double a = sp.tau_sbs[sbs_index];
  for (std::size_t i = 0; i < sp.tau_sbs.size(); ++i)
    if (i != sbs_index) a *= 1.0 - sp.tau_sbs[i];
  a *= std::pow(1.0 - sp.tau_w, static_cast<double>(sp.wap_count));
  return a;
}

double data_fraction(double subframe_s, double reservation_overhead_s) {
  if (!(subframe_s > 0.0))
    throw std::invalid_argument("data_fraction: subframe must be > 0");
  const double burst_s = 10.0 * subframe_s;  // up to 10 LTE sub-frames
  const double xi = 1.0 - reservation_overhead_s / burst_s;
  return xi < 0.0 ? 0.0 : (xi > 1.0 ? 1.0 : xi);
}

double interference_power(const RadioEnvironment& env, std::size_t j,
                          const std::vector<std::size_t>& interferers) {
  const double p_tx = dbm_to_watt(env.tx_power_dbm);
  double total = 0.0;
  for (std::size_t i : interferers) {
    if (i == j) continue;
    total += p_tx * env.cross_gain.at(i).at(j);
  }
  return total;
}

double laa_rate(const RadioEnvironment& env, std::size_t j,
                double interference_w) {
  const auto& gains = env.gains.at(j);
  if (gains.empty()) throw std::domain_error("laa_rate: SBS has no UEs");
  const double p_tx = dbm_to_watt(env.tx_power_dbm);
  const double noise_w =
      env.bandwidth_hz * dbm_to_watt(env.noise_psd_dbm_hz);
  double r = 0.0;
  for (double h : gains)
    r += env.bandwidth_hz *
         std::log2(1.0 + p_tx * h / (interference_w + noise_w));
  return r;
}

double sbs_throughput(const std::vector<double>& alpha_per_channel,
                      const std::vector<double>& xi_per_channel,
                      const std::vector<double>& rate_per_channel) {
  if (alpha_per_channel.size() != xi_per_channel.size() ||
      alpha_per_channel.size() != rate_per_channel.size())
    throw std::invalid_argument("sbs_throughput: dimension mismatch");
  double total = 0.0;
  for (std::size_t c = 0; c < alpha_per_channel.size(); ++c)
    total += alpha_per_channel[c] * xi_per_channel[c] * rate_per_channel[c];
  return total;
}

double cw_from_alpha(double alpha_target, const ChannelOccupancy& occ,
                     const MacParams& p, double cw_max) {
  auto airtime_at = [&](double cw) {
    ChannelOccupancy with = occ;
    with.sbs_cws.push_back(cw);
    const StationaryPoint sp = solve_stationary(with, p);
    return laa_airtime(sp, with.sbs_cws.size() - 1);
  };

  if (occ.wap_count == 0 && occ.sbs_cws.empty()) {
    // Solo SBS: alpha = tau = 2/(cw+1) inverts exactly.
    if (alpha_target > 1.0 || alpha_target <= 0.0)
      throw std::runtime_error("cw_from_alpha: target outside (0, 1]");
    return 2.0 / alpha_target - 1.0;
  }

  const double best = airtime_at(1.0);
  if (alpha_target > best + 1e-12)
    throw std::runtime_error(
        "cw_from_alpha: target unachievable; max achievable alpha = " +
        std::to_string(best));

  // Airtime is monotone decreasing in own CW: find the largest integer CW
  // still meeting the target.
  double lo = 1.0, hi = cw_max;
  if (airtime_at(hi) >= alpha_target - 1e-12) return hi;
  while (hi - lo > 1.0) {
    const double mid = std::floor((lo + hi) / 2.0);
    if (airtime_at(mid) >= alpha_target - 1e-12)
      lo = mid;
    else
      hi = mid;
  }
  return lo;
}

}  // namespace laa
