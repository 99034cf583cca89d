#include "laa/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace laa {

double jain_index(const std::vector<double>& served_proportions) {
  if (served_proportions.empty())
    throw std::domain_error("jain_index: empty input");
  double sum = 0.0, sum_sq = 0.0;
  for (double l : served_proportions) {
    sum += l;
    sum_sq += l * l;
  }
  if (sum_sq == 0.0) throw std::domain_error("jain_index: all-zero input");
  const double n = static_cast<double>(served_proportions.size());
  return sum * sum / (n * sum_sq);
}

std::vector<double> per_sbs_served_proportion(const GameContext& ctx,
                                              const Profile& profile) {
  std::vector<double> out;
  for (std::size_t j = 0; j < ctx.sbs_count(); ++j) {
    double offered = 0.0, served = 0.0, backlog = 0.0;
    for (std::size_t t = 0; t < ctx.horizon(); ++t) {
      backlog += ctx.sbs_demand.at(j, t);
      offered += ctx.sbs_demand.at(j, t);
      double capacity = 0.0;
      for (std::size_t c = 0; c < ctx.channel_count(); ++c)
        capacity += ctx.dm.served_load(profile[j].alpha_at(c, t));
      const double s = std::min(capacity, backlog);
      served += s;
      backlog -= s;
    }
    out.push_back(offered > 0.0 ? served / offered : 0.0);
  }
  return out;
}

double served_proportion(const GameContext& ctx, const Profile& profile,
                         ServiceScope scope) {
  double lte_offered = 0.0, lte_served = 0.0;
  for (std::size_t j = 0; j < ctx.sbs_count(); ++j) {
    double backlog = 0.0;
    for (std::size_t t = 0; t < ctx.horizon(); ++t) {
      backlog += ctx.sbs_demand.at(j, t);
      lte_offered += ctx.sbs_demand.at(j, t);
      double capacity = 0.0;
      for (std::size_t c = 0; c < ctx.channel_count(); ++c)
        capacity += ctx.dm.served_load(profile[j].alpha_at(c, t));
      const double s = std::min(capacity, backlog);
      lte_served += s;
      backlog -= s;
    }
  }

  // WLAN serves instantaneously; whatever its leftover airtime cannot carry
  // in the epoch is dropped.
  double wifi_offered = 0.0, wifi_served = 0.0;
  for (std::size_t c = 0; c < ctx.channel_count(); ++c)
    for (std::size_t t = 0; t < ctx.horizon(); ++t) {
      const double demand = ctx.wlan_demand.at(c, t);
      wifi_offered += demand;
      wifi_served += std::min(
          ctx.dm.served_load(wlan_airtime(ctx, profile, c, t)), demand);
    }

  double offered = 0.0, served = 0.0;
  switch (scope) {
    case ServiceScope::lte: offered = lte_offered; served = lte_served; break;
    case ServiceScope::wifi: offered = wifi_offered; served = wifi_served; break;
    case ServiceScope::total:
      offered = lte_offered + wifi_offered;
      served = lte_served + wifi_served;
      break;
  }
  if (offered <= 0.0) throw std::domain_error("served_proportion: zero offered load");
  return served / offered;
}

double airtime_ratio(const std::vector<double>& lte_airtimes,
                     const std::vector<double>& wlan_airtimes,
                     std::size_t sbs_count, std::size_t wap_count) {
  if (sbs_count == 0 || wap_count == 0)
    throw std::invalid_argument("airtime_ratio: counts must be >= 1");
  double lte = 0.0, wlan = 0.0;
  for (double a : lte_airtimes) lte += a;
  for (double a : wlan_airtimes) wlan += a;
  lte /= static_cast<double>(sbs_count);
  wlan /= static_cast<double>(wap_count);
  if (wlan == 0.0) return std::numeric_limits<double>::infinity();
  return lte / wlan;
}

double gain(double a, double b) {
  if (b == 0.0) throw std::domain_error("gain: zero baseline");
  return (a - b) / b;
}

}  // namespace laa
