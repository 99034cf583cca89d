#pragma once

#include <string>
#include <vector>

#include "laa/game.hpp"

namespace laa {

enum class ServiceScope { lte, wifi, total };

struct EvaluationResult {
  double lte_served_proportion = 0.0;
  double wifi_served_proportion = 0.0;
  double total_served_proportion = 0.0;
  std::vector<double> per_sbs_served;
  double avg_airtime_per_sbs = 0.0;
  double avg_airtime_per_wap = 0.0;
  double jain_technology = 0.0;
  double gain_vs_reactive = 0.0;
  std::string scenario;
};

// (sum l)^2 / (n * sum l^2); throws on all-zero input.
double jain_index(const std::vector<double>& served_proportions);

// Served / offered load over the horizon. Served per (c, t) is f^-1(alpha)
// capped at the demand still unserved within the window.
double served_proportion(const GameContext& ctx, const Profile& profile,
                         ServiceScope scope);

std::vector<double> per_sbs_served_proportion(const GameContext& ctx,
                                              const Profile& profile);

// (mean LTE airtime per SBS) / (mean WLAN airtime per WAP); +inf when WLAN
// airtime is zero.
double airtime_ratio(const std::vector<double>& lte_airtimes,
                     const std::vector<double>& wlan_airtimes,
                     std::size_t sbs_count, std::size_t wap_count);

// (a - b) / b.
double gain(double a, double b);

}  // namespace laa
