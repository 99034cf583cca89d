#include "laa/game.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>

namespace laa {

namespace {

// Remaining demand of SBS j at epoch t from the perspective of channel c:
// offered load minus what its allocations on the other channels serve.
double remaining_load(const GameContext& ctx, const Profile& profile,
                      std::size_t j, std::size_t c, std::size_t t) {
  double served_elsewhere = 0.0;
  for (std::size_t cc = 0; cc < ctx.channel_count(); ++cc)
    if (cc != c) served_elsewhere += ctx.dm.served_load(profile[j].alpha_at(cc, t));
  return std::max(0.0, ctx.sbs_demand.at(j, t) - served_elsewhere);
}

double relative_gap(double a, double b) {
  const double scale = std::max(std::abs(a), std::abs(b));
  if (scale == 0.0) return 0.0;
  return std::abs(a - b) / scale;
}

// (1/w_{j,c}) * sum_t alpha_{j,c,t} / sum_t Lbar_{j,t}; nan when the SBS has
// no claim on the channel (zero weight or zero remaining demand).
double operator_ratio(const GameContext& ctx, const Profile& profile,
                      std::size_t j, std::size_t c) {
  double weight = 0.0, alpha_sum = 0.0, lbar_sum = 0.0;
  for (std::size_t t = 0; t < ctx.horizon(); ++t) {
    weight += profile[j].x_at(c, t);
    alpha_sum += profile[j].alpha_at(c, t);
    lbar_sum += remaining_load(ctx, profile, j, c, t);
  }
  if (weight == 0.0 || lbar_sum == 0.0)
    return std::numeric_limits<double>::quiet_NaN();
  return alpha_sum / (weight * lbar_sum);
}

struct TechnologyRatios {
  double lte = std::numeric_limits<double>::quiet_NaN();
  double wifi = std::numeric_limits<double>::quiet_NaN();
};

TechnologyRatios technology_ratios(const GameContext& ctx,
                                   const Profile& profile, std::size_t c) {
  TechnologyRatios r;
  double lte_alpha = 0.0, lte_lbar = 0.0, wifi_alpha = 0.0, wifi_load = 0.0;
  double lte_unserved = 0.0;  // residual demand regardless of channel selection
  for (std::size_t t = 0; t < ctx.horizon(); ++t) {
    for (std::size_t j = 0; j < ctx.sbs_count(); ++j) {
      lte_unserved += remaining_load(ctx, profile, j, c, t);
      if (profile[j].x_at(c, t)) {
        lte_alpha += profile[j].alpha_at(c, t);
        lte_lbar += remaining_load(ctx, profile, j, c, t);
      }
    }
    wifi_alpha += wlan_airtime(ctx, profile, c, t);
    wifi_load += ctx.wlan_demand.at(c, t);
  }
  // Only a zero-demand LTE side is excluded from the comparison. An LTE side
  // that never transmits while demand remains claims a ratio of zero, so a
  // dormant aggregate cannot read as perfectly fair.
  if (lte_lbar > 0.0)
    r.lte = lte_alpha / (ctx.fc.p_lte * lte_lbar);
  else if (lte_unserved > 0.0)
    r.lte = 0.0;
  if (wifi_load > 0.0) r.wifi = wifi_alpha / (ctx.fc.p_wifi * wifi_load);
  return r;
}

bool channel_used(const Profile& profile, std::size_t j, std::size_t c) {
  for (std::size_t t = 0; t < profile[j].horizon; ++t)
    if (profile[j].x_at(c, t)) return true;
  return false;
}

}  // namespace

double rate_at(const GameContext& ctx, const Profile& profile, std::size_t j,
               std::size_t c, std::size_t t) {
  std::vector<std::size_t> interferers;
  for (std::size_t i = 0; i < profile.size(); ++i)
    if (i != j && profile[i].x_at(c, t)) interferers.push_back(i);
  return laa_rate(ctx.env, j, interference_power(ctx.env, j, interferers));
}

double base_utility(const GameContext& ctx, const Profile& profile,
                    std::size_t j) {
  double u = 0.0;
  for (std::size_t t = 0; t < ctx.horizon(); ++t)
    for (std::size_t c = 0; c < ctx.channel_count(); ++c) {
      const double a = profile[j].alpha_at(c, t);
      if (a > 0.0) u += a * ctx.xi * rate_at(ctx, profile, j, c, t);
    }
  return u;
}

double wlan_airtime(const GameContext& ctx, const Profile& profile,
                    std::size_t c, std::size_t t) {
  double sbs_total = 0.0;
  for (const ActionSchedule& a : profile) sbs_total += a.alpha_at(c, t);
  const double wanted = ctx.dm.required_airtime(ctx.wlan_demand.at(c, t));
  return std::max(0.0, std::min(wanted, ctx.fc.t_max - sbs_total));
}

ViolationReport check_constraints(const GameContext& ctx,
                                  const Profile& profile) {
  ViolationReport r;
  const std::size_t J = ctx.sbs_count(), C = ctx.channel_count(),
                    T = ctx.horizon();
  const double mc_cap =
      std::min<double>(static_cast<double>(ctx.max_aggregated), static_cast<double>(C));

  for (std::size_t j = 0; j < J; ++j) {
    double cum_alpha = 0.0, cum_need = 0.0;
    for (std::size_t t = 0; t < T; ++t) {
      double x_sum = 0.0;
      for (std::size_t c = 0; c < C; ++c) {
        const double x = profile[j].x_at(c, t);
        const double a = profile[j].alpha_at(c, t);
        x_sum += x;
        r.alpha_le_x = std::max(r.alpha_le_x, a - x);
        r.feasibility = std::max({r.feasibility, -a, a - 1.0});
        cum_alpha += a;
      }
      r.aggregation = std::max(r.aggregation, x_sum - mc_cap);
      cum_need += ctx.dm.required_airtime(ctx.sbs_demand.at(j, t));
      r.demand_prefix = std::max(r.demand_prefix, cum_alpha - cum_need);
    }
  }

  for (std::size_t c = 0; c < C; ++c) {
    for (std::size_t t = 0; t < T; ++t) {
      double occ = wlan_airtime(ctx, profile, c, t);
      for (std::size_t j = 0; j < J; ++j) occ += profile[j].alpha_at(c, t);
      r.occupancy = std::max(r.occupancy, occ - ctx.fc.t_max);
    }

    // (13): pairwise weighted per-demand airtime ratios of co-channel SBSs.
    std::vector<double> ratios;
    for (std::size_t j = 0; j < J; ++j) {
      if (!channel_used(profile, j, c)) continue;
      const double ratio = operator_ratio(ctx, profile, j, c);
      if (!std::isnan(ratio)) ratios.push_back(ratio);
    }
    for (std::size_t a = 0; a < ratios.size(); ++a)
      for (std::size_t b = a + 1; b < ratios.size(); ++b)
        r.inter_operator =
            std::max(r.inter_operator, relative_gap(ratios[a], ratios[b]));

    // (14): LTE aggregate vs WLAN ratio, priority-scaled.
    const TechnologyRatios tr = technology_ratios(ctx, profile, c);
    if (!std::isnan(tr.lte) && !std::isnan(tr.wifi))
      r.inter_technology =
          std::max(r.inter_technology, relative_gap(tr.lte, tr.wifi));
  }
  return r;
}

double penalty_terms(const GameContext& ctx, const Profile& profile,
                     std::size_t j, const PenaltyCoefficients& rho) {
  const std::size_t C = ctx.channel_count(), T = ctx.horizon();
  const double t2 = static_cast<double>(T) * static_cast<double>(T);
  double term1 = 0.0, term2 = 0.0, term3 = 0.0;

  for (std::size_t c = 0; c < C; ++c)
    for (std::size_t t = 0; t < T; ++t) {
      double occ = wlan_airtime(ctx, profile, c, t);
      for (const ActionSchedule& a : profile) occ += a.alpha_at(c, t);
      const double slack = std::min(0.0, ctx.fc.t_max - occ);
      term1 += slack * slack;
    }

  for (std::size_t c = 0; c < C; ++c) {
    const bool used = channel_used(profile, j, c);
    if (used) {
      const double own = operator_ratio(ctx, profile, j, c);
      if (!std::isnan(own)) {
        for (std::size_t i = 0; i < profile.size(); ++i) {
          if (i == j || !channel_used(profile, i, c)) continue;
          const double other = operator_ratio(ctx, profile, i, c);
          if (std::isnan(other)) continue;
          const double gap = own - other;
          term2 += gap * gap / t2;
        }
      }
    }
    // The technology term binds every player that either transmits on the
    // channel or still has demand it could route there; otherwise a player
    // could shed its fairness obligation by going dormant.
    bool claims = used;
    for (std::size_t t = 0; t < T && !claims; ++t)
      claims = remaining_load(ctx, profile, j, c, t) > 0.0;
    if (claims) {
      const TechnologyRatios tr = technology_ratios(ctx, profile, c);
      if (!std::isnan(tr.lte) && !std::isnan(tr.wifi)) {
        const double gap = tr.lte - tr.wifi;
        term3 += gap * gap / t2;
      }
    }
  }
  return rho.rho1 * term1 + rho.rho2 * term2 + rho.rho3 * term3;
}

double penalized_utility(const GameContext& ctx, const Profile& profile,
                         std::size_t j, const PenaltyCoefficients& rho) {
  return base_utility(ctx, profile, j) - penalty_terms(ctx, profile, j, rho);
}

ExpectedUtility expected_utility(const GameContext& ctx,
                                 const std::vector<MixedStrategy>& strategies,
                                 std::size_t j, const PenaltyCoefficients& rho,
                                 std::size_t n_samples, std::uint64_t seed,
                                 std::size_t exact_threshold) {
  const std::size_t J = strategies.size();
  for (const MixedStrategy& s : strategies) {
    double total = 0.0;
    for (double p : s.probs) total += p;
    if (std::abs(total - 1.0) > 1e-9)
      throw std::invalid_argument("expected_utility: probs must sum to 1");
  }

  double combos = 1.0;
  for (const MixedStrategy& s : strategies)
    combos *= static_cast<double>(s.support.size());

  ExpectedUtility out;
  if (combos <= static_cast<double>(exact_threshold)) {
    // Exact sum over the product distribution, odometer enumeration.
    std::vector<std::size_t> idx(J, 0);
    Profile profile(J);
    double value = 0.0;
    while (true) {
      double p = 1.0;
      for (std::size_t k = 0; k < J; ++k) {
        p *= strategies[k].probs[idx[k]];
        profile[k] = strategies[k].support[idx[k]];
      }
      if (p > 0.0) value += p * penalized_utility(ctx, profile, j, rho);
      std::size_t k = 0;
      for (; k < J; ++k) {
        if (++idx[k] < strategies[k].support.size()) break;
        idx[k] = 0;
      }
      if (k == J) break;
    }
    out.value = value;
    return out;
  }

  std::mt19937_64 rng(seed);
  Profile profile(J);
  double sum = 0.0, sum_sq = 0.0;
  for (std::size_t s = 0; s < n_samples; ++s) {
    for (std::size_t k = 0; k < J; ++k) {
      std::discrete_distribution<std::size_t> d(strategies[k].probs.begin(),
                                                strategies[k].probs.end());
      profile[k] = strategies[k].support[d(rng)];
    }
    const double u = penalized_utility(ctx, profile, j, rho);
    sum += u;
    sum_sq += u * u;
  }
  const double n = static_cast<double>(n_samples);
  out.value = sum / n;
  out.exact = false;
  const double var = std::max(0.0, sum_sq / n - out.value * out.value);
  out.std_error = std::sqrt(var / n);
  return out;
}

PenaltyCoefficients incremental_penalty_update(const PenaltyCoefficients& rho,
                                               const ViolationReport& report,
                                               double tol, double growth) {
  if (growth <= 1.0)
    throw std::invalid_argument("incremental_penalty_update: growth must be > 1");
  PenaltyCoefficients out = rho;
  if (report.occupancy > tol) out.rho1 *= growth;
  if (report.inter_operator > tol) out.rho2 *= growth;
  if (report.inter_technology > tol) out.rho3 *= growth;
  return out;
}

std::vector<std::vector<std::uint8_t>> feasible_channel_vectors(
    std::size_t channels, std::size_t max_aggregated) {
  const std::size_t cap = std::min(max_aggregated, channels);
  std::vector<std::vector<std::uint8_t>> vocab;
  for (std::size_t bits = 0; bits < (std::size_t{1} << channels); ++bits) {
    std::size_t pop = 0;
    std::vector<std::uint8_t> v(channels, 0);
    for (std::size_t c = 0; c < channels; ++c)
      if (bits & (std::size_t{1} << c)) {
        v[c] = 1;
        ++pop;
      }
    if (pop <= cap) vocab.push_back(std::move(v));
  }
  return vocab;
}

double best_response_gap(const GameContext& ctx, const Profile& profile,
                         std::size_t j,
                         const std::vector<ActionSchedule>& candidates,
                         const PenaltyCoefficients& rho) {
  const double current = penalized_utility(ctx, profile, j, rho);
  double best = current;
  Profile deviated = profile;
  for (const ActionSchedule& a : candidates) {
    deviated[j] = a;
    best = std::max(best, penalized_utility(ctx, deviated, j, rho));
  }
  return std::max(0.0, best - current);
}

}  // namespace laa
