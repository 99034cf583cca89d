#include "laa/oracle.hpp"

#include <cmath>
#include <random>

namespace laa {

namespace {

struct Node {
  bool is_wap = false;
  double cw_min = 15.0;
  double cw_max = 960.0;
  double cw = 15.0;  // current window
  std::uint64_t counter = 0;
  std::uint64_t attempts = 0;
  std::uint64_t successes = 0;
};

std::uint64_t draw_backoff(std::mt19937_64& rng, double cw) {
  const auto slots = static_cast<std::uint64_t>(std::llround(cw));
  std::uniform_int_distribution<std::uint64_t> d(0, slots - 1);
  return d(rng);
}

NodeStats stats_for(const Node& n, std::uint64_t n_slots) {
  NodeStats s;
  s.tau_hat = static_cast<double>(n.attempts) / static_cast<double>(n_slots);
  s.q_hat = n.attempts == 0
                ? 0.0
                : 1.0 - static_cast<double>(n.successes) /
                            static_cast<double>(n.attempts);
  s.airtime_hat =
      static_cast<double>(n.successes) / static_cast<double>(n_slots);
  s.tau_ci = 1.96 * std::sqrt(s.tau_hat * (1.0 - s.tau_hat) /
                              static_cast<double>(n_slots));
  return s;
}

}  // namespace

EmpiricalStats simulate_slots(const SlotSimConfig& cfg) {
  cfg.mac.validate();
  std::mt19937_64 rng(cfg.seed);

  std::vector<Node> nodes;
  for (std::size_t w = 0; w < cfg.occ.wap_count; ++w) {
    Node n;
    n.is_wap = true;
    n.cw_min = cfg.mac.cw_min;
    n.cw_max = cfg.mac.cw_min * std::pow(2.0, cfg.mac.m);
    n.cw = n.cw_min;
    nodes.push_back(n);
  }
  for (double cw : cfg.occ.sbs_cws) {
    Node n;
    n.is_wap = false;
    n.cw_min = n.cw_max = n.cw = cw;
    nodes.push_back(n);
  }
  for (Node& n : nodes) n.counter = draw_backoff(rng, n.cw);

  EmpiricalStats out;
  out.n_slots = cfg.n_slots;

  std::vector<std::size_t> tx;
  for (std::uint64_t slot = 0; slot < cfg.n_slots; ++slot) {
    tx.clear();
    for (std::size_t i = 0; i < nodes.size(); ++i)
      if (nodes[i].counter == 0) tx.push_back(i);

    if (tx.empty()) {
      ++out.idle_slots;
      for (Node& n : nodes) --n.counter;
      continue;
    }

    const bool success = tx.size() == 1;
    if (success)
      ++out.success_slots;
    else
      ++out.collision_slots;

    for (std::size_t i : tx) {
      Node& n = nodes[i];
      ++n.attempts;
      if (success) {
        ++n.successes;
        n.cw = n.cw_min;  // DCF reset after success; no-op for fixed-CW SBS
      } else if (n.is_wap) {
        n.cw = std::min(2.0 * n.cw, n.cw_max);
      }
      n.counter = draw_backoff(rng, n.cw);
    }
    // Non-transmitters count down; fresh redraws start next slot, so a node
    // drawing k attempts again after exactly k + 1 slots.
    std::size_t t = 0;
    for (std::size_t i = 0; i < nodes.size(); ++i) {
      if (t < tx.size() && tx[t] == i) {
        ++t;
        continue;
      }
      if (nodes[i].counter > 0) --nodes[i].counter;
    }
  }

  out.idle_fraction =
      static_cast<double>(out.idle_slots) / static_cast<double>(cfg.n_slots);
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    const NodeStats s = stats_for(nodes[i], cfg.n_slots);
    if (nodes[i].is_wap)
      out.waps.push_back(s);
    else
      out.sbss.push_back(s);
  }
  return out;
}

ComparisonReport compare(const StationaryPoint& analytic,
                         const EmpiricalStats& empirical, double rel_tol) {
  ComparisonReport report;
  auto add = [&](const char* q, std::size_t node, double a, double e) {
    ComparisonCell cell{q, node, a, e, 0.0, true};
    if (a == 0.0 && e == 0.0) {
      cell.rel_err = 0.0;
    } else {
      // Relative to the empirical estimate: the simulation is the oracle.
      const double scale = e != 0.0 ? std::abs(e) : std::abs(a);
      cell.rel_err = std::abs(a - e) / scale;
    }
    cell.pass = cell.rel_err <= rel_tol;
    report.all_pass = report.all_pass && cell.pass;
    report.cells.push_back(cell);
  };

  double prod_sbs = 1.0;
  for (double tau : analytic.tau_sbs) prod_sbs *= 1.0 - tau;

  for (std::size_t w = 0; w < empirical.waps.size(); ++w) {
    add("tau_w", w, analytic.tau_w, empirical.waps[w].tau_hat);
    add("q_w", w, analytic.q_w, empirical.waps[w].q_hat);
    const double alpha_w =
        analytic.tau_w *
        std::pow(1.0 - analytic.tau_w,
                 static_cast<double>(empirical.waps.size() - 1)) *
        prod_sbs;
    add("alpha_w", w, alpha_w, empirical.waps[w].airtime_hat);
  }
  for (std::size_t j = 0; j < empirical.sbss.size(); ++j) {
    add("tau_sbs", j, analytic.tau_sbs.at(j), empirical.sbss[j].tau_hat);
    double q_j = 1.0;
    for (std::size_t i = 0; i < analytic.tau_sbs.size(); ++i)
      if (i != j) q_j *= 1.0 - analytic.tau_sbs[i];
    q_j *= std::pow(1.0 - analytic.tau_w,
                    static_cast<double>(empirical.waps.size()));
    add("q_sbs", j, 1.0 - q_j, empirical.sbss[j].q_hat);
    add("alpha_sbs", j, laa_airtime(analytic, j),
        empirical.sbss[j].airtime_hat);
  }
  return report;
}

}  // namespace laa
