// Compares the serial and OpenMP exhaustive-search kernels on a grid of
// instance sizes and prints throughput plus the observed speedup.
#include <chrono>
#include <cstdio>

#include "laa/baselines.hpp"
#include "laa/runner.hpp"

using Clock = std::chrono::steady_clock;

namespace {

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

laa::GameContext make_instance(std::size_t sbs, std::size_t channels) {
  laa::Scenario s;
  s.sbs_count = sbs;
  s.channels = channels;
  s.max_aggregated = 1;
  s.waps_per_channel.assign(channels, 1);
  s.traffic.kind = "uniform";
  s.traffic.level = 0.6;
  s.traffic.epochs = 16;
  laa::GameContext ctx;
  ctx.env = laa::build_radio(s);
  ctx.fc = s.fairness;
  ctx.dm = s.demand;
  ctx.max_aggregated = 1;
  ctx.sbs_demand = laa::LoadMatrix(sbs, 1, 0.6);
  ctx.wlan_demand = laa::LoadMatrix(channels, 1, 0.3);
  return ctx;
}

}  // namespace

int main() {
  const laa::ActionGrid grid = laa::ActionGrid::default_grid();
  std::printf("%6s %9s %14s %12s %12s %9s\n", "J", "C", "profiles", "serial_s",
              "parallel_s", "speedup");
  for (const auto& [sbs, channels] :
       {std::pair<std::size_t, std::size_t>{2, 2}, {2, 3}, {3, 2}, {3, 3}}) {
    const laa::GameContext ctx = make_instance(sbs, channels);

    auto t0 = Clock::now();
    const laa::CentralSolution serial = laa::pf_solve_serial(ctx, grid);
    const double ts = seconds_since(t0);

    t0 = Clock::now();
    const laa::CentralSolution parallel = laa::pf_solve(ctx, grid);
    const double tp = seconds_since(t0);

    if (serial.profile != parallel.profile) {
      std::printf("MISMATCH at J=%zu C=%zu\n", sbs, channels);
      return 1;
    }
    std::printf("%6zu %9zu %14zu %12.4f %12.4f %8.2fx\n", sbs, channels,
                serial.profiles_searched, ts, tp, ts / tp);
  }
  return 0;
}
