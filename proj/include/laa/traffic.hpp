#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

namespace laa {

// Row-major [rows x epochs] load matrix. Rows are entities (SBSs or WLAN
// channels), columns are 5-minute epochs.
struct LoadMatrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> data;

  LoadMatrix() = default;
  LoadMatrix(std::size_t r, std::size_t c, double fill = 0.0)
      : rows(r), cols(c), data(r * c, fill) {}

  double& at(std::size_t r, std::size_t c) { return data[r * cols + c]; }
  double at(std::size_t r, std::size_t c) const { return data[r * cols + c]; }

  bool operator==(const LoadMatrix&) const = default;
};

struct TrafficTrace {
  std::size_t epochs = 0;
  LoadMatrix sbs_load;   // [J x epochs]
  LoadMatrix wlan_load;  // [C x epochs]
  double epoch_duration_s = 300.0;

  std::size_t sbs_count() const { return sbs_load.rows; }
  std::size_t channel_count() const { return wlan_load.rows; }

  bool operator==(const TrafficTrace&) const = default;
};

// history = epochs [t0-H, t0), future = epochs [t0, t0+T). Rows are the
// M = J + C entities, SBSs first.
struct TraceWindow {
  LoadMatrix history;  // [(J+C) x H]
  LoadMatrix future;   // [(J+C) x T]
  std::size_t sbs_count = 0;

  std::size_t entity_count() const { return history.rows; }
  std::size_t history_len() const { return history.cols; }
  std::size_t horizon() const { return future.cols; }
};

// Per-row min-max scaler; constant rows map to 0.5.
struct Scaler {
  std::vector<std::pair<double, double>> row_min_max;

  double forward(std::size_t row, double v) const;
  double inverse(std::size_t row, double v) const;
};

TrafficTrace load_trace(const std::string& path);
void save_trace(const TrafficTrace& trace, const std::string& path);

TrafficTrace synth_uniform(std::size_t sbs_count, std::size_t channel_count,
                           double level, double jitter, std::size_t epochs,
                           std::uint64_t seed);

TrafficTrace synth_periodic(std::size_t sbs_count, std::size_t channel_count,
                            double base, double amplitude, std::size_t period,
                            double noise, std::size_t epochs,
                            std::uint64_t seed);

TraceWindow window(const TrafficTrace& trace, std::size_t t0,
                   std::size_t history_len, std::size_t horizon);

std::pair<TrafficTrace, Scaler> normalize(const TrafficTrace& trace);

}  // namespace laa
