#include "laa/traffic.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numbers>
#include <random>
#include <sstream>
#include <stdexcept>

namespace laa {

namespace {

[[noreturn]] void fail(const std::string& msg) { throw std::runtime_error(msg); }

void validate(const TrafficTrace& t) {
  for (double v : t.sbs_load.data)
    if (!(v >= 0.0) || !std::isfinite(v)) fail("traffic: negative or non-finite SBS load");
  for (double v : t.wlan_load.data)
    if (!(v >= 0.0) || !std::isfinite(v)) fail("traffic: negative or non-finite WLAN load");
}

}  // namespace

double Scaler::forward(std::size_t row, double v) const {
  auto [lo, hi] = row_min_max.at(row);
  if (hi <= lo) return 0.5;
  return (v - lo) / (hi - lo);
}

double Scaler::inverse(std::size_t row, double v) const {
  auto [lo, hi] = row_min_max.at(row);
  if (hi <= lo) return lo;
  return lo + v * (hi - lo);
}

TrafficTrace load_trace(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail("traffic: cannot open " + path);

  std::string line;
  if (!std::getline(in, line)) fail("traffic: empty file " + path);
  if (line != "entity_type,entity_id,epoch,load")
    fail("traffic: bad header in " + path);

  struct Cell {
    int type;  // 0 = sbs, 1 = wlan_channel
    std::size_t id;
    std::size_t epoch;
    double load;
  };
  std::vector<Cell> cells;
  std::size_t max_sbs = 0, max_chan = 0, max_epoch = 0;
  bool any_sbs = false, any_chan = false;

  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::istringstream ss(line);
    std::string type_s, id_s, epoch_s, load_s;
    if (!std::getline(ss, type_s, ',') || !std::getline(ss, id_s, ',') ||
        !std::getline(ss, epoch_s, ',') || !std::getline(ss, load_s))
      fail("traffic: malformed row at line " + std::to_string(lineno));

    Cell c{};
    if (type_s == "sbs")
      c.type = 0;
    else if (type_s == "wlan_channel")
      c.type = 1;
    else
      fail("traffic: unknown entity_type at line " + std::to_string(lineno));
    try {
      c.id = std::stoul(id_s);
      c.epoch = std::stoul(epoch_s);
      c.load = std::stod(load_s);
    } catch (const std::exception&) {
      fail("traffic: malformed row at line " + std::to_string(lineno));
    }
    if (c.load < 0.0 || !std::isfinite(c.load))
      fail("traffic: negative load for " + type_s + " " + id_s + " epoch " +
           epoch_s + " at line " + std::to_string(lineno));
    if (c.type == 0) {
      any_sbs = true;
      max_sbs = std::max(max_sbs, c.id);
    } else {
      any_chan = true;
      max_chan = std::max(max_chan, c.id);
    }
    max_epoch = std::max(max_epoch, c.epoch);
    cells.push_back(c);
  }
  if (cells.empty()) fail("traffic: no data rows in " + path);

  const std::size_t J = any_sbs ? max_sbs + 1 : 0;
  const std::size_t C = any_chan ? max_chan + 1 : 0;
  const std::size_t E = max_epoch + 1;

  TrafficTrace t;
  t.epochs = E;
  t.sbs_load = LoadMatrix(J, E, std::numeric_limits<double>::quiet_NaN());
  t.wlan_load = LoadMatrix(C, E, std::numeric_limits<double>::quiet_NaN());

  for (const Cell& c : cells) {
    LoadMatrix& m = c.type == 0 ? t.sbs_load : t.wlan_load;
    if (!std::isnan(m.at(c.id, c.epoch)))
      fail("traffic: duplicate cell (" + std::string(c.type == 0 ? "sbs" : "wlan_channel") +
           " " + std::to_string(c.id) + ", epoch " + std::to_string(c.epoch) + ")");
    m.at(c.id, c.epoch) = c.load;
  }
  auto check_complete = [](const LoadMatrix& m, const char* kind) {
    for (std::size_t r = 0; r < m.rows; ++r)
      for (std::size_t c = 0; c < m.cols; ++c)
        if (std::isnan(m.at(r, c)))
          fail(std::string("traffic: missing cell (") + kind + " " +
               std::to_string(r) + ", epoch " + std::to_string(c) + ")");
  };
  check_complete(t.sbs_load, "sbs");
  check_complete(t.wlan_load, "wlan_channel");
  validate(t);
  return t;
}

void save_trace(const TrafficTrace& trace, const std::string& path) {
  std::ofstream out(path);
  if (!out) fail("traffic: cannot write " + path);
  out << "entity_type,entity_id,epoch,load\n";
  out.precision(17);
  for (std::size_t r = 0; r < trace.sbs_load.rows; ++r)
    for (std::size_t e = 0; e < trace.epochs; ++e)
      out << "sbs," << r << ',' << e << ',' << trace.sbs_load.at(r, e) << '\n';
  for (std::size_t r = 0; r < trace.wlan_load.rows; ++r)
    for (std::size_t e = 0; e < trace.epochs; ++e)
      out << "wlan_channel," << r << ',' << e << ',' << trace.wlan_load.at(r, e)
          << '\n';
}

TrafficTrace synth_uniform(std::size_t sbs_count, std::size_t channel_count,
                           double level, double jitter, std::size_t epochs,
                           std::uint64_t seed) {
  if (jitter < 0.0 || jitter > level)
    throw std::invalid_argument("synth_uniform: requires level >= jitter >= 0");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> dist(level - jitter, level + jitter);
  TrafficTrace t;
  t.epochs = epochs;
  t.sbs_load = LoadMatrix(sbs_count, epochs);
  t.wlan_load = LoadMatrix(channel_count, epochs);
  for (double& v : t.sbs_load.data) v = jitter == 0.0 ? level : dist(rng);
  for (double& v : t.wlan_load.data) v = jitter == 0.0 ? level : dist(rng);
  return t;
}

TrafficTrace synth_periodic(std::size_t sbs_count, std::size_t channel_count,
                            double base, double amplitude, std::size_t period,
                            double noise, std::size_t epochs,
                            std::uint64_t seed) {
  if (amplitude < 0.0 || amplitude > base)
    throw std::invalid_argument("synth_periodic: requires base >= amplitude >= 0");
  if (period < 2) throw std::invalid_argument("synth_periodic: period must be >= 2");

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> noise_dist(-noise, noise);
  const std::size_t M = sbs_count + channel_count;

  // Deterministic per-entity phase from (seed, entity index).
  std::vector<double> phase(M);
  for (std::size_t m = 0; m < M; ++m) {
    std::uint64_t h = seed ^ (0x9e3779b97f4a7c15ULL * (m + 1));
    h ^= h >> 33;
    h *= 0xff51afd7ed558ccdULL;
    h ^= h >> 33;
    // Quantized to the epoch grid so sampled sinusoids attain their exact
    // extrema over a full period.
    phase[m] = 2.0 * std::numbers::pi *
               static_cast<double>(h % period) / static_cast<double>(period);
  }

  TrafficTrace t;
  t.epochs = epochs;
  t.sbs_load = LoadMatrix(sbs_count, epochs);
  t.wlan_load = LoadMatrix(channel_count, epochs);
  for (std::size_t m = 0; m < M; ++m) {
    LoadMatrix& mat = m < sbs_count ? t.sbs_load : t.wlan_load;
    const std::size_t row = m < sbs_count ? m : m - sbs_count;
    for (std::size_t e = 0; e < epochs; ++e) {
      double v = base +
                 amplitude * std::sin(2.0 * std::numbers::pi * e / period + phase[m]);
      if (noise > 0.0) v += noise_dist(rng);
      mat.at(row, e) = std::max(0.0, v);
    }
  }
  return t;
}

TraceWindow window(const TrafficTrace& trace, std::size_t t0,
                   std::size_t history_len, std::size_t horizon) {
  if (t0 < history_len || t0 + horizon > trace.epochs)
    throw std::out_of_range("window: [t0-H, t0+T) outside trace");
  const std::size_t J = trace.sbs_count();
  const std::size_t C = trace.channel_count();
  TraceWindow w;
  w.sbs_count = J;
  w.history = LoadMatrix(J + C, history_len);
  w.future = LoadMatrix(J + C, horizon);
  for (std::size_t m = 0; m < J + C; ++m) {
    const LoadMatrix& src = m < J ? trace.sbs_load : trace.wlan_load;
    const std::size_t row = m < J ? m : m - J;
    for (std::size_t k = 0; k < history_len; ++k)
      w.history.at(m, k) = src.at(row, t0 - history_len + k);
    for (std::size_t k = 0; k < horizon; ++k)
      w.future.at(m, k) = src.at(row, t0 + k);
  }
  return w;
}

std::pair<TrafficTrace, Scaler> normalize(const TrafficTrace& trace) {
  if (trace.epochs == 0) throw std::invalid_argument("normalize: empty trace");
  TrafficTrace out = trace;
  Scaler s;
  auto do_rows = [&](const LoadMatrix& in, LoadMatrix& dst) {
    for (std::size_t r = 0; r < in.rows; ++r) {
      double lo = in.at(r, 0), hi = in.at(r, 0);
      for (std::size_t c = 0; c < in.cols; ++c) {
        lo = std::min(lo, in.at(r, c));
        hi = std::max(hi, in.at(r, c));
      }
      s.row_min_max.emplace_back(lo, hi);
      const std::size_t row_index = s.row_min_max.size() - 1;
      for (std::size_t c = 0; c < in.cols; ++c)
        dst.at(r, c) = s.forward(row_index, in.at(r, c));
    }
  };
  do_rows(trace.sbs_load, out.sbs_load);
  do_rows(trace.wlan_load, out.wlan_load);
  return {out, s};
}

}  // namespace laa
