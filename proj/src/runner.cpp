#include "laa/runner.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <numeric>
#include <random>
#include <sstream>

namespace laa {

namespace {

constexpr const char* kToolVersion = "1.0.0";
constexpr int kSchemaVersion = 1;

std::uint64_t fnv1a_bytes(const std::string& bytes) {
  std::uint64_t h = 14695981039346656037ULL;
  for (unsigned char b : bytes) {
    h ^= b;
    h *= 1099511628211ULL;
  }
  return h;
}

const json* find(const json& j, const std::string& key) {
  if (!j.is_object()) return nullptr;
  auto it = j.find(key);
  return it == j.end() ? nullptr : &*it;
}

template <class T>
T get_or(const json& j, const std::string& path, const std::string& key, T def) {
  const json* v = find(j, key);
  if (!v) return def;
  try {
    return v->get<T>();
  } catch (const json::exception&) {
    throw ScenarioError(path + "." + key, "wrong type");
  }
}

double csv_num(double v) { return v; }

std::string fmt_row(const std::vector<std::string>& cells) {
  std::string row;
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (i) row += ',';
    row += cells[i];
  }
  row += '\n';
  return row;
}

std::string num_str(double v) {
  std::ostringstream os;
  os.precision(12);
  os << v;
  return os.str();
}

}  // namespace

Scenario parse_scenario(const json& j) {
  if (!j.is_object()) throw ScenarioError("scenario", "root must be an object");
  Scenario s;
  s.name = get_or<std::string>(j, "scenario", "name", s.name);

  const json net = j.value("network", json::object());
  s.sbs_count = get_or<std::size_t>(net, "network", "sbs_count", s.sbs_count);
  s.channels = get_or<std::size_t>(net, "network", "channels", s.channels);
  s.max_aggregated =
      get_or<std::size_t>(net, "network", "max_aggregated", s.max_aggregated);
  s.waps_per_channel = get_or<std::vector<std::size_t>>(
      net, "network", "waps_per_channel",
      std::vector<std::size_t>(s.channels, 1));
  if (s.sbs_count < 1) throw ScenarioError("network.sbs_count", "must be >= 1");
  if (s.channels < 1) throw ScenarioError("network.channels", "must be >= 1");
  if (s.max_aggregated < 1)
    throw ScenarioError("network.max_aggregated", "must be >= 1");
  if (s.waps_per_channel.size() != s.channels)
    throw ScenarioError("network.waps_per_channel", "size must equal channels");

  const json radio = j.value("radio", json::object());
  s.area_m = get_or<double>(radio, "radio", "area_m", s.area_m);
  s.serving_distance_m =
      get_or<double>(radio, "radio", "serving_distance_m", s.serving_distance_m);
  s.ues_per_sbs = get_or<std::size_t>(radio, "radio", "ues_per_sbs", s.ues_per_sbs);
  s.radio_seed = get_or<std::uint64_t>(radio, "radio", "seed", s.radio_seed);
  if (s.area_m <= 0.0) throw ScenarioError("radio.area_m", "must be > 0");
  if (s.serving_distance_m <= 0.0)
    throw ScenarioError("radio.serving_distance_m", "must be > 0");
  if (s.ues_per_sbs < 1) throw ScenarioError("radio.ues_per_sbs", "must be >= 1");

  const json mac = j.value("mac", json::object());
  s.mac.cw_min = get_or<double>(mac, "mac", "cw_min", s.mac.cw_min);
  s.mac.m = get_or<int>(mac, "mac", "m", s.mac.m);
  s.mac.payload_bits = get_or<double>(mac, "mac", "payload_bits", s.mac.payload_bits);
  s.mac.idle_slot_s = get_or<double>(mac, "mac", "idle_slot_s", s.mac.idle_slot_s);
  s.mac.busy_slot_s = get_or<double>(mac, "mac", "busy_slot_s", s.mac.busy_slot_s);

  const json fair = j.value("fairness", json::object());
  s.fairness.p_lte = get_or<double>(fair, "fairness", "p_lte", s.fairness.p_lte);
  s.fairness.p_wifi = get_or<double>(fair, "fairness", "p_wifi", s.fairness.p_wifi);
  s.fairness.t_max = get_or<double>(fair, "fairness", "t_max", s.fairness.t_max);
  if (s.fairness.t_max <= 0.0 || s.fairness.t_max >= 1.0)
    throw ScenarioError("fairness.t_max", "must be in (0, 1)");
  if (s.fairness.p_lte <= 0.0 || s.fairness.p_wifi <= 0.0)
    throw ScenarioError("fairness.p_lte/p_wifi", "must be > 0");

  const json demand = j.value("demand", json::object());
  s.demand.r_ref = get_or<double>(demand, "demand", "r_ref", 1.0);
  s.xi = get_or<double>(demand, "demand", "xi", s.xi);
  if (s.demand.r_ref <= 0.0) throw ScenarioError("demand.r_ref", "must be > 0");

  const json tr = j.value("traffic", json::object());
  s.traffic.kind = get_or<std::string>(tr, "traffic", "kind", s.traffic.kind);
  s.traffic.path = get_or<std::string>(tr, "traffic", "path", s.traffic.path);
  s.traffic.level = get_or<double>(tr, "traffic", "level", s.traffic.level);
  s.traffic.jitter = get_or<double>(tr, "traffic", "jitter", s.traffic.jitter);
  s.traffic.base = get_or<double>(tr, "traffic", "base", s.traffic.base);
  s.traffic.amplitude = get_or<double>(tr, "traffic", "amplitude", s.traffic.amplitude);
  s.traffic.period = get_or<std::size_t>(tr, "traffic", "period", s.traffic.period);
  s.traffic.noise = get_or<double>(tr, "traffic", "noise", s.traffic.noise);
  s.traffic.epochs = get_or<std::size_t>(tr, "traffic", "epochs", s.traffic.epochs);
  s.traffic.seed = get_or<std::uint64_t>(tr, "traffic", "seed", s.traffic.seed);
  if (s.traffic.kind != "uniform" && s.traffic.kind != "periodic" &&
      s.traffic.kind != "file")
    throw ScenarioError("traffic.kind", "must be uniform | periodic | file");
  if (s.traffic.kind == "file" && s.traffic.path.empty())
    throw ScenarioError("traffic.path", "required for kind=file");

  const json win = j.value("window", json::object());
  s.history = get_or<std::size_t>(win, "window", "history", s.history);
  s.horizon = get_or<std::size_t>(win, "window", "horizon", s.horizon);
  s.train_split = get_or<double>(win, "window", "train_split", s.train_split);
  if (s.history < 1) throw ScenarioError("window.history", "must be >= 1");
  if (s.horizon < 1) throw ScenarioError("window.horizon", "must be >= 1");
  if (s.train_split < 0.0 || s.train_split >= 1.0)
    throw ScenarioError("window.train_split", "must be in [0, 1)");

  const json train = j.value("train", json::object());
  s.train_enabled = get_or<bool>(train, "train", "enabled", false);
  s.train.epochs = get_or<std::size_t>(train, "train", "epochs", s.train.epochs);
  s.train.max_penalty_rounds =
      get_or<std::size_t>(train, "train", "max_penalty_rounds", s.train.max_penalty_rounds);
  s.train.z_samples = get_or<std::size_t>(train, "train", "z_samples", s.train.z_samples);
  s.train.lambda = get_or<double>(train, "train", "learning_rate", s.train.lambda);
  s.train.gamma = get_or<double>(train, "train", "gamma", s.train.gamma);
  s.train.penalty_growth =
      get_or<double>(train, "train", "penalty_growth", s.train.penalty_growth);
  s.train.constraint_tol =
      get_or<double>(train, "train", "constraint_tol", s.train.constraint_tol);
  s.train.reward_scale =
      get_or<double>(train, "train", "reward_scale", s.train.reward_scale);
  s.train.use_baseline = get_or<bool>(train, "train", "use_baseline", true);
  s.train.variance_start =
      get_or<double>(train, "train", "variance_start", s.train.variance_start);
  s.train.variance_end =
      get_or<double>(train, "train", "variance_end", s.train.variance_end);
  s.train.seed = get_or<std::uint64_t>(train, "train", "seed", s.train.seed);
  s.hidden = get_or<std::size_t>(train, "train", "hidden", s.hidden);
  s.action_embed = get_or<std::size_t>(train, "train", "action_embed", s.action_embed);
  s.init_seed = get_or<std::uint64_t>(train, "train", "init_seed", s.init_seed);
  if (s.train.epochs < 1) throw ScenarioError("train.epochs", "must be >= 1");
  if (s.train.z_samples < 1) throw ScenarioError("train.z_samples", "must be >= 1");
  if (s.train.lambda <= 0.0) throw ScenarioError("train.learning_rate", "must be > 0");
  if (s.train.variance_start <= 0.0 || s.train.variance_end <= 0.0)
    throw ScenarioError("train.variance_start/variance_end", "must be > 0");

  s.baselines = get_or<std::vector<std::string>>(j, "scenario", "baselines",
                                                 s.baselines);
  for (const std::string& b : s.baselines)
    if (b != "reactive" && b != "pf" && b != "tnt")
      throw ScenarioError("baselines", "unknown baseline '" + b + "'");
  if (std::find(s.baselines.begin(), s.baselines.end(), "reactive") ==
      s.baselines.end())
    s.baselines.insert(s.baselines.begin(), "reactive");

  const json sweep = j.value("sweep", json::object());
  s.averaging_runs = get_or<std::size_t>(sweep, "sweep", "runs", s.averaging_runs);
  if (s.averaging_runs < 1) throw ScenarioError("sweep.runs", "must be >= 1");
  const json* axes = find(sweep, "axes");
  if (axes) {
    if (!axes->is_object()) throw ScenarioError("sweep.axes", "must be an object");
    for (auto it = axes->begin(); it != axes->end(); ++it) {
      try {
        s.sweep_values[it.key()] = it.value().get<std::vector<double>>();
      } catch (const json::exception&) {
        throw ScenarioError("sweep.axes." + it.key(), "must be a number array");
      }
      if (s.sweep_values[it.key()].empty())
        throw ScenarioError("sweep.axes." + it.key(), "must be non-empty");
    }
  }

  const json vm = j.value("validate_mac", json::object());
  s.mac_max_waps = get_or<std::size_t>(vm, "validate_mac", "max_waps", s.mac_max_waps);
  s.mac_max_sbs = get_or<std::size_t>(vm, "validate_mac", "max_sbs", s.mac_max_sbs);
  s.mac_cws = get_or<std::vector<double>>(vm, "validate_mac", "cws", s.mac_cws);
  s.mac_slots = get_or<std::uint64_t>(vm, "validate_mac", "slots", s.mac_slots);
  s.mac_rel_tol = get_or<double>(vm, "validate_mac", "rel_tol", s.mac_rel_tol);
  s.mac_perturb = get_or<bool>(vm, "validate_mac", "perturb", s.mac_perturb);

  return s;
}

Scenario load_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ScenarioError("scenario", "cannot open " + path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw ScenarioError("scenario", std::string("invalid JSON: ") + e.what());
  }
  return parse_scenario(j);
}

TrafficTrace build_trace(const Scenario& s) {
  if (s.traffic.kind == "file") return load_trace(s.traffic.path);
  if (s.traffic.kind == "uniform")
    return synth_uniform(s.sbs_count, s.channels, s.traffic.level,
                         s.traffic.jitter, s.traffic.epochs, s.traffic.seed);
  return synth_periodic(s.sbs_count, s.channels, s.traffic.base,
                        s.traffic.amplitude, s.traffic.period, s.traffic.noise,
                        s.traffic.epochs, s.traffic.seed);
}

RadioEnvironment build_radio(const Scenario& s) {
  RadioEnvironment env;
  std::mt19937_64 rng(s.radio_seed);
  std::uniform_real_distribution<double> pos(0.0, s.area_m);
  std::uniform_real_distribution<double> angle(0.0, 2.0 * std::numbers::pi);

  std::vector<std::pair<double, double>> sbs_pos;
  std::vector<std::vector<std::pair<double, double>>> ue_pos;
  for (std::size_t jx = 0; jx < s.sbs_count; ++jx) {
    const double x = pos(rng), y = pos(rng);
    sbs_pos.emplace_back(x, y);
    std::vector<std::pair<double, double>> ues;
    for (std::size_t k = 0; k < s.ues_per_sbs; ++k) {
      const double a = angle(rng);
      ues.emplace_back(x + s.serving_distance_m * std::cos(a),
                       y + s.serving_distance_m * std::sin(a));
    }
    ue_pos.push_back(std::move(ues));
  }

  env.gains.assign(s.sbs_count, std::vector<double>(
                                    s.ues_per_sbs, path_gain(s.serving_distance_m)));
  env.cross_gain.assign(s.sbs_count, std::vector<double>(s.sbs_count, 0.0));
  for (std::size_t i = 0; i < s.sbs_count; ++i)
    for (std::size_t jx = 0; jx < s.sbs_count; ++jx) {
      if (i == jx) continue;
      double g = 0.0;
      for (const auto& [ux, uy] : ue_pos[jx]) {
        const double dx = sbs_pos[i].first - ux, dy = sbs_pos[i].second - uy;
        const double d = std::max(1.0, std::hypot(dx, dy));
        g += path_gain(d);
      }
      env.cross_gain[i][jx] = g;
    }
  return env;
}

namespace {

GameContext make_context(const Scenario& s, const RadioEnvironment& env,
                         const TraceWindow& raw_window) {
  GameContext ctx;
  ctx.env = env;
  ctx.fc = s.fairness;
  ctx.dm = s.demand;
  ctx.xi = s.xi;
  ctx.max_aggregated = s.max_aggregated;
  const std::size_t T = raw_window.horizon();
  ctx.sbs_demand = LoadMatrix(s.sbs_count, T);
  ctx.wlan_demand = LoadMatrix(s.channels, T);
  for (std::size_t jx = 0; jx < s.sbs_count; ++jx)
    for (std::size_t t = 0; t < T; ++t)
      ctx.sbs_demand.at(jx, t) = raw_window.future.at(jx, t);
  for (std::size_t c = 0; c < s.channels; ++c)
    for (std::size_t t = 0; t < T; ++t)
      ctx.wlan_demand.at(c, t) = raw_window.future.at(s.sbs_count + c, t);
  return ctx;
}

GameContext slice_context(const GameContext& ctx, std::size_t t) {
  GameContext one = ctx;
  one.sbs_demand = LoadMatrix(ctx.sbs_count(), 1);
  one.wlan_demand = LoadMatrix(ctx.channel_count(), 1);
  for (std::size_t jx = 0; jx < ctx.sbs_count(); ++jx)
    one.sbs_demand.at(jx, 0) = ctx.sbs_demand.at(jx, t);
  for (std::size_t c = 0; c < ctx.channel_count(); ++c)
    one.wlan_demand.at(c, 0) = ctx.wlan_demand.at(c, t);
  return one;
}

// Runs a single-epoch solver per future epoch and splices the schedules.
template <class Solver>
Profile per_epoch_profile(const GameContext& ctx, Solver&& solve) {
  const std::size_t T = ctx.horizon();
  Profile out(ctx.sbs_count(), ActionSchedule(ctx.channel_count(), T));
  for (std::size_t t = 0; t < T; ++t) {
    const Profile slice = solve(slice_context(ctx, t));
    for (std::size_t jx = 0; jx < ctx.sbs_count(); ++jx)
      for (std::size_t c = 0; c < ctx.channel_count(); ++c) {
        out[jx].x_at(c, t) = slice[jx].x_at(c, 0);
        out[jx].alpha_at(c, t) = slice[jx].alpha_at(c, 0);
      }
  }
  return out;
}

MethodMetrics evaluate_profile(const Scenario& s, const GameContext& ctx,
                               const Profile& profile,
                               const std::string& method) {
  MethodMetrics m;
  m.method = method;
  m.lte_served = served_proportion(ctx, profile, ServiceScope::lte);
  m.wifi_served = served_proportion(ctx, profile, ServiceScope::wifi);
  m.total_served = served_proportion(ctx, profile, ServiceScope::total);
  m.per_sbs_served = per_sbs_served_proportion(ctx, profile);

  const std::size_t T = ctx.horizon();
  std::vector<double> lte_airtimes(ctx.sbs_count(), 0.0);
  for (std::size_t jx = 0; jx < ctx.sbs_count(); ++jx)
    for (std::size_t c = 0; c < ctx.channel_count(); ++c)
      for (std::size_t t = 0; t < T; ++t)
        lte_airtimes[jx] += profile[jx].alpha_at(c, t);
  for (double& a : lte_airtimes) a /= static_cast<double>(T);

  std::size_t wap_total = 0;
  std::vector<double> wap_airtimes;
  for (std::size_t c = 0; c < ctx.channel_count(); ++c) {
    const std::size_t w = s.waps_per_channel[c];
    if (w == 0) continue;
    double at = 0.0;
    for (std::size_t t = 0; t < T; ++t) at += wlan_airtime(ctx, profile, c, t);
    at /= static_cast<double>(T);
    for (std::size_t k = 0; k < w; ++k)
      wap_airtimes.push_back(at / static_cast<double>(w));
    wap_total += w;
  }

  const double lte_sum =
      std::accumulate(lte_airtimes.begin(), lte_airtimes.end(), 0.0);
  m.avg_airtime_per_sbs = lte_sum / static_cast<double>(ctx.sbs_count());
  const double wap_sum =
      std::accumulate(wap_airtimes.begin(), wap_airtimes.end(), 0.0);
  m.avg_airtime_per_wap =
      wap_total ? wap_sum / static_cast<double>(wap_total) : 0.0;
  m.airtime_ratio = wap_total
                        ? airtime_ratio(lte_airtimes, wap_airtimes,
                                        ctx.sbs_count(), wap_total)
                        : std::numeric_limits<double>::infinity();

  if (m.lte_served > 0.0 || m.wifi_served > 0.0)
    m.jain_technology = jain_index({m.lte_served, m.wifi_served});
  return m;
}

MethodMetrics mean_metrics(const std::vector<MethodMetrics>& rows) {
  MethodMetrics m;
  if (rows.empty()) return m;
  m.method = rows.front().method;
  m.per_sbs_served.assign(rows.front().per_sbs_served.size(), 0.0);
  for (const MethodMetrics& r : rows) {
    m.lte_served += r.lte_served;
    m.wifi_served += r.wifi_served;
    m.total_served += r.total_served;
    m.avg_airtime_per_sbs += r.avg_airtime_per_sbs;
    m.avg_airtime_per_wap += r.avg_airtime_per_wap;
    m.airtime_ratio += r.airtime_ratio;
    m.jain_technology += r.jain_technology;
    m.gain_vs_reactive += r.gain_vs_reactive;
    for (std::size_t i = 0; i < m.per_sbs_served.size(); ++i)
      m.per_sbs_served[i] += r.per_sbs_served[i];
  }
  const double n = static_cast<double>(rows.size());
  m.lte_served /= n;
  m.wifi_served /= n;
  m.total_served /= n;
  m.avg_airtime_per_sbs /= n;
  m.avg_airtime_per_wap /= n;
  m.airtime_ratio /= n;
  m.jain_technology /= n;
  m.gain_vs_reactive /= n;
  for (double& v : m.per_sbs_served) v /= n;
  return m;
}

json metrics_json(const MethodMetrics& m) {
  json j;
  j["method"] = m.method;
  j["lte_served_proportion"] = csv_num(m.lte_served);
  j["wifi_served_proportion"] = csv_num(m.wifi_served);
  j["total_served_proportion"] = csv_num(m.total_served);
  j["per_sbs_served"] = m.per_sbs_served;
  j["avg_airtime_per_sbs"] = m.avg_airtime_per_sbs;
  j["avg_airtime_per_wap"] = m.avg_airtime_per_wap;
  j["airtime_ratio"] = std::isfinite(m.airtime_ratio) ? json(m.airtime_ratio)
                                                      : json("inf");
  j["jain_technology"] = m.jain_technology;
  j["gain_vs_reactive"] = m.gain_vs_reactive;
  return j;
}

struct Evaluated {
  std::vector<MethodMetrics> methods;  // averaged over eval windows
  json training = json::object();
  bool converged = true;
  std::optional<PolicyModel> model;
  ViolationReport proposed_violations;
  std::size_t train_windows = 0;
  std::size_t eval_windows = 0;
};

Evaluated run_pipeline(const Scenario& s) {
  Evaluated out;
  const TrafficTrace trace = build_trace(s);
  if (trace.sbs_count() != s.sbs_count || trace.channel_count() != s.channels)
    throw ScenarioError("traffic", "trace shape does not match network config");
  const auto [norm_trace, scaler] = normalize(trace);
  const RadioEnvironment env = build_radio(s);

  std::vector<TraceWindow> raw_windows, norm_windows;
  for (std::size_t t0 = s.history; t0 + s.horizon <= trace.epochs;
       t0 += s.horizon) {
    raw_windows.push_back(window(trace, t0, s.history, s.horizon));
    norm_windows.push_back(window(norm_trace, t0, s.history, s.horizon));
  }
  if (raw_windows.empty())
    throw ScenarioError("window", "trace too short for history + horizon");

  std::size_t n_train = static_cast<std::size_t>(
      s.train_split * static_cast<double>(raw_windows.size()));
  if (s.train_enabled && n_train == 0) n_train = 1;
  if (n_train >= raw_windows.size()) n_train = raw_windows.size() - 1;
  const std::size_t n_eval = raw_windows.size() - n_train;
  out.train_windows = n_train;
  out.eval_windows = n_eval;

  // Train the proposed policy if requested.
  PenaltyCoefficients rho_eval{1.0, 1.0, 1.0};
  if (s.train_enabled) {
    std::vector<TrainExample> dataset;
    for (std::size_t i = 0; i < n_train; ++i)
      dataset.push_back(
          TrainExample{norm_windows[i], make_context(s, env, raw_windows[i])});
    PolicyConfig pc;
    pc.sbs_count = s.sbs_count;
    pc.channels = s.channels;
    pc.max_aggregated = s.max_aggregated;
    pc.hidden = s.hidden;
    pc.action_embed = s.action_embed;
    pc.init_seed = s.init_seed;
    PolicyModel model = make_policy(pc);
    TrainingLog log;
    try {
      log = train(model, dataset, s.train);
    } catch (const TrainDivergence& d) {
      log = d.log;
      out.converged = false;
    }
    rho_eval = log.final_rho;
    out.model = std::move(model);
    json epochs = json::array();
    for (const EpochLog& el : log.epochs) {
      json e;
      e["expected_penalized_utility"] = el.expected_penalized_utility;
      e["max_occupancy_violation"] = el.violations.occupancy;
      e["max_inter_operator_gap"] = el.violations.inter_operator;
      e["max_inter_technology_gap"] = el.violations.inter_technology;
      epochs.push_back(e);
    }
    out.training["converged"] = log.converged;
    out.training["penalty_rounds"] = log.penalty_rounds;
    out.training["epochs"] = epochs;
  }

  // Evaluate all requested methods over the held-out windows.
  std::vector<std::string> methods;
  if (s.train_enabled) methods.push_back("proposed");
  for (const std::string& b : s.baselines) methods.push_back(b);

  const ActionGrid grid = ActionGrid::default_grid();
  std::map<std::string, std::vector<MethodMetrics>> per_window;
  for (std::size_t i = n_train; i < raw_windows.size(); ++i) {
    const GameContext ctx = make_context(s, env, raw_windows[i]);
    std::map<std::string, Profile> profiles;
    profiles["reactive"] = per_epoch_profile(
        ctx, [](const GameContext& c1) { return reactive_allocate(c1); });
    for (const std::string& meth : methods) {
      if (meth == "proposed") {
        profiles[meth] = infer(*out.model, norm_windows[i], s.horizon);
        const ViolationReport r = check_constraints(ctx, profiles[meth]);
        out.proposed_violations.occupancy =
            std::max(out.proposed_violations.occupancy, r.occupancy);
        out.proposed_violations.inter_operator =
            std::max(out.proposed_violations.inter_operator, r.inter_operator);
        out.proposed_violations.inter_technology = std::max(
            out.proposed_violations.inter_technology, r.inter_technology);
      } else if (meth == "pf") {
        profiles[meth] = per_epoch_profile(ctx, [&](const GameContext& c1) {
          return pf_solve(c1, grid).profile;
        });
      } else if (meth == "tnt") {
        profiles[meth] = per_epoch_profile(ctx, [&](const GameContext& c1) {
          return tnt_solve(c1, grid).profile;
        });
      }
    }
    const MethodMetrics reactive_m =
        evaluate_profile(s, ctx, profiles["reactive"], "reactive");
    for (const std::string& meth : methods) {
      MethodMetrics m = meth == "reactive"
                            ? reactive_m
                            : evaluate_profile(s, ctx, profiles[meth], meth);
      m.gain_vs_reactive =
          reactive_m.total_served > 0.0
              ? gain(m.total_served, reactive_m.total_served)
              : 0.0;
      per_window[meth].push_back(std::move(m));
    }
  }
  for (const std::string& meth : methods)
    out.methods.push_back(mean_metrics(per_window[meth]));
  (void)rho_eval;
  return out;
}

json scenario_echo(const Scenario& s) {
  json j;
  j["name"] = s.name;
  j["sbs_count"] = s.sbs_count;
  j["channels"] = s.channels;
  j["max_aggregated"] = s.max_aggregated;
  j["horizon"] = s.horizon;
  j["history"] = s.history;
  j["priority_ratio"] = s.fairness.p_lte / s.fairness.p_wifi;
  j["t_max"] = s.fairness.t_max;
  j["traffic_kind"] = s.traffic.kind;
  j["train_enabled"] = s.train_enabled;
  return j;
}

json make_manifest(const Scenario& s, std::uint64_t config_hash) {
  json m;
  m["tool_version"] = kToolVersion;
  m["schema_version"] = kSchemaVersion;
  m["config_hash"] = config_hash;
  m["seeds"]["traffic"] = s.traffic.seed;
  m["seeds"]["radio"] = s.radio_seed;
  m["seeds"]["train"] = s.train.seed;
  m["seeds"]["init"] = s.init_seed;
  const auto now = std::chrono::system_clock::now();
  m["generated_at_unix"] =
      std::chrono::duration_cast<std::chrono::seconds>(now.time_since_epoch())
          .count();
  return m;
}

std::string methods_csv(const std::vector<MethodMetrics>& methods) {
  std::string csv = fmt_row({"method", "lte_served", "wifi_served",
                             "total_served", "avg_airtime_per_sbs",
                             "avg_airtime_per_wap", "airtime_ratio",
                             "jain_technology", "gain_vs_reactive"});
  for (const MethodMetrics& m : methods)
    csv += fmt_row({m.method, num_str(m.lte_served), num_str(m.wifi_served),
                    num_str(m.total_served), num_str(m.avg_airtime_per_sbs),
                    num_str(m.avg_airtime_per_wap), num_str(m.airtime_ratio),
                    num_str(m.jain_technology), num_str(m.gain_vs_reactive)});
  return csv;
}

std::uint64_t scenario_hash(const Scenario& s) {
  // Hash a canonical echo of the physics-relevant fields.
  json j = scenario_echo(s);
  j["traffic_seed"] = s.traffic.seed;
  j["radio_seed"] = s.radio_seed;
  j["train_seed"] = s.train.seed;
  j["init_seed"] = s.init_seed;
  return fnv1a_bytes(j.dump());
}

}  // namespace

RunOutput run_scenario(const Scenario& s) {
  const Evaluated ev = run_pipeline(s);

  RunOutput out;
  out.converged = ev.converged;
  out.model = ev.model;

  json r;
  r["schema_version"] = kSchemaVersion;
  r["scenario"] = scenario_echo(s);
  r["status"] = ev.converged ? "ok" : "non-converged";
  r["windows"]["train"] = ev.train_windows;
  r["windows"]["eval"] = ev.eval_windows;
  json methods = json::array();
  for (const MethodMetrics& m : ev.methods) methods.push_back(metrics_json(m));
  r["methods"] = methods;
  if (s.train_enabled) {
    r["training"] = ev.training;
    r["proposed_violations"]["occupancy"] = ev.proposed_violations.occupancy;
    r["proposed_violations"]["inter_operator"] =
        ev.proposed_violations.inter_operator;
    r["proposed_violations"]["inter_technology"] =
        ev.proposed_violations.inter_technology;
  }
  out.results = std::move(r);
  out.manifest = make_manifest(s, scenario_hash(s));
  out.csvs["metrics.csv"] = methods_csv(ev.methods);
  return out;
}

RunOutput sweep_scenario(const Scenario& s, const std::string& axis) {
  static const std::vector<std::string> kAxes{"T", "Mc", "priority_ratio",
                                              "learning_rate", "sbs_count"};
  if (std::find(kAxes.begin(), kAxes.end(), axis) == kAxes.end())
    throw ScenarioError("sweep.axes." + axis, "unknown axis");
  auto it = s.sweep_values.find(axis);
  if (it == s.sweep_values.end())
    throw ScenarioError("sweep.axes." + axis, "no values in scenario");
  const std::vector<double>& values = it->second;

  struct Point {
    double value = 0.0;
    std::vector<MethodMetrics> methods;
    bool converged = true;
  };
  std::vector<Point> points(values.size());

  for (std::size_t vi = 0; vi < values.size(); ++vi) {
    const double v = values[vi];
    std::vector<std::vector<MethodMetrics>> run_rows(s.averaging_runs);
    std::vector<char> run_ok(s.averaging_runs, 1);

#pragma omp parallel for schedule(dynamic)
    for (long long run = 0;
         run < static_cast<long long>(s.averaging_runs); ++run) {
      Scenario sv = s;
      if (axis == "T") sv.horizon = static_cast<std::size_t>(v);
      else if (axis == "Mc") sv.max_aggregated = static_cast<std::size_t>(v);
      else if (axis == "priority_ratio") sv.fairness.p_lte = v * sv.fairness.p_wifi;
      else if (axis == "learning_rate") sv.train.lambda = v;
      else sv.sbs_count = static_cast<std::size_t>(v);
      // Derived, explicit seeds per averaging run.
      const auto r = static_cast<std::uint64_t>(run);
      sv.traffic.seed = s.traffic.seed + 1000 * vi + r;
      sv.train.seed = s.train.seed + 1000 * vi + r;
      sv.init_seed = s.init_seed + 1000 * vi + r;
      sv.radio_seed = s.radio_seed + 1000 * vi + r;
      try {
        const RunOutput ro = run_scenario(sv);
        std::vector<MethodMetrics> ms;
        for (const json& mj : ro.results["methods"]) {
          MethodMetrics m;
          m.method = mj["method"].get<std::string>();
          m.lte_served = mj["lte_served_proportion"].get<double>();
          m.wifi_served = mj["wifi_served_proportion"].get<double>();
          m.total_served = mj["total_served_proportion"].get<double>();
          m.avg_airtime_per_sbs = mj["avg_airtime_per_sbs"].get<double>();
          m.avg_airtime_per_wap = mj["avg_airtime_per_wap"].get<double>();
          m.airtime_ratio = mj["airtime_ratio"].is_number()
                                ? mj["airtime_ratio"].get<double>()
                                : std::numeric_limits<double>::infinity();
          m.jain_technology = mj["jain_technology"].get<double>();
          m.gain_vs_reactive = mj["gain_vs_reactive"].get<double>();
          ms.push_back(std::move(m));
        }
        run_rows[static_cast<std::size_t>(run)] = std::move(ms);
        if (ro.results["status"] != "ok") run_ok[static_cast<std::size_t>(run)] = 0;
      } catch (...) {
        run_ok[static_cast<std::size_t>(run)] = 0;
      }
    }

    Point& pt = points[vi];
    pt.value = v;
    std::map<std::string, std::vector<MethodMetrics>> by_method;
    for (std::size_t run = 0; run < s.averaging_runs; ++run) {
      if (!run_ok[run]) pt.converged = false;
      for (const MethodMetrics& m : run_rows[run]) by_method[m.method].push_back(m);
    }
    for (auto& [name, rows] : by_method) pt.methods.push_back(mean_metrics(rows));
  }

  RunOutput out;
  json r;
  r["schema_version"] = kSchemaVersion;
  r["scenario"] = scenario_echo(s);
  r["axis"] = axis;
  r["status"] = "ok";
  json pts = json::array();
  for (const Point& pt : points) {
    json pj;
    pj["value"] = pt.value;
    pj["converged"] = pt.converged;
    json ms = json::array();
    for (const MethodMetrics& m : pt.methods) ms.push_back(metrics_json(m));
    pj["methods"] = ms;
    pts.push_back(pj);
    if (!pt.converged) out.converged = false;
  }
  r["points"] = pts;
  out.results = std::move(r);
  out.manifest = make_manifest(s, scenario_hash(s));

  std::string csv = fmt_row({axis, "method", "lte_served", "wifi_served",
                             "total_served", "airtime_ratio", "jain_technology",
                             "gain_vs_reactive"});
  std::string gain_csv = fmt_row({axis, "gain_vs_reactive"});
  for (const Point& pt : points) {
    for (const MethodMetrics& m : pt.methods) {
      csv += fmt_row({num_str(pt.value), m.method, num_str(m.lte_served),
                      num_str(m.wifi_served), num_str(m.total_served),
                      num_str(m.airtime_ratio), num_str(m.jain_technology),
                      num_str(m.gain_vs_reactive)});
      const std::string lead = pt.methods.size() > 1 ? "proposed" : m.method;
      if (m.method == lead)
        gain_csv += fmt_row({num_str(pt.value), num_str(m.gain_vs_reactive)});
    }
  }
  out.csvs["sweep_" + axis + ".csv"] = csv;
  out.csvs["gain_vs_" + axis + ".csv"] = gain_csv;
  return out;
}

json validate_mac(const Scenario& s) {
  json report;
  json cells = json::array();
  bool all_pass = true;
  std::size_t idx = 0;
  for (std::size_t w = 0; w <= s.mac_max_waps; ++w)
    for (std::size_t jn = 0; jn <= s.mac_max_sbs; ++jn)
      for (double cw : s.mac_cws) {
        if (w == 0 && jn == 0) continue;
        ChannelOccupancy occ;
        occ.wap_count = w;
        occ.sbs_cws.assign(jn, cw);
        StationaryPoint sp = solve_stationary(occ, s.mac);
        if (s.mac_perturb) {
          sp.tau_w *= 1.10;
          for (double& t : sp.tau_sbs) t *= 1.10;
        }
        SlotSimConfig sim;
        sim.occ = occ;
        sim.mac = s.mac;
        sim.n_slots = s.mac_slots;
        sim.seed = 0x5eedULL + 7919 * idx++;
        const EmpiricalStats emp = simulate_slots(sim);
        const ComparisonReport cmp = compare(sp, emp, s.mac_rel_tol);
        json cell;
        cell["waps"] = w;
        cell["sbs"] = jn;
        cell["cw"] = cw;
        cell["pass"] = cmp.all_pass;
        double worst = 0.0;
        for (const ComparisonCell& c : cmp.cells)
          worst = std::max(worst, c.rel_err);
        cell["max_rel_err"] = worst;
        cells.push_back(cell);
        all_pass = all_pass && cmp.all_pass;
      }
  report["cells"] = cells;
  report["all_pass"] = all_pass;
  report["rel_tol"] = s.mac_rel_tol;
  return report;
}

void write_outputs(const RunOutput& out, const std::string& out_dir) {
  namespace fs = std::filesystem;
  fs::create_directories(out_dir);
  auto write = [&](const std::string& name, const std::string& content) {
    std::ofstream f(fs::path(out_dir) / name, std::ios::binary);
    if (!f) throw std::runtime_error("cannot write " + name + " in " + out_dir);
    f << content;
  };
  write("results.json", out.results.dump(2) + "\n");
  write("manifest.json", out.manifest.dump(2) + "\n");
  for (const auto& [name, content] : out.csvs) write(name, content);
  if (out.model) save_model(*out.model, (fs::path(out_dir) / "model.bin").string());
}

void check_schema(const json& schema, const json& value, const std::string& path) {
  const json* type = find(schema, "type");
  if (type) {
    const std::string t = type->get<std::string>();
    const bool ok = (t == "object" && value.is_object()) ||
                    (t == "array" && value.is_array()) ||
                    (t == "string" && value.is_string()) ||
                    (t == "number" && value.is_number()) ||
                    (t == "integer" && value.is_number_integer()) ||
                    (t == "boolean" && value.is_boolean());
    if (!ok)
      throw std::runtime_error(path + ": expected " + t + ", got " +
                               std::string(value.type_name()));
  }
  const json* req = find(schema, "required");
  if (req)
    for (const json& k : *req)
      if (!value.contains(k.get<std::string>()))
        throw std::runtime_error(path + ": missing required field '" +
                                 k.get<std::string>() + "'");
  const json* props = find(schema, "properties");
  if (props && value.is_object())
    for (auto it = props->begin(); it != props->end(); ++it)
      if (value.contains(it.key()))
        check_schema(it.value(), value.at(it.key()), path + "." + it.key());
  const json* items = find(schema, "items");
  if (items && value.is_array()) {
    std::size_t i = 0;
    for (const json& v : value)
      check_schema(*items, v, path + "[" + std::to_string(i++) + "]");
  }
}

std::uint64_t file_fnv1a(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::string bytes((std::istreambuf_iterator<char>(in)),
                    std::istreambuf_iterator<char>());
  return fnv1a_bytes(bytes);
}

}  // namespace laa
