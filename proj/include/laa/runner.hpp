#pragma once

#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "laa/baselines.hpp"
#include "laa/game.hpp"
#include "laa/learn.hpp"
#include "laa/mac.hpp"
#include "laa/metrics.hpp"
#include "laa/oracle.hpp"
#include "laa/traffic.hpp"

namespace laa {

using nlohmann::json;

// Config error carrying the dotted path of the offending field.
class ScenarioError : public std::runtime_error {
 public:
  std::string field;
  ScenarioError(std::string f, const std::string& what)
      : std::runtime_error(f + ": " + what), field(std::move(f)) {}
};

struct TrafficSpec {
  std::string kind = "uniform";  // uniform | periodic | file
  std::string path;              // kind == file
  double level = 0.5;            // uniform
  double jitter = 0.0;
  double base = 0.5;  // periodic
  double amplitude = 0.25;
  std::size_t period = 12;
  double noise = 0.0;
  std::size_t epochs = 120;
  std::uint64_t seed = 1;
};

struct Scenario {
  std::string name = "scenario";

  // network
  std::size_t sbs_count = 2;
  std::size_t channels = 2;
  std::size_t max_aggregated = 1;
  std::vector<std::size_t> waps_per_channel;  // size C

  // radio placement (square area, seeded)
  double area_m = 300.0;
  double serving_distance_m = 10.0;
  std::size_t ues_per_sbs = 1;
  std::uint64_t radio_seed = 7;

  MacParams mac;
  FairnessConfig fairness;
  DemandModel demand;  // r_ref: load units served per epoch at alpha = 1
  double xi = 0.95;

  TrafficSpec traffic;

  // windowing
  std::size_t history = 7;
  std::size_t horizon = 1;
  double train_split = 0.8;

  // learner (train.enabled gates the whole proposed-policy path)
  bool train_enabled = false;
  TrainConfig train;
  std::size_t hidden = 70;
  std::size_t action_embed = 8;
  std::uint64_t init_seed = 1;

  std::vector<std::string> baselines{"reactive"};  // reactive | pf | tnt

  // sweep axes: axis name -> values; plus the averaging-run count
  std::map<std::string, std::vector<double>> sweep_values;
  std::size_t averaging_runs = 10;

  // validate-mac matrix
  std::size_t mac_max_waps = 3;
  std::size_t mac_max_sbs = 3;
  std::vector<double> mac_cws{15.0, 31.0, 63.0};
  std::uint64_t mac_slots = 1000000;
  double mac_rel_tol = 0.02;
  bool mac_perturb = false;  // injects an analytic offset; cells must fail
};

Scenario parse_scenario(const json& j);
Scenario load_scenario(const std::string& path);

TrafficTrace build_trace(const Scenario& s);
RadioEnvironment build_radio(const Scenario& s);

struct MethodMetrics {
  std::string method;
  double lte_served = 0.0;
  double wifi_served = 0.0;
  double total_served = 0.0;
  std::vector<double> per_sbs_served;
  double avg_airtime_per_sbs = 0.0;
  double avg_airtime_per_wap = 0.0;
  double airtime_ratio = 0.0;
  double jain_technology = 0.0;
  double gain_vs_reactive = 0.0;
};

struct RunOutput {
  json results;   // deterministic (no timestamps)
  json manifest;  // config hash, seeds, versions, timestamp
  std::map<std::string, std::string> csvs;  // filename -> contents
  bool converged = true;
  std::optional<PolicyModel> model;
};

// Full pipeline: trace -> windows -> (train) -> evaluate methods.
RunOutput run_scenario(const Scenario& s);

// One row per axis value, averaged over `averaging_runs` derived seeds.
RunOutput sweep_scenario(const Scenario& s, const std::string& axis);

// Analytic-vs-slot-sim matrix; report.pass false when any cell fails.
json validate_mac(const Scenario& s);

// Writes results.json, manifest.json, CSVs, and the model into out_dir.
void write_outputs(const RunOutput& out, const std::string& out_dir);

// Minimal structural validation of results.json against the shipped schema
// subset (type / properties / required / items).
void check_schema(const json& schema, const json& value,
                  const std::string& path = "results");

std::uint64_t file_fnv1a(const std::string& path);

}  // namespace laa
