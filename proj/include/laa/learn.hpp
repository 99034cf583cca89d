#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "laa/game.hpp"
#include "laa/traffic.hpp"

namespace laa {

using Eigen::MatrixXd;
using Eigen::VectorXd;

struct LstmShape {
  std::size_t n_i = 1;
  std::size_t n_c = 1;
  std::size_t n_o = 1;
};

// 4*n_c^2 + 4*n_i*n_c + n_c*n_o + 3*n_c.
std::size_t param_count(const LstmShape& shape);

// Single-layer LSTM: sigmoid input/forget/output gates (with biases), tanh
// candidate (no bias), and a linear output projection.
struct LstmParams {
  LstmShape shape;
  MatrixXd w_i, w_f, w_o, w_g;  // n_c x (n_i + n_c)
  VectorXd b_i, b_f, b_o;       // n_c
  MatrixXd w_out;               // n_o x n_c

  static LstmParams zeros(const LstmShape& shape);
  std::size_t allocated_count() const;
};

struct LstmState {
  VectorXd h, c;
  static LstmState zeros(std::size_t n_c);
};

// Forward activations kept for backpropagation through time.
struct LstmCache {
  VectorXd input, h_prev, c_prev;
  VectorXd gate_i, gate_f, gate_o, cand;
  VectorXd c_new, tanh_c;
};

LstmState lstm_step(const LstmParams& p, const VectorXd& input,
                    const LstmState& prev, LstmCache* cache = nullptr);

struct PolicyConfig {
  std::size_t sbs_count = 2;
  std::size_t channels = 2;
  std::size_t max_aggregated = 1;
  std::size_t hidden = 70;       // n_c for encoder, MLP, and decoders
  std::size_t action_embed = 8;  // rows of W_d
  double init_range = 0.05;      // uniform init half-width
  std::uint64_t init_seed = 1;
};

struct DecoderParams {
  LstmParams lstm;   // n_i = action_embed + C, n_o = hidden
  MatrixXd w_x;      // N_x x hidden, channel-selection logits
  MatrixXd w_mu;     // C x hidden, Gaussian mean pre-sigmoid
  MatrixXd w_d;      // action_embed x N_x, previous-action embedding
};

struct PolicyModel {
  PolicyConfig cfg;
  std::vector<std::vector<std::uint8_t>> vocab;  // feasible x vectors, size N_x
  LstmParams encoder;  // shared across the M = J + C traffic rows
  MatrixXd mlp_w1;     // hidden x (M * hidden)
  VectorXd mlp_b1;
  MatrixXd mlp_w2;     // hidden x hidden
  VectorXd mlp_b2;
  std::vector<DecoderParams> decoders;  // one per SBS

  std::size_t entity_count() const { return cfg.sbs_count + cfg.channels; }
  std::size_t vocab_size() const { return vocab.size(); }
  std::size_t allocated_count() const;

  VectorXd flatten() const;
  void unflatten(const VectorXd& flat);
};

PolicyModel make_policy(const PolicyConfig& cfg);

struct EpisodeStep {
  std::size_t x_index = 0;  // index into the vocab
  VectorXd alpha_raw;       // pre-clamp Gaussian samples, per channel
  VectorXd mu;              // head means, per channel
  double logprob = 0.0;
};

struct Episode {
  std::size_t sbs = 0;
  double variance = 0.02;
  std::vector<EpisodeStep> steps;
  ActionSchedule schedule;
  double logprob = 0.0;
  double reward = 0.0;
};

// Shared-encoder pass over the M history rows followed by the MLP summary.
VectorXd encode(const PolicyModel& model, const TraceWindow& window);

// Autoregressive sampling of one SBS's schedule over the horizon.
Episode decode(const PolicyModel& model, std::size_t j, const VectorXd& context,
               std::size_t horizon, double variance, std::mt19937_64& rng);

// Greedy decode: argmax channel vector, mean alpha.
ActionSchedule decode_greedy(const PolicyModel& model, std::size_t j,
                             const VectorXd& context, std::size_t horizon);

std::vector<ActionSchedule> infer(const PolicyModel& model,
                                  const TraceWindow& window,
                                  std::size_t horizon);

// Sum of discrete log-softmax terms and Gaussian log-densities of the
// pre-clamp samples.
double sequence_logprob(const Episode& episode);

// Linear start -> end over total_steps (defaults 0.06 -> 0.02). A generous
// starting variance keeps some samples inside the unclamped region even when
// the mean action saturates, so the policy gradient never vanishes there.
double variance_schedule(std::size_t step, std::size_t total_steps,
                         double start = 0.06, double end = 0.02);

// Surrogate loss -mean_e w_e * logprob_e with the sampled actions frozen;
// used both for REINFORCE updates and for finite-difference audits.
double surrogate_loss(const PolicyModel& model, const TraceWindow& window,
                      const std::vector<Episode>& episodes,
                      const std::vector<double>& weights);

// Gradient of surrogate_loss by backpropagation; layout matches flatten().
VectorXd surrogate_gradient(const PolicyModel& model, const TraceWindow& window,
                            const std::vector<Episode>& episodes,
                            const std::vector<double>& weights);

struct OptimizerState {
  VectorXd running_sq_grad;
  std::size_t step = 0;
  double lambda = 0.01;
  double gamma = 0.95;
  double eps = 1e-8;

  static OptimizerState init(std::size_t n_params, double lambda = 0.01,
                             double gamma = 0.95, double eps = 1e-8);
};

// E[g^2] <- gamma E[g^2] + (1-gamma) g^2; theta <- theta - lambda/sqrt(E+eps) g.
void rmsprop_step(OptimizerState& state, VectorXd& params, const VectorXd& grad);

struct TrainExample {
  TraceWindow input;  // normalized history fed to the encoder
  GameContext ctx;    // raw demand over the horizon
};

struct TrainConfig {
  std::size_t epochs = 10;            // inner epochs per penalty round
  std::size_t max_penalty_rounds = 6;
  std::size_t z_samples = 20;
  double lambda = 0.01;
  double gamma = 0.95;
  double eps = 1e-8;
  PenaltyCoefficients rho0{1.0, 1.0, 1.0};
  double penalty_growth = 10.0;
  double constraint_tol = 0.02;
  bool use_baseline = true;
  double reward_scale = 1.0;  // rewards divided by this before the update
  double variance_start = 0.06;  // exploration variance, annealed linearly
  double variance_end = 0.02;
  std::uint64_t seed = 1;
};

struct EpochLog {
  double expected_penalized_utility = 0.0;
  ViolationReport violations;  // max over the dataset at greedy profiles
  PenaltyCoefficients rho;
};

struct TrainingLog {
  std::vector<EpochLog> epochs;
  bool converged = false;
  std::size_t penalty_rounds = 0;
  PenaltyCoefficients final_rho;
};

class TrainDivergence : public std::runtime_error {
 public:
  TrainingLog log;
  explicit TrainDivergence(TrainingLog l)
      : std::runtime_error("train: coupled constraints unsatisfied after round cap"),
        log(std::move(l)) {}
};

TrainingLog train(PolicyModel& model, const std::vector<TrainExample>& dataset,
                  const TrainConfig& cfg);

void save_model(const PolicyModel& model, const std::string& path);
PolicyModel load_model(const std::string& path);

}  // namespace laa
