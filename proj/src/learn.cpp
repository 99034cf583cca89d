#include "laa/learn.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <numbers>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace laa {

namespace {

double sigmoid(double v) { return 1.0 / (1.0 + std::exp(-v)); }

// Deterministic parameter traversal; flatten/unflatten, init, and the
// gradient store all share this order.
template <class F>
void for_each_block(PolicyModel& m, F&& f) {
  auto lstm = [&](LstmParams& p) {
    f(p.w_i);
    f(p.w_f);
    f(p.w_o);
    f(p.w_g);
    f(p.b_i);
    f(p.b_f);
    f(p.b_o);
    f(p.w_out);
  };
  lstm(m.encoder);
  f(m.mlp_w1);
  f(m.mlp_b1);
  f(m.mlp_w2);
  f(m.mlp_b2);
  for (DecoderParams& d : m.decoders) {
    lstm(d.lstm);
    f(d.w_x);
    f(d.w_mu);
    f(d.w_d);
  }
}

PolicyModel zero_like(const PolicyModel& m) {
  PolicyModel g = m;
  for_each_block(g, [](auto& block) { block.setZero(); });
  return g;
}

double log_sum_exp(const VectorXd& v) {
  const double mx = v.maxCoeff();
  double s = 0.0;
  for (Eigen::Index i = 0; i < v.size(); ++i) s += std::exp(v[i] - mx);
  return mx + std::log(s);
}

double gaussian_logpdf(double x, double mu, double var) {
  const double d = x - mu;
  return -0.5 * std::log(2.0 * std::numbers::pi * var) - d * d / (2.0 * var);
}

std::uint64_t fnv1a(const void* data, std::size_t n, std::uint64_t h) {
  const auto* p = static_cast<const unsigned char*>(data);
  for (std::size_t i = 0; i < n; ++i) {
    h ^= p[i];
    h *= 1099511628211ULL;
  }
  return h;
}

}  // namespace

std::size_t param_count(const LstmShape& s) {
  if (s.n_i < 1 || s.n_c < 1 || s.n_o < 1)
    throw std::invalid_argument("param_count: shape entries must be >= 1");
  return 4 * s.n_c * s.n_c + 4 * s.n_i * s.n_c + s.n_c * s.n_o + 3 * s.n_c;
}

LstmParams LstmParams::zeros(const LstmShape& shape) {
  LstmParams p;
  p.shape = shape;
  const auto nc = static_cast<Eigen::Index>(shape.n_c);
  const auto concat = static_cast<Eigen::Index>(shape.n_i + shape.n_c);
  p.w_i = MatrixXd::Zero(nc, concat);
  p.w_f = MatrixXd::Zero(nc, concat);
  p.w_o = MatrixXd::Zero(nc, concat);
  p.w_g = MatrixXd::Zero(nc, concat);
  p.b_i = VectorXd::Zero(nc);
  p.b_f = VectorXd::Zero(nc);
  p.b_o = VectorXd::Zero(nc);
  p.w_out = MatrixXd::Zero(static_cast<Eigen::Index>(shape.n_o), nc);
  return p;
}

std::size_t LstmParams::allocated_count() const {
  return static_cast<std::size_t>(w_i.size() + w_f.size() + w_o.size() +
                                  w_g.size() + b_i.size() + b_f.size() +
                                  b_o.size() + w_out.size());
}

LstmState LstmState::zeros(std::size_t n_c) {
  LstmState s;
  s.h = VectorXd::Zero(static_cast<Eigen::Index>(n_c));
  s.c = VectorXd::Zero(static_cast<Eigen::Index>(n_c));
  return s;
}

LstmState lstm_step(const LstmParams& p, const VectorXd& input,
                    const LstmState& prev, LstmCache* cache) {
  if (input.size() != static_cast<Eigen::Index>(p.shape.n_i) ||
      prev.h.size() != static_cast<Eigen::Index>(p.shape.n_c))
    throw std::invalid_argument("lstm_step: dimension mismatch");

  VectorXd concat(input.size() + prev.h.size());
  concat << input, prev.h;

  const VectorXd gi = (p.w_i * concat + p.b_i).unaryExpr([](double v) { return sigmoid(v); });
  const VectorXd gf = (p.w_f * concat + p.b_f).unaryExpr([](double v) { return sigmoid(v); });
  const VectorXd go = (p.w_o * concat + p.b_o).unaryExpr([](double v) { return sigmoid(v); });
  const VectorXd g = (p.w_g * concat).array().tanh();

  LstmState next;
  next.c = gf.cwiseProduct(prev.c) + gi.cwiseProduct(g);
  const VectorXd tc = next.c.array().tanh();
  next.h = go.cwiseProduct(tc);

  if (cache) {
    cache->input = input;
    cache->h_prev = prev.h;
    cache->c_prev = prev.c;
    cache->gate_i = gi;
    cache->gate_f = gf;
    cache->gate_o = go;
    cache->cand = g;
    cache->c_new = next.c;
    cache->tanh_c = tc;
  }
  return next;
}

namespace {

// Reverse of lstm_step. Accumulates parameter grads into `grad`, returns
// gradients wrt input, h_prev, c_prev.
struct LstmBack {
  VectorXd d_input, d_h_prev, d_c_prev;
};

LstmBack lstm_backward(const LstmParams& p, const LstmCache& cache,
                       const VectorXd& d_h, const VectorXd& d_c_carried,
                       LstmParams& grad) {
  const VectorXd d_o = d_h.cwiseProduct(cache.tanh_c);
  VectorXd d_c = d_c_carried +
                 d_h.cwiseProduct(cache.gate_o)
                     .cwiseProduct(VectorXd::Ones(d_h.size()) -
                                   cache.tanh_c.cwiseProduct(cache.tanh_c));

  const VectorXd d_f = d_c.cwiseProduct(cache.c_prev);
  const VectorXd d_i = d_c.cwiseProduct(cache.cand);
  const VectorXd d_g = d_c.cwiseProduct(cache.gate_i);

  auto dsig = [](const VectorXd& y, const VectorXd& d) {
    return d.cwiseProduct(y.cwiseProduct(VectorXd::Ones(y.size()) - y)).eval();
  };
  const VectorXd d_i_pre = dsig(cache.gate_i, d_i);
  const VectorXd d_f_pre = dsig(cache.gate_f, d_f);
  const VectorXd d_o_pre = dsig(cache.gate_o, d_o);
  const VectorXd d_g_pre =
      d_g.cwiseProduct(VectorXd::Ones(d_g.size()) -
                       cache.cand.cwiseProduct(cache.cand));

  VectorXd concat(cache.input.size() + cache.h_prev.size());
  concat << cache.input, cache.h_prev;

  grad.w_i += d_i_pre * concat.transpose();
  grad.w_f += d_f_pre * concat.transpose();
  grad.w_o += d_o_pre * concat.transpose();
  grad.w_g += d_g_pre * concat.transpose();
  grad.b_i += d_i_pre;
  grad.b_f += d_f_pre;
  grad.b_o += d_o_pre;

  const VectorXd d_concat = p.w_i.transpose() * d_i_pre +
                            p.w_f.transpose() * d_f_pre +
                            p.w_o.transpose() * d_o_pre +
                            p.w_g.transpose() * d_g_pre;
  LstmBack back;
  back.d_input = d_concat.head(cache.input.size());
  back.d_h_prev = d_concat.tail(cache.h_prev.size());
  back.d_c_prev = d_c.cwiseProduct(cache.gate_f);
  return back;
}

struct EncodeCache {
  std::vector<std::vector<LstmCache>> row_caches;  // M x H
  std::vector<VectorXd> row_final_h;               // M
  std::vector<VectorXd> row_out;                   // y_m = w_out * h
  VectorXd concat;                                 // M * hidden
  VectorXd mlp_hidden;                             // tanh layer
  VectorXd context;
};

EncodeCache encode_forward(const PolicyModel& model, const TraceWindow& window) {
  const std::size_t m_count = model.entity_count();
  if (window.entity_count() != m_count)
    throw std::invalid_argument("encode: window row count != J + C");
  const std::size_t H = window.history_len();
  const auto hidden = static_cast<Eigen::Index>(model.cfg.hidden);

  EncodeCache ec;
  ec.row_caches.resize(m_count);
  ec.concat = VectorXd::Zero(static_cast<Eigen::Index>(m_count) * hidden);
  for (std::size_t m = 0; m < m_count; ++m) {
    LstmState state = LstmState::zeros(model.cfg.hidden);
    ec.row_caches[m].resize(H);
    for (std::size_t k = 0; k < H; ++k) {
      VectorXd in(1);
      in[0] = window.history.at(m, k);
      state = lstm_step(model.encoder, in, state, &ec.row_caches[m][k]);
    }
    ec.row_final_h.push_back(state.h);
    VectorXd y = model.encoder.w_out * state.h;
    ec.concat.segment(static_cast<Eigen::Index>(m) * hidden, hidden) = y;
    ec.row_out.push_back(std::move(y));
  }
  ec.mlp_hidden = (model.mlp_w1 * ec.concat + model.mlp_b1).array().tanh();
  ec.context = model.mlp_w2 * ec.mlp_hidden + model.mlp_b2;
  return ec;
}

struct DecoderStepCache {
  LstmCache lstm;
  VectorXd y;        // w_out * h
  VectorXd logits;   // N_x
  VectorXd probs;    // softmax
  VectorXd mu_pre;   // C
  VectorXd mu;       // C
  std::size_t prev_x_index = 0;  // vocab index embedded at this step (t > 0)
  bool has_prev = false;
};

VectorXd decoder_input(const PolicyModel& model, std::size_t j,
                       const Episode& ep, std::size_t t) {
  const auto embed = static_cast<Eigen::Index>(model.cfg.action_embed);
  const auto C = static_cast<Eigen::Index>(model.cfg.channels);
  VectorXd v = VectorXd::Zero(embed + C);
  if (t > 0) {
    v.head(embed) =
        model.decoders[j].w_d.col(static_cast<Eigen::Index>(ep.steps[t - 1].x_index));
    for (Eigen::Index c = 0; c < C; ++c)
      v[embed + c] = ep.schedule.alpha_at(static_cast<std::size_t>(c), t - 1);
  }
  return v;
}

// Recomputes the decoder pass for a fixed episode; fills step caches and
// returns the episode log-probability under the current parameters.
double decoder_forward(const PolicyModel& model, const VectorXd& context,
                       const Episode& ep,
                       std::vector<DecoderStepCache>* caches) {
  const std::size_t j = ep.sbs;
  const DecoderParams& dec = model.decoders[j];
  LstmState state;
  state.h = context;
  state.c = VectorXd::Zero(context.size());

  double logprob = 0.0;
  if (caches) caches->resize(ep.steps.size());
  for (std::size_t t = 0; t < ep.steps.size(); ++t) {
    DecoderStepCache local;
    DecoderStepCache& sc = caches ? (*caches)[t] : local;
    if (t > 0) {
      sc.has_prev = true;
      sc.prev_x_index = ep.steps[t - 1].x_index;
    }
    state = lstm_step(dec.lstm, decoder_input(model, j, ep, t), state, &sc.lstm);
    sc.y = dec.lstm.w_out * state.h;
    sc.logits = dec.w_x * sc.y;
    const double lse = log_sum_exp(sc.logits);
    sc.probs = (sc.logits.array() - lse).exp();
    sc.mu_pre = dec.w_mu * sc.y;
    sc.mu = sc.mu_pre.unaryExpr([](double v) { return sigmoid(v); });

    const std::size_t xi = ep.steps[t].x_index;
    logprob += sc.logits[static_cast<Eigen::Index>(xi)] - lse;
    const auto& xvec = model.vocab[xi];
    for (std::size_t c = 0; c < model.cfg.channels; ++c)
      if (xvec[c])
        logprob += gaussian_logpdf(ep.steps[t].alpha_raw[static_cast<Eigen::Index>(c)],
                                   sc.mu[static_cast<Eigen::Index>(c)], ep.variance);
  }
  return logprob;
}

}  // namespace

PolicyModel make_policy(const PolicyConfig& cfg) {
  if (cfg.hidden < 1 || cfg.sbs_count < 1 || cfg.channels < 1)
    throw std::invalid_argument("make_policy: bad config");
  PolicyModel m;
  m.cfg = cfg;
  m.vocab = feasible_channel_vectors(cfg.channels, cfg.max_aggregated);

  const std::size_t n = cfg.hidden;
  m.encoder = LstmParams::zeros({1, n, n});
  const std::size_t m_count = cfg.sbs_count + cfg.channels;
  m.mlp_w1 = MatrixXd::Zero(static_cast<Eigen::Index>(n),
                            static_cast<Eigen::Index>(m_count * n));
  m.mlp_b1 = VectorXd::Zero(static_cast<Eigen::Index>(n));
  m.mlp_w2 = MatrixXd::Zero(static_cast<Eigen::Index>(n),
                            static_cast<Eigen::Index>(n));
  m.mlp_b2 = VectorXd::Zero(static_cast<Eigen::Index>(n));
  for (std::size_t j = 0; j < cfg.sbs_count; ++j) {
    DecoderParams d;
    d.lstm = LstmParams::zeros({cfg.action_embed + cfg.channels, n, n});
    d.w_x = MatrixXd::Zero(static_cast<Eigen::Index>(m.vocab.size()),
                           static_cast<Eigen::Index>(n));
    d.w_mu = MatrixXd::Zero(static_cast<Eigen::Index>(cfg.channels),
                            static_cast<Eigen::Index>(n));
    d.w_d = MatrixXd::Zero(static_cast<Eigen::Index>(cfg.action_embed),
                           static_cast<Eigen::Index>(m.vocab.size()));
    m.decoders.push_back(std::move(d));
  }

  std::mt19937_64 rng(cfg.init_seed);
  std::uniform_real_distribution<double> dist(-cfg.init_range, cfg.init_range);
  for_each_block(m, [&](auto& block) {
    for (Eigen::Index i = 0; i < block.size(); ++i) block.data()[i] = dist(rng);
  });
  return m;
}

std::size_t PolicyModel::allocated_count() const {
  std::size_t total = 0;
  for_each_block(const_cast<PolicyModel&>(*this),
                 [&](auto& block) { total += static_cast<std::size_t>(block.size()); });
  return total;
}

VectorXd PolicyModel::flatten() const {
  VectorXd flat(static_cast<Eigen::Index>(allocated_count()));
  Eigen::Index pos = 0;
  for_each_block(const_cast<PolicyModel&>(*this), [&](auto& block) {
    flat.segment(pos, block.size()) =
        Eigen::Map<const VectorXd>(block.data(), block.size());
    pos += block.size();
  });
  return flat;
}

void PolicyModel::unflatten(const VectorXd& flat) {
  if (flat.size() != static_cast<Eigen::Index>(allocated_count()))
    throw std::invalid_argument("unflatten: size mismatch");
  Eigen::Index pos = 0;
  for_each_block(*this, [&](auto& block) {
    Eigen::Map<VectorXd>(block.data(), block.size()) =
        flat.segment(pos, block.size());
    pos += block.size();
  });
}

VectorXd encode(const PolicyModel& model, const TraceWindow& window) {
  return encode_forward(model, window).context;
}

Episode decode(const PolicyModel& model, std::size_t j, const VectorXd& context,
               std::size_t horizon, double variance, std::mt19937_64& rng) {
  if (!(variance > 0.0)) throw std::invalid_argument("decode: variance must be > 0");
  const std::size_t C = model.cfg.channels;
  Episode ep;
  ep.sbs = j;
  ep.variance = variance;
  ep.schedule = ActionSchedule(C, horizon);
  ep.steps.resize(horizon);

  const DecoderParams& dec = model.decoders[j];
  LstmState state;
  state.h = context;
  state.c = VectorXd::Zero(context.size());
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  std::normal_distribution<double> normal(0.0, 1.0);

  for (std::size_t t = 0; t < horizon; ++t) {
    state = lstm_step(dec.lstm, decoder_input(model, j, ep, t), state, nullptr);
    const VectorXd y = dec.lstm.w_out * state.h;
    const VectorXd logits = dec.w_x * y;
    const double lse = log_sum_exp(logits);
    const VectorXd probs = (logits.array() - lse).exp();

    // Inverse-CDF draw keeps the sampler explicit and seed-stable.
    const double u = unif(rng);
    std::size_t xi = model.vocab.size() - 1;
    double acc = 0.0;
    for (Eigen::Index i = 0; i < probs.size(); ++i) {
      acc += probs[i];
      if (u <= acc) {
        xi = static_cast<std::size_t>(i);
        break;
      }
    }

    EpisodeStep& step = ep.steps[t];
    step.x_index = xi;
    step.mu = (dec.w_mu * y).unaryExpr([](double v) { return sigmoid(v); });
    step.alpha_raw = VectorXd::Zero(static_cast<Eigen::Index>(C));
    step.logprob = logits[static_cast<Eigen::Index>(xi)] - lse;

    const auto& xvec = model.vocab[xi];
    for (std::size_t c = 0; c < C; ++c) {
      ep.schedule.x_at(c, t) = xvec[c];
      if (!xvec[c]) continue;
      const double raw =
          step.mu[static_cast<Eigen::Index>(c)] + std::sqrt(variance) * normal(rng);
      step.alpha_raw[static_cast<Eigen::Index>(c)] = raw;
      step.logprob +=
          gaussian_logpdf(raw, step.mu[static_cast<Eigen::Index>(c)], variance);
      ep.schedule.alpha_at(c, t) = std::clamp(raw, 0.0, 1.0);
    }
    ep.logprob += step.logprob;
  }
  return ep;
}

ActionSchedule decode_greedy(const PolicyModel& model, std::size_t j,
                             const VectorXd& context, std::size_t horizon) {
  const std::size_t C = model.cfg.channels;
  ActionSchedule out(C, horizon);
  const DecoderParams& dec = model.decoders[j];
  LstmState state;
  state.h = context;
  state.c = VectorXd::Zero(context.size());

  Episode scratch;  // carries previous actions for decoder_input
  scratch.sbs = j;
  scratch.schedule = ActionSchedule(C, horizon);
  scratch.steps.resize(horizon);

  for (std::size_t t = 0; t < horizon; ++t) {
    state = lstm_step(dec.lstm, decoder_input(model, j, scratch, t), state, nullptr);
    const VectorXd y = dec.lstm.w_out * state.h;
    const VectorXd logits = dec.w_x * y;
    Eigen::Index best = 0;
    logits.maxCoeff(&best);
    const VectorXd mu = (dec.w_mu * y).unaryExpr([](double v) { return sigmoid(v); });

    scratch.steps[t].x_index = static_cast<std::size_t>(best);
    const auto& xvec = model.vocab[static_cast<std::size_t>(best)];
    for (std::size_t c = 0; c < C; ++c) {
      out.x_at(c, t) = xvec[c];
      scratch.schedule.x_at(c, t) = xvec[c];
      if (xvec[c]) {
        const double a = std::clamp(mu[static_cast<Eigen::Index>(c)], 0.0, 1.0);
        out.alpha_at(c, t) = a;
        scratch.schedule.alpha_at(c, t) = a;
      }
    }
  }
  return out;
}

std::vector<ActionSchedule> infer(const PolicyModel& model,
                                  const TraceWindow& window,
                                  std::size_t horizon) {
  const VectorXd context = encode(model, window);
  std::vector<ActionSchedule> out;
  for (std::size_t j = 0; j < model.cfg.sbs_count; ++j)
    out.push_back(decode_greedy(model, j, context, horizon));
  return out;
}

double sequence_logprob(const Episode& episode) {
  double total = 0.0;
  for (const EpisodeStep& s : episode.steps) total += s.logprob;
  return total;
}

double variance_schedule(std::size_t step, std::size_t total_steps,
                         double start, double end) {
  if (total_steps == 0) return start;
  const double frac =
      std::min(1.0, static_cast<double>(step) / static_cast<double>(total_steps));
  return start + (end - start) * frac;
}

double surrogate_loss(const PolicyModel& model, const TraceWindow& window,
                      const std::vector<Episode>& episodes,
                      const std::vector<double>& weights) {
  if (episodes.empty())
    throw std::invalid_argument("surrogate_loss: empty episode list");
  if (episodes.size() != weights.size())
    throw std::invalid_argument("surrogate_loss: weights size mismatch");
  const EncodeCache ec = encode_forward(model, window);
  double loss = 0.0;
  for (std::size_t e = 0; e < episodes.size(); ++e)
    loss -= weights[e] * decoder_forward(model, ec.context, episodes[e], nullptr);
  return loss / static_cast<double>(episodes.size());
}

VectorXd surrogate_gradient(const PolicyModel& model, const TraceWindow& window,
                            const std::vector<Episode>& episodes,
                            const std::vector<double>& weights) {
  if (episodes.empty())
    throw std::invalid_argument("surrogate_gradient: empty episode list");
  if (episodes.size() != weights.size())
    throw std::invalid_argument("surrogate_gradient: weights size mismatch");

  PolicyModel grad = zero_like(model);
  const EncodeCache ec = encode_forward(model, window);
  const auto hidden = static_cast<Eigen::Index>(model.cfg.hidden);
  VectorXd d_context_total = VectorXd::Zero(hidden);

  for (std::size_t e = 0; e < episodes.size(); ++e) {
    const Episode& ep = episodes[e];
    const double coef = -weights[e] / static_cast<double>(episodes.size());
    const DecoderParams& dec = model.decoders[ep.sbs];
    DecoderParams& gdec = grad.decoders[ep.sbs];

    std::vector<DecoderStepCache> caches;
    decoder_forward(model, ec.context, ep, &caches);

    const std::size_t T = ep.steps.size();
    VectorXd d_h = VectorXd::Zero(hidden);
    VectorXd d_c = VectorXd::Zero(hidden);
    for (std::size_t tt = T; tt-- > 0;) {
      const DecoderStepCache& sc = caches[tt];
      // d logprob / d logits = onehot - probs; scaled by coef for the loss.
      VectorXd d_logits = -sc.probs;
      d_logits[static_cast<Eigen::Index>(ep.steps[tt].x_index)] += 1.0;
      d_logits *= coef;

      VectorXd d_mu_pre = VectorXd::Zero(sc.mu.size());
      const auto& xvec = model.vocab[ep.steps[tt].x_index];
      for (std::size_t c = 0; c < model.cfg.channels; ++c) {
        if (!xvec[c]) continue;
        const auto ci = static_cast<Eigen::Index>(c);
        const double d_mu =
            (ep.steps[tt].alpha_raw[ci] - sc.mu[ci]) / ep.variance;
        d_mu_pre[ci] = coef * d_mu * sc.mu[ci] * (1.0 - sc.mu[ci]);
      }

      VectorXd d_y = dec.w_x.transpose() * d_logits +
                     dec.w_mu.transpose() * d_mu_pre;
      gdec.w_x += d_logits * sc.y.transpose();
      gdec.w_mu += d_mu_pre * sc.y.transpose();

      // y = w_out * h; fold into the h gradient arriving from t+1.
      gdec.lstm.w_out += d_y * sc.lstm.gate_o.cwiseProduct(sc.lstm.tanh_c).transpose();
      d_h += dec.lstm.w_out.transpose() * d_y;

      const LstmBack back = lstm_backward(dec.lstm, sc.lstm, d_h, d_c, gdec.lstm);
      if (sc.has_prev) {
        const auto embed = static_cast<Eigen::Index>(model.cfg.action_embed);
        gdec.w_d.col(static_cast<Eigen::Index>(sc.prev_x_index)) +=
            back.d_input.head(embed);
      }
      d_h = back.d_h_prev;
      d_c = back.d_c_prev;
    }
    d_context_total += d_h;  // decoder h_0 = context
  }

  // MLP backward.
  VectorXd d_z1 = model.mlp_w2.transpose() * d_context_total;
  grad.mlp_w2 += d_context_total * ec.mlp_hidden.transpose();
  grad.mlp_b2 += d_context_total;
  const VectorXd d_z1_pre = d_z1.cwiseProduct(
      VectorXd::Ones(d_z1.size()) - ec.mlp_hidden.cwiseProduct(ec.mlp_hidden));
  grad.mlp_w1 += d_z1_pre * ec.concat.transpose();
  grad.mlp_b1 += d_z1_pre;
  const VectorXd d_concat = model.mlp_w1.transpose() * d_z1_pre;

  // Shared encoder backward, one BPTT per traffic row.
  for (std::size_t m = 0; m < model.entity_count(); ++m) {
    const VectorXd d_y =
        d_concat.segment(static_cast<Eigen::Index>(m) * hidden, hidden);
    grad.encoder.w_out += d_y * ec.row_final_h[m].transpose();
    VectorXd d_h = model.encoder.w_out.transpose() * d_y;
    VectorXd d_c = VectorXd::Zero(hidden);
    for (std::size_t k = ec.row_caches[m].size(); k-- > 0;) {
      const LstmBack back =
          lstm_backward(model.encoder, ec.row_caches[m][k], d_h, d_c, grad.encoder);
      d_h = back.d_h_prev;
      d_c = back.d_c_prev;
    }
  }
  return grad.flatten();
}

OptimizerState OptimizerState::init(std::size_t n_params, double lambda,
                                    double gamma, double eps) {
  OptimizerState s;
  s.running_sq_grad = VectorXd::Zero(static_cast<Eigen::Index>(n_params));
  s.lambda = lambda;
  s.gamma = gamma;
  s.eps = eps;
  return s;
}

void rmsprop_step(OptimizerState& state, VectorXd& params, const VectorXd& grad) {
  if (params.size() != grad.size() ||
      params.size() != state.running_sq_grad.size())
    throw std::invalid_argument("rmsprop_step: shape mismatch");
  state.running_sq_grad = state.gamma * state.running_sq_grad +
                          (1.0 - state.gamma) * grad.cwiseProduct(grad);
  params -= state.lambda *
            grad.cwiseQuotient(
                (state.running_sq_grad.array() + state.eps).sqrt().matrix());
  ++state.step;
}

TrainingLog train(PolicyModel& model, const std::vector<TrainExample>& dataset,
                  const TrainConfig& cfg) {
  if (dataset.empty()) throw std::invalid_argument("train: empty dataset");

  TrainingLog log;
  PenaltyCoefficients rho = cfg.rho0;
  OptimizerState opt =
      OptimizerState::init(model.allocated_count(), cfg.lambda, cfg.gamma, cfg.eps);
  std::mt19937_64 rng(cfg.seed);
  const std::size_t total_steps =
      cfg.max_penalty_rounds * cfg.epochs * dataset.size();
  std::size_t step = 0;
  double baseline = 0.0;
  bool baseline_set = false;

  auto greedy_profile = [&](const TrainExample& ex) {
    return infer(model, ex.input, ex.ctx.horizon());
  };

  auto epoch_eval = [&]() {
    EpochLog el;
    el.rho = rho;
    for (const TrainExample& ex : dataset) {
      const Profile prof = greedy_profile(ex);
      double u = 0.0;
      for (std::size_t j = 0; j < ex.ctx.sbs_count(); ++j)
        u += penalized_utility(ex.ctx, prof, j, rho);
      el.expected_penalized_utility += u;
      const ViolationReport r = check_constraints(ex.ctx, prof);
      el.violations.occupancy = std::max(el.violations.occupancy, r.occupancy);
      el.violations.inter_operator =
          std::max(el.violations.inter_operator, r.inter_operator);
      el.violations.inter_technology =
          std::max(el.violations.inter_technology, r.inter_technology);
      el.violations.alpha_le_x = std::max(el.violations.alpha_le_x, r.alpha_le_x);
      el.violations.aggregation = std::max(el.violations.aggregation, r.aggregation);
      el.violations.demand_prefix =
          std::max(el.violations.demand_prefix, r.demand_prefix);
    }
    el.expected_penalized_utility /= static_cast<double>(dataset.size());
    return el;
  };

  std::vector<std::size_t> order(dataset.size());
  std::iota(order.begin(), order.end(), std::size_t{0});

  for (std::size_t round = 0; round < cfg.max_penalty_rounds; ++round) {
    ++log.penalty_rounds;
    for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
      std::shuffle(order.begin(), order.end(), rng);
      for (std::size_t oi : order) {
        const TrainExample& ex = dataset[oi];
        const double variance = variance_schedule(
            step, total_steps, cfg.variance_start, cfg.variance_end);
        ++step;

        // Algorithm 1 Step 1: best expected actions for all SBSs.
        Profile best = greedy_profile(ex);
        const VectorXd context = encode(model, ex.input);

        for (std::size_t j = 0; j < ex.ctx.sbs_count(); ++j) {
          // Step 2: sample Z actions for SBS j against the others' best.
          std::vector<Episode> episodes;
          std::vector<double> rewards;
          Profile prof = best;
          for (std::size_t z = 0; z < cfg.z_samples; ++z) {
            Episode ep =
                decode(model, j, context, ex.ctx.horizon(), variance, rng);
            prof[j] = ep.schedule;
            ep.reward =
                penalized_utility(ex.ctx, prof, j, rho) / cfg.reward_scale;
            rewards.push_back(ep.reward);
            episodes.push_back(std::move(ep));
          }
          const double mean_reward =
              std::accumulate(rewards.begin(), rewards.end(), 0.0) /
              static_cast<double>(rewards.size());
          if (!baseline_set) {
            baseline = mean_reward;
            baseline_set = true;
          }
          std::vector<double> weights;
          for (double r : rewards)
            weights.push_back(r - (cfg.use_baseline ? baseline : 0.0));
          baseline = 0.9 * baseline + 0.1 * mean_reward;

          // Steps 3-4: REINFORCE gradient, RMSprop update.
          const VectorXd g = surrogate_gradient(model, ex.input, episodes, weights);
          VectorXd flat = model.flatten();
          rmsprop_step(opt, flat, g);
          model.unflatten(flat);
        }
      }
      log.epochs.push_back(epoch_eval());
    }

    // Step 5: incremental penalty check on the coupled constraints.
    const ViolationReport agg = log.epochs.back().violations;
    if (agg.coupled_satisfied(cfg.constraint_tol)) {
      log.converged = true;
      log.final_rho = rho;
      return log;
    }
    rho = incremental_penalty_update(rho, agg, cfg.constraint_tol,
                                     cfg.penalty_growth);
  }
  log.final_rho = rho;
  throw TrainDivergence(log);
}

void save_model(const PolicyModel& model, const std::string& path) {
  std::ostringstream buf(std::ios::binary);
  const char magic[12] = "LAAPOLICY1\n";
  buf.write(magic, sizeof(magic));
  const std::uint64_t header[6] = {
      model.cfg.sbs_count,    model.cfg.channels, model.cfg.max_aggregated,
      model.cfg.hidden,       model.cfg.action_embed,
      model.allocated_count()};
  buf.write(reinterpret_cast<const char*>(header), sizeof(header));
  const VectorXd flat = model.flatten();
  buf.write(reinterpret_cast<const char*>(flat.data()),
            static_cast<std::streamsize>(sizeof(double) * flat.size()));
  const std::string body = buf.str();
  const std::uint64_t checksum = fnv1a(body.data(), body.size(), 14695981039346656037ULL);

  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("save_model: cannot write " + path);
  out.write(body.data(), static_cast<std::streamsize>(body.size()));
  out.write(reinterpret_cast<const char*>(&checksum), sizeof(checksum));
}

PolicyModel load_model(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("load_model: cannot open " + path);
  std::string body((std::istreambuf_iterator<char>(in)),
                   std::istreambuf_iterator<char>());
  if (body.size() < 12 + 6 * sizeof(std::uint64_t) + sizeof(std::uint64_t))
    throw std::runtime_error("load_model: truncated file");

  const std::size_t payload = body.size() - sizeof(std::uint64_t);
  std::uint64_t stored = 0;
  std::memcpy(&stored, body.data() + payload, sizeof(stored));
  if (fnv1a(body.data(), payload, 14695981039346656037ULL) != stored)
    throw std::runtime_error("load_model: checksum mismatch");
  if (std::memcmp(body.data(), "LAAPOLICY1\n", 12) != 0)
    throw std::runtime_error("load_model: bad magic");

  std::uint64_t header[6];
  std::memcpy(header, body.data() + 12, sizeof(header));
  PolicyConfig cfg;
  cfg.sbs_count = header[0];
  cfg.channels = header[1];
  cfg.max_aggregated = header[2];
  cfg.hidden = header[3];
  cfg.action_embed = header[4];
  PolicyModel model = make_policy(cfg);
  if (model.allocated_count() != header[5])
    throw std::runtime_error("load_model: shape mismatch vs parameter count");

  const std::size_t expect =
      12 + sizeof(header) + sizeof(double) * header[5];
  if (payload != expect) throw std::runtime_error("load_model: truncated file");
  VectorXd flat(static_cast<Eigen::Index>(header[5]));
  std::memcpy(flat.data(), body.data() + 12 + sizeof(header),
              sizeof(double) * header[5]);
  model.unflatten(flat);
  return model;
}

}  // namespace laa
