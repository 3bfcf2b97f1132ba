// Licensed under the Apache License, Version 2.0 (the "License"); you
// may not use this file except in compliance with the License.  You
// may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or
// implied.  See the License for the specific language governing
// permissions and limitations under the License.

#include "longink/synthesis.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "longink/random.hpp"

namespace longink {

int Charset::index(char c) const {
  const auto pos = symbols.find(c);
  return pos == std::string::npos ? -1 : static_cast<int>(pos);
}

const Charset& default_charset() {
  static const Charset charset{
      "abcdefghijklmnopqrstuvwxyz"
      "ABCDEFGHIJKLMNOPQRSTUVWXYZ"
      "0123456789"
      " .,!?'-\""};
  return charset;
}

LabelEncoding encode_label(const std::string& text, const Charset& charset) {
  LabelEncoding enc;
  enc.text = text;
  enc.onehots =
      Eigen::MatrixXd::Zero(static_cast<long>(text.size()), charset.size());
  for (std::size_t u = 0; u < text.size(); ++u) {
    const int idx = charset.index(text[u]);
    if (idx < 0)
      throw Error(ErrorKind::unknown_symbol,
                  std::string("unknown symbol '") + text[u] +
                      "' at position " + std::to_string(u));
    enc.onehots(static_cast<long>(u), idx) = 1.0;
  }
  return enc;
}

GeneratorConfig paper_generator_config(ReprKind repr) {
  GeneratorConfig cfg;
  cfg.repr = repr;
  cfg.input_proj = 128;
  cfg.lstm1 = 128;
  cfg.lstm2 = 256;
  cfg.lstm3 = 256;
  cfg.style.input_dim = cont_dim(repr) + 1;
  cfg.style.bi_hidden = 256;
  cfg.style.uni_hidden = 256;
  cfg.style.dense1 = 256;
  cfg.style.dense2 = 256;
  return cfg;
}

GeneratorConfig desk_generator_config(ReprKind repr) {
  GeneratorConfig cfg;
  cfg.repr = repr;
  cfg.input_proj = 64;
  cfg.lstm1 = 64;
  cfg.lstm2 = 64;
  cfg.lstm3 = 64;
  cfg.style.input_dim = cont_dim(repr) + 1;
  cfg.style.bi_hidden = 32;
  cfg.style.uni_hidden = 32;
  cfg.style.dense1 = 32;
  cfg.style.dense2 = 32;
  return cfg;
}

void init_generator_params(ParamStore& params, const GeneratorConfig& cfg,
                           std::mt19937_64& rng) {
  const int d_in = cfg.frame_dim();
  init_dense(params, "gen.in", d_in, cfg.input_proj, rng);
  params.create("gen.style_proj.W",
                glorot_uniform(cfg.style.out_dim, cfg.input_proj, rng));
  init_lstm(params, "gen.lstm1", cfg.input_proj, cfg.lstm1, rng);
  init_dense(params, "gen.att", cfg.lstm1, 3 * cfg.attn_components, rng);
  // Slow attention start: kappa increments begin around exp(-2) per
  // step so the window does not race past the label.
  params.at("gen.att.b")
      .middleCols(2 * cfg.attn_components, cfg.attn_components)
      .setConstant(-2.0);
  init_lstm(params, "gen.lstm2", cfg.lstm1 + cfg.charset_size, cfg.lstm2,
            rng);
  init_lstm(params, "gen.lstm3", cfg.lstm2 + cfg.charset_size, cfg.lstm3,
            rng);
  init_dense(params, "gen.head", cfg.lstm3, cfg.head_dim(), rng);
  init_style_params(params, cfg.style, "style.", rng);
}

ad::Var gmm_window(const ad::Var& alpha, const ad::Var& beta,
                   const ad::Var& kappa, long n_positions) {
  const long b_rows = alpha.rows();
  const long k_comp = alpha.cols();
  if (beta.rows() != b_rows || kappa.rows() != b_rows ||
      beta.cols() != k_comp || kappa.cols() != k_comp)
    throw Error(ErrorKind::shape, "gmm_window: mismatched component arrays");
  Eigen::MatrixXd phi = Eigen::MatrixXd::Zero(b_rows, n_positions);
  for (long b = 0; b < b_rows; ++b)
    for (long k = 0; k < k_comp; ++k) {
      const double a = alpha.value()(b, k);
      const double bb = beta.value()(b, k);
      const double kk = kappa.value()(b, k);
      for (long u = 0; u < n_positions; ++u) {
        const double du = kk - static_cast<double>(u);
        phi(b, u) += a * std::exp(-bb * du * du);
      }
    }
  ad::Tape* tape = alpha.raw()->tape;
  ad::Var out = tape->op(std::move(phi), {alpha, beta, kappa});
  if (out.requires_grad()) {
    ad::Node* o = out.raw();
    ad::Node* pa = alpha.raw();
    ad::Node* pb = beta.raw();
    ad::Node* pk = kappa.raw();
    o->backward_fn = [o, pa, pb, pk, n_positions] {
      const long rows = pa->value.rows();
      const long comps = pa->value.cols();
      Eigen::MatrixXd ga = Eigen::MatrixXd::Zero(rows, comps);
      Eigen::MatrixXd gb = ga, gk = ga;
      for (long b = 0; b < rows; ++b)
        for (long k = 0; k < comps; ++k) {
          const double a = pa->value(b, k);
          const double bb = pb->value(b, k);
          const double kk = pk->value(b, k);
          double da = 0.0, db = 0.0, dk = 0.0;
          for (long u = 0; u < n_positions; ++u) {
            const double du = kk - static_cast<double>(u);
            const double e = std::exp(-bb * du * du);
            const double g = o->grad(b, u);
            da += g * e;
            db += g * a * (-du * du) * e;
            dk += g * a * (-2.0 * bb * du) * e;
          }
          ga(b, k) = da;
          gb(b, k) = db;
          gk(b, k) = dk;
        }
      if (pa->requires_grad) pa->add_grad(ga);
      if (pb->requires_grad) pb->add_grad(gb);
      if (pk->requires_grad) pk->add_grad(gk);
    };
  }
  return out;
}

ad::Var attend_onehot(const ad::Var& phi,
                      const std::vector<const LabelEncoding*>& labels) {
  const long b_rows = phi.rows();
  if (static_cast<long>(labels.size()) != b_rows)
    throw Error(ErrorKind::shape, "attend_onehot: one label per row");
  const long n_sym = labels.empty() ? 0 : labels[0]->onehots.cols();
  Eigen::MatrixXd ctx = Eigen::MatrixXd::Zero(b_rows, n_sym);
  for (long b = 0; b < b_rows; ++b) {
    const Eigen::MatrixXd& oh = labels[static_cast<std::size_t>(b)]->onehots;
    const long u_len = std::min<long>(oh.rows(), phi.cols());
    if (u_len > 0)
      ctx.row(b) = phi.value().row(b).head(u_len) * oh.topRows(u_len);
  }
  ad::Tape* tape = phi.raw()->tape;
  ad::Var out = tape->op(std::move(ctx), {phi});
  if (out.requires_grad()) {
    ad::Node* o = out.raw();
    ad::Node* pp = phi.raw();
    o->backward_fn = [o, pp, labels] {
      Eigen::MatrixXd g =
          Eigen::MatrixXd::Zero(pp->value.rows(), pp->value.cols());
      for (long b = 0; b < g.rows(); ++b) {
        const Eigen::MatrixXd& oh =
            labels[static_cast<std::size_t>(b)]->onehots;
        const long u_len = std::min<long>(oh.rows(), g.cols());
        if (u_len > 0)
          g.row(b).head(u_len) = o->grad.row(b) * oh.topRows(u_len).transpose();
      }
      pp->add_grad(g);
    };
  }
  return out;
}

namespace {

constexpr double kHalfLog2Pi = 0.9189385332046727;  // 0.5 * ln(2*pi)

struct MdnRowGrads {
  Eigen::MatrixXd pi_logit, mu, log_sigma, pen_logit;
};

/// Shared forward/backward for the batched MDN loss; the gradient pass
/// recomputes responsibilities from the saved input values.
Eigen::VectorXd mdn_rows_forward(const Eigen::MatrixXd& pi_logit,
                                 const Eigen::MatrixXd& mu,
                                 const Eigen::MatrixXd& log_sigma,
                                 const Eigen::MatrixXd& pen_logit,
                                 const Eigen::MatrixXd& target,
                                 const Eigen::VectorXd& pen,
                                 MdnRowGrads* grads) {
  const long rows = pi_logit.rows();
  const long k_comp = pi_logit.cols();
  const long d = target.cols();
  Eigen::VectorXd nll(rows);
  if (grads != nullptr) {
    grads->pi_logit.setZero(rows, k_comp);
    grads->mu.setZero(rows, k_comp * d);
    grads->log_sigma.setZero(rows, k_comp * d);
    grads->pen_logit.setZero(rows, 1);
  }
  for (long b = 0; b < rows; ++b) {
    // log softmax of the component logits
    const double pmax = pi_logit.row(b).maxCoeff();
    double z = 0.0;
    for (long k = 0; k < k_comp; ++k)
      z += std::exp(pi_logit(b, k) - pmax);
    const double log_z = pmax + std::log(z);

    Eigen::VectorXd ll(k_comp);
    for (long k = 0; k < k_comp; ++k) {
      double acc = pi_logit(b, k) - log_z;
      for (long dd = 0; dd < d; ++dd) {
        const double ls = log_sigma(b, k * d + dd);
        const double zz = (target(b, dd) - mu(b, k * d + dd)) / std::exp(ls);
        acc += -0.5 * zz * zz - ls - kHalfLog2Pi;
      }
      ll[k] = acc;
    }
    const double lmax = ll.maxCoeff();
    double lse = 0.0;
    for (long k = 0; k < k_comp; ++k) lse += std::exp(ll[k] - lmax);
    const double log_mix = lmax + std::log(lse);

    const double plogit = pen_logit(b, 0);
    // log sigmoid / log(1 - sigmoid) via softplus for stability
    const double log_p = -std::log1p(std::exp(-plogit));
    const double log_q = -plogit - std::log1p(std::exp(-plogit));
    const double pen_ll = pen[b] == 1.0 ? log_p : log_q;
    nll[b] = -(log_mix + pen_ll);

    if (grads != nullptr) {
      const double p = 1.0 / (1.0 + std::exp(-plogit));
      grads->pen_logit(b, 0) = p - pen[b];
      for (long k = 0; k < k_comp; ++k) {
        const double r = std::exp(ll[k] - log_mix);  // responsibility
        const double soft = std::exp(pi_logit(b, k) - log_z);
        grads->pi_logit(b, k) = soft - r;
        for (long dd = 0; dd < d; ++dd) {
          const double ls = log_sigma(b, k * d + dd);
          const double sigma = std::exp(ls);
          const double zz = (target(b, dd) - mu(b, k * d + dd)) / sigma;
          grads->mu(b, k * d + dd) = -r * zz / sigma;
          grads->log_sigma(b, k * d + dd) = -r * (zz * zz - 1.0);
        }
      }
    }
  }
  return nll;
}

}  // namespace

ad::Var mdn_nll_rows(const ad::Var& pi_logit, const ad::Var& mu,
                     const ad::Var& log_sigma, const ad::Var& pen_logit,
                     const Eigen::MatrixXd& target,
                     const Eigen::VectorXd& pen) {
  const long rows = pi_logit.rows();
  if (mu.rows() != rows || log_sigma.rows() != rows ||
      pen_logit.rows() != rows || target.rows() != rows ||
      pen.size() != rows)
    throw Error(ErrorKind::shape, "mdn_nll_rows: row mismatch");
  if (mu.cols() != pi_logit.cols() * target.cols() ||
      log_sigma.cols() != mu.cols() || pen_logit.cols() != 1)
    throw Error(ErrorKind::shape, "mdn_nll_rows: column mismatch");
  const Eigen::VectorXd nll =
      mdn_rows_forward(pi_logit.value(), mu.value(), log_sigma.value(),
                       pen_logit.value(), target, pen, nullptr);
  ad::Tape* tape = pi_logit.raw()->tape;
  ad::Var out = tape->op(nll, {pi_logit, mu, log_sigma, pen_logit});
  if (out.requires_grad()) {
    ad::Node* o = out.raw();
    ad::Node* p_pi = pi_logit.raw();
    ad::Node* p_mu = mu.raw();
    ad::Node* p_ls = log_sigma.raw();
    ad::Node* p_pl = pen_logit.raw();
    o->backward_fn = [o, p_pi, p_mu, p_ls, p_pl, target, pen] {
      MdnRowGrads grads;
      mdn_rows_forward(p_pi->value, p_mu->value, p_ls->value, p_pl->value,
                       target, pen, &grads);
      const Eigen::VectorXd& g = o->grad.col(0);
      if (p_pi->requires_grad)
        p_pi->add_grad(g.asDiagonal() * grads.pi_logit);
      if (p_mu->requires_grad) p_mu->add_grad(g.asDiagonal() * grads.mu);
      if (p_ls->requires_grad)
        p_ls->add_grad(g.asDiagonal() * grads.log_sigma);
      if (p_pl->requires_grad)
        p_pl->add_grad(g.asDiagonal() * grads.pen_logit);
    };
  }
  return out;
}

double mdn_nll(const MixtureParams& params, const Eigen::VectorXd& target,
               int pen) {
  const long k = params.pi.size();
  const long d = target.size();
  if (params.mu.rows() != k || params.sigma.rows() != k ||
      params.mu.cols() != d || params.sigma.cols() != d)
    throw Error(ErrorKind::shape, "mdn_nll: mixture shape mismatch");
  if (!params.pi.allFinite() || !params.mu.allFinite() ||
      !params.sigma.allFinite() || params.sigma.minCoeff() <= 0.0 ||
      params.pen_prob <= 0.0 || params.pen_prob >= 1.0)
    throw Error(ErrorKind::numeric, "mdn_nll: invalid mixture parameters");
  // Route through the shared kernel so the measured value and the
  // training gradient come from one implementation.
  Eigen::MatrixXd pi_logit = params.pi.cwiseMax(1e-300).array().log()
                                 .matrix()
                                 .transpose();
  Eigen::MatrixXd mu(1, k * d), log_sigma(1, k * d);
  for (long kk = 0; kk < k; ++kk)
    for (long dd = 0; dd < d; ++dd) {
      mu(0, kk * d + dd) = params.mu(kk, dd);
      log_sigma(0, kk * d + dd) = std::log(params.sigma(kk, dd));
    }
  Eigen::MatrixXd pen_logit(1, 1);
  pen_logit(0, 0) =
      std::log(params.pen_prob) - std::log1p(-params.pen_prob);
  Eigen::VectorXd pen_v(1);
  pen_v[0] = pen;
  const Eigen::VectorXd nll = mdn_rows_forward(
      pi_logit, mu, log_sigma, pen_logit, target.transpose(), pen_v, nullptr);
  if (!std::isfinite(nll[0]))
    throw Error(ErrorKind::numeric, "mdn_nll: non-finite value");
  return nll[0];
}

namespace {

struct StepState {
  LstmState l1, l2, l3;
  ad::Var kappa;
};

struct StepOut {
  ad::Var pi_logit, mu, log_sigma, pen_logit, context, phi;
};

StepState zero_step_state(ad::Tape& tape, const GeneratorConfig& cfg,
                          long batch) {
  StepState s;
  s.l1 = lstm_zero_state(tape, batch, cfg.lstm1);
  s.l2 = lstm_zero_state(tape, batch, cfg.lstm2);
  s.l3 = lstm_zero_state(tape, batch, cfg.lstm3);
  s.kappa =
      tape.constant(Eigen::MatrixXd::Zero(batch, cfg.attn_components));
  return s;
}

StepOut decoder_step_batch(ParamStore& params, ad::Tape& tape,
                           const GeneratorConfig& cfg, const ad::Var& x_t,
                           const ad::Var& style_proj,
                           const std::vector<const LabelEncoding*>& labels,
                           long max_label_len, StepState& state,
                           const Eigen::VectorXd* mask) {
  const int k_att = cfg.attn_components;
  const int k_mdn = cfg.mdn_components;
  const int d = cont_dim(cfg.repr);

  ad::Var u = ad::add(dense(params, tape, "gen.in", x_t), style_proj);
  state.l1 = lstm_step(params, tape, "gen.lstm1", u, state.l1, mask);

  ad::Var att = dense(params, tape, "gen.att", state.l1.h);
  ad::Var alpha = ad::exp(ad::slice_cols(att, 0, k_att));
  ad::Var beta = ad::exp(ad::slice_cols(att, k_att, k_att));
  ad::Var delta = ad::exp(ad::slice_cols(att, 2 * k_att, k_att));
  state.kappa = ad::add(state.kappa, delta);
  // One phantom position past the label end; it never feeds the
  // context but tells inference when the window has moved past the
  // text.
  ad::Var phi = gmm_window(alpha, beta, state.kappa, max_label_len + 1);
  ad::Var ctx = attend_onehot(phi, labels);

  state.l2 = lstm_step(params, tape, "gen.lstm2",
                       ad::concat_cols(state.l1.h, ctx), state.l2, mask);
  state.l3 = lstm_step(params, tape, "gen.lstm3",
                       ad::concat_cols(state.l2.h, ctx), state.l3, mask);
  ad::Var head = dense(params, tape, "gen.head", state.l3.h);

  StepOut out;
  out.phi = phi;
  out.pi_logit = ad::slice_cols(head, 0, k_mdn);
  out.mu = ad::slice_cols(head, k_mdn, k_mdn * d);
  out.log_sigma = ad::slice_cols(head, k_mdn + k_mdn * d, k_mdn * d);
  out.pen_logit = ad::slice_cols(head, k_mdn + 2 * k_mdn * d, 1);
  out.context = ctx;
  return out;
}

}  // namespace

ad::Var joint_loss(ParamStore& params, ad::Tape& tape,
                   const GeneratorConfig& cfg,
                   const std::vector<TrainItem>& batch,
                   const NormStats& stats, double tau, LossBreakdown* out) {
  const long b_size = static_cast<long>(batch.size());
  if (b_size == 0)
    throw Error(ErrorKind::too_short, "joint_loss: empty batch");
  const int d = cont_dim(cfg.repr);

  // Style pieces, interleaved (begin_i, end_i) so rows (2i, 2i+1) are
  // the positive pairs.
  std::vector<FrameSeq> pieces;
  pieces.reserve(2 * static_cast<std::size_t>(b_size));
  for (const auto& item : batch) {
    pieces.push_back(item.style_begin);
    pieces.push_back(item.style_end);
  }
  ad::Var emb = encode_pieces(params, tape, cfg.style, "style.", pieces,
                              stats);
  Eigen::MatrixXd select = Eigen::MatrixXd::Zero(b_size, 2 * b_size);
  for (long i = 0; i < b_size; ++i) select(i, 2 * i) = 1.0;
  ad::Var cond = ad::matmul(tape.constant(select), emb);
  ad::Var style_proj =
      ad::matmul(cond, params.use(tape, "gen.style_proj.W"));

  long t_max = 0;
  long total_frames = 0;
  std::vector<Eigen::MatrixXd> norm_frames;
  std::vector<const LabelEncoding*> labels;
  long max_label = 1;
  for (const auto& item : batch) {
    norm_frames.push_back(standardize(item.target->frames, stats));
    t_max = std::max(t_max, item.target->size());
    total_frames += item.target->size();
    labels.push_back(item.label);
    max_label = std::max(max_label, item.label->length());
  }

  StepState state = zero_step_state(tape, cfg, b_size);
  ad::Var nll_sum = tape.constant(Eigen::MatrixXd::Zero(1, 1));
  for (long t = 0; t < t_max; ++t) {
    Eigen::MatrixXd x = Eigen::MatrixXd::Zero(b_size, d + 1);
    Eigen::MatrixXd target = Eigen::MatrixXd::Zero(b_size, d);
    Eigen::VectorXd pen = Eigen::VectorXd::Zero(b_size);
    Eigen::VectorXd mask = Eigen::VectorXd::Zero(b_size);
    for (long i = 0; i < b_size; ++i) {
      const FrameSeq& fs = *batch[static_cast<std::size_t>(i)].target;
      if (t >= fs.size()) continue;
      mask[i] = 1.0;
      if (t > 0) {
        x.block(i, 0, 1, d) =
            norm_frames[static_cast<std::size_t>(i)].row(t - 1);
        x(i, d) = static_cast<double>(fs.pen[t - 1]);
      }
      target.row(i) = norm_frames[static_cast<std::size_t>(i)].row(t);
      pen[i] = static_cast<double>(fs.pen[t]);
    }
    StepOut step = decoder_step_batch(params, tape, cfg, tape.constant(x),
                                      style_proj, labels, max_label, state,
                                      &mask);
    ad::Var nll_t = mdn_nll_rows(step.pi_logit, step.mu, step.log_sigma,
                                 step.pen_logit, target, pen);
    nll_sum = ad::add(nll_sum, ad::sum(ad::scale_rows(nll_t, mask)));
  }
  ad::Var nll =
      ad::scalar_mul(nll_sum, 1.0 / static_cast<double>(total_frames));

  ad::Var simclr = b_size >= 2 ? simclr_loss(emb, tau)
                               : tape.constant(Eigen::MatrixXd::Zero(1, 1));
  ad::Var total = ad::add(nll, simclr);
  if (out != nullptr) {
    out->nll = nll.scalar();
    out->simclr = simclr.scalar();
    out->total = total.scalar();
  }
  return total;
}

Eigen::VectorXd sample_frame(const MixtureParams& params,
                             const SamplingConfig& cfg, std::mt19937_64& rng,
                             int* pen_out) {
  const long k = params.pi.size();
  const long d = params.mu.cols();
  long comp = 0;
  Eigen::VectorXd x(d);
  if (std::isinf(cfg.bias)) {
    params.pi.maxCoeff(&comp);
    x = params.mu.row(comp).transpose();
    if (pen_out != nullptr)
      *pen_out = params.pen_prob >= cfg.pen_threshold ? 1 : 0;
    return x;
  }
  // Graves-style sharpening: pi^(1+b), sigma * exp(-b).
  Eigen::VectorXd sharp = params.pi.array().pow(1.0 + cfg.bias);
  sharp /= sharp.sum();
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  double r = u01(rng);
  for (comp = 0; comp < k - 1; ++comp) {
    r -= sharp[comp];
    if (r <= 0.0) break;
  }
  std::normal_distribution<double> gauss;
  for (long dd = 0; dd < d; ++dd)
    x[dd] = params.mu(comp, dd) +
            params.sigma(comp, dd) * std::exp(-cfg.bias) * gauss(rng);
  if (pen_out != nullptr)
    *pen_out = u01(rng) < params.pen_prob ? 1 : 0;
  return x;
}

Decoder::Decoder(ParamStore& params, const GeneratorConfig& cfg,
                 const NormStats& stats)
    : params_(params), cfg_(cfg), stats_(stats) {
  tape_.set_recording(false);
}

Decoder::State Decoder::init_state(const LabelEncoding& label) {
  State s;
  StepState core = zero_step_state(tape_, cfg_, 1);
  s.l1 = core.l1;
  s.l2 = core.l2;
  s.l3 = core.l3;
  s.kappa = core.kappa;
  s.context =
      tape_.constant(Eigen::MatrixXd::Zero(1, cfg_.charset_size));
  s.label_len = label.length();
  s.initialized = true;
  return s;
}

std::pair<MixtureParams, Decoder::State> Decoder::decode_step(
    const Eigen::VectorXd& prev_frame, const StyleEmbedding& style,
    const LabelEncoding& label, const State& state) {
  if (!state.initialized)
    throw Error(ErrorKind::state, "decode_step: state not initialized");
  const int d = cont_dim(cfg_.repr);
  if (prev_frame.size() != d + 1)
    throw Error(ErrorKind::shape, "decode_step: bad frame size");

  StepState core{state.l1, state.l2, state.l3, state.kappa};
  ad::Var style_proj =
      ad::matmul(tape_.constant(style.h.transpose()),
                 params_.use(tape_, "gen.style_proj.W"));
  std::vector<const LabelEncoding*> labels{&label};
  const StepOut out = decoder_step_batch(
      params_, tape_, cfg_, tape_.constant(prev_frame.transpose()),
      style_proj, labels, std::max<long>(1, label.length()), core, nullptr);

  MixtureParams mix;
  const long k = cfg_.mdn_components;
  Eigen::VectorXd logits = out.pi_logit.value().row(0).transpose();
  logits.array() -= logits.maxCoeff();
  mix.pi = logits.array().exp();
  mix.pi /= mix.pi.sum();
  mix.mu.resize(k, d);
  mix.sigma.resize(k, d);
  for (long kk = 0; kk < k; ++kk)
    for (long dd = 0; dd < d; ++dd) {
      mix.mu(kk, dd) = out.mu.value()(0, kk * d + dd);
      mix.sigma(kk, dd) = std::exp(out.log_sigma.value()(0, kk * d + dd));
    }
  mix.pen_prob = 1.0 / (1.0 + std::exp(-out.pen_logit.value()(0, 0)));

  State next;
  next.l1 = core.l1;
  next.l2 = core.l2;
  next.l3 = core.l3;
  next.kappa = core.kappa;
  next.context = out.context;
  next.phi = out.phi;
  next.label_len = state.label_len;
  next.initialized = true;
  return {mix, next};
}

double Decoder::min_kappa(const State& state) {
  return state.kappa.value().row(0).minCoeff();
}

bool Decoder::window_past_end(const State& state) {
  if (!state.phi.defined()) return false;
  const auto& phi = state.phi.value();
  const long n = phi.cols();
  if (n < 2) return false;
  const double phantom = phi(0, n - 1);
  return phantom > phi.row(0).head(n - 1).maxCoeff();
}

namespace {

GenerateResult rollout(Decoder& decoder, const GeneratorConfig& cfg,
                       const NormStats& stats, const LabelEncoding& label,
                       long text_chars, const StyleEmbedding& style,
                       const SamplingConfig& sampling, std::mt19937_64& rng,
                       const FrameSeq* primer) {
  const int d = cont_dim(cfg.repr);
  Decoder::State state = decoder.init_state(label);
  Eigen::VectorXd prev = Eigen::VectorXd::Zero(d + 1);

  if (primer != nullptr) {
    const Eigen::MatrixXd norm = standardize(primer->frames, stats);
    for (long t = 0; t < primer->size(); ++t) {
      auto [mix, next] = decoder.decode_step(prev, style, label, state);
      state = next;
      (void)mix;
      prev.head(d) = norm.row(t).transpose();
      prev[d] = static_cast<double>(primer->pen[t]);
    }
  }

  // Budget covers the text we are asked to write, not the primer.
  const long budget = static_cast<long>(sampling.max_frames_per_char) *
                      std::max<long>(1, text_chars);

  GenerateResult result;
  std::vector<Eigen::VectorXd> frames;
  std::vector<int> pens;
  bool stop_pending = false;
  for (long step = 0; step < budget; ++step) {
    auto [mix, next] = decoder.decode_step(prev, style, label, state);
    state = next;
    int pen = 0;
    const Eigen::VectorXd x = sample_frame(mix, sampling, rng, &pen);
    frames.push_back(x);
    pens.push_back(pen);
    prev.head(d) = x;
    prev[d] = static_cast<double>(pen);
    if (Decoder::window_past_end(state)) stop_pending = true;
    if (stop_pending && pen == 1) break;  // finish the stroke, then stop
    if (step + 1 == budget) result.hit_budget = true;
  }
  result.steps = static_cast<long>(frames.size());

  FrameSeq fs;
  fs.kind = cfg.repr;
  fs.frames.resize(result.steps, d);
  fs.pen.resize(result.steps);
  for (long t = 0; t < result.steps; ++t) {
    fs.frames.row(t) = frames[static_cast<std::size_t>(t)].transpose();
    fs.pen[t] = pens[static_cast<std::size_t>(t)];
  }
  if (result.steps > 0) fs.pen[result.steps - 1] = 1;
  fs.frames = unstandardize(fs.frames, stats);
  result.frames = fs;
  result.ink = frames_to_ink(fs);
  result.ink.label = label.text;
  return result;
}

}  // namespace

GenerateResult generate(ParamStore& params, const GeneratorConfig& cfg,
                        const NormStats& stats, const LabelEncoding& label,
                        const StyleEmbedding& style,
                        const SamplingConfig& sampling,
                        std::mt19937_64& rng) {
  if (label.length() == 0)
    throw Error(ErrorKind::empty_label, "generate: empty label");
  Decoder decoder(params, cfg, stats);
  return rollout(decoder, cfg, stats, label, label.length(), style, sampling,
                 rng, nullptr);
}

GenerateResult generate_primed(ParamStore& params, const GeneratorConfig& cfg,
                               const NormStats& stats,
                               const std::string& primer_label,
                               const FrameSeq& primer_frames,
                               const std::string& text,
                               const SamplingConfig& sampling,
                               std::mt19937_64& rng) {
  if (text.empty())
    throw Error(ErrorKind::empty_label, "generate_primed: empty text");
  const LabelEncoding combined =
      encode_label(primer_label + " " + text, default_charset());
  StyleEmbedding zero{Eigen::VectorXd::Zero(cfg.style.out_dim)};
  Decoder decoder(params, cfg, stats);
  GenerateResult result =
      rollout(decoder, cfg, stats, combined, static_cast<long>(text.size()),
              zero, sampling, rng, &primer_frames);
  result.ink.label = text;
  return result;
}

namespace {

std::pair<FrameSeq, FrameSeq> cut_style_pieces(const FrameSeq& fs,
                                               std::mt19937_64& rng) {
  std::vector<long> ends;
  for (long i = 0; i < fs.size(); ++i)
    if (fs.pen[i] == 1) ends.push_back(i);
  const int s = static_cast<int>(ends.size());
  if (s < 3) return {fs, fs};
  std::uniform_real_distribution<double> frac(0.3, 0.7);
  int a = static_cast<int>(std::lround(frac(rng) * s));
  a = std::clamp(a, 1, s - 2);
  std::uniform_int_distribution<int> pick_b(a + 1, s - 1);
  const int b = pick_b(rng);
  return {slice_strokes(fs, 0, a), slice_strokes(fs, b, s)};
}

}  // namespace

Checkpoint train_generator(const std::vector<Ink>& dataset,
                           const GeneratorTrainConfig& cfg,
                           GeneratorTrainLog* log) {
  if (dataset.empty())
    throw Error(ErrorKind::too_short, "train_generator: empty dataset");
  const Charset& charset = default_charset();

  std::vector<FrameSeq> frames;
  std::vector<LabelEncoding> labels;
  frames.reserve(dataset.size());
  for (const auto& ink : dataset) {
    frames.push_back(ink_to_frames(ink, cfg.arch.repr));
    labels.push_back(encode_label(ink.label, charset));
  }
  const NormStats stats = compute_norm_stats(frames);

  // Deterministic validation split.
  std::vector<std::size_t> order(dataset.size());
  std::iota(order.begin(), order.end(), 0);
  std::mt19937_64 split_rng = rng_stream(cfg.seed, 21);
  std::shuffle(order.begin(), order.end(), split_rng);
  const std::size_t n_val = std::min<std::size_t>(
      std::max<std::size_t>(1, static_cast<std::size_t>(
                                   cfg.val_fraction * dataset.size())),
      dataset.size() > 1 ? dataset.size() - 1 : 1);
  std::vector<std::size_t> val_ids(order.begin(),
                                   order.begin() + static_cast<long>(n_val));
  std::vector<std::size_t> train_ids(order.begin() + static_cast<long>(n_val),
                                     order.end());
  if (train_ids.empty()) train_ids = val_ids;

  // Length-bucketed batches keep padding waste small.
  std::sort(train_ids.begin(), train_ids.end(),
            [&frames](std::size_t a, std::size_t b) {
              return frames[a].size() < frames[b].size();
            });
  std::vector<std::vector<std::size_t>> buckets;
  for (std::size_t i = 0; i < train_ids.size();
       i += static_cast<std::size_t>(cfg.batch))
    buckets.emplace_back(
        train_ids.begin() + static_cast<long>(i),
        train_ids.begin() +
            static_cast<long>(std::min(i + cfg.batch, train_ids.size())));

  ParamStore params;
  std::mt19937_64 init_rng = rng_stream(cfg.seed, 22);
  init_generator_params(params, cfg.arch, init_rng);

  AdamConfig adam;
  adam.lr = cfg.lr;

  auto make_items = [&](const std::vector<std::size_t>& ids,
                        std::mt19937_64& rng) {
    std::vector<TrainItem> items;
    items.reserve(ids.size());
    for (std::size_t id : ids) {
      if (frames[id].size() < 2) continue;
      TrainItem item;
      item.target = &frames[id];
      item.label = &labels[id];
      auto [begin, end] = cut_style_pieces(frames[id], rng);
      item.style_begin = std::move(begin);
      item.style_end = std::move(end);
      items.push_back(std::move(item));
    }
    return items;
  };

  auto val_nll = [&]() {
    std::mt19937_64 rng = rng_stream(cfg.seed, 23);
    const std::vector<TrainItem> items = make_items(val_ids, rng);
    if (items.empty()) return 0.0;
    ad::Tape tape;
    tape.set_recording(false);
    LossBreakdown breakdown;
    joint_loss(params, tape, cfg.arch, items, stats, cfg.tau, &breakdown);
    params.release_bindings();
    return breakdown.nll;
  };

  std::mt19937_64 rng = rng_stream(cfg.seed, 24);
  double best = std::numeric_limits<double>::infinity();
  ParamStore best_params = params;
  int best_step = -1;
  for (int step = 0; step < cfg.steps; ++step) {
    const auto& bucket = buckets[static_cast<std::size_t>(
        rng() % buckets.size())];
    const std::vector<TrainItem> items = make_items(bucket, rng);
    if (items.empty()) continue;
    ad::Tape tape;
    LossBreakdown breakdown;
    const ad::Var loss =
        joint_loss(params, tape, cfg.arch, items, stats, cfg.tau, &breakdown);
    tape.backward(loss);
    params.adam_step(params.gradients(), adam);
    tape.clear();
    params.release_bindings();
    if (log != nullptr) log->train.push_back(breakdown);
    if (cfg.eval_every > 0 && (step + 1) % cfg.eval_every == 0) {
      const double v = val_nll();
      if (log != nullptr) log->val_nll.emplace_back(step + 1, v);
      if (v < best) {
        best = v;
        best_params = params;
        best_step = step + 1;
      }
    }
  }
  if (best_step < 0) best_params = params;
  if (log != nullptr) log->best_step = best_step;

  Checkpoint ckpt;
  ckpt.params = std::move(best_params);
  ckpt.meta["model_kind"] = "generator";
  ckpt.meta["repr"] = cfg.arch.repr == ReprKind::raw ? "raw" : "curve";
  ckpt.meta["charset"] = charset.symbols;
  ckpt.meta["normalization"] = {
      {"mean", std::vector<double>(stats.mean.data(),
                                   stats.mean.data() + stats.mean.size())},
      {"std", std::vector<double>(stats.stddev.data(),
                                  stats.stddev.data() + stats.stddev.size())}};
  ckpt.meta["arch"] = {{"input_proj", cfg.arch.input_proj},
                       {"lstm1", cfg.arch.lstm1},
                       {"lstm2", cfg.arch.lstm2},
                       {"lstm3", cfg.arch.lstm3},
                       {"attn_components", cfg.arch.attn_components},
                       {"mdn_components", cfg.arch.mdn_components},
                       {"style_bi", cfg.arch.style.bi_hidden},
                       {"style_uni", cfg.arch.style.uni_hidden},
                       {"style_d1", cfg.arch.style.dense1},
                       {"style_d2", cfg.arch.style.dense2}};
  return ckpt;
}

GeneratorConfig generator_config_from_meta(const nlohmann::json& meta) {
  GeneratorConfig cfg;
  cfg.repr = meta.at("repr").get<std::string>() == "curve" ? ReprKind::curve
                                                           : ReprKind::raw;
  const auto& arch = meta.at("arch");
  cfg.input_proj = arch.at("input_proj").get<int>();
  cfg.lstm1 = arch.at("lstm1").get<int>();
  cfg.lstm2 = arch.at("lstm2").get<int>();
  cfg.lstm3 = arch.at("lstm3").get<int>();
  cfg.attn_components = arch.at("attn_components").get<int>();
  cfg.mdn_components = arch.at("mdn_components").get<int>();
  cfg.style.input_dim = cont_dim(cfg.repr) + 1;
  cfg.style.bi_hidden = arch.at("style_bi").get<int>();
  cfg.style.uni_hidden = arch.at("style_uni").get<int>();
  cfg.style.dense1 = arch.at("style_d1").get<int>();
  cfg.style.dense2 = arch.at("style_d2").get<int>();
  return cfg;
}

NormStats norm_stats_from_meta(const nlohmann::json& meta) {
  NormStats stats;
  const auto mean = meta.at("normalization").at("mean")
                        .get<std::vector<double>>();
  const auto stddev =
      meta.at("normalization").at("std").get<std::vector<double>>();
  stats.mean = Eigen::Map<const Eigen::VectorXd>(mean.data(),
                                                 static_cast<long>(mean.size()));
  stats.stddev = Eigen::Map<const Eigen::VectorXd>(
      stddev.data(), static_cast<long>(stddev.size()));
  return stats;
}

}  // namespace longink
