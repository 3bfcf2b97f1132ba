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

#ifndef LONGINK_SYNTHESIS_HPP
#define LONGINK_SYNTHESIS_HPP

#include <optional>
#include <string>
#include <vector>

#include "longink/checkpoint.hpp"
#include "longink/frames.hpp"
#include "longink/lstm.hpp"
#include "longink/style_encoder.hpp"

namespace longink {

/// 70-symbol dictionary: a-z, A-Z, digits, space and 7 punctuation
/// marks.
struct Charset {
  std::string symbols;
  [[nodiscard]] int index(char c) const;
  [[nodiscard]] int size() const { return static_cast<int>(symbols.size()); }
};

const Charset& default_charset();

struct LabelEncoding {
  Eigen::MatrixXd onehots;  // U x charset size
  std::string text;
  [[nodiscard]] long length() const { return onehots.rows(); }
};

LabelEncoding encode_label(const std::string& text, const Charset& charset);

/// Decoder: input projection summed with a projected style vector, an
/// LSTM, monotonic gaussian-window attention over the label one-hots,
/// two more LSTMs and a mixture-density head.
struct GeneratorConfig {
  ReprKind repr = ReprKind::raw;
  int charset_size = 70;
  int input_proj = 64;
  int lstm1 = 64;
  int lstm2 = 64;
  int lstm3 = 64;
  int attn_components = 10;
  int mdn_components = 10;
  StyleConfig style;  // the jointly trained style branch

  [[nodiscard]] int frame_dim() const { return cont_dim(repr) + 1; }
  [[nodiscard]] int head_dim() const {
    return mdn_components * (1 + 2 * cont_dim(repr)) + 1;
  }
};

/// Paper-scale sizes (128/256 decoder, 256 style units).
GeneratorConfig paper_generator_config(ReprKind repr);
/// Small sizes for minute-scale training runs.
GeneratorConfig desk_generator_config(ReprKind repr);

void init_generator_params(ParamStore& params, const GeneratorConfig& cfg,
                           std::mt19937_64& rng);

/// Per-step mixture output: simplex weights, means, positive scales and
/// a pen-up probability.
struct MixtureParams {
  Eigen::VectorXd pi;      // K
  Eigen::MatrixXd mu;      // K x d
  Eigen::MatrixXd sigma;   // K x d
  double pen_prob = 0.5;
};

/// Negative log likelihood of one frame under the mixture plus the
/// Bernoulli pen bit, evaluated with log-sum-exp.
double mdn_nll(const MixtureParams& params, const Eigen::VectorXd& target,
               int pen);

/// Differentiable batched counterpart working on raw head outputs.
ad::Var mdn_nll_rows(const ad::Var& pi_logit, const ad::Var& mu,
                     const ad::Var& log_sigma, const ad::Var& pen_logit,
                     const Eigen::MatrixXd& target,
                     const Eigen::VectorXd& pen);

/// Monotonic attention window: phi[b, u] = sum_k alpha_k
/// exp(-beta_k (kappa_k - u)^2) for u = 0..n_positions-1.
ad::Var gmm_window(const ad::Var& alpha, const ad::Var& beta,
                   const ad::Var& kappa, long n_positions);

/// Soft label window: ctx[b] = sum_u phi[b, u] * onehots[b].row(u).
ad::Var attend_onehot(const ad::Var& phi,
                      const std::vector<const LabelEncoding*>& labels);

struct LossBreakdown {
  double nll = 0.0;
  double simclr = 0.0;
  double total = 0.0;
};

struct TrainItem {
  const FrameSeq* target = nullptr;
  const LabelEncoding* label = nullptr;
  FrameSeq style_begin;  // conditions the decoder
  FrameSeq style_end;    // second contrastive piece
};

/// Teacher-forced mean per-frame NLL conditioned on the begin pieces,
/// plus NT-Xent over the 2B piece embeddings (skipped when B = 1, where
/// no negatives exist). The style branch receives gradients from both
/// terms.
ad::Var joint_loss(ParamStore& params, ad::Tape& tape,
                   const GeneratorConfig& cfg,
                   const std::vector<TrainItem>& batch,
                   const NormStats& stats, double tau, LossBreakdown* out);

struct SamplingConfig {
  double bias = std::numeric_limits<double>::infinity();
  int max_frames_per_char = 40;
  double pen_threshold = 0.5;
};

/// Infinite bias collapses to the most probable component mean with a
/// thresholded pen bit; finite bias sharpens pi by (1+b), shrinks sigma
/// by exp(-b) and draws.
Eigen::VectorXd sample_frame(const MixtureParams& params,
                             const SamplingConfig& cfg, std::mt19937_64& rng,
                             int* pen_out);

/// Inference-side stepper; owns a non-recording tape.
class Decoder {
 public:
  Decoder(ParamStore& params, const GeneratorConfig& cfg,
          const NormStats& stats);

  struct State {
    LstmState l1, l2, l3;
    ad::Var kappa;    // 1 x K, componentwise non-decreasing over steps
    ad::Var context;  // last soft window
    ad::Var phi;      // attention over label positions + one phantom
    long label_len = 0;
    bool initialized = false;
  };

  State init_state(const LabelEncoding& label);

  /// One step: normalized previous frame (cont + pen) in, mixture out.
  std::pair<MixtureParams, State> decode_step(
      const Eigen::VectorXd& prev_frame, const StyleEmbedding& style,
      const LabelEncoding& label, const State& state);

  /// Smallest attention position across components.
  static double min_kappa(const State& state);

  /// True once the attention mass at the phantom one-past-end position
  /// exceeds the mass at every real label position; the natural end of
  /// writing for a monotonic window.
  static bool window_past_end(const State& state);

  [[nodiscard]] const NormStats& stats() const { return stats_; }

 private:
  ParamStore& params_;
  GeneratorConfig cfg_;
  NormStats stats_;
  ad::Tape tape_;
};

struct GenerateResult {
  Ink ink;
  FrameSeq frames;
  long steps = 0;
  bool hit_budget = false;
};

/// Autoregressive rollout from a zero frame, the style embedding summed
/// into every step's input. Stops at the first pen-up after the
/// attention window passes the label end, or when the frame budget
/// (max_frames_per_char x label length) runs out.
GenerateResult generate(ParamStore& params, const GeneratorConfig& cfg,
                        const NormStats& stats, const LabelEncoding& label,
                        const StyleEmbedding& style,
                        const SamplingConfig& sampling, std::mt19937_64& rng);

/// Teacher-forces `primer` frames (with its label prepended to the
/// target text) before generating; the primed prefix is stripped from
/// the result by frame index.
GenerateResult generate_primed(ParamStore& params, const GeneratorConfig& cfg,
                               const NormStats& stats,
                               const std::string& primer_label,
                               const FrameSeq& primer_frames,
                               const std::string& text,
                               const SamplingConfig& sampling,
                               std::mt19937_64& rng);

struct GeneratorTrainConfig {
  GeneratorConfig arch;
  int batch = 16;
  int steps = 600;
  double lr = 1e-4;
  double tau = 0.1;
  int eval_every = 50;
  double val_fraction = 0.08;
  std::uint64_t seed = 1;
};

struct GeneratorTrainLog {
  std::vector<LossBreakdown> train;
  std::vector<std::pair<int, double>> val_nll;
  int best_step = -1;
};

/// Adam on joint_loss over the dataset; keeps the parameters with the
/// best validation NLL. The checkpoint meta records model_kind, charset,
/// representation, normalization statistics and the config echo.
Checkpoint train_generator(const std::vector<Ink>& dataset,
                           const GeneratorTrainConfig& cfg,
                           GeneratorTrainLog* log);

/// Reads arch + stats back out of a generator checkpoint.
GeneratorConfig generator_config_from_meta(const nlohmann::json& meta);
NormStats norm_stats_from_meta(const nlohmann::json& meta);

}  // namespace longink

#endif  // LONGINK_SYNTHESIS_HPP
