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

#ifndef LONGINK_STYLE_ENCODER_HPP
#define LONGINK_STYLE_ENCODER_HPP

#include <string>
#include <vector>

#include "longink/frames.hpp"
#include "longink/lstm.hpp"
#include "longink/params.hpp"

namespace longink {

/// Architecture of the style model: bidirectional LSTM, unidirectional
/// LSTM whose last state feeds three dense layers ending in a 16-dim
/// embedding compared by cosine.
struct StyleConfig {
  int input_dim = 3;  // cont_dim(repr) + pen bit
  int bi_hidden = 32;
  int uni_hidden = 32;
  int dense1 = 32;
  int dense2 = 32;
  int out_dim = 16;
};

/// Fixed-size style vector; only its direction carries meaning.
struct StyleEmbedding {
  Eigen::VectorXd h;
};

/// Two non-overlapping pieces of one ink with a non-empty gap between
/// them, used as a contrastive positive pair.
struct InkPiecePair {
  FrameSeq begin;
  FrameSeq end;
  std::string source_id;
};

void init_style_params(ParamStore& params, const StyleConfig& cfg,
                       const std::string& prefix, std::mt19937_64& rng);

/// Batched piece encoder, [N x out_dim], gradient-tracking. Pieces may
/// have different lengths; padded positions carry state through.
ad::Var encode_pieces(ParamStore& params, ad::Tape& tape,
                      const StyleConfig& cfg, const std::string& prefix,
                      const std::vector<FrameSeq>& pieces,
                      const NormStats& stats);

/// Single-sequence encoder for inference (full inks).
StyleEmbedding encode_style(ParamStore& params, const StyleConfig& cfg,
                            const std::string& prefix, const FrameSeq& frames,
                            const NormStats& stats);

double cosine_similarity(const StyleEmbedding& a, const StyleEmbedding& b);

/// Splits an ink (>= 3 strokes) into begin / gap / end at two cut points
/// drawn uniformly over all stroke-boundary pairs with a non-empty gap.
InkPiecePair make_piece_pairs(const Ink& ink, ReprKind repr,
                              std::mt19937_64& rng,
                              const std::string& source_id = "");

/// NT-Xent over 2B embeddings where rows (2i, 2i+1) are the positive
/// pair from ink i: temperature-scaled cosine logits against all in-batch
/// negatives, mean cross entropy over the 2B anchors.
ad::Var simclr_loss(const ad::Var& embeddings, double tau);

struct StyleTrainConfig {
  ReprKind repr = ReprKind::raw;
  StyleConfig arch;
  int batch_inks = 16;
  double tau = 0.1;
  int steps = 300;
  double lr = 1e-3;
  std::uint64_t seed = 1;
};

struct StyleTrainLog {
  std::vector<double> loss;
};

/// Trains the contrastive style model from scratch on the corpus;
/// parameters are created under "style." in `params`.
StyleTrainLog train_style(const std::vector<Ink>& corpus,
                          const StyleTrainConfig& cfg, ParamStore& params,
                          NormStats* stats_out);

struct StyleSeparation {
  double mean_positive = 0.0;
  double mean_negative = 0.0;
  double triple_accuracy = 0.0;  // fraction with cos(pos) > cos(neg)
  int n_triples = 0;
};

/// Held-out separation: cosine of same-ink piece pairs vs pieces from
/// other inks, plus the fraction of triples ranked correctly.
StyleSeparation evaluate_style_separation(
    ParamStore& params, const StyleConfig& cfg, const std::string& prefix,
    const std::vector<Ink>& inks, ReprKind repr, const NormStats& stats,
    int n_triples, std::uint64_t seed);

}  // namespace longink

#endif  // LONGINK_STYLE_ENCODER_HPP
