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

#include "longink/style_encoder.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "longink/random.hpp"

namespace longink {

void init_style_params(ParamStore& params, const StyleConfig& cfg,
                       const std::string& prefix, std::mt19937_64& rng) {
  init_lstm(params, prefix + "fwd", cfg.input_dim, cfg.bi_hidden, rng);
  init_lstm(params, prefix + "bwd", cfg.input_dim, cfg.bi_hidden, rng);
  init_lstm(params, prefix + "uni", 2 * cfg.bi_hidden, cfg.uni_hidden, rng);
  init_dense(params, prefix + "d1", cfg.uni_hidden, cfg.dense1, rng);
  init_dense(params, prefix + "d2", cfg.dense1, cfg.dense2, rng);
  init_dense(params, prefix + "out", cfg.dense2, cfg.out_dim, rng);
}

namespace {

struct PaddedBatch {
  std::vector<Eigen::MatrixXd> x;      // per step, N x input_dim
  std::vector<Eigen::VectorXd> mask;   // per step, N
  std::vector<Eigen::VectorXd> is_last;  // per step, N
  long n = 0;
  long t_max = 0;
};

PaddedBatch pad_pieces(const std::vector<FrameSeq>& pieces,
                       const NormStats& stats, int input_dim) {
  PaddedBatch batch;
  batch.n = static_cast<long>(pieces.size());
  for (const auto& p : pieces) batch.t_max = std::max(batch.t_max, p.size());
  for (long t = 0; t < batch.t_max; ++t) {
    batch.x.emplace_back(Eigen::MatrixXd::Zero(batch.n, input_dim));
    batch.mask.emplace_back(Eigen::VectorXd::Zero(batch.n));
    batch.is_last.emplace_back(Eigen::VectorXd::Zero(batch.n));
  }
  for (long i = 0; i < batch.n; ++i) {
    const FrameSeq& p = pieces[static_cast<std::size_t>(i)];
    if (p.size() == 0)
      throw Error(ErrorKind::empty_ink, "cannot encode an empty piece");
    const Eigen::MatrixXd cont = standardize(p.frames, stats);
    for (long t = 0; t < p.size(); ++t) {
      batch.x[static_cast<std::size_t>(t)].block(i, 0, 1, cont.cols()) =
          cont.row(t);
      batch.x[static_cast<std::size_t>(t)](i, input_dim - 1) =
          static_cast<double>(p.pen[t]);
      batch.mask[static_cast<std::size_t>(t)][i] = 1.0;
    }
    batch.is_last[static_cast<std::size_t>(p.size() - 1)][i] = 1.0;
  }
  return batch;
}

}  // namespace

ad::Var encode_pieces(ParamStore& params, ad::Tape& tape,
                      const StyleConfig& cfg, const std::string& prefix,
                      const std::vector<FrameSeq>& pieces,
                      const NormStats& stats) {
  if (pieces.empty())
    throw Error(ErrorKind::empty_ink, "no pieces to encode");
  const PaddedBatch batch = pad_pieces(pieces, stats, cfg.input_dim);

  std::vector<ad::Var> x_vars(static_cast<std::size_t>(batch.t_max));
  for (long t = 0; t < batch.t_max; ++t)
    x_vars[static_cast<std::size_t>(t)] =
        tape.constant(batch.x[static_cast<std::size_t>(t)]);

  // Forward direction.
  std::vector<ad::Var> fwd_out(static_cast<std::size_t>(batch.t_max));
  LstmState state = lstm_zero_state(tape, batch.n, cfg.bi_hidden);
  for (long t = 0; t < batch.t_max; ++t) {
    state = lstm_step(params, tape, prefix + "fwd",
                      x_vars[static_cast<std::size_t>(t)], state,
                      &batch.mask[static_cast<std::size_t>(t)]);
    fwd_out[static_cast<std::size_t>(t)] = state.h;
  }
  // Backward direction over the same left-aligned data: padded tail
  // positions carry the zero state until real frames start.
  std::vector<ad::Var> bwd_out(static_cast<std::size_t>(batch.t_max));
  state = lstm_zero_state(tape, batch.n, cfg.bi_hidden);
  for (long t = batch.t_max - 1; t >= 0; --t) {
    state = lstm_step(params, tape, prefix + "bwd",
                      x_vars[static_cast<std::size_t>(t)], state,
                      &batch.mask[static_cast<std::size_t>(t)]);
    bwd_out[static_cast<std::size_t>(t)] = state.h;
  }
  // Unidirectional pass; collect the last real state per piece.
  state = lstm_zero_state(tape, batch.n, cfg.uni_hidden);
  ad::Var last = tape.constant(Eigen::MatrixXd::Zero(batch.n, cfg.uni_hidden));
  for (long t = 0; t < batch.t_max; ++t) {
    const ad::Var joint = ad::concat_cols(fwd_out[static_cast<std::size_t>(t)],
                                          bwd_out[static_cast<std::size_t>(t)]);
    state = lstm_step(params, tape, prefix + "uni", joint, state,
                      &batch.mask[static_cast<std::size_t>(t)]);
    const Eigen::VectorXd& pick = batch.is_last[static_cast<std::size_t>(t)];
    if (pick.sum() > 0.0)
      last = ad::add(last, ad::scale_rows(state.h, pick));
  }
  ad::Var h = dense_tanh(params, tape, prefix + "d1", last);
  h = dense_tanh(params, tape, prefix + "d2", h);
  return dense(params, tape, prefix + "out", h);
}

StyleEmbedding encode_style(ParamStore& params, const StyleConfig& cfg,
                            const std::string& prefix, const FrameSeq& frames,
                            const NormStats& stats) {
  if (frames.size() == 0)
    throw Error(ErrorKind::empty_ink, "cannot encode empty frames");
  ad::Tape tape;
  tape.set_recording(false);
  const ad::Var e = encode_pieces(params, tape, cfg, prefix, {frames}, stats);
  StyleEmbedding out;
  out.h = e.value().row(0).transpose();
  params.release_bindings();
  return out;
}

double cosine_similarity(const StyleEmbedding& a, const StyleEmbedding& b) {
  const double na = a.h.norm();
  const double nb = b.h.norm();
  if (na == 0.0 || nb == 0.0)
    throw Error(ErrorKind::degenerate_embedding, "zero-norm embedding");
  return a.h.dot(b.h) / (na * nb);
}

InkPiecePair make_piece_pairs(const Ink& ink, ReprKind repr,
                              std::mt19937_64& rng,
                              const std::string& source_id) {
  const int s = static_cast<int>(ink.strokes.size());
  if (s < 3)
    throw Error(ErrorKind::too_short,
                "need at least 3 strokes to cut begin/gap/end");
  // Cut points i < j over boundaries 1..s-1, all pairs equally likely.
  const long n_pairs = static_cast<long>(s - 1) * (s - 2) / 2;
  std::uniform_int_distribution<long> dist(0, n_pairs - 1);
  long k = dist(rng);
  int i = 1;
  while (k >= s - 1 - i) {
    k -= s - 1 - i;
    ++i;
  }
  const int j = i + 1 + static_cast<int>(k);

  const FrameSeq full = ink_to_frames(ink, repr);
  InkPiecePair pair;
  pair.begin = slice_strokes(full, 0, i);
  pair.end = slice_strokes(full, j, s);
  pair.source_id = source_id;
  return pair;
}

ad::Var simclr_loss(const ad::Var& embeddings, double tau) {
  const long n = embeddings.rows();
  if (n < 4 || n % 2 != 0)
    throw Error(ErrorKind::need_negatives,
                "NT-Xent needs at least two positive pairs");
  ad::Tape& tape = *embeddings.raw()->tape;
  // Cosine logits: normalize rows, then all-pairs dot products.
  const ad::Var sq = ad::row_sum(ad::mul(embeddings, embeddings));
  const ad::Var inv_norm = ad::div(
      tape.constant(Eigen::MatrixXd::Ones(n, 1)),
      ad::sqrt(ad::add_scalar(sq, 1e-24)));
  const ad::Var unit = ad::mul_colvec(embeddings, inv_norm);
  const ad::Var logits =
      ad::scalar_mul(ad::matmul(unit, ad::transpose(unit)), 1.0 / tau);
  // Exclude self-similarity from the denominator.
  Eigen::MatrixXd diag_mask = Eigen::MatrixXd::Zero(n, n);
  diag_mask.diagonal().setConstant(-1e9);
  const ad::Var masked = ad::add(logits, tape.constant(diag_mask));
  const ad::Var lse = ad::logsumexp_rows(masked);
  // Positive logit per anchor: rows (2i, 2i+1) are partners.
  Eigen::MatrixXd pos_sel = Eigen::MatrixXd::Zero(n, n);
  for (long i = 0; i < n; i += 2) {
    pos_sel(i, i + 1) = 1.0;
    pos_sel(i + 1, i) = 1.0;
  }
  const ad::Var pos = ad::row_sum(ad::mul(logits, tape.constant(pos_sel)));
  return ad::scalar_mul(ad::sum(ad::sub(lse, pos)),
                        1.0 / static_cast<double>(n));
}

namespace {

bool usable_for_pairs(const Ink& ink) { return ink.strokes.size() >= 3; }

}  // namespace

StyleTrainLog train_style(const std::vector<Ink>& corpus,
                          const StyleTrainConfig& cfg, ParamStore& params,
                          NormStats* stats_out) {
  std::vector<std::size_t> usable;
  for (std::size_t i = 0; i < corpus.size(); ++i)
    if (usable_for_pairs(corpus[i])) usable.push_back(i);
  if (static_cast<int>(usable.size()) < cfg.batch_inks)
    throw Error(ErrorKind::too_short,
                "corpus has fewer usable inks than the batch size");

  std::vector<FrameSeq> all_frames;
  all_frames.reserve(corpus.size());
  for (const auto& ink : corpus)
    all_frames.push_back(ink_to_frames(ink, cfg.repr));
  const NormStats stats = compute_norm_stats(all_frames);
  if (stats_out != nullptr) *stats_out = stats;

  std::mt19937_64 init_rng = rng_stream(cfg.seed, 11);
  StyleConfig arch = cfg.arch;
  arch.input_dim = cont_dim(cfg.repr) + 1;
  init_style_params(params, arch, "style.", init_rng);

  AdamConfig adam;
  adam.lr = cfg.lr;

  StyleTrainLog log;
  std::mt19937_64 rng = rng_stream(cfg.seed, 12);
  for (int step = 0; step < cfg.steps; ++step) {
    std::shuffle(usable.begin(), usable.end(), rng);
    std::vector<FrameSeq> pieces;
    pieces.reserve(2 * static_cast<std::size_t>(cfg.batch_inks));
    for (int b = 0; b < cfg.batch_inks; ++b) {
      const Ink& ink = corpus[usable[static_cast<std::size_t>(b)]];
      InkPiecePair pair = make_piece_pairs(ink, cfg.repr, rng);
      pieces.push_back(std::move(pair.begin));
      pieces.push_back(std::move(pair.end));
    }
    ad::Tape tape;
    const ad::Var emb =
        encode_pieces(params, tape, arch, "style.", pieces, stats);
    const ad::Var loss = simclr_loss(emb, cfg.tau);
    log.loss.push_back(loss.scalar());
    tape.backward(loss);
    params.adam_step(params.gradients(), adam);
    tape.clear();
    params.release_bindings();
  }
  return log;
}

StyleSeparation evaluate_style_separation(
    ParamStore& params, const StyleConfig& cfg, const std::string& prefix,
    const std::vector<Ink>& inks, ReprKind repr, const NormStats& stats,
    int n_triples, std::uint64_t seed) {
  std::vector<std::size_t> usable;
  for (std::size_t i = 0; i < inks.size(); ++i)
    if (usable_for_pairs(inks[i])) usable.push_back(i);
  if (usable.size() < 2)
    throw Error(ErrorKind::too_short, "need at least 2 usable inks");
  std::mt19937_64 rng = rng_stream(seed, 0x5e9a);
  StyleSeparation sep;
  int correct = 0;
  for (int k = 0; k < n_triples; ++k) {
    std::uniform_int_distribution<std::size_t> pick(0, usable.size() - 1);
    const std::size_t a = pick(rng);
    std::size_t b = pick(rng);
    while (b == a) b = pick(rng);
    InkPiecePair pa = make_piece_pairs(inks[usable[a]], repr, rng);
    InkPiecePair pb = make_piece_pairs(inks[usable[b]], repr, rng);
    ad::Tape tape;
    tape.set_recording(false);
    const ad::Var emb = encode_pieces(
        params, tape, cfg, prefix, {pa.begin, pa.end, pb.begin}, stats);
    StyleEmbedding e0{emb.value().row(0).transpose()};
    StyleEmbedding e1{emb.value().row(1).transpose()};
    StyleEmbedding e2{emb.value().row(2).transpose()};
    const double pos = cosine_similarity(e0, e1);
    const double neg = cosine_similarity(e0, e2);
    sep.mean_positive += pos;
    sep.mean_negative += neg;
    if (pos > neg) ++correct;
    params.release_bindings();
  }
  sep.n_triples = n_triples;
  sep.mean_positive /= n_triples;
  sep.mean_negative /= n_triples;
  sep.triple_accuracy = static_cast<double>(correct) / n_triples;
  return sep;
}

}  // namespace longink
