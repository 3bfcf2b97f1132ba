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

#include <doctest.h>

#include <cmath>

#include "longink/corpus.hpp"
#include "longink/random.hpp"
#include "longink/synthesis.hpp"
#include "oracles.hpp"

using namespace longink;

namespace {

GeneratorConfig tiny_config() {
  GeneratorConfig cfg = desk_generator_config(ReprKind::raw);
  cfg.input_proj = 12;
  cfg.lstm1 = 12;
  cfg.lstm2 = 12;
  cfg.lstm3 = 12;
  cfg.attn_components = 3;
  cfg.mdn_components = 3;
  cfg.style.bi_hidden = 6;
  cfg.style.uni_hidden = 6;
  cfg.style.dense1 = 6;
  cfg.style.dense2 = 6;
  return cfg;
}

NormStats unit_stats(int d) {
  NormStats stats;
  stats.mean = Eigen::VectorXd::Zero(d);
  stats.stddev = Eigen::VectorXd::Ones(d);
  return stats;
}

FrameSeq toy_frames(std::mt19937_64& rng, int n, int n_strokes = 3) {
  std::normal_distribution<double> gauss;
  FrameSeq fs;
  fs.kind = ReprKind::raw;
  fs.frames.resize(n, 2);
  fs.pen.setZero(n);
  for (int i = 0; i < n; ++i) {
    fs.frames(i, 0) = gauss(rng);
    fs.frames(i, 1) = gauss(rng);
  }
  for (int s = 1; s <= n_strokes; ++s)
    fs.pen[std::min(n - 1, s * n / n_strokes - 1)] = 1;
  fs.pen[n - 1] = 1;
  return fs;
}

}  // namespace

TEST_CASE("charset has exactly 70 distinct symbols") {
  const Charset& cs = default_charset();
  CHECK(cs.size() == 70);
  for (int i = 0; i < cs.size(); ++i)
    CHECK(cs.index(cs.symbols[static_cast<std::size_t>(i)]) == i);
}

TEST_CASE("label encoding is one-hot and rejects unknown symbols") {
  const Charset& cs = default_charset();
  const LabelEncoding a = encode_label("a", cs);
  CHECK(a.onehots.rows() == 1);
  CHECK(a.onehots.cols() == 70);
  CHECK(a.onehots.sum() == doctest::Approx(1.0));
  CHECK(a.onehots(0, cs.index('a')) == 1.0);

  const LabelEncoding empty = encode_label("", cs);
  CHECK(empty.onehots.rows() == 0);

  CHECK_THROWS_AS(encode_label("a\tb", cs), Error);
}

TEST_CASE("gmm window with a sharp component concentrates mass") {
  ad::Tape tape;
  ad::Var alpha = tape.constant(Eigen::MatrixXd::Constant(1, 1, 1.0));
  ad::Var beta = tape.constant(Eigen::MatrixXd::Constant(1, 1, 100.0));
  ad::Var kappa = tape.constant(Eigen::MatrixXd::Constant(1, 1, 2.0));
  const ad::Var phi = gmm_window(alpha, beta, kappa, 5);
  const double total = phi.value().sum();
  CHECK(phi.value()(0, 2) / total >= 0.99);
}

TEST_CASE("gmm window and attention gradients pass finite differences") {
  const Charset& cs = default_charset();
  const LabelEncoding label = encode_label("abc", cs);
  std::vector<const LabelEncoding*> labels{&label, &label};
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    ParamStore ps;
    std::mt19937_64 rng = rng_stream(seed, 31);
    ps.create("a", glorot_uniform(2, 4, rng));
    ps.create("b", glorot_uniform(2, 4, rng));
    ps.create("k", glorot_uniform(2, 4, rng));
    ps.create("w", glorot_uniform(70, 1, rng));
    auto build = [&](ad::Tape& tape) {
      ad::Var alpha = ad::exp(ps.use(tape, "a"));
      ad::Var beta = ad::exp(ps.use(tape, "b"));
      ad::Var kappa = ad::exp(ps.use(tape, "k"));
      ad::Var phi = gmm_window(alpha, beta, kappa, label.length());
      ad::Var ctx = attend_onehot(phi, labels);
      return ad::mean(ad::matmul(ctx, ps.use(tape, "w")));
    };
    const FiniteDiffReport report =
        finite_diff_check(ps, build, 1e-5, 1e-4, 6, seed);
    INFO("worst ", report.worst_param, " err ", report.max_rel_error);
    CHECK(report.passed);
  }
}

TEST_CASE("mdn nll matches closed forms") {
  // Standard 2-D gaussian at its mode, pen prob one half.
  MixtureParams mix;
  mix.pi = Eigen::VectorXd::Ones(1);
  mix.mu = Eigen::MatrixXd::Zero(1, 2);
  mix.sigma = Eigen::MatrixXd::Ones(1, 2);
  mix.pen_prob = 0.5;
  CHECK(mdn_nll(mix, Eigen::Vector2d(0, 0), 0) ==
        doctest::Approx(2.5310242469692907).epsilon(1e-12));

  // Mixture collapsed onto one component equals that component alone.
  MixtureParams collapsed;
  collapsed.pi = Eigen::Vector2d(1.0, 0.0);
  collapsed.mu = Eigen::MatrixXd::Zero(2, 2);
  collapsed.mu.row(1) << 5, 5;
  collapsed.sigma = Eigen::MatrixXd::Ones(2, 2);
  collapsed.pen_prob = 0.5;
  CHECK(mdn_nll(collapsed, Eigen::Vector2d(0, 0), 0) ==
        doctest::Approx(2.5310242469692907).epsilon(1e-9));

  // Frozen two-component 1-D value from the density oracle.
  MixtureParams two;
  two.pi = Eigen::Vector2d(0.3, 0.7);
  two.mu = Eigen::MatrixXd(2, 1);
  two.mu << -1, 2;
  two.sigma = Eigen::MatrixXd(2, 1);
  two.sigma << 1, 0.5;
  two.pen_prob = 0.5;
  Eigen::VectorXd x(1);
  x << 0.0;
  CHECK(mdn_nll(two, x, 0) ==
        doctest::Approx(3.313480782912417).epsilon(1e-12));
}

TEST_CASE("mdn nll agrees with the density oracle on random mixtures") {
  std::mt19937_64 rng = rng_stream(3, 33);
  std::uniform_real_distribution<double> u01(0.05, 0.95);
  std::normal_distribution<double> gauss;
  for (int trial = 0; trial < 100; ++trial) {
    const long k = 1 + trial % 4;
    const long d = 1 + trial % 2;
    MixtureParams mix;
    Eigen::VectorXd raw(k);
    for (long i = 0; i < k; ++i) raw[i] = u01(rng);
    mix.pi = raw / raw.sum();
    mix.mu.resize(k, d);
    mix.sigma.resize(k, d);
    for (long i = 0; i < k; ++i)
      for (long j = 0; j < d; ++j) {
        mix.mu(i, j) = 2.0 * gauss(rng);
        mix.sigma(i, j) = 0.3 + u01(rng);
      }
    mix.pen_prob = u01(rng);
    Eigen::VectorXd x(d);
    for (long j = 0; j < d; ++j) x[j] = 2.0 * gauss(rng);
    const int pen = trial % 2;
    const double expected =
        oracles::mdn_nll(mix.pi, mix.mu, mix.sigma, x, mix.pen_prob, pen);
    CHECK(std::abs(mdn_nll(mix, x, pen) - expected) <= 1e-9);
  }
}

TEST_CASE("mdn loss gradients pass finite differences") {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    ParamStore ps;
    std::mt19937_64 rng = rng_stream(seed, 34);
    const long k = 3, d = 2, b = 4;
    ps.create("pi", glorot_uniform(b, k, rng));
    ps.create("mu", glorot_uniform(b, k * d, rng));
    ps.create("ls", glorot_uniform(b, k * d, rng));
    ps.create("pl", glorot_uniform(b, 1, rng));
    Eigen::MatrixXd target = glorot_uniform(b, d, rng);
    Eigen::VectorXd pen(b);
    for (long i = 0; i < b; ++i) pen[i] = i % 2;
    auto build = [&](ad::Tape& tape) {
      return ad::mean(mdn_nll_rows(ps.use(tape, "pi"), ps.use(tape, "mu"),
                                   ps.use(tape, "ls"), ps.use(tape, "pl"),
                                   target, pen));
    };
    const FiniteDiffReport report =
        finite_diff_check(ps, build, 1e-5, 1e-4, 8, seed);
    INFO("worst ", report.worst_param, " err ", report.max_rel_error);
    CHECK(report.passed);
  }
}

TEST_CASE("kappa is monotone and pi is a simplex for random params") {
  GeneratorConfig cfg = tiny_config();
  ParamStore ps;
  std::mt19937_64 rng = rng_stream(5, 35);
  init_generator_params(ps, cfg, rng);
  const NormStats stats = unit_stats(2);
  const LabelEncoding label = encode_label("hello", default_charset());
  Decoder decoder(ps, cfg, stats);
  Decoder::State state = decoder.init_state(label);
  StyleEmbedding style{Eigen::VectorXd::Zero(16)};
  Eigen::VectorXd prev = Eigen::VectorXd::Zero(3);
  Eigen::VectorXd last_kappa =
      Eigen::VectorXd::Zero(cfg.attn_components);
  std::normal_distribution<double> gauss;
  for (int t = 0; t < 12; ++t) {
    auto [mix, next] = decoder.decode_step(prev, style, label, state);
    state = next;
    const Eigen::VectorXd kappa = state.kappa.value().row(0).transpose();
    for (long k = 0; k < kappa.size(); ++k) CHECK(kappa[k] >= last_kappa[k]);
    last_kappa = kappa;
    CHECK(mix.pi.sum() == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(mix.pi.minCoeff() >= 0.0);
    CHECK(mix.sigma.minCoeff() > 0.0);
    CHECK(mix.pen_prob > 0.0);
    CHECK(mix.pen_prob < 1.0);
    for (long j = 0; j < 3; ++j) prev[j] = gauss(rng);
  }
  Decoder::State fresh;
  CHECK_THROWS_AS(decoder.decode_step(prev, style, label, fresh), Error);
}

TEST_CASE("sample_frame honors bias semantics") {
  MixtureParams mix;
  mix.pi = Eigen::Vector2d(0.2, 0.8);
  mix.mu.resize(2, 2);
  mix.mu << 1, 1, 3, 4;
  mix.sigma = Eigen::MatrixXd::Constant(2, 2, 0.5);
  mix.pen_prob = 0.7;
  SamplingConfig inf_bias;
  std::mt19937_64 rng = rng_stream(6, 36);
  int pen = -1;
  const Eigen::VectorXd a = sample_frame(mix, inf_bias, rng, &pen);
  CHECK(a[0] == 3.0);
  CHECK(a[1] == 4.0);
  CHECK(pen == 1);
  const Eigen::VectorXd b = sample_frame(mix, inf_bias, rng, &pen);
  CHECK((a - b).norm() == 0.0);

  // Unbiased sampling matches the analytic mixture mean.
  MixtureParams one_d;
  one_d.pi = Eigen::Vector2d(0.4, 0.6);
  one_d.mu.resize(2, 1);
  one_d.mu << -2, 3;
  one_d.sigma.resize(2, 1);
  one_d.sigma << 0.5, 1.5;
  one_d.pen_prob = 0.5;
  SamplingConfig zero_bias;
  zero_bias.bias = 0.0;
  double sum = 0.0, sum_sq = 0.0;
  const int n = 100000;
  for (int i = 0; i < n; ++i) {
    const Eigen::VectorXd x = sample_frame(one_d, zero_bias, rng, &pen);
    sum += x[0];
    sum_sq += x[0] * x[0];
  }
  const double mean = sum / n;
  const double analytic = 0.4 * -2 + 0.6 * 3;
  const double var = sum_sq / n - mean * mean;
  CHECK(std::abs(mean - analytic) <= 3.0 * std::sqrt(var / n));
}

TEST_CASE("joint loss: totals add up and degenerate cases hold") {
  GeneratorConfig cfg = tiny_config();
  ParamStore ps;
  std::mt19937_64 rng = rng_stream(7, 37);
  init_generator_params(ps, cfg, rng);
  const NormStats stats = unit_stats(2);
  const Charset& cs = default_charset();
  const LabelEncoding label_a = encode_label("ab", cs);
  const LabelEncoding label_b = encode_label("cd", cs);
  FrameSeq fs_a = toy_frames(rng, 8);
  FrameSeq fs_b = toy_frames(rng, 6);

  std::vector<TrainItem> batch;
  TrainItem ia;
  ia.target = &fs_a;
  ia.label = &label_a;
  ia.style_begin = fs_a;
  ia.style_end = fs_a;
  TrainItem ib;
  ib.target = &fs_b;
  ib.label = &label_b;
  ib.style_begin = fs_b;
  ib.style_end = fs_b;
  batch.push_back(ia);
  batch.push_back(ib);

  ad::Tape tape;
  LossBreakdown out;
  joint_loss(ps, tape, cfg, batch, stats, 0.1, &out);
  CHECK(out.total == doctest::Approx(out.nll + out.simclr).epsilon(1e-12));
  tape.clear();
  ps.release_bindings();

  // tau -> infinity: uniform logits, NT-Xent tends to ln(2B-1).
  ad::Tape tape2;
  LossBreakdown big_tau;
  joint_loss(ps, tape2, cfg, batch, stats, 1e9, &big_tau);
  CHECK(big_tau.simclr == doctest::Approx(std::log(3.0)).epsilon(1e-6));
  tape2.clear();
  ps.release_bindings();

  // B = 1: no negatives exist, the contrastive term is skipped.
  ad::Tape tape3;
  LossBreakdown solo;
  joint_loss(ps, tape3, cfg, {ia}, stats, 0.1, &solo);
  CHECK(solo.simclr == 0.0);
  CHECK(solo.total == doctest::Approx(solo.nll).epsilon(1e-12));
  tape3.clear();
  ps.release_bindings();
}

TEST_CASE("joint loss gradient passes finite differences on a toy batch") {
  GeneratorConfig cfg = tiny_config();
  const Charset& cs = default_charset();
  const LabelEncoding label_a = encode_label("ab", cs);
  const LabelEncoding label_b = encode_label("c", cs);
  for (std::uint64_t seed = 0; seed < 3; ++seed) {
    ParamStore ps;
    std::mt19937_64 rng = rng_stream(seed, 38);
    init_generator_params(ps, cfg, rng);
    const NormStats stats = unit_stats(2);
    FrameSeq fs_a = toy_frames(rng, 5);
    FrameSeq fs_b = toy_frames(rng, 4);
    std::vector<TrainItem> batch(2);
    batch[0].target = &fs_a;
    batch[0].label = &label_a;
    batch[0].style_begin = slice_strokes(fs_a, 0, 1);
    batch[0].style_end = slice_strokes(fs_a, 2, 3);
    batch[1].target = &fs_b;
    batch[1].label = &label_b;
    batch[1].style_begin = slice_strokes(fs_b, 0, 1);
    batch[1].style_end = slice_strokes(fs_b, 2, 3);
    auto build = [&](ad::Tape& tape) {
      return joint_loss(ps, tape, cfg, batch, stats, 0.1, nullptr);
    };
    const FiniteDiffReport report =
        finite_diff_check(ps, build, 1e-5, 1e-4, 2, seed);
    INFO("worst ", report.worst_param, " err ", report.max_rel_error);
    CHECK(report.passed);
  }
}

TEST_CASE("generation terminates, is deterministic, and labels the ink") {
  GeneratorConfig cfg = tiny_config();
  ParamStore ps;
  std::mt19937_64 rng = rng_stream(9, 39);
  init_generator_params(ps, cfg, rng);
  const NormStats stats = unit_stats(2);
  const LabelEncoding label = encode_label("abc", default_charset());
  StyleEmbedding style{Eigen::VectorXd::Zero(16)};
  SamplingConfig sampling;
  sampling.max_frames_per_char = 10;

  std::mt19937_64 g1 = rng_stream(1, 40);
  const GenerateResult r1 = generate(ps, cfg, stats, label, style, sampling, g1);
  CHECK(r1.steps <= 30);
  CHECK(r1.ink.label == "abc");

  std::mt19937_64 g2 = rng_stream(1, 40);
  const GenerateResult r2 = generate(ps, cfg, stats, label, style, sampling, g2);
  REQUIRE(r1.frames.size() == r2.frames.size());
  CHECK((r1.frames.frames - r2.frames.frames).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("primed generation strips the primer prefix") {
  GeneratorConfig cfg = tiny_config();
  ParamStore ps;
  std::mt19937_64 rng = rng_stream(10, 41);
  init_generator_params(ps, cfg, rng);
  const NormStats stats = unit_stats(2);
  FrameSeq primer = toy_frames(rng, 6);
  SamplingConfig sampling;
  sampling.max_frames_per_char = 8;
  std::mt19937_64 g = rng_stream(2, 42);
  const GenerateResult r =
      generate_primed(ps, cfg, stats, "xy", primer, "ab", sampling, g);
  CHECK(r.ink.label == "ab");
  CHECK(r.steps <= 8 * 2);  // budget covers the piece, not the primer
}

TEST_CASE("train_generator with zero steps returns the initialization") {
  const auto styles = default_styles(4, 11);
  const auto corpus = make_synthetic_corpus(12, styles, default_lexicon(), 5);
  GeneratorTrainConfig cfg;
  cfg.arch = tiny_config();
  cfg.steps = 0;
  cfg.batch = 4;
  cfg.seed = 77;
  const Checkpoint ckpt = train_generator(corpus, cfg, nullptr);
  ParamStore reference;
  std::mt19937_64 init_rng = rng_stream(cfg.seed, 22);
  init_generator_params(reference, cfg.arch, init_rng);
  for (const auto& name : reference.names())
    CHECK((ckpt.params.at(name) - reference.at(name)).norm() == 0.0);
  CHECK(ckpt.meta.at("model_kind") == "generator");
  const GeneratorConfig round = generator_config_from_meta(ckpt.meta);
  CHECK(round.lstm1 == cfg.arch.lstm1);
  CHECK(round.repr == ReprKind::raw);
}

TEST_CASE("a tiny corpus can be memorized to low teacher-forced nll") {
  // Short labels, few styles, a few hundred steps: the joint loss must
  // fall substantially below its starting point.
  const auto styles = default_styles(2, 13);
  std::vector<std::string>小;
  const auto corpus =
      make_synthetic_corpus(6, styles, {"ab", "cd"}, 17);
  GeneratorTrainConfig cfg;
  cfg.arch = desk_generator_config(ReprKind::raw);
  cfg.arch.lstm1 = cfg.arch.lstm2 = cfg.arch.lstm3 = 32;
  cfg.arch.input_proj = 32;
  cfg.steps = 120;
  cfg.batch = 6;
  cfg.lr = 3e-3;
  cfg.eval_every = 0;
  cfg.seed = 3;
  GeneratorTrainLog log;
  train_generator(corpus, cfg, &log);
  REQUIRE(static_cast<int>(log.train.size()) == cfg.steps);
  const double first = log.train.front().nll;
  const double last = log.train.back().nll;
  CHECK(last < first - 1.0);
}
