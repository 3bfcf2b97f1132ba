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
#include "longink/split.hpp"

using namespace longink;

namespace {

Ink line_ink(double slope, double intercept, int n = 20) {
  Ink ink;
  Stroke s;
  for (int i = 0; i < n; ++i) {
    const double x = i * 0.5;
    s.points.push_back({x, slope * x + intercept, i * 0.01});
  }
  ink.strokes.push_back(std::move(s));
  ink.label = "line";
  return ink;
}

GeneratorConfig tiny_config() {
  GeneratorConfig cfg = desk_generator_config(ReprKind::raw);
  cfg.input_proj = 12;
  cfg.lstm1 = cfg.lstm2 = cfg.lstm3 = 12;
  cfg.attn_components = 3;
  cfg.mdn_components = 3;
  cfg.style.bi_hidden = cfg.style.uni_hidden = 6;
  cfg.style.dense1 = cfg.style.dense2 = 6;
  return cfg;
}

}  // namespace

TEST_CASE("split_label groups words greedily") {
  CHECK(split_label("hello world foo bar", 3) ==
        std::vector<std::string>{"hello world foo", "bar"});
  CHECK(split_label("one two", 5) == std::vector<std::string>{"one two"});
  CHECK(split_label("Go, now! ok", 2) ==
        std::vector<std::string>{"Go, now!", "ok"});
  CHECK(split_label("  spaced   out  text ", 2) ==
        std::vector<std::string>{"spaced out", "text"});
  CHECK_THROWS_AS(split_label("   ", 2), Error);
  CHECK_THROWS_AS(split_label("a b", 0), Error);
}

TEST_CASE("regression slope matches the generating line") {
  CHECK(regression_slope(line_ink(0.3, 1.0)) ==
        doctest::Approx(0.3).epsilon(1e-9));
  CHECK(regression_slope(line_ink(-1.7, 0.0)) ==
        doctest::Approx(-1.7).epsilon(1e-9));
  // Degenerate x variance.
  Ink vertical;
  Stroke s;
  s.points = {{1, 0, 0}, {1, 5, 0.01}, {1, 9, 0.02}};
  vertical.strokes.push_back(s);
  CHECK(regression_slope(vertical) == 0.0);
}

TEST_CASE("pick_most_horizontal selects the smallest absolute slope") {
  std::vector<Ink> candidates{line_ink(0.2, 0), line_ink(-0.05, 2),
                              line_ink(0.1, -1)};
  CHECK(&pick_most_horizontal(candidates) == &candidates[1]);
  std::vector<Ink> single{line_ink(0.4, 0)};
  CHECK(&pick_most_horizontal(single) == &single[0]);
  CHECK_THROWS_AS(pick_most_horizontal({}), Error);
}

TEST_CASE("merge translates but never rescales") {
  std::mt19937_64 rng = rng_stream(3, 81);
  const auto styles = default_styles(3, 4);
  Ink a = render_label("hello", styles[0], rng);
  Ink b = render_label("world", styles[2], rng);
  b = apply_similarity_transform(b, -40.0, 7.0 - baseline_median(b), 1.0);
  const double b_span = bounds(b).height();

  const Ink merged = merge_pieces({a, b}, 3.0);
  CHECK(merged.label == "hello world");
  // Medians aligned exactly; piece two translated only.
  Ink right;
  right.strokes.assign(merged.strokes.begin() +
                           static_cast<long>(a.strokes.size()),
                       merged.strokes.end());
  CHECK(std::abs(baseline_median(right) - baseline_median(a)) <= 1e-9);
  CHECK(bounds(right).height() == doctest::Approx(b_span).epsilon(1e-12));
  CHECK(bounds(right).min_x - bounds(a).max_x == doctest::Approx(3.0));

  const Ink alone = merge_pieces({a}, 1.0);
  CHECK(alone.strokes.size() == a.strokes.size());
  CHECK(alone.label == a.label);
}

TEST_CASE("candidate selection lowers the mean absolute slope") {
  // Over random candidate sets the chosen slope can never exceed the
  // first candidate's, and on average it is strictly smaller.
  std::mt19937_64 rng = rng_stream(4, 82);
  std::normal_distribution<double> gauss(0.0, 0.3);
  double chosen_total = 0.0, first_total = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<Ink> candidates;
    for (int c = 0; c < 5; ++c)
      candidates.push_back(line_ink(gauss(rng), 0.0));
    const Ink& best = pick_most_horizontal(candidates);
    chosen_total += std::abs(regression_slope(best));
    first_total += std::abs(regression_slope(candidates.front()));
    CHECK(std::abs(regression_slope(best)) <=
          std::abs(regression_slope(candidates.front())) + 1e-12);
  }
  CHECK(chosen_total < first_total);
}

TEST_CASE("degenerate split equals direct generation") {
  GeneratorConfig cfg = tiny_config();
  ParamStore ps;
  std::mt19937_64 rng = rng_stream(5, 83);
  init_generator_params(ps, cfg, rng);
  NormStats stats;
  stats.mean = Eigen::VectorXd::Zero(2);
  stats.stddev = Eigen::VectorXd::Ones(2);

  const auto styles = default_styles(2, 5);
  std::mt19937_64 style_rng = rng_stream(6, 84);
  Ink style_ink = render_label("abc", styles[0], style_rng);

  SplitConfig split;
  split.n_words = 10;  // more than the word count: one piece
  split.n_candidates = 1;
  SamplingConfig sampling;
  sampling.max_frames_per_char = 6;

  const Ink via_split = synthesize_long("ab cd", style_ink, ps, cfg, stats,
                                        split, sampling, 42);

  const StyleEmbedding style = encode_style(
      ps, cfg.style, "style.", ink_to_frames(style_ink, cfg.repr), stats);
  std::mt19937_64 gen_rng = rng_stream(42, 61, 0);
  const GenerateResult direct =
      generate(ps, cfg, stats, encode_label("ab cd", default_charset()),
               style, sampling, gen_rng);

  CHECK(via_split.label == "ab cd");
  REQUIRE(via_split.strokes.size() == direct.ink.strokes.size());
  for (std::size_t s = 0; s < via_split.strokes.size(); ++s)
    for (std::size_t i = 0; i < via_split.strokes[s].points.size(); ++i) {
      CHECK(via_split.strokes[s].points[i].x ==
            direct.ink.strokes[s].points[i].x);
      CHECK(via_split.strokes[s].points[i].y ==
            direct.ink.strokes[s].points[i].y);
    }
}

TEST_CASE("synthesize_long is deterministic and keeps the full label") {
  GeneratorConfig cfg = tiny_config();
  ParamStore ps;
  std::mt19937_64 rng = rng_stream(7, 85);
  init_generator_params(ps, cfg, rng);
  NormStats stats;
  stats.mean = Eigen::VectorXd::Zero(2);
  stats.stddev = Eigen::VectorXd::Ones(2);
  const auto styles = default_styles(2, 6);
  std::mt19937_64 style_rng = rng_stream(8, 86);
  const Ink style_ink = render_label("ab", styles[1], style_rng);

  SplitConfig split;
  split.n_words = 2;
  split.n_candidates = 3;
  SamplingConfig sampling;
  sampling.max_frames_per_char = 6;

  SynthesisTrace trace;
  const Ink first = synthesize_long("aa bb cc dd", style_ink, ps, cfg, stats,
                                    split, sampling, 11, &trace);
  const Ink second = synthesize_long("aa bb cc dd", style_ink, ps, cfg,
                                     stats, split, sampling, 11);
  CHECK(first.label == "aa bb cc dd");
  CHECK(trace.pieces.size() == 2);
  REQUIRE(first.strokes.size() == second.strokes.size());
  for (std::size_t s = 0; s < first.strokes.size(); ++s)
    CHECK(first.strokes[s].points.size() ==
          second.strokes[s].points.size());

  // Merged pieces keep aligned medians and ordered x ranges.
  const Ink& piece0 = trace.pieces[0];
  Ink right;
  right.strokes.assign(first.strokes.begin() +
                           static_cast<long>(piece0.strokes.size()),
                       first.strokes.end());
  Ink left;
  left.strokes.assign(first.strokes.begin(),
                      first.strokes.begin() +
                          static_cast<long>(piece0.strokes.size()));
  CHECK(std::abs(baseline_median(left) - baseline_median(right)) <= 1e-9);
  CHECK(bounds(left).max_x < bounds(right).min_x);
}

TEST_CASE("generate_piece modes differ in conditioning") {
  GeneratorConfig cfg = tiny_config();
  ParamStore ps;
  std::mt19937_64 rng = rng_stream(9, 87);
  init_generator_params(ps, cfg, rng);
  NormStats stats;
  stats.mean = Eigen::VectorXd::Zero(2);
  stats.stddev = Eigen::VectorXd::Ones(2);
  const auto styles = default_styles(2, 7);
  std::mt19937_64 style_rng = rng_stream(10, 88);
  const Ink style_ink = render_label("ab", styles[0], style_rng);
  const StyleEmbedding style = encode_style(
      ps, cfg.style, "style.", ink_to_frames(style_ink, cfg.repr), stats);
  SamplingConfig sampling;
  sampling.max_frames_per_char = 6;

  std::mt19937_64 r1 = rng_stream(1, 89);
  const GenerateResult with_style =
      generate_piece("ab", style_ink, style, ps, cfg, stats,
                     SplitConfig::Mode::style_conditioned, sampling, r1);
  std::mt19937_64 r2 = rng_stream(1, 89);
  const GenerateResult no_style =
      generate_piece("ab", style_ink, style, ps, cfg, stats,
                     SplitConfig::Mode::no_style, sampling, r2);
  std::mt19937_64 r3 = rng_stream(1, 89);
  const GenerateResult primed =
      generate_piece("ab", style_ink, style, ps, cfg, stats,
                     SplitConfig::Mode::primed, sampling, r3);
  CHECK(with_style.ink.label == "ab");
  CHECK(no_style.ink.label == "ab");
  CHECK(primed.ink.label == "ab");
  // A nonzero style embedding changes the rollout.
  const bool differs =
      with_style.frames.size() != no_style.frames.size() ||
      (with_style.frames.frames - no_style.frames.frames).cwiseAbs().maxCoeff() >
          0.0;
  CHECK(differs);
}
