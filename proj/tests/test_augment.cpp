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
#include <fstream>
#include <set>

#include "longink/augmentation.hpp"
#include "longink/corpus.hpp"
#include "longink/ink_io.hpp"
#include "longink/random.hpp"

using namespace longink;

namespace {

/// Scorer with prescribed cosine similarities against a fixed anchor.
class FixedScorer : public StyleScorer {
 public:
  explicit FixedScorer(std::vector<double> cosines) {
    for (double c : cosines) {
      Eigen::VectorXd v(2);
      v << c, std::sqrt(std::max(0.0, 1.0 - c * c));
      items_.push_back(v);
    }
  }
  Eigen::VectorXd embed(const Ink&) const override {
    Eigen::VectorXd v(2);
    v << 1.0, 0.0;
    return v;
  }
  const Eigen::VectorXd& corpus_item(std::size_t i) const override {
    return items_.at(i);
  }
  std::size_t corpus_size() const override { return items_.size(); }

 private:
  std::vector<Eigen::VectorXd> items_;
};

std::vector<Ink> tiny_corpus(int n, std::uint64_t seed) {
  const auto styles = default_styles(4, seed);
  return make_synthetic_corpus(n, styles, default_lexicon(), seed);
}

}  // namespace

TEST_CASE("self-concatenation keeps scale and median") {
  const auto corpus = tiny_corpus(3, 21);
  const Ink& a = corpus[0];
  const Ink joined = concat_inks(a, a, 1.0);
  CHECK(joined.label == a.label + " " + a.label);
  CHECK(joined.strokes.size() == 2 * a.strokes.size());
  CHECK(baseline_median(joined) ==
        doctest::Approx(baseline_median(a)).epsilon(1e-9));
  // Scale factor 1: the second copy keeps its height exactly.
  Ink copy;
  copy.strokes.assign(joined.strokes.begin() +
                          static_cast<long>(a.strokes.size()),
                      joined.strokes.end());
  CHECK(percentile_height(copy) ==
        doctest::Approx(percentile_height(a)).epsilon(1e-9));
  CHECK(bounds(copy).height() ==
        doctest::Approx(bounds(a).height()).epsilon(1e-9));
}

TEST_CASE("a pre-scaled operand is rescaled back to the left height") {
  const auto corpus = tiny_corpus(3, 22);
  const Ink& a = corpus[0];
  const Ink doubled = apply_similarity_transform(corpus[1], 0, 0, 2.0);
  const Ink joined = concat_inks(a, doubled, 1.0);
  // Right part occupies x beyond a's extent; measure its height there.
  Ink right;
  right.strokes.assign(joined.strokes.begin() +
                           static_cast<long>(a.strokes.size()),
                       joined.strokes.end());
  CHECK(percentile_height(right) ==
        doctest::Approx(percentile_height(a)).epsilon(1e-6));
}

TEST_CASE("concatenation leaves the configured gap") {
  const auto corpus = tiny_corpus(4, 23);
  for (double width : {0.5, 1.0, 2.0}) {
    const Ink& a = corpus[0];
    const Ink joined = concat_inks(a, corpus[1], width);
    Ink right;
    right.strokes.assign(joined.strokes.begin() +
                             static_cast<long>(a.strokes.size()),
                         joined.strokes.end());
    const double expected_gap =
        width * bounds(a).width() / static_cast<double>(a.label.size());
    CHECK(bounds(right).min_x - bounds(a).max_x ==
          doctest::Approx(expected_gap).epsilon(1e-9));
    CHECK(bounds(right).min_x > bounds(a).max_x);
  }
  CHECK_THROWS_AS(concat_inks(Ink{}, corpus[0], 1.0), Error);
}

TEST_CASE("timestamps in the joined ink march forward") {
  const auto corpus = tiny_corpus(3, 29);
  const Ink joined = concat_inks(corpus[0], corpus[1], 1.0);
  double last = -1.0;
  for (const auto& s : joined.strokes) {
    for (const auto& p : s.points) {
      CHECK(p.t > last);
      last = p.t;
    }
  }
}

TEST_CASE("median alignment survives repeated joins") {
  const auto corpus = tiny_corpus(8, 24);
  Ink r = corpus[0];
  for (int i = 1; i < 8; ++i) {
    r = concat_inks(r, corpus[static_cast<std::size_t>(i)], 1.0);
    CHECK(std::abs(baseline_median(r) - baseline_median(corpus[0])) <= 1e-6);
  }
}

TEST_CASE("a target of one character returns the seed unchanged") {
  const auto corpus = tiny_corpus(5, 25);
  AugmentationConfig cfg;
  cfg.target_len = 1.0;
  std::mt19937_64 rng = rng_stream(1, 71);
  const AugmentedSample sample = generate_long_sample(
      corpus, cfg, nullptr, AugmentStrategy::random, rng);
  CHECK(sample.joins.empty());
  CHECK(sample.ink.label ==
        corpus[static_cast<std::size_t>(sample.seed_index)].label);
}

TEST_CASE("zero threshold accepts the whole batch") {
  const auto corpus = tiny_corpus(6, 26);
  FixedScorer scorer({0.9, 0.1, -0.5, 0.4, 0.0, -0.9});
  AugmentationConfig cfg;
  cfg.target_len = 60;
  cfg.threshold = 0.0;
  cfg.batch_size = 6;
  std::set<int> seen;
  for (int trial = 0; trial < 60; ++trial) {
    std::mt19937_64 rng = rng_stream(trial, 72);
    const AugmentedSample sample = generate_long_sample(
        corpus, cfg, &scorer, AugmentStrategy::style, rng);
    for (const auto& join : sample.joins) {
      // cos >= 0 passes plain; negatives may only enter as the argmax
      if (join.similarity >= 0.0) CHECK_FALSE(join.argmax_fallback);
      seen.insert(join.component_index);
    }
  }
  CHECK(seen.size() >= 5);  // nearly every corpus item appears
}

TEST_CASE("an impossible threshold falls back to the argmax") {
  const auto corpus = tiny_corpus(3, 27);
  FixedScorer scorer({0.2, 0.4, 0.9});
  AugmentationConfig cfg;
  cfg.target_len = 50;
  cfg.threshold = 0.95;
  cfg.batch_size = 12;  // large enough to cover all three items
  std::mt19937_64 rng = rng_stream(5, 73);
  const AugmentedSample sample =
      generate_long_sample(corpus, cfg, &scorer, AugmentStrategy::style, rng);
  REQUIRE(!sample.joins.empty());
  for (const auto& join : sample.joins) {
    CHECK(join.component_index == 2);  // the 0.9 item
    CHECK(join.similarity == doctest::Approx(0.9));
    CHECK(join.argmax_fallback);
  }
}

TEST_CASE("every sample reaches the target length") {
  const auto corpus = tiny_corpus(12, 28);
  AugmentationConfig cfg;
  cfg.target_len = 48;
  cfg.n_samples = 40;
  const auto samples = build_augmented_dataset(
      corpus, cfg, nullptr, AugmentStrategy::random, 7);
  REQUIRE(samples.size() == 40);
  double mean_len = 0.0;
  for (const auto& s : samples) {
    CHECK(static_cast<double>(s.ink.label.size()) >= cfg.target_len);
    mean_len += static_cast<double>(s.ink.label.size());
  }
  mean_len /= 40.0;
  CHECK(mean_len >= 0.8 * 48);
  CHECK(mean_len <= 1.2 * 48);
}

TEST_CASE("empty augmentation request gives an empty dataset") {
  const auto corpus = tiny_corpus(3, 30);
  AugmentationConfig cfg;
  cfg.n_samples = 0;
  CHECK(build_augmented_dataset(corpus, cfg, nullptr,
                                AugmentStrategy::repetition, 1)
            .empty());
}

TEST_CASE("repetition strategy repeats the seed label") {
  const auto corpus = tiny_corpus(4, 31);
  AugmentationConfig cfg;
  cfg.target_len = 40;
  std::mt19937_64 rng = rng_stream(2, 74);
  const AugmentedSample sample = generate_long_sample(
      corpus, cfg, nullptr, AugmentStrategy::repetition, rng);
  const std::string base =
      corpus[static_cast<std::size_t>(sample.seed_index)].label;
  std::string expected = base;
  for (std::size_t i = 0; i < sample.joins.size(); ++i)
    expected += " " + base;
  CHECK(sample.ink.label == expected);
  for (const auto& join : sample.joins)
    CHECK(join.component_index == sample.seed_index);
}

TEST_CASE("augmented datasets are deterministic in the seed") {
  const auto corpus = tiny_corpus(6, 32);
  AugmentationConfig cfg;
  cfg.target_len = 30;
  cfg.n_samples = 5;
  const auto a = build_augmented_dataset(corpus, cfg, nullptr,
                                         AugmentStrategy::random, 99);
  const auto b = build_augmented_dataset(corpus, cfg, nullptr,
                                         AugmentStrategy::random, 99);
  for (std::size_t i = 0; i < a.size(); ++i)
    CHECK(ink_to_json_line(a[i].ink) == ink_to_json_line(b[i].ink));
}

TEST_CASE("audit csv records one row per join") {
  const auto corpus = tiny_corpus(4, 33);
  AugmentationConfig cfg;
  cfg.target_len = 30;
  cfg.n_samples = 3;
  const auto samples = build_augmented_dataset(corpus, cfg, nullptr,
                                               AugmentStrategy::random, 3);
  const std::string path = "audit_test.csv";
  write_audit_csv(path, samples);
  std::ifstream in(path);
  std::string line;
  std::size_t rows = 0;
  std::getline(in, line);
  CHECK(line == "sample_id,step,component_index,similarity,argmax_fallback");
  while (std::getline(in, line)) ++rows;
  std::size_t expected = samples.size();  // seed rows
  for (const auto& s : samples) expected += s.joins.size();
  CHECK(rows == expected);
  std::remove(path.c_str());
}
