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

#ifndef LONGINK_CORPUS_HPP
#define LONGINK_CORPUS_HPP

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "longink/ink.hpp"

namespace longink {

/// One renderable symbol: polylines inside the unit box, baseline at
/// y = 0, body height about 0.7, ascenders up to 1.
struct GlyphTemplate {
  char ch = '?';
  std::vector<std::vector<Eigen::Vector2d>> polylines;
};

/// Block-letter templates for a-z plus '.'; mutually separated under the
/// recognizer's shape metric.
const std::vector<GlyphTemplate>& builtin_glyphs();

/// Writer-style proxy used to render the synthetic corpus.
struct SyntheticStyle {
  double slant = 0.0;           // shear dx per unit y
  double scale = 1.0;           // glyph size multiplier
  double spacing = 1.0;         // letter gap multiplier
  double jitter = 0.0;          // per-point gaussian noise, length units
  double baseline_drift = 0.0;  // dy per unit x
};

/// n visibly distinct base styles, deterministic in the seed.
std::vector<SyntheticStyle> default_styles(int n, std::uint64_t seed);

std::vector<std::string> default_lexicon();

/// Nominal glyph height in length units at scale 1.
constexpr double kGlyphHeight = 10.0;

/// Renders a label in one style; with zero jitter / slant / drift and
/// scale 1 the points equal the template points exactly (up to layout).
Ink render_label(const std::string& label, const SyntheticStyle& style,
                 std::mt19937_64& rng);

/// Labels are 1-4 word phrases (mean about 2.8 words); each ink draws a
/// base style plus small per-ink parameter noise. Deterministic: the
/// same seed gives a byte-identical corpus.
std::vector<Ink> make_synthetic_corpus(
    int n_inks, const std::vector<SyntheticStyle>& styles,
    const std::vector<std::string>& lexicon, std::uint64_t seed);

enum class Bucket { short_labels, medium_labels, long_labels };

/// Word-count bucketing: short < 4, medium 4-7, long > 7.
Bucket bucket_of(const std::string& label);
const char* bucket_name(Bucket b);

std::vector<std::string> make_eval_labels(
    const std::vector<std::string>& lexicon, Bucket bucket, int count,
    std::uint64_t seed);

/// Random phrases with a uniform word count in [lo, hi].
std::vector<std::string> make_phrases(const std::vector<std::string>& lexicon,
                                      int lo_words, int hi_words, int count,
                                      std::uint64_t seed);

}  // namespace longink

#endif  // LONGINK_CORPUS_HPP
