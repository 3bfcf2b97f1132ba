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

#ifndef LONGINK_SPLIT_HPP
#define LONGINK_SPLIT_HPP

#include <string>
#include <vector>

#include "longink/synthesis.hpp"

namespace longink {

struct SplitConfig {
  enum class Mode { style_conditioned, primed, no_style };
  int n_words = 3;
  int n_candidates = 5;
  Mode mode = Mode::style_conditioned;
};

/// Greedy left-to-right grouping of whitespace-delimited words into
/// pieces of at most n_words; punctuation stays attached to its word.
/// Joining the pieces with single spaces reproduces the normalized text.
std::vector<std::string> split_label(const std::string& text, int n_words);

/// Collapses whitespace runs to single spaces and trims the ends.
std::string normalize_whitespace(const std::string& text);

/// One piece under the configured mode: style_conditioned sums the
/// shared embedding into each step, primed teacher-forces the style ink
/// first (prefix stripped), no_style uses a zero vector.
GenerateResult generate_piece(const std::string& text_piece,
                              const Ink& style_ink,
                              const StyleEmbedding& shared_style,
                              ParamStore& params, const GeneratorConfig& cfg,
                              const NormStats& stats, SplitConfig::Mode mode,
                              const SamplingConfig& sampling,
                              std::mt19937_64& rng);

/// Least-squares slope of y against x over all points (0 when the x
/// variance is degenerate).
double regression_slope(const Ink& ink);

/// The candidate with the smallest |slope|; ties break to the first.
const Ink& pick_most_horizontal(const std::vector<Ink>& candidates);

/// Translates pieces (never scales) so every baseline median matches the
/// first piece's and consecutive x-ranges are space_width apart; labels
/// join with single spaces.
Ink merge_pieces(const std::vector<Ink>& pieces, double space_width);

struct SynthesisTrace {
  std::vector<Ink> pieces;          // chosen candidate per piece
  std::vector<double> chosen_slope;
  std::vector<double> first_slope;  // slope of candidate 0, for audits
};

/// Split -> generate k candidates per piece with one shared style ->
/// keep the most horizontal -> merge.
Ink synthesize_long(const std::string& text, const Ink& style_ink,
                    ParamStore& params, const GeneratorConfig& cfg,
                    const NormStats& stats, const SplitConfig& split,
                    const SamplingConfig& sampling, std::uint64_t seed,
                    SynthesisTrace* trace = nullptr);

}  // namespace longink

#endif  // LONGINK_SPLIT_HPP
