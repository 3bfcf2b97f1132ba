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

#include "longink/split.hpp"

#include <cmath>
#include <sstream>

#include "longink/random.hpp"

namespace longink {

std::string normalize_whitespace(const std::string& text) {
  std::string out;
  bool in_space = true;  // trims leading whitespace
  for (char c : text) {
    if (c == ' ' || c == '\t' || c == '\n' || c == '\r') {
      if (!in_space) out += ' ';
      in_space = true;
    } else {
      out += c;
      in_space = false;
    }
  }
  while (!out.empty() && out.back() == ' ') out.pop_back();
  return out;
}

std::vector<std::string> split_label(const std::string& text, int n_words) {
  const std::string normalized = normalize_whitespace(text);
  if (normalized.empty())
    throw Error(ErrorKind::empty_label, "split_label: empty text");
  if (n_words < 1)
    throw Error(ErrorKind::shape, "split_label: n_words must be >= 1");
  std::vector<std::string> words;
  std::istringstream stream(normalized);
  std::string word;
  while (stream >> word) words.push_back(word);

  std::vector<std::string> pieces;
  for (std::size_t i = 0; i < words.size();
       i += static_cast<std::size_t>(n_words)) {
    std::string piece;
    for (std::size_t j = i;
         j < std::min(words.size(), i + static_cast<std::size_t>(n_words));
         ++j) {
      if (!piece.empty()) piece += ' ';
      piece += words[j];
    }
    pieces.push_back(std::move(piece));
  }
  return pieces;
}

GenerateResult generate_piece(const std::string& text_piece,
                              const Ink& style_ink,
                              const StyleEmbedding& shared_style,
                              ParamStore& params, const GeneratorConfig& cfg,
                              const NormStats& stats, SplitConfig::Mode mode,
                              const SamplingConfig& sampling,
                              std::mt19937_64& rng) {
  const Charset& charset = default_charset();
  switch (mode) {
    case SplitConfig::Mode::style_conditioned:
      return generate(params, cfg, stats, encode_label(text_piece, charset),
                      shared_style, sampling, rng);
    case SplitConfig::Mode::no_style: {
      StyleEmbedding zero{Eigen::VectorXd::Zero(cfg.style.out_dim)};
      return generate(params, cfg, stats, encode_label(text_piece, charset),
                      zero, sampling, rng);
    }
    case SplitConfig::Mode::primed: {
      const FrameSeq primer = ink_to_frames(style_ink, cfg.repr);
      return generate_primed(params, cfg, stats, style_ink.label, primer,
                             text_piece, sampling, rng);
    }
  }
  throw Error(ErrorKind::state, "generate_piece: bad mode");
}

double regression_slope(const Ink& ink) {
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  double n = 0;
  for (const auto& stroke : ink.strokes)
    for (const auto& p : stroke.points) {
      sx += p.x;
      sy += p.y;
      sxx += p.x * p.x;
      sxy += p.x * p.y;
      n += 1;
    }
  if (n < 2) return 0.0;
  const double var_x = sxx - sx * sx / n;
  if (var_x <= 1e-12) return 0.0;
  return (sxy - sx * sy / n) / var_x;
}

const Ink& pick_most_horizontal(const std::vector<Ink>& candidates) {
  if (candidates.empty())
    throw Error(ErrorKind::no_candidates, "pick_most_horizontal: no inks");
  std::size_t best = 0;
  double best_slope = std::abs(regression_slope(candidates[0]));
  for (std::size_t i = 1; i < candidates.size(); ++i) {
    const double s = std::abs(regression_slope(candidates[i]));
    if (s < best_slope) {
      best_slope = s;
      best = i;
    }
  }
  return candidates[best];
}

Ink merge_pieces(const std::vector<Ink>& pieces, double space_width) {
  if (pieces.empty())
    throw Error(ErrorKind::empty_ink, "merge_pieces: no pieces");
  for (const auto& p : pieces)
    if (p.empty()) throw Error(ErrorKind::empty_ink, "merge_pieces: empty piece");
  Ink out = pieces.front();
  for (std::size_t i = 1; i < pieces.size(); ++i) {
    const double dy = baseline_median(out) - baseline_median(pieces[i]);
    const double dx =
        bounds(out).max_x + space_width - bounds(pieces[i]).min_x;
    const Ink placed = apply_similarity_transform(pieces[i], dx, dy, 1.0);
    out.strokes.insert(out.strokes.end(), placed.strokes.begin(),
                       placed.strokes.end());
    if (!pieces[i].label.empty())
      out.label += out.label.empty() ? pieces[i].label : " " + pieces[i].label;
  }
  return resequence_timestamps(out, 0.0, kFrameDt);
}

Ink synthesize_long(const std::string& text, const Ink& style_ink,
                    ParamStore& params, const GeneratorConfig& cfg,
                    const NormStats& stats, const SplitConfig& split,
                    const SamplingConfig& sampling, std::uint64_t seed,
                    SynthesisTrace* trace) {
  if (style_ink.empty())
    throw Error(ErrorKind::empty_ink, "synthesize_long: empty style ink");
  const std::vector<std::string> piece_texts =
      split_label(text, split.n_words);

  // One embedding of the full style ink, shared by every piece.
  const StyleEmbedding style = encode_style(
      params, cfg.style, "style.", ink_to_frames(style_ink, cfg.repr), stats);

  std::vector<Ink> chosen;
  for (std::size_t p = 0; p < piece_texts.size(); ++p) {
    std::vector<Ink> candidates;
    for (int c = 0; c < split.n_candidates; ++c) {
      std::mt19937_64 rng =
          rng_stream(seed, 61 + p, static_cast<std::uint64_t>(c));
      candidates.push_back(generate_piece(piece_texts[p], style_ink, style,
                                          params, cfg, stats, split.mode,
                                          sampling, rng)
                               .ink);
    }
    const Ink& best = pick_most_horizontal(candidates);
    if (trace != nullptr) {
      trace->chosen_slope.push_back(std::abs(regression_slope(best)));
      trace->first_slope.push_back(
          std::abs(regression_slope(candidates.front())));
      trace->pieces.push_back(best);
    }
    chosen.push_back(best);
  }

  // Merge gap: one mean character width of the first piece.
  const BoundingBox first_box = bounds(chosen.front());
  const double char_width =
      first_box.width() /
      std::max<std::size_t>(1, chosen.front().label.size());
  return merge_pieces(chosen, char_width);
}

}  // namespace longink
