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

#include "longink/corpus.hpp"

#include <sstream>

#include "longink/random.hpp"

namespace longink {

namespace {

using Poly = std::vector<Eigen::Vector2d>;

GlyphTemplate glyph(char ch, std::vector<Poly> polylines) {
  GlyphTemplate g;
  g.ch = ch;
  g.polylines = std::move(polylines);
  return g;
}

Eigen::Vector2d pt(double x, double y) { return {x, y}; }

std::vector<GlyphTemplate> build_glyphs() {
  std::vector<GlyphTemplate> g;
  g.push_back(glyph('a', {{pt(0, 0), pt(0.35, 1), pt(0.7, 0)},
                          {pt(0.15, 0.4), pt(0.55, 0.4)}}));
  g.push_back(glyph('b', {{pt(0, 0), pt(0, 1), pt(0.6, 0.85), pt(0.6, 0.55),
                           pt(0, 0.5), pt(0.6, 0.35), pt(0.6, 0.1),
                           pt(0, 0)}}));
  g.push_back(glyph('c', {{pt(0.7, 0.85), pt(0.25, 1), pt(0, 0.6), pt(0, 0.4),
                           pt(0.25, 0), pt(0.7, 0.15)}}));
  g.push_back(glyph('d', {{pt(0, 0), pt(0, 1), pt(0.5, 0.9), pt(0.7, 0.5),
                           pt(0.5, 0.1), pt(0, 0)}}));
  g.push_back(glyph('e', {{pt(0.7, 1), pt(0, 1), pt(0, 0), pt(0.7, 0)},
                          {pt(0, 0.5), pt(0.5, 0.5)}}));
  g.push_back(glyph('f', {{pt(0.7, 1), pt(0, 1), pt(0, 0)},
                          {pt(0, 0.5), pt(0.5, 0.5)}}));
  g.push_back(glyph('g', {{pt(0.65, 0.85), pt(0.2, 1), pt(0, 0.55),
                           pt(0.2, 0.05), pt(0.65, 0.15), pt(0.6, 0.5),
                           pt(0.3, 0.45)}}));
  g.push_back(glyph('h', {{pt(0, 0), pt(0, 1)},
                          {pt(0.6, 0), pt(0.6, 1)},
                          {pt(0, 0.5), pt(0.6, 0.5)}}));
  g.push_back(glyph('i', {{pt(0.1, 0), pt(0.1, 0.65)},
                          {pt(0.06, 0.85), pt(0.14, 0.92)}}));
  g.push_back(glyph('j', {{pt(0.4, 0.65), pt(0.4, 0.15), pt(0.25, 0),
                           pt(0.05, 0.1)},
                          {pt(0.36, 0.85), pt(0.44, 0.92)}}));
  g.push_back(glyph('k', {{pt(0, 0), pt(0, 1)},
                          {pt(0.65, 1), pt(0.05, 0.5), pt(0.65, 0)}}));
  g.push_back(glyph('l', {{pt(0, 1), pt(0, 0), pt(0.55, 0)}}));
  g.push_back(glyph('m', {{pt(0, 0), pt(0, 1), pt(0.35, 0.45), pt(0.7, 1),
                           pt(0.7, 0)}}));
  g.push_back(glyph('n', {{pt(0, 0), pt(0, 1), pt(0.6, 1), pt(0.65, 0.8),
                           pt(0.65, 0)}}));
  g.push_back(glyph('o', {{pt(0.35, 1), pt(0, 0.7), pt(0, 0.3), pt(0.35, 0),
                           pt(0.7, 0.3), pt(0.7, 0.7), pt(0.35, 1)}}));
  g.push_back(glyph('p', {{pt(0, 0), pt(0, 1), pt(0.6, 0.85), pt(0.6, 0.55),
                           pt(0, 0.45)}}));
  g.push_back(glyph('q', {{pt(0.35, 1), pt(0, 0.6), pt(0.35, 0.1),
                           pt(0.7, 0.5), pt(0.35, 1)},
                          {pt(0.55, 0.25), pt(0.8, 0)}}));
  g.push_back(glyph('r', {{pt(0, 0), pt(0, 1), pt(0.65, 0.95),
                           pt(0.65, 0.6), pt(0, 0.55)},
                          {pt(0.3, 0.55), pt(0.65, 0)}}));
  g.push_back(glyph('s', {{pt(0.65, 0.95), pt(0.1, 1), pt(0, 0.7),
                           pt(0.65, 0.35), pt(0.6, 0.05), pt(0, 0.1)}}));
  g.push_back(glyph('t', {{pt(0.35, 0), pt(0.35, 1)},
                          {pt(0, 0.8), pt(0.7, 0.8)}}));
  g.push_back(glyph('u', {{pt(0, 1), pt(0, 0.25), pt(0.15, 0), pt(0.5, 0),
                           pt(0.65, 0.25), pt(0.65, 1)}}));
  g.push_back(glyph('v', {{pt(0, 1), pt(0.35, 0), pt(0.7, 1)}}));
  g.push_back(glyph('w', {{pt(0, 1), pt(0.18, 0), pt(0.35, 0.6),
                           pt(0.52, 0), pt(0.7, 1)}}));
  g.push_back(glyph('x', {{pt(0, 1), pt(0.7, 0)}, {pt(0.7, 1), pt(0, 0)}}));
  g.push_back(glyph('y', {{pt(0, 1), pt(0.35, 0.5)},
                          {pt(0.7, 1), pt(0.35, 0.5), pt(0.35, 0)}}));
  g.push_back(glyph('z', {{pt(0, 1), pt(0.7, 1), pt(0, 0), pt(0.7, 0)}}));
  g.push_back(glyph('.', {{pt(0.05, 0.0), pt(0.12, 0.07)}}));
  return g;
}

}  // namespace

const std::vector<GlyphTemplate>& builtin_glyphs() {
  static const std::vector<GlyphTemplate> glyphs = build_glyphs();
  return glyphs;
}

std::vector<SyntheticStyle> default_styles(int n, std::uint64_t seed) {
  std::vector<SyntheticStyle> styles;
  std::mt19937_64 rng = rng_stream(seed, 31);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  auto lerp = [](double lo, double hi, double f) { return lo + (hi - lo) * f; };
  const int d = std::max(1, n - 1);
  for (int i = 0; i < n; ++i) {
    SyntheticStyle s;
    // Spread the bases over the parameter box so styles look distinct.
    s.slant = lerp(-0.22, 0.22, static_cast<double>(i) / d) + 0.02 * u(rng);
    s.scale = lerp(0.8, 1.28, static_cast<double>((i * 7) % n) / d);
    s.spacing = lerp(0.9, 1.2, static_cast<double>((i * 3) % n) / d);
    s.jitter = 0.12;
    s.baseline_drift = lerp(-0.03, 0.03, static_cast<double>((i * 5) % n) / d);
    styles.push_back(s);
  }
  return styles;
}

std::vector<std::string> default_lexicon() {
  return {"and",  "the",   "ink",   "pen",   "line",  "word",  "note",
          "hand", "page",  "open",  "blue",  "quick", "brown", "lazy",
          "stone", "river", "light", "sound", "metal", "paper", "glass",
          "wood", "cloud", "rain",  "wind",  "fire",  "earth", "water",
          "music", "dance", "table", "chair", "mouse", "house", "plant",
          "green", "small", "round", "sharp", "still"};
}

Ink render_label(const std::string& label, const SyntheticStyle& style,
                 std::mt19937_64& rng) {
  const auto& glyphs = builtin_glyphs();
  std::normal_distribution<double> noise(0.0, 1.0);
  const double h = kGlyphHeight * style.scale;
  // Gaps sized against the recognizer's 0.5x / 1.5x median-width
  // thresholds. Shear widens the x-extent of every glyph by about
  // |slant|*h, so both the advance and the gaps grow with it.
  const double shear_pad = std::abs(style.slant) * h;
  const double letter_gap = 0.62 * h * style.spacing + 0.6 * shear_pad;
  const double space_gap = h * style.spacing + shear_pad;

  Ink ink;
  ink.label = label;
  double cursor = 0.0;
  double t = 0.0;
  for (char ch : label) {
    if (ch == ' ') {
      cursor += space_gap;
      continue;
    }
    const GlyphTemplate* tmpl = nullptr;
    for (const auto& g : glyphs)
      if (g.ch == ch) {
        tmpl = &g;
        break;
      }
    if (tmpl == nullptr)
      throw Error(ErrorKind::unknown_symbol,
                  std::string("no glyph template for '") + ch + "'");
    double width = 0.0;
    for (const auto& poly : tmpl->polylines) {
      Stroke stroke;
      for (const auto& p : poly) {
        double x = cursor + p.x() * h + style.slant * p.y() * h;
        double y = p.y() * h;
        y += style.baseline_drift * x;
        if (style.jitter > 0.0) {
          x += style.jitter * noise(rng);
          y += style.jitter * noise(rng);
        }
        stroke.points.push_back({x, y, t});
        t += 0.01;
        width = std::max(width, p.x() * h);
      }
      ink.strokes.push_back(std::move(stroke));
      t += 0.01;
    }
    cursor += width + letter_gap;
  }
  return ink;
}

std::vector<Ink> make_synthetic_corpus(
    int n_inks, const std::vector<SyntheticStyle>& styles,
    const std::vector<std::string>& lexicon, std::uint64_t seed) {
  if (lexicon.empty())
    throw Error(ErrorKind::empty_label, "lexicon is empty");
  if (styles.size() < 2)
    throw Error(ErrorKind::too_short, "need at least 2 styles");
  std::vector<Ink> corpus;
  corpus.reserve(static_cast<std::size_t>(n_inks));
  for (int i = 0; i < n_inks; ++i) {
    std::mt19937_64 rng = rng_stream(seed, 41, static_cast<std::uint64_t>(i));
    // 1-4 words with mean 2.8, mirroring short handwriting samples.
    std::uniform_real_distribution<double> u01(0.0, 1.0);
    const double r = u01(rng);
    int n_words = r < 0.10 ? 1 : r < 0.35 ? 2 : r < 0.75 ? 3 : 4;
    std::uniform_int_distribution<std::size_t> pick_word(0,
                                                         lexicon.size() - 1);
    std::ostringstream label;
    for (int w = 0; w < n_words; ++w) {
      if (w > 0) label << ' ';
      label << lexicon[pick_word(rng)];
    }
    std::uniform_int_distribution<std::size_t> pick_style(0,
                                                          styles.size() - 1);
    const std::size_t base = pick_style(rng);
    SyntheticStyle style = styles[base];
    std::uniform_real_distribution<double> wiggle(-1.0, 1.0);
    style.slant += 0.02 * wiggle(rng);
    style.scale *= 1.0 + 0.03 * wiggle(rng);
    style.baseline_drift += 0.004 * wiggle(rng);
    Ink ink = render_label(label.str(), style, rng);
    ink.writer_id = "s" + std::to_string(base);
    corpus.push_back(std::move(ink));
  }
  return corpus;
}

Bucket bucket_of(const std::string& label) {
  int words = 0;
  bool in_word = false;
  for (char c : label) {
    if (c == ' ') {
      in_word = false;
    } else if (!in_word) {
      in_word = true;
      ++words;
    }
  }
  if (words < 4) return Bucket::short_labels;
  if (words <= 7) return Bucket::medium_labels;
  return Bucket::long_labels;
}

const char* bucket_name(Bucket b) {
  switch (b) {
    case Bucket::short_labels: return "short";
    case Bucket::medium_labels: return "medium";
    case Bucket::long_labels: return "long";
  }
  return "?";
}

std::vector<std::string> make_phrases(const std::vector<std::string>& lexicon,
                                      int lo_words, int hi_words, int count,
                                      std::uint64_t seed) {
  std::vector<std::string> labels;
  std::mt19937_64 rng =
      rng_stream(seed, 47, static_cast<std::uint64_t>(lo_words) * 131 +
                               static_cast<std::uint64_t>(hi_words));
  std::uniform_int_distribution<int> n_words(lo_words, hi_words);
  std::uniform_int_distribution<std::size_t> pick(0, lexicon.size() - 1);
  for (int i = 0; i < count; ++i) {
    std::ostringstream label;
    const int n = n_words(rng);
    for (int w = 0; w < n; ++w) {
      if (w > 0) label << ' ';
      label << lexicon[pick(rng)];
    }
    labels.push_back(label.str());
  }
  return labels;
}

std::vector<std::string> make_eval_labels(
    const std::vector<std::string>& lexicon, Bucket bucket, int count,
    std::uint64_t seed) {
  int lo = 1, hi = 3;
  if (bucket == Bucket::medium_labels) {
    lo = 4;
    hi = 7;
  } else if (bucket == Bucket::long_labels) {
    lo = 9;
    hi = 11;
  }
  return make_phrases(lexicon, lo, hi, count, seed);
}

}  // namespace longink
