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

#include "longink/recognizer.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace longink {

namespace {

constexpr int kResample = 32;

using Path = std::vector<Eigen::Vector2d>;

/// Concatenates the strokes in time order and resamples the polyline
/// (jumps included) to kResample points by cumulative arc length, then
/// normalizes: min corner to the origin, scaled by 1/height.
Path shape_signature(const std::vector<Path>& strokes) {
  Path raw;
  for (const auto& s : strokes)
    for (const auto& p : s) raw.push_back(p);
  if (raw.empty()) return raw;
  if (raw.size() == 1) raw.push_back(raw.front());

  std::vector<double> cum(raw.size(), 0.0);
  for (std::size_t i = 1; i < raw.size(); ++i)
    cum[i] = cum[i - 1] + (raw[i] - raw[i - 1]).norm();
  const double total = cum.back();

  Path out(kResample);
  for (int k = 0; k < kResample; ++k) {
    const double target =
        total * static_cast<double>(k) / (kResample - 1);
    auto it = std::lower_bound(cum.begin(), cum.end(), target);
    const std::size_t j = std::min<std::size_t>(
        raw.size() - 1, static_cast<std::size_t>(it - cum.begin()));
    if (j == 0 || total == 0.0) {
      out[static_cast<std::size_t>(k)] = raw.front();
      continue;
    }
    const double seg = cum[j] - cum[j - 1];
    const double frac = seg > 0.0 ? (target - cum[j - 1]) / seg : 0.0;
    out[static_cast<std::size_t>(k)] =
        raw[j - 1] + frac * (raw[j] - raw[j - 1]);
  }

  // De-slant: remove the least-squares shear of x on y so the metric is
  // invariant to italic writing. Templates pass through the same map.
  Eigen::Vector2d mean = Eigen::Vector2d::Zero();
  for (const auto& p : out) mean += p;
  mean /= static_cast<double>(out.size());
  double cov_xy = 0.0, var_y = 0.0;
  for (const auto& p : out) {
    cov_xy += (p.x() - mean.x()) * (p.y() - mean.y());
    var_y += (p.y() - mean.y()) * (p.y() - mean.y());
  }
  if (var_y > 1e-12) {
    const double shear = std::clamp(cov_xy / var_y, -0.45, 0.45);
    for (auto& p : out) p.x() -= shear * (p.y() - mean.y());
  }

  Eigen::Vector2d lo = out[0], hi = out[0];
  for (const auto& p : out) {
    lo = lo.cwiseMin(p);
    hi = hi.cwiseMax(p);
  }
  double scale = hi.y() - lo.y();
  if (scale < 1e-9) scale = std::max(hi.x() - lo.x(), 1e-9);
  for (auto& p : out) p = (p - lo) / scale;
  return out;
}

double shape_distance(const Path& a, const Path& b) {
  double total = 0.0;
  for (int k = 0; k < kResample; ++k)
    total += (a[static_cast<std::size_t>(k)] - b[static_cast<std::size_t>(k)])
                 .norm();
  return total / kResample;
}

struct Segment {
  double min_x = 0.0;
  double max_x = 0.0;
  std::vector<int> stroke_ids;
};

std::vector<Path> template_paths(const GlyphTemplate& g) {
  std::vector<Path> out;
  for (const auto& poly : g.polylines) out.push_back(poly);
  return out;
}

}  // namespace

std::string recognize(const Ink& ink,
                      const std::vector<GlyphTemplate>& templates) {
  if (ink.empty()) throw Error(ErrorKind::empty_ink, "recognize: empty ink");

  // Stroke x-intervals, processed left to right.
  std::vector<Segment> segs;
  std::vector<int> order(ink.strokes.size());
  std::iota(order.begin(), order.end(), 0);
  std::vector<std::pair<double, double>> spans(ink.strokes.size());
  for (std::size_t s = 0; s < ink.strokes.size(); ++s) {
    double lo = ink.strokes[s].points.front().x;
    double hi = lo;
    for (const auto& p : ink.strokes[s].points) {
      lo = std::min(lo, p.x);
      hi = std::max(hi, p.x);
    }
    spans[s] = {lo, hi};
  }
  std::sort(order.begin(), order.end(), [&spans](int a, int b) {
    return spans[static_cast<std::size_t>(a)].first <
           spans[static_cast<std::size_t>(b)].first;
  });

  // First pass: merge overlapping intervals into provisional glyphs.
  for (int sid : order) {
    const auto [lo, hi] = spans[static_cast<std::size_t>(sid)];
    if (!segs.empty() && lo <= segs.back().max_x) {
      segs.back().max_x = std::max(segs.back().max_x, hi);
      segs.back().stroke_ids.push_back(sid);
    } else {
      segs.push_back(Segment{lo, hi, {sid}});
    }
  }
  // Median provisional width calibrates the gap thresholds.
  std::vector<double> widths;
  for (const auto& s : segs) widths.push_back(s.max_x - s.min_x);
  std::nth_element(widths.begin(), widths.begin() + widths.size() / 2,
                   widths.end());
  const double w_med = std::max(widths[widths.size() / 2], 1e-9);

  // Second pass: close segments with small gaps, note spaces at wide
  // ones.
  std::vector<Segment> glyphs;
  std::vector<bool> space_before;
  for (const auto& s : segs) {
    if (!glyphs.empty() && s.min_x - glyphs.back().max_x <= 0.5 * w_med) {
      glyphs.back().max_x = std::max(glyphs.back().max_x, s.max_x);
      for (int sid : s.stroke_ids) glyphs.back().stroke_ids.push_back(sid);
    } else {
      space_before.push_back(!glyphs.empty() &&
                             s.min_x - glyphs.back().max_x > 1.5 * w_med);
      glyphs.push_back(s);
    }
  }

  // Precompute template signatures once per call.
  std::vector<Path> signatures;
  signatures.reserve(templates.size());
  for (const auto& t : templates)
    signatures.push_back(shape_signature(template_paths(t)));

  std::string text;
  for (std::size_t gi = 0; gi < glyphs.size(); ++gi) {
    if (space_before[gi]) text += ' ';
    std::vector<int> ids = glyphs[gi].stroke_ids;
    std::sort(ids.begin(), ids.end());  // time order
    std::vector<Path> strokes;
    for (int sid : ids) {
      Path p;
      for (const auto& q : ink.strokes[static_cast<std::size_t>(sid)].points)
        p.emplace_back(q.x, q.y);
      strokes.push_back(std::move(p));
    }
    const Path sig = shape_signature(strokes);
    double best = 1e300;
    char best_ch = '?';
    for (std::size_t t = 0; t < templates.size(); ++t) {
      const double d = shape_distance(sig, signatures[t]);
      if (d < best) {
        best = d;
        best_ch = templates[t].ch;
      }
    }
    text += best_ch;
  }
  return text;
}

double cer(const std::string& hypothesis, const std::string& reference) {
  if (reference.empty())
    throw Error(ErrorKind::empty_reference, "cer: empty reference");
  const std::size_t n = hypothesis.size();
  const std::size_t m = reference.size();
  std::vector<int> prev(m + 1), cur(m + 1);
  for (std::size_t j = 0; j <= m; ++j) prev[j] = static_cast<int>(j);
  for (std::size_t i = 1; i <= n; ++i) {
    cur[0] = static_cast<int>(i);
    for (std::size_t j = 1; j <= m; ++j) {
      const int sub = prev[j - 1] + (hypothesis[i - 1] != reference[j - 1]);
      cur[j] = std::min({sub, prev[j] + 1, cur[j - 1] + 1});
    }
    std::swap(prev, cur);
  }
  return static_cast<double>(prev[m]) / static_cast<double>(m);
}

double min_template_separation(const std::vector<GlyphTemplate>& templates) {
  double min_d = 1e300;
  std::vector<Path> signatures;
  for (const auto& t : templates)
    signatures.push_back(shape_signature(template_paths(t)));
  for (std::size_t a = 0; a < templates.size(); ++a)
    for (std::size_t b = a + 1; b < templates.size(); ++b)
      min_d = std::min(min_d, shape_distance(signatures[a], signatures[b]));
  return min_d;
}

}  // namespace longink
