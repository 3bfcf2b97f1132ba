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

#include "longink/ink.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace longink {

const char* error_kind_name(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::empty_ink: return "EmptyInk";
    case ErrorKind::invalid_transform: return "InvalidTransform";
    case ErrorKind::shape: return "ShapeError";
    case ErrorKind::numeric: return "NumericError";
    case ErrorKind::too_short: return "TooShort";
    case ErrorKind::need_negatives: return "NeedNegatives";
    case ErrorKind::degenerate_embedding: return "DegenerateEmbedding";
    case ErrorKind::unknown_symbol: return "UnknownSymbol";
    case ErrorKind::state: return "StateError";
    case ErrorKind::empty_label: return "EmptyLabel";
    case ErrorKind::no_candidates: return "NoCandidates";
    case ErrorKind::missing_artifact: return "MissingArtifact";
    case ErrorKind::empty_reference: return "EmptyReference";
  }
  return "Error";
}

std::size_t point_count(const Ink& ink) {
  std::size_t n = 0;
  for (const auto& s : ink.strokes) n += s.points.size();
  return n;
}

void validate_ink(const Ink& ink) {
  if (ink.empty()) throw Error(ErrorKind::empty_ink, "ink has no strokes");
  for (const auto& stroke : ink.strokes) {
    if (stroke.points.size() < 2)
      throw Error(ErrorKind::too_short, "stroke has fewer than 2 points");
    double prev_t = -std::numeric_limits<double>::infinity();
    for (const auto& p : stroke.points) {
      if (!std::isfinite(p.x) || !std::isfinite(p.y) || !std::isfinite(p.t))
        throw Error(ErrorKind::numeric, "non-finite ink coordinate");
      if (p.t <= prev_t)
        throw Error(ErrorKind::state, "stroke timestamps not increasing");
      prev_t = p.t;
    }
  }
}

BoundingBox bounds(const Ink& ink) {
  if (ink.empty()) throw Error(ErrorKind::empty_ink, "bounds of empty ink");
  BoundingBox box{std::numeric_limits<double>::infinity(),
                  -std::numeric_limits<double>::infinity(),
                  std::numeric_limits<double>::infinity(),
                  -std::numeric_limits<double>::infinity()};
  for (const auto& s : ink.strokes) {
    for (const auto& p : s.points) {
      box.min_x = std::min(box.min_x, p.x);
      box.max_x = std::max(box.max_x, p.x);
      box.min_y = std::min(box.min_y, p.y);
      box.max_y = std::max(box.max_y, p.y);
    }
  }
  return box;
}

HorizontalHistogram horizontal_histogram(const Ink& ink, double bin_height) {
  if (ink.empty())
    throw Error(ErrorKind::empty_ink, "histogram of empty ink");
  if (!(bin_height > 0.0))
    throw Error(ErrorKind::invalid_transform, "bin_height must be positive");
  const BoundingBox box = bounds(ink);
  const int n_bins =
      std::max(1, static_cast<int>(std::floor((box.max_y - box.min_y) /
                                              bin_height)) +
                      1);
  HorizontalHistogram hist;
  hist.bin_height = bin_height;
  hist.y_min = box.min_y;
  hist.counts = Eigen::VectorXi::Zero(n_bins);
  for (const auto& s : ink.strokes) {
    for (const auto& p : s.points) {
      int bin = static_cast<int>(std::floor((p.y - box.min_y) / bin_height));
      bin = std::clamp(bin, 0, n_bins - 1);
      hist.counts[bin] += 1;
    }
  }
  return hist;
}

namespace {

std::vector<double> all_y(const Ink& ink) {
  std::vector<double> ys;
  ys.reserve(point_count(ink));
  for (const auto& s : ink.strokes)
    for (const auto& p : s.points) ys.push_back(p.y);
  return ys;
}

}  // namespace

double baseline_median(const Ink& ink) {
  if (ink.empty()) throw Error(ErrorKind::empty_ink, "median of empty ink");
  std::vector<double> ys = all_y(ink);
  const std::size_t n = ys.size();
  auto mid = ys.begin() + static_cast<std::ptrdiff_t>(n / 2);
  std::nth_element(ys.begin(), mid, ys.end());
  if (n % 2 == 1) return *mid;
  const double upper = *mid;
  const double lower = *std::max_element(ys.begin(), mid);
  return 0.5 * (lower + upper);
}

Ink apply_similarity_transform(const Ink& ink, double dx, double dy,
                               double scale) {
  if (!(scale > 0.0))
    throw Error(ErrorKind::invalid_transform, "scale must be positive");
  Ink out = ink;
  for (auto& s : out.strokes) {
    for (auto& p : s.points) {
      p.x = scale * p.x + dx;
      p.y = scale * p.y + dy;
    }
  }
  return out;
}

double percentile_height(const Ink& ink, double lo, double hi) {
  std::vector<double> ys = all_y(ink);
  if (ys.empty()) throw Error(ErrorKind::empty_ink, "height of empty ink");
  std::sort(ys.begin(), ys.end());
  auto quantile = [&ys](double q) {
    const double pos = q * static_cast<double>(ys.size() - 1);
    const auto i = static_cast<std::size_t>(std::floor(pos));
    const double frac = pos - static_cast<double>(i);
    if (i + 1 >= ys.size()) return ys.back();
    return ys[i] * (1.0 - frac) + ys[i + 1] * frac;
  };
  return quantile(hi) - quantile(lo);
}

Ink resequence_timestamps(const Ink& ink, double t0, double dt_gap) {
  Ink out = ink;
  double t = t0;
  for (auto& stroke : out.strokes) {
    if (stroke.points.empty()) continue;
    const double start = stroke.points.front().t;
    for (auto& p : stroke.points) p.t = t + (p.t - start);
    t = stroke.points.back().t + dt_gap;
  }
  return out;
}

}  // namespace longink
