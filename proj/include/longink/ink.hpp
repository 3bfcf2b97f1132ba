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

#ifndef LONGINK_INK_HPP
#define LONGINK_INK_HPP

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "longink/error.hpp"

namespace longink {

/// One timestamped pen sample, in abstract length units and seconds.
struct Point {
  double x = 0.0;
  double y = 0.0;
  double t = 0.0;
};

/// Pen-down to pen-up contiguous trajectory. Non-empty, t strictly
/// increasing.
struct Stroke {
  std::vector<Point> points;
};

/// The universal handwriting object: ordered strokes plus an optional
/// text label and writer id.
struct Ink {
  std::vector<Stroke> strokes;
  std::string label;
  std::string writer_id;

  [[nodiscard]] bool empty() const { return strokes.empty(); }
};

struct BoundingBox {
  double min_x = 0.0;
  double max_x = 0.0;
  double min_y = 0.0;
  double max_y = 0.0;

  [[nodiscard]] double width() const { return max_x - min_x; }
  [[nodiscard]] double height() const { return max_y - min_y; }
};

/// Count-per-y-bin projection of an ink, used for baseline diagnostics.
struct HorizontalHistogram {
  double bin_height = 0.0;
  double y_min = 0.0;
  Eigen::VectorXi counts;
};

std::size_t point_count(const Ink& ink);

/// Throws Error on any violated invariant (stroke size, time ordering,
/// non-finite coordinates).
void validate_ink(const Ink& ink);

BoundingBox bounds(const Ink& ink);

HorizontalHistogram horizontal_histogram(const Ink& ink, double bin_height);

/// Exact point-wise median of y over all points; the handwriting
/// baseline estimate.
double baseline_median(const Ink& ink);

/// Maps every point to (scale*x + dx, scale*y + dy). Timestamps are
/// preserved. scale must be positive.
Ink apply_similarity_transform(const Ink& ink, double dx, double dy,
                               double scale);

/// Span between the given y-quantiles (linear interpolation), robust
/// height measure used by concatenation.
double percentile_height(const Ink& ink, double lo = 0.05, double hi = 0.95);

/// Shifts all timestamps so the ink starts at t0 and every later stroke
/// keeps its internal ordering; consecutive strokes are separated by at
/// least dt_gap.
Ink resequence_timestamps(const Ink& ink, double t0, double dt_gap);

}  // namespace longink

#endif  // LONGINK_INK_HPP
