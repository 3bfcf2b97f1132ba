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

#include "longink/frames.hpp"

#include <algorithm>
#include <cmath>

#include "longink/bezier.hpp"

namespace longink {

namespace {

FrameSeq raw_frames(const Ink& ink) {
  const std::size_t n_points = point_count(ink);
  FrameSeq out;
  out.kind = ReprKind::raw;
  out.frames.resize(static_cast<long>(n_points) - 1, 2);
  out.pen.resize(static_cast<long>(n_points) - 1);
  long row = 0;
  Point prev = ink.strokes.front().points.front();
  bool first = true;
  for (const auto& stroke : ink.strokes) {
    for (std::size_t i = 0; i < stroke.points.size(); ++i) {
      const Point& p = stroke.points[i];
      if (first) {
        first = false;
        prev = p;
        continue;
      }
      out.frames(row, 0) = p.x - prev.x;
      out.frames(row, 1) = p.y - prev.y;
      out.pen[row] = (i + 1 == stroke.points.size()) ? 1 : 0;
      prev = p;
      ++row;
    }
  }
  return out;
}

FrameSeq curve_frames(const Ink& ink, double tol_ratio) {
  const BoundingBox box = bounds(ink);
  double scale = box.height();
  if (scale <= 0.0) scale = std::max(box.width(), 1.0);
  const double tol = tol_ratio * scale;

  std::vector<CubicSegment> segments;
  std::vector<int> pen;
  Eigen::Vector2d cursor(ink.strokes.front().points.front().x,
                         ink.strokes.front().points.front().y);
  bool first_stroke = true;
  for (const auto& stroke : ink.strokes) {
    std::vector<Eigen::Vector2d> pts;
    pts.reserve(stroke.points.size());
    for (const auto& p : stroke.points) pts.emplace_back(p.x, p.y);
    if (!first_stroke) {
      // Travel segment: a straight move from the previous stroke end.
      CubicSegment travel;
      travel.p0 = cursor;
      travel.p1 = pts.front();
      travel.c1 = travel.p0 + (travel.p1 - travel.p0) / 3.0;
      travel.c2 = travel.p0 + 2.0 * (travel.p1 - travel.p0) / 3.0;
      segments.push_back(travel);
      pen.push_back(0);
    }
    first_stroke = false;
    const std::vector<CubicSegment> chain = fit_cubic_chain(pts, tol);
    for (std::size_t i = 0; i < chain.size(); ++i) {
      segments.push_back(chain[i]);
      pen.push_back(i + 1 == chain.size() ? 1 : 0);
    }
    cursor = pts.back();
  }

  FrameSeq out;
  out.kind = ReprKind::curve;
  out.frames.resize(static_cast<long>(segments.size()), 6);
  out.pen.resize(static_cast<long>(segments.size()));
  for (std::size_t i = 0; i < segments.size(); ++i) {
    const CubicSegment& s = segments[i];
    out.frames(static_cast<long>(i), 0) = s.c1.x() - s.p0.x();
    out.frames(static_cast<long>(i), 1) = s.c1.y() - s.p0.y();
    out.frames(static_cast<long>(i), 2) = s.c2.x() - s.p0.x();
    out.frames(static_cast<long>(i), 3) = s.c2.y() - s.p0.y();
    out.frames(static_cast<long>(i), 4) = s.p1.x() - s.p0.x();
    out.frames(static_cast<long>(i), 5) = s.p1.y() - s.p0.y();
    out.pen[static_cast<long>(i)] = pen[i];
  }
  return out;
}

constexpr int kCurveSamples = 12;

}  // namespace

FrameSeq ink_to_frames(const Ink& ink, ReprKind kind, double curve_tol_ratio) {
  validate_ink(ink);
  return kind == ReprKind::raw ? raw_frames(ink)
                               : curve_frames(ink, curve_tol_ratio);
}

Ink frames_to_ink(const FrameSeq& fs) {
  Ink out;
  if (fs.empty()) return out;
  double t = 0.0;
  Stroke current;
  auto close_stroke = [&out, &current]() {
    if (current.points.size() >= 2) out.strokes.push_back(current);
    current.points.clear();
  };
  if (fs.kind == ReprKind::raw) {
    Point pos{0.0, 0.0, t};
    current.points.push_back(pos);
    for (long i = 0; i < fs.size(); ++i) {
      pos.x += fs.frames(i, 0);
      pos.y += fs.frames(i, 1);
      t += kFrameDt;
      pos.t = t;
      current.points.push_back(pos);
      if (fs.pen[i] == 1) close_stroke();
    }
  } else {
    Eigen::Vector2d cursor(0.0, 0.0);
    bool travel_next = false;  // set after each pen-up frame
    current.points.push_back(Point{0.0, 0.0, t});
    for (long i = 0; i < fs.size(); ++i) {
      CubicSegment seg;
      seg.p0 = cursor;
      seg.c1 = cursor + Eigen::Vector2d(fs.frames(i, 0), fs.frames(i, 1));
      seg.c2 = cursor + Eigen::Vector2d(fs.frames(i, 2), fs.frames(i, 3));
      seg.p1 = cursor + Eigen::Vector2d(fs.frames(i, 4), fs.frames(i, 5));
      if (travel_next) {
        // Only the end point matters: it starts the next stroke.
        t += kFrameDt;
        current.points.push_back(Point{seg.p1.x(), seg.p1.y(), t});
        travel_next = false;
      } else {
        const auto samples = sample_segment(seg, kCurveSamples);
        for (std::size_t k = 1; k < samples.size(); ++k) {
          t += kFrameDt;
          current.points.push_back(Point{samples[k].x(), samples[k].y(), t});
        }
      }
      cursor = seg.p1;
      if (fs.pen[i] == 1) {
        close_stroke();
        travel_next = true;
      }
    }
  }
  close_stroke();
  return out;
}

FrameSeq slice_strokes(const FrameSeq& fs, int first, int last) {
  // Stroke s covers frames (boundary[s-1], boundary[s]], where boundary
  // indices are the pen-up rows.
  std::vector<long> ends;
  for (long i = 0; i < fs.size(); ++i)
    if (fs.pen[i] == 1) ends.push_back(i);
  const int n_strokes = static_cast<int>(ends.size());
  first = std::clamp(first, 0, n_strokes);
  last = std::clamp(last, first, n_strokes);
  FrameSeq out;
  out.kind = fs.kind;
  if (first == last) {
    out.frames.resize(0, fs.frames.cols());
    out.pen.resize(0);
    return out;
  }
  const long begin = first == 0 ? 0 : ends[first - 1] + 1;
  const long end = ends[last - 1] + 1;
  out.frames = fs.frames.middleRows(begin, end - begin);
  out.pen = fs.pen.segment(begin, end - begin);
  return out;
}

NormStats compute_norm_stats(const std::vector<FrameSeq>& data) {
  long cols = 0;
  long total = 0;
  for (const auto& fs : data) {
    if (fs.size() > 0) cols = fs.frames.cols();
    total += fs.size();
  }
  NormStats stats;
  stats.mean = Eigen::VectorXd::Zero(cols);
  stats.stddev = Eigen::VectorXd::Ones(cols);
  if (total == 0 || cols == 0) return stats;
  Eigen::VectorXd sum = Eigen::VectorXd::Zero(cols);
  Eigen::VectorXd sum_sq = Eigen::VectorXd::Zero(cols);
  for (const auto& fs : data) {
    for (long i = 0; i < fs.size(); ++i) {
      sum += fs.frames.row(i).transpose();
      sum_sq += fs.frames.row(i).transpose().cwiseAbs2();
    }
  }
  stats.mean = sum / static_cast<double>(total);
  Eigen::VectorXd var =
      sum_sq / static_cast<double>(total) - stats.mean.cwiseAbs2();
  stats.stddev = var.cwiseMax(1e-12).cwiseSqrt();
  for (long d = 0; d < cols; ++d)
    if (stats.stddev[d] < 1e-6) stats.stddev[d] = 1.0;
  return stats;
}

Eigen::MatrixXd standardize(const Eigen::MatrixXd& frames,
                            const NormStats& stats) {
  Eigen::MatrixXd out = frames;
  out.rowwise() -= stats.mean.transpose();
  out.array().rowwise() /= stats.stddev.transpose().array();
  return out;
}

Eigen::MatrixXd unstandardize(const Eigen::MatrixXd& frames,
                              const NormStats& stats) {
  Eigen::MatrixXd out = frames;
  out.array().rowwise() *= stats.stddev.transpose().array();
  out.rowwise() += stats.mean.transpose();
  return out;
}

}  // namespace longink
