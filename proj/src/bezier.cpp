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

#include "longink/bezier.hpp"

#include <algorithm>
#include <cmath>

namespace longink {

Eigen::Vector2d bezier_point(const CubicSegment& seg, double t) {
  const double u = 1.0 - t;
  return u * u * u * seg.p0 + 3.0 * u * u * t * seg.c1 +
         3.0 * u * t * t * seg.c2 + t * t * t * seg.p1;
}

namespace {

std::vector<double> chord_parameters(const std::vector<Eigen::Vector2d>& pts) {
  std::vector<double> t(pts.size(), 0.0);
  double total = 0.0;
  for (std::size_t i = 1; i < pts.size(); ++i) {
    total += (pts[i] - pts[i - 1]).norm();
    t[i] = total;
  }
  if (total > 0.0)
    for (auto& v : t) v /= total;
  else
    for (std::size_t i = 0; i < t.size(); ++i)
      t[i] = static_cast<double>(i) / static_cast<double>(t.size() - 1);
  return t;
}

CubicSegment fit_single(const std::vector<Eigen::Vector2d>& pts,
                        const std::vector<double>& tp) {
  const std::size_t n = pts.size();
  CubicSegment seg;
  seg.p0 = pts.front();
  seg.p1 = pts.back();
  if (n == 2) {
    seg.c1 = seg.p0 + (seg.p1 - seg.p0) / 3.0;
    seg.c2 = seg.p0 + 2.0 * (seg.p1 - seg.p0) / 3.0;
    return seg;
  }
  // Least squares for the inner control points, shared between the x
  // and y coordinates. SVD gives the min-norm solution when the system
  // is rank deficient (e.g. a single interior point).
  Eigen::MatrixXd basis(static_cast<long>(n), 2);
  Eigen::MatrixXd rhs(static_cast<long>(n), 2);
  for (std::size_t i = 0; i < n; ++i) {
    const double t = tp[i];
    const double u = 1.0 - t;
    basis(static_cast<long>(i), 0) = 3.0 * u * u * t;
    basis(static_cast<long>(i), 1) = 3.0 * u * t * t;
    rhs.row(static_cast<long>(i)) =
        (pts[i] - (u * u * u) * seg.p0 - (t * t * t) * seg.p1).transpose();
  }
  const Eigen::MatrixXd sol =
      basis.bdcSvd(Eigen::ComputeThinU | Eigen::ComputeThinV).solve(rhs);
  seg.c1 = sol.row(0).transpose();
  seg.c2 = sol.row(1).transpose();
  return seg;
}

std::size_t worst_point(const std::vector<Eigen::Vector2d>& pts,
                        const std::vector<double>& tp, const CubicSegment& seg,
                        double* max_err) {
  std::size_t worst = pts.size() / 2;
  *max_err = 0.0;
  for (std::size_t i = 1; i + 1 < pts.size(); ++i) {
    const double err = (bezier_point(seg, tp[i]) - pts[i]).norm();
    if (err > *max_err) {
      *max_err = err;
      worst = i;
    }
  }
  return worst;
}

void fit_recursive(const std::vector<Eigen::Vector2d>& pts, double tol,
                   std::vector<CubicSegment>* out) {
  const std::vector<double> tp = chord_parameters(pts);
  const CubicSegment seg = fit_single(pts, tp);
  double max_err = 0.0;
  const std::size_t split = worst_point(pts, tp, seg, &max_err);
  if (max_err <= tol || pts.size() <= 3) {
    out->push_back(seg);
    return;
  }
  std::vector<Eigen::Vector2d> left(pts.begin(),
                                    pts.begin() + static_cast<long>(split) + 1);
  std::vector<Eigen::Vector2d> right(pts.begin() + static_cast<long>(split),
                                     pts.end());
  fit_recursive(left, tol, out);
  fit_recursive(right, tol, out);
}

}  // namespace

std::vector<CubicSegment> fit_cubic_chain(
    const std::vector<Eigen::Vector2d>& pts, double tol) {
  std::vector<CubicSegment> out;
  if (pts.size() < 2) return out;
  fit_recursive(pts, tol, &out);
  return out;
}

double max_fit_residual(const std::vector<Eigen::Vector2d>& pts,
                        const std::vector<CubicSegment>& chain) {
  // Re-derive the mapping of points to segments by matching endpoints.
  double worst = 0.0;
  std::size_t start = 0;
  for (const auto& seg : chain) {
    std::size_t end = start;
    while (end + 1 < pts.size() && (pts[end] - seg.p1).squaredNorm() > 1e-18)
      ++end;
    std::vector<Eigen::Vector2d> span(
        pts.begin() + static_cast<long>(start),
        pts.begin() + static_cast<long>(end) + 1);
    if (span.size() >= 2) {
      const std::vector<double> tp = chord_parameters(span);
      for (std::size_t i = 0; i < span.size(); ++i)
        worst = std::max(worst, (bezier_point(seg, tp[i]) - span[i]).norm());
    }
    start = end;
  }
  return worst;
}

std::vector<Eigen::Vector2d> sample_segment(const CubicSegment& seg, int n) {
  std::vector<Eigen::Vector2d> out;
  out.reserve(static_cast<std::size_t>(n) + 1);
  for (int i = 0; i <= n; ++i)
    out.push_back(bezier_point(seg, static_cast<double>(i) / n));
  return out;
}

}  // namespace longink
