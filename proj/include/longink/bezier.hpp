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

#ifndef LONGINK_BEZIER_HPP
#define LONGINK_BEZIER_HPP

#include <Eigen/Dense>
#include <vector>

namespace longink {

/// Cubic segment with absolute control points.
struct CubicSegment {
  Eigen::Vector2d p0;
  Eigen::Vector2d c1;
  Eigen::Vector2d c2;
  Eigen::Vector2d p1;
};

Eigen::Vector2d bezier_point(const CubicSegment& seg, double t);

/// Least-squares fit of a polyline by a chain of cubic segments.
/// Endpoints are interpolated; inner control points are solved in closed
/// form under chord-length parameterization. Whenever the max pointwise
/// residual exceeds `tol`, the polyline is split at the worst point and
/// both halves are fitted recursively.
std::vector<CubicSegment> fit_cubic_chain(
    const std::vector<Eigen::Vector2d>& pts, double tol);

/// Max distance from the polyline samples to the fitted chain, evaluated
/// at the fit parameters. Used by tests as the residual measure.
double max_fit_residual(const std::vector<Eigen::Vector2d>& pts,
                        const std::vector<CubicSegment>& chain);

/// Samples a segment at n+1 evenly spaced parameters (t = 0..1 inclusive).
std::vector<Eigen::Vector2d> sample_segment(const CubicSegment& seg, int n);

}  // namespace longink

#endif  // LONGINK_BEZIER_HPP
