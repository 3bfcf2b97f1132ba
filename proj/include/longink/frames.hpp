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

#ifndef LONGINK_FRAMES_HPP
#define LONGINK_FRAMES_HPP

#include <Eigen/Dense>
#include <vector>

#include "longink/ink.hpp"

namespace longink {

enum class ReprKind { raw, curve };

constexpr int cont_dim(ReprKind kind) {
  return kind == ReprKind::raw ? 2 : 6;
}

/// Model-facing sequence: T continuous frames plus a pen bit per frame
/// (1 = the frame ends a stroke).
///
/// raw   — frame = (dx, dy) offset from the previous point.
/// curve — frame = one fitted cubic segment, as offsets of the two
///         control points and of the end point relative to the previous
///         on-curve point.
///
/// A frame that follows a pen-up frame is a travel move: its end point
/// starts the next stroke and its interior is not drawn.
struct FrameSeq {
  Eigen::MatrixXd frames;  // T x cont_dim(kind)
  Eigen::VectorXi pen;     // T, values 0/1
  ReprKind kind = ReprKind::raw;

  [[nodiscard]] long size() const { return frames.rows(); }
  [[nodiscard]] bool empty() const { return frames.rows() == 0; }
};

/// Default per-point time step used when synthesizing timestamps.
constexpr double kFrameDt = 0.01;

/// Converts an ink into the given representation. The first point of the
/// ink becomes the implicit origin, so round trips reproduce coordinates
/// exactly for origin-anchored inks (and up to translation otherwise).
/// For curve kind, strokes are fitted with residual at most
/// curve_tol_ratio times the ink height.
FrameSeq ink_to_frames(const Ink& ink, ReprKind kind,
                       double curve_tol_ratio = 0.02);

/// Inverse of ink_to_frames, anchored at (0, 0), with uniform synthetic
/// timestamps. Empty input yields an empty ink.
Ink frames_to_ink(const FrameSeq& frames);

/// Restricts a frame sequence to strokes [first, last), reusing pen bits
/// to find stroke boundaries.
FrameSeq slice_strokes(const FrameSeq& frames, int first, int last);

/// Per-dimension standardization statistics for the continuous channels.
struct NormStats {
  Eigen::VectorXd mean;
  Eigen::VectorXd stddev;
};

NormStats compute_norm_stats(const std::vector<FrameSeq>& data);

/// (frames - mean) / stddev on the continuous channels; pen untouched.
Eigen::MatrixXd standardize(const Eigen::MatrixXd& frames,
                            const NormStats& stats);
Eigen::MatrixXd unstandardize(const Eigen::MatrixXd& frames,
                              const NormStats& stats);

}  // namespace longink

#endif  // LONGINK_FRAMES_HPP
