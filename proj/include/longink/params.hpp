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

#ifndef LONGINK_PARAMS_HPP
#define LONGINK_PARAMS_HPP

#include <cstdint>
#include <functional>
#include <map>
#include <random>
#include <string>
#include <vector>

#include "longink/autodiff.hpp"

namespace longink {

struct AdamConfig {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  double clip_norm = 10.0;  // global gradient norm clip, <=0 disables
};

/// Named trainable parameters with per-parameter Adam state. A store is
/// confined to one training thread; copies are cheap enough for
/// evaluation snapshots.
class ParamStore {
 public:
  Eigen::MatrixXd& create(const std::string& name, Eigen::MatrixXd init);
  [[nodiscard]] bool has(const std::string& name) const;
  Eigen::MatrixXd& at(const std::string& name);
  [[nodiscard]] const Eigen::MatrixXd& at(const std::string& name) const;

  /// Binds the parameter as a gradient-tracking leaf on the tape.
  /// Repeated use() with the same tape returns the same leaf so all
  /// gradient contributions accumulate in one place.
  ad::Var use(ad::Tape& tape, const std::string& name);

  /// Gradients collected from bound leaves after Tape::backward;
  /// parameters the loss never reached get zero gradients.
  [[nodiscard]] std::map<std::string, Eigen::MatrixXd> gradients() const;

  void release_bindings();

  /// Bias-corrected Adam update with optional global-norm clipping.
  void adam_step(const std::map<std::string, Eigen::MatrixXd>& grads,
                 const AdamConfig& config);

  [[nodiscard]] long step_count(const std::string& name) const;
  [[nodiscard]] std::vector<std::string> names() const;
  [[nodiscard]] const std::map<std::string, Eigen::MatrixXd>& values() const {
    return values_;
  }

 private:
  struct Moments {
    Eigen::MatrixXd m;
    Eigen::MatrixXd v;
    long step = 0;
  };
  std::map<std::string, Eigen::MatrixXd> values_;
  std::map<std::string, Moments> adam_;
  std::map<std::string, std::shared_ptr<ad::Node>> bound_;
  std::uint64_t bound_tape_id_ = 0;
};

struct FiniteDiffReport {
  double max_rel_error = 0.0;
  std::string worst_param;
  int coords_checked = 0;
  bool passed = true;
};

/// Central-difference check of the analytic gradients of `build_loss`
/// over sampled parameter coordinates.
FiniteDiffReport finite_diff_check(
    ParamStore& params, const std::function<ad::Var(ad::Tape&)>& build_loss,
    double h, double tol, int coords_per_param, std::uint64_t seed);

// Initializers.
Eigen::MatrixXd glorot_uniform(long rows, long cols, std::mt19937_64& rng);
Eigen::MatrixXd zeros(long rows, long cols);

}  // namespace longink

#endif  // LONGINK_PARAMS_HPP
