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

#include "longink/params.hpp"

#include <algorithm>
#include <cmath>

namespace longink {

Eigen::MatrixXd& ParamStore::create(const std::string& name,
                                    Eigen::MatrixXd init) {
  if (values_.count(name))
    throw Error(ErrorKind::state, "parameter already exists: " + name);
  auto [it, ok] = values_.emplace(name, std::move(init));
  Moments moments;
  moments.m = Eigen::MatrixXd::Zero(it->second.rows(), it->second.cols());
  moments.v = moments.m;
  adam_.emplace(name, std::move(moments));
  return it->second;
}

bool ParamStore::has(const std::string& name) const {
  return values_.count(name) > 0;
}

Eigen::MatrixXd& ParamStore::at(const std::string& name) {
  auto it = values_.find(name);
  if (it == values_.end())
    throw Error(ErrorKind::missing_artifact, "unknown parameter: " + name);
  return it->second;
}

const Eigen::MatrixXd& ParamStore::at(const std::string& name) const {
  auto it = values_.find(name);
  if (it == values_.end())
    throw Error(ErrorKind::missing_artifact, "unknown parameter: " + name);
  return it->second;
}

ad::Var ParamStore::use(ad::Tape& tape, const std::string& name) {
  if (bound_tape_id_ != tape.id()) {
    bound_.clear();
    bound_tape_id_ = tape.id();
  }
  auto it = bound_.find(name);
  if (it != bound_.end()) return ad::Var(it->second);
  ad::Var leaf = tape.leaf(at(name), true);
  bound_.emplace(name, leaf.node());
  return leaf;
}

std::map<std::string, Eigen::MatrixXd> ParamStore::gradients() const {
  std::map<std::string, Eigen::MatrixXd> grads;
  for (const auto& [name, value] : values_) {
    auto it = bound_.find(name);
    if (it != bound_.end() && it->second->grad.size() > 0)
      grads.emplace(name, it->second->grad);
    else
      grads.emplace(name, Eigen::MatrixXd::Zero(value.rows(), value.cols()));
  }
  return grads;
}

void ParamStore::release_bindings() {
  bound_.clear();
  bound_tape_id_ = 0;
}

void ParamStore::adam_step(
    const std::map<std::string, Eigen::MatrixXd>& grads,
    const AdamConfig& config) {
  double sq_norm = 0.0;
  for (const auto& [name, g] : grads) {
    if (!g.allFinite())
      throw Error(ErrorKind::numeric, "non-finite gradient for " + name);
    sq_norm += g.squaredNorm();
  }
  double scale = 1.0;
  if (config.clip_norm > 0.0) {
    const double norm = std::sqrt(sq_norm);
    if (norm > config.clip_norm) scale = config.clip_norm / norm;
  }
  for (const auto& [name, g_raw] : grads) {
    auto vit = values_.find(name);
    if (vit == values_.end())
      throw Error(ErrorKind::missing_artifact, "unknown parameter: " + name);
    Moments& mo = adam_.at(name);
    const Eigen::MatrixXd g = g_raw * scale;
    mo.step += 1;
    mo.m = config.beta1 * mo.m + (1.0 - config.beta1) * g;
    mo.v = (config.beta2 * mo.v.array() +
            (1.0 - config.beta2) * g.array().square())
               .matrix();
    const double bc1 = 1.0 - std::pow(config.beta1, mo.step);
    const double bc2 = 1.0 - std::pow(config.beta2, mo.step);
    vit->second.array() -=
        config.lr * (mo.m.array() / bc1) /
        ((mo.v.array() / bc2).sqrt() + config.eps);
  }
}

long ParamStore::step_count(const std::string& name) const {
  auto it = adam_.find(name);
  return it == adam_.end() ? 0 : it->second.step;
}

std::vector<std::string> ParamStore::names() const {
  std::vector<std::string> out;
  out.reserve(values_.size());
  for (const auto& [name, value] : values_) out.push_back(name);
  return out;
}

FiniteDiffReport finite_diff_check(
    ParamStore& params, const std::function<ad::Var(ad::Tape&)>& build_loss,
    double h, double tol, int coords_per_param, std::uint64_t seed) {
  FiniteDiffReport report;
  std::map<std::string, Eigen::MatrixXd> analytic;
  {
    ad::Tape tape;
    ad::Var loss = build_loss(tape);
    tape.backward(loss);
    analytic = params.gradients();
    tape.clear();
    params.release_bindings();
  }
  auto eval = [&]() {
    ad::Tape tape;
    tape.set_recording(false);
    const double v = build_loss(tape).scalar();
    params.release_bindings();
    return v;
  };
  std::mt19937_64 rng(seed);
  for (const std::string& name : params.names()) {
    Eigen::MatrixXd& theta = params.at(name);
    const long n = theta.size();
    std::vector<long> coords;
    if (coords_per_param <= 0 || n <= coords_per_param) {
      coords.resize(static_cast<std::size_t>(n));
      for (long i = 0; i < n; ++i) coords[static_cast<std::size_t>(i)] = i;
    } else {
      std::uniform_int_distribution<long> dist(0, n - 1);
      for (int i = 0; i < coords_per_param; ++i) coords.push_back(dist(rng));
    }
    for (long idx : coords) {
      double* slot = theta.data() + idx;
      const double saved = *slot;
      *slot = saved + h;
      const double up = eval();
      *slot = saved - h;
      const double down = eval();
      *slot = saved;
      const double fd = (up - down) / (2.0 * h);
      const double an = analytic.at(name)(idx);
      const double diff = std::abs(fd - an);
      const double denom = std::max(std::abs(fd), std::abs(an));
      const double rel = denom > 1e-6 ? diff / denom : diff;
      ++report.coords_checked;
      if (rel > report.max_rel_error) {
        report.max_rel_error = rel;
        report.worst_param = name;
      }
    }
  }
  report.passed = report.max_rel_error <= tol;
  return report;
}

Eigen::MatrixXd glorot_uniform(long rows, long cols, std::mt19937_64& rng) {
  const double limit = std::sqrt(6.0 / static_cast<double>(rows + cols));
  std::uniform_real_distribution<double> dist(-limit, limit);
  Eigen::MatrixXd out(rows, cols);
  for (long j = 0; j < cols; ++j)
    for (long i = 0; i < rows; ++i) out(i, j) = dist(rng);
  return out;
}

Eigen::MatrixXd zeros(long rows, long cols) {
  return Eigen::MatrixXd::Zero(rows, cols);
}

}  // namespace longink
