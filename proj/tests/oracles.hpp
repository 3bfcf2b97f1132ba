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

// Brute-force reference implementations, deliberately written in the
// most direct way possible and kept independent of the library code
// paths they check.

#ifndef LONGINK_TESTS_ORACLES_HPP
#define LONGINK_TESTS_ORACLES_HPP

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

namespace oracles {

/// Scalar NT-Xent: rows (2i, 2i+1) are positive pairs; plain loops,
/// no log-sum-exp tricks.
inline double nt_xent(const std::vector<Eigen::VectorXd>& embeddings,
                      double tau) {
  const std::size_t n = embeddings.size();
  auto cosine = [](const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
    return a.dot(b) / (a.norm() * b.norm());
  };
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t pos = (i % 2 == 0) ? i + 1 : i - 1;
    const double num = std::exp(cosine(embeddings[i], embeddings[pos]) / tau);
    double den = 0.0;
    for (std::size_t j = 0; j < n; ++j)
      if (j != i) den += std::exp(cosine(embeddings[i], embeddings[j]) / tau);
    total += -std::log(num / den);
  }
  return total / static_cast<double>(n);
}

/// Direct diagonal-Gaussian-mixture NLL with a Bernoulli pen term.
inline double mdn_nll(const Eigen::VectorXd& pi, const Eigen::MatrixXd& mu,
                      const Eigen::MatrixXd& sigma, const Eigen::VectorXd& x,
                      double pen_prob, int pen) {
  const long k = pi.size();
  const long d = x.size();
  double density = 0.0;
  for (long j = 0; j < k; ++j) {
    double component = pi[j];
    for (long dd = 0; dd < d; ++dd) {
      const double z = (x[dd] - mu(j, dd)) / sigma(j, dd);
      component *= std::exp(-0.5 * z * z) /
                   (sigma(j, dd) * std::sqrt(2.0 * M_PI));
    }
    density += component;
  }
  const double pen_term = pen == 1 ? pen_prob : 1.0 - pen_prob;
  return -std::log(density) - std::log(pen_term);
}

/// Exponential-time edit distance by exhaustive recursion; only usable
/// for short strings.
inline int slow_edit_distance(const std::string& a, const std::string& b,
                              std::size_t i = 0, std::size_t j = 0) {
  if (i == a.size()) return static_cast<int>(b.size() - j);
  if (j == b.size()) return static_cast<int>(a.size() - i);
  if (a[i] == b[j]) return slow_edit_distance(a, b, i + 1, j + 1);
  const int sub = slow_edit_distance(a, b, i + 1, j + 1);
  const int del = slow_edit_distance(a, b, i + 1, j);
  const int ins = slow_edit_distance(a, b, i, j + 1);
  return 1 + std::min({sub, del, ins});
}

}  // namespace oracles

#endif  // LONGINK_TESTS_ORACLES_HPP
