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

#ifndef LONGINK_AUGMENTATION_HPP
#define LONGINK_AUGMENTATION_HPP

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "longink/style_encoder.hpp"

namespace longink {

struct AugmentationConfig {
  double target_len = 26.0;  // label characters
  int batch_size = 8;        // candidates scored per iteration
  double threshold = 0.5;    // style-consistency control
  double space_width = 1.0;  // gap in units of the left ink's char width
  int n_samples = 100;
};

/// Scores style similarity between a growing sample and corpus items.
class StyleScorer {
 public:
  virtual ~StyleScorer() = default;
  virtual Eigen::VectorXd embed(const Ink& ink) const = 0;
  virtual const Eigen::VectorXd& corpus_item(std::size_t index) const = 0;
  [[nodiscard]] virtual std::size_t corpus_size() const = 0;
};

/// Backs the scorer with a trained style encoder; corpus embeddings are
/// computed once up front.
class EncoderScorer : public StyleScorer {
 public:
  EncoderScorer(ParamStore& params, const StyleConfig& cfg,
                std::string prefix, ReprKind repr, NormStats stats,
                const std::vector<Ink>& corpus);
  Eigen::VectorXd embed(const Ink& ink) const override;
  const Eigen::VectorXd& corpus_item(std::size_t index) const override;
  [[nodiscard]] std::size_t corpus_size() const override;

 private:
  ParamStore& params_;
  StyleConfig cfg_;
  std::string prefix_;
  ReprKind repr_;
  NormStats stats_;
  std::vector<Eigen::VectorXd> cache_;
};

/// Scales b so its 5th-95th percentile height matches a's, aligns the
/// baseline medians, leaves a horizontal gap of space_width times a's
/// mean character width, joins the labels with a single space and
/// re-sequences timestamps monotonically.
Ink concat_inks(const Ink& a, const Ink& b, double space_width = 1.0);

struct JoinRecord {
  int component_index = -1;
  double similarity = 0.0;
  bool scored = false;          // false for random / repetition joins
  bool argmax_fallback = false;  // below threshold, kept as the argmax
};

struct AugmentedSample {
  Ink ink;
  int seed_index = -1;
  std::vector<JoinRecord> joins;
};

enum class AugmentStrategy { style, random, repetition };
const char* strategy_name(AugmentStrategy s);

/// One long sample: a uniform seed ink grown by concatenation until its
/// label reaches target_len. The style strategy keeps candidates with
/// similarity >= threshold plus always the argmax, so progress never
/// stalls; random ignores the scorer; repetition re-appends the seed.
AugmentedSample generate_long_sample(const std::vector<Ink>& corpus,
                                     const AugmentationConfig& cfg,
                                     const StyleScorer* scorer,
                                     AugmentStrategy strategy,
                                     std::mt19937_64& rng);

/// n_samples independent draws on per-sample rng streams.
std::vector<AugmentedSample> build_augmented_dataset(
    const std::vector<Ink>& corpus, const AugmentationConfig& cfg,
    const StyleScorer* scorer, AugmentStrategy strategy, std::uint64_t seed);

/// Audit sidecar: sample_id, step, component_index, similarity,
/// argmax_fallback.
void write_audit_csv(const std::string& path,
                     const std::vector<AugmentedSample>& samples);

}  // namespace longink

#endif  // LONGINK_AUGMENTATION_HPP
