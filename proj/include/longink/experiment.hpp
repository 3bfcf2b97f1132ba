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

#ifndef LONGINK_EXPERIMENT_HPP
#define LONGINK_EXPERIMENT_HPP

#include <iosfwd>
#include <map>
#include <optional>

#include "longink/augmentation.hpp"
#include "longink/corpus.hpp"
#include "longink/recognizer.hpp"
#include "longink/split.hpp"

namespace longink {

/// Ablation arms. `full` is the complete recipe; `base` removes
/// augmentation, style conditioning and split generation together; the
/// single-removal arms drop one ingredient; the strategy arms swap the
/// augmentation arrangement.
enum class Arm {
  full,
  base,
  no_aug,
  no_split,
  no_style,
  aug_random,
  aug_repetition,
  primed,
};
const char* arm_name(Arm arm);

struct ExperimentConfig {
  ReprKind repr = ReprKind::raw;

  // Corpus
  int corpus_inks = 600;
  int n_styles = 10;
  std::uint64_t corpus_seed = 100;
  int style_pool_inks = 24;  // held-out style sources for inference

  // Style model (function g, used by the augmentation step)
  StyleTrainConfig style_train;

  // Augmentation
  AugmentationConfig augment;

  // Generator
  GeneratorTrainConfig gen_train;

  // Inference
  SplitConfig split;
  SamplingConfig sampling;

  // Evaluation
  int labels_per_bucket = 10;
  int long_words_lo = 20, long_words_hi = 26;
  std::uint64_t eval_seed = 500;

  std::vector<std::uint64_t> seeds{1, 2, 3};
  std::vector<Arm> arms{Arm::full, Arm::base};
  int jobs = 1;
};

/// Minute-scale defaults for the full ablation.
ExperimentConfig desk_experiment_config(ReprKind repr = ReprKind::raw);

struct CerRow {
  std::string arm;
  std::uint64_t seed = 0;
  std::string bucket;
  double cer = 0.0;
};

struct CellStat {
  double mean = 0.0;
  double stddev = 0.0;
  int n = 0;
};

struct EvalReport {
  std::vector<CerRow> rows;  // one row per (arm, seed, bucket)
  // arm -> bucket ("short"/"medium"/"long"/"avg") -> stats over seeds
  std::map<std::string, std::map<std::string, CellStat>> cells;
  // arm -> seed -> mean pairwise piece cosine (split arms only)
  std::map<std::string, std::map<std::uint64_t, double>> piece_similarity;
  double runtime_seconds = 0.0;
};

/// Trains every needed checkpoint per seed (shared between arms where
/// the training data coincides), synthesizes the eval labels, recognizes
/// them and aggregates CER per bucket.
EvalReport run_experiment(const ExperimentConfig& config,
                          std::ostream* progress = nullptr);

void write_report_csv(const EvalReport& report, const std::string& path);
nlohmann::json report_summary_json(const EvalReport& report);

/// Convenience accessors used by the acceptance checks.
double cell_mean(const EvalReport& report, const std::string& arm,
                 const std::string& bucket);
std::vector<double> seed_values(const EvalReport& report,
                                const std::string& arm,
                                const std::string& bucket);

}  // namespace longink

#endif  // LONGINK_EXPERIMENT_HPP
