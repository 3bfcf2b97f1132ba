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

#include "longink/experiment.hpp"

#include <chrono>
#include <cmath>
#include <fstream>
#include <mutex>
#include <thread>

#include "longink/random.hpp"

namespace longink {

const char* arm_name(Arm arm) {
  switch (arm) {
    case Arm::full: return "full";
    case Arm::base: return "base";
    case Arm::no_aug: return "no_aug";
    case Arm::no_split: return "no_split";
    case Arm::no_style: return "no_style";
    case Arm::aug_random: return "aug_random";
    case Arm::aug_repetition: return "aug_repetition";
    case Arm::primed: return "primed";
  }
  return "?";
}

ExperimentConfig desk_experiment_config(ReprKind repr) {
  ExperimentConfig cfg;
  cfg.repr = repr;

  cfg.style_train.repr = repr;
  cfg.style_train.arch.input_dim = cont_dim(repr) + 1;
  cfg.style_train.arch.bi_hidden = 32;
  cfg.style_train.arch.uni_hidden = 32;
  cfg.style_train.arch.dense1 = 32;
  cfg.style_train.arch.dense2 = 32;
  cfg.style_train.batch_inks = 12;
  cfg.style_train.steps = 250;
  cfg.style_train.lr = 1e-3;

  cfg.augment.target_len = 26.0;
  cfg.augment.batch_size = 8;
  cfg.augment.threshold = 0.5;
  cfg.augment.n_samples = 150;

  cfg.gen_train.arch = desk_generator_config(repr);
  cfg.gen_train.batch = 16;
  cfg.gen_train.steps = 1200;
  cfg.gen_train.lr = 3e-3;
  cfg.gen_train.eval_every = 200;

  cfg.split.n_words = 3;
  cfg.split.n_candidates = 5;

  cfg.sampling.bias = 2.0;
  cfg.sampling.max_frames_per_char = repr == ReprKind::raw ? 16 : 8;

  return cfg;
}

namespace {

struct ArmSetup {
  std::string training;  // "aug_style", "plain", "aug_random", "aug_repetition"
  SplitConfig split;
  bool uses_split = true;
};

ArmSetup arm_setup(Arm arm, const ExperimentConfig& cfg) {
  ArmSetup setup;
  setup.split = cfg.split;
  switch (arm) {
    case Arm::full:
      setup.training = "aug_style";
      break;
    case Arm::base:
      setup.training = "plain";
      setup.split.n_words = 1 << 20;
      setup.split.n_candidates = 1;
      setup.split.mode = SplitConfig::Mode::no_style;
      setup.uses_split = false;
      break;
    case Arm::no_aug:
      setup.training = "plain";
      break;
    case Arm::no_split:
      setup.training = "aug_style";
      setup.split.n_words = 1 << 20;
      setup.split.n_candidates = 1;
      setup.uses_split = false;
      break;
    case Arm::no_style:
      setup.training = "aug_style";
      setup.split.mode = SplitConfig::Mode::no_style;
      break;
    case Arm::primed:
      setup.training = "aug_style";
      setup.split.mode = SplitConfig::Mode::primed;
      break;
    case Arm::aug_random:
      setup.training = "aug_random";
      break;
    case Arm::aug_repetition:
      setup.training = "aug_repetition";
      break;
  }
  return setup;
}

struct SeedOutcome {
  std::vector<CerRow> rows;
  std::map<std::string, double> piece_similarity;  // arm -> mean cosine
};

struct SharedInputs {
  std::vector<Ink> corpus;
  std::vector<Ink> style_pool;
  std::map<std::string, std::vector<std::string>> labels;  // bucket -> set
};

double mean_pairwise_cosine(const std::vector<Eigen::VectorXd>& embs) {
  double total = 0.0;
  int count = 0;
  for (std::size_t i = 0; i < embs.size(); ++i)
    for (std::size_t j = i + 1; j < embs.size(); ++j) {
      const double na = embs[i].norm();
      const double nb = embs[j].norm();
      if (na == 0.0 || nb == 0.0) continue;
      total += embs[i].dot(embs[j]) / (na * nb);
      ++count;
    }
  return count > 0 ? total / count : 0.0;
}

SeedOutcome run_seed(const ExperimentConfig& cfg, const SharedInputs& shared,
                     std::uint64_t seed,
                     const std::function<void(const std::string&)>& note) {
  // Style model g for the augmentation step (and as the similarity
  // judge for generated pieces).
  ParamStore style_g;
  NormStats style_stats;
  StyleTrainConfig style_cfg = cfg.style_train;
  style_cfg.seed = seed;
  train_style(shared.corpus, style_cfg, style_g, &style_stats);
  StyleConfig style_arch = style_cfg.arch;
  style_arch.input_dim = cont_dim(cfg.repr) + 1;
  note("style model trained");

  // Which trainings do the requested arms need?
  std::map<std::string, std::vector<Ink>> datasets;
  for (Arm arm : cfg.arms) {
    const ArmSetup setup = arm_setup(arm, cfg);
    if (datasets.count(setup.training)) continue;
    std::vector<Ink> data = shared.corpus;
    if (setup.training != "plain") {
      AugmentStrategy strategy = AugmentStrategy::style;
      if (setup.training == "aug_random") strategy = AugmentStrategy::random;
      if (setup.training == "aug_repetition")
        strategy = AugmentStrategy::repetition;
      std::optional<EncoderScorer> scorer;
      if (strategy == AugmentStrategy::style)
        scorer.emplace(style_g, style_arch, "style.", cfg.repr, style_stats,
                       shared.corpus);
      const auto samples = build_augmented_dataset(
          shared.corpus, cfg.augment,
          scorer.has_value() ? &scorer.value() : nullptr, strategy, seed);
      for (const auto& s : samples) data.push_back(s.ink);
    }
    datasets.emplace(setup.training, std::move(data));
  }

  std::map<std::string, Checkpoint> checkpoints;
  for (const auto& [key, data] : datasets) {
    GeneratorTrainConfig train_cfg = cfg.gen_train;
    train_cfg.seed = seed;
    checkpoints.emplace(key, train_generator(data, train_cfg, nullptr));
    note("trained " + key + " (" + std::to_string(data.size()) + " inks)");
  }

  SeedOutcome outcome;
  for (Arm arm : cfg.arms) {
    const ArmSetup setup = arm_setup(arm, cfg);
    Checkpoint& ckpt = checkpoints.at(setup.training);
    const GeneratorConfig arch = generator_config_from_meta(ckpt.meta);
    const NormStats stats = norm_stats_from_meta(ckpt.meta);

    std::vector<double> piece_sims;
    for (const auto& [bucket, labels] : shared.labels) {
      double total = 0.0;
      for (std::size_t i = 0; i < labels.size(); ++i) {
        std::mt19937_64 pick_rng = rng_stream(cfg.eval_seed, 91, i);
        const Ink& style_ink =
            shared.style_pool[pick_rng() % shared.style_pool.size()];
        SynthesisTrace trace;
        const Ink out = synthesize_long(
            labels[i], style_ink, ckpt.params, arch, stats, setup.split,
            cfg.sampling, mix64(seed ^ mix64(1000 + i)), &trace);
        total += cer(recognize(out, builtin_glyphs()), labels[i]);
        if (setup.uses_split && bucket == "long" && trace.pieces.size() > 1) {
          std::vector<Eigen::VectorXd> embs;
          for (const auto& piece : trace.pieces) {
            if (piece.empty()) continue;
            embs.push_back(
                encode_style(style_g, style_arch, "style.",
                             ink_to_frames(piece, cfg.repr), style_stats)
                    .h);
          }
          if (embs.size() > 1) piece_sims.push_back(mean_pairwise_cosine(embs));
        }
      }
      CerRow row;
      row.arm = arm_name(arm);
      row.seed = seed;
      row.bucket = bucket;
      row.cer = total / static_cast<double>(labels.size());
      outcome.rows.push_back(row);
    }
    if (!piece_sims.empty()) {
      double s = 0.0;
      for (double v : piece_sims) s += v;
      outcome.piece_similarity[arm_name(arm)] =
          s / static_cast<double>(piece_sims.size());
    }
    note(std::string("evaluated ") + arm_name(arm));
  }
  return outcome;
}

}  // namespace

EvalReport run_experiment(const ExperimentConfig& cfg,
                          std::ostream* progress) {
  const auto t0 = std::chrono::steady_clock::now();
  SharedInputs shared;
  const auto styles = default_styles(cfg.n_styles, cfg.corpus_seed);
  const auto lexicon = default_lexicon();
  shared.corpus =
      make_synthetic_corpus(cfg.corpus_inks, styles, lexicon, cfg.corpus_seed);
  shared.style_pool = make_synthetic_corpus(cfg.style_pool_inks, styles,
                                            lexicon, cfg.corpus_seed + 1);
  shared.labels["short"] = make_phrases(lexicon, 1, 3, cfg.labels_per_bucket,
                                        cfg.eval_seed);
  shared.labels["medium"] = make_phrases(lexicon, 4, 7, cfg.labels_per_bucket,
                                         cfg.eval_seed);
  shared.labels["long"] =
      make_phrases(lexicon, cfg.long_words_lo, cfg.long_words_hi,
                   cfg.labels_per_bucket, cfg.eval_seed);

  std::mutex io_mutex;
  auto note_for = [&](std::uint64_t seed) {
    return [&io_mutex, progress, seed](const std::string& what) {
      if (progress == nullptr) return;
      std::lock_guard<std::mutex> lock(io_mutex);
      *progress << "[seed " << seed << "] " << what << std::endl;
    };
  };

  std::vector<SeedOutcome> outcomes(cfg.seeds.size());
  const int jobs =
      std::max(1, std::min<int>(cfg.jobs, static_cast<int>(cfg.seeds.size())));
  if (jobs <= 1) {
    for (std::size_t i = 0; i < cfg.seeds.size(); ++i)
      outcomes[i] = run_seed(cfg, shared, cfg.seeds[i], note_for(cfg.seeds[i]));
  } else {
    std::vector<std::thread> workers;
    std::size_t next = 0;
    std::mutex queue_mutex;
    for (int w = 0; w < jobs; ++w)
      workers.emplace_back([&] {
        while (true) {
          std::size_t i;
          {
            std::lock_guard<std::mutex> lock(queue_mutex);
            if (next >= cfg.seeds.size()) return;
            i = next++;
          }
          outcomes[i] =
              run_seed(cfg, shared, cfg.seeds[i], note_for(cfg.seeds[i]));
        }
      });
    for (auto& w : workers) w.join();
  }

  EvalReport report;
  for (std::size_t i = 0; i < outcomes.size(); ++i) {
    for (const auto& row : outcomes[i].rows) report.rows.push_back(row);
    for (const auto& [arm, sim] : outcomes[i].piece_similarity)
      report.piece_similarity[arm][cfg.seeds[i]] = sim;
  }

  // Per-seed bucket averages, then mean/std cells over seeds.
  std::map<std::string, std::map<std::uint64_t, std::map<std::string, double>>>
      by_arm;
  for (const auto& row : report.rows)
    by_arm[row.arm][row.seed][row.bucket] = row.cer;
  for (auto& [arm, by_seed] : by_arm) {
    for (auto& [seed, buckets] : by_seed) {
      double avg = 0.0;
      for (const auto& [bucket, value] : buckets) avg += value;
      avg /= static_cast<double>(buckets.size());
      buckets["avg"] = avg;
      CerRow row;
      row.arm = arm;
      row.seed = seed;
      row.bucket = "avg";
      row.cer = avg;
      report.rows.push_back(row);
    }
    for (const std::string bucket : {"short", "medium", "long", "avg"}) {
      CellStat stat;
      double sum = 0.0, sum_sq = 0.0;
      for (const auto& [seed, buckets] : by_seed) {
        const double v = buckets.at(bucket);
        sum += v;
        sum_sq += v * v;
        ++stat.n;
      }
      stat.mean = sum / stat.n;
      const double var =
          stat.n > 1 ? (sum_sq - sum * sum / stat.n) / (stat.n - 1) : 0.0;
      stat.stddev = std::sqrt(std::max(0.0, var));
      report.cells[arm][bucket] = stat;
    }
  }

  std::sort(report.rows.begin(), report.rows.end(),
            [](const CerRow& a, const CerRow& b) {
              return std::tie(a.arm, a.seed, a.bucket) <
                     std::tie(b.arm, b.seed, b.bucket);
            });
  report.runtime_seconds = std::chrono::duration<double>(
                               std::chrono::steady_clock::now() - t0)
                               .count();
  return report;
}

void write_report_csv(const EvalReport& report, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out)
    throw Error(ErrorKind::missing_artifact, "cannot write report: " + path);
  out << "arm,seed,bucket,cer\n";
  for (const auto& row : report.rows)
    out << row.arm << ',' << row.seed << ',' << row.bucket << ',' << row.cer
        << '\n';
}

nlohmann::json report_summary_json(const EvalReport& report) {
  nlohmann::json summary;
  for (const auto& [arm, buckets] : report.cells)
    for (const auto& [bucket, stat] : buckets)
      summary["cer"][arm][bucket] = {
          {"mean", stat.mean}, {"std", stat.stddev}, {"n", stat.n}};
  for (const auto& [arm, by_seed] : report.piece_similarity)
    for (const auto& [seed, sim] : by_seed)
      summary["piece_similarity"][arm][std::to_string(seed)] = sim;
  summary["runtime_seconds"] = report.runtime_seconds;
  return summary;
}

double cell_mean(const EvalReport& report, const std::string& arm,
                 const std::string& bucket) {
  return report.cells.at(arm).at(bucket).mean;
}

std::vector<double> seed_values(const EvalReport& report,
                                const std::string& arm,
                                const std::string& bucket) {
  std::vector<double> values;
  for (const auto& row : report.rows)
    if (row.arm == arm && row.bucket == bucket) values.push_back(row.cer);
  return values;
}

}  // namespace longink
