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

#include "longink/augmentation.hpp"

#include <cmath>
#include <fstream>

#include "longink/random.hpp"

namespace longink {

EncoderScorer::EncoderScorer(ParamStore& params, const StyleConfig& cfg,
                             std::string prefix, ReprKind repr,
                             NormStats stats, const std::vector<Ink>& corpus)
    : params_(params),
      cfg_(cfg),
      prefix_(std::move(prefix)),
      repr_(repr),
      stats_(std::move(stats)) {
  cache_.reserve(corpus.size());
  for (const auto& ink : corpus) cache_.push_back(embed(ink));
}

Eigen::VectorXd EncoderScorer::embed(const Ink& ink) const {
  const FrameSeq frames = ink_to_frames(ink, repr_);
  return encode_style(params_, cfg_, prefix_, frames, stats_).h;
}

const Eigen::VectorXd& EncoderScorer::corpus_item(std::size_t index) const {
  return cache_.at(index);
}

std::size_t EncoderScorer::corpus_size() const { return cache_.size(); }

namespace {

double mean_char_width(const Ink& ink) {
  const BoundingBox box = bounds(ink);
  const std::size_t chars = std::max<std::size_t>(1, ink.label.size());
  return box.width() / static_cast<double>(chars);
}

double cosine(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  const double na = a.norm();
  const double nb = b.norm();
  if (na == 0.0 || nb == 0.0)
    throw Error(ErrorKind::degenerate_embedding, "zero-norm embedding");
  return a.dot(b) / (na * nb);
}

}  // namespace

Ink concat_inks(const Ink& a, const Ink& b, double space_width) {
  if (a.empty() || b.empty())
    throw Error(ErrorKind::empty_ink, "concat_inks: empty operand");
  if (a.label.empty() || b.label.empty())
    throw Error(ErrorKind::empty_label, "concat_inks: unlabeled operand");

  const double height_a = percentile_height(a);
  const double height_b = percentile_height(b);
  const double scale = height_b > 1e-12 ? height_a / height_b : 1.0;
  Ink scaled = apply_similarity_transform(b, 0.0, 0.0,
                                          scale > 1e-12 ? scale : 1.0);
  const double dy = baseline_median(a) - baseline_median(scaled);
  const double gap = space_width * mean_char_width(a);
  const double dx = bounds(a).max_x + gap - bounds(scaled).min_x;
  const Ink placed = apply_similarity_transform(scaled, dx, dy, 1.0);

  Ink out;
  out.strokes = a.strokes;
  out.strokes.insert(out.strokes.end(), placed.strokes.begin(),
                     placed.strokes.end());
  out.label = a.label + " " + b.label;
  out.writer_id = a.writer_id == b.writer_id ? a.writer_id : std::string();
  return resequence_timestamps(out, 0.0, kFrameDt);
}

const char* strategy_name(AugmentStrategy s) {
  switch (s) {
    case AugmentStrategy::style: return "style";
    case AugmentStrategy::random: return "random";
    case AugmentStrategy::repetition: return "repetition";
  }
  return "?";
}

AugmentedSample generate_long_sample(const std::vector<Ink>& corpus,
                                     const AugmentationConfig& cfg,
                                     const StyleScorer* scorer,
                                     AugmentStrategy strategy,
                                     std::mt19937_64& rng) {
  if (corpus.empty())
    throw Error(ErrorKind::too_short, "generate_long_sample: empty corpus");
  if (strategy == AugmentStrategy::style && scorer == nullptr)
    throw Error(ErrorKind::missing_artifact,
                "style strategy needs a style model");
  std::uniform_int_distribution<std::size_t> pick(0, corpus.size() - 1);
  AugmentedSample sample;
  sample.seed_index = static_cast<int>(pick(rng));
  sample.ink = corpus[static_cast<std::size_t>(sample.seed_index)];

  while (static_cast<double>(sample.ink.label.size()) < cfg.target_len) {
    JoinRecord record;
    std::size_t chosen = 0;
    if (strategy == AugmentStrategy::repetition) {
      chosen = static_cast<std::size_t>(sample.seed_index);
    } else if (strategy == AugmentStrategy::random) {
      chosen = pick(rng);
    } else {
      const Eigen::VectorXd current = scorer->embed(sample.ink);
      std::vector<std::size_t> batch;
      batch.reserve(static_cast<std::size_t>(cfg.batch_size));
      for (int i = 0; i < cfg.batch_size; ++i) batch.push_back(pick(rng));
      std::vector<double> sims;
      sims.reserve(batch.size());
      std::size_t argmax = 0;
      for (std::size_t i = 0; i < batch.size(); ++i) {
        sims.push_back(cosine(current, scorer->corpus_item(batch[i])));
        if (sims[i] > sims[argmax]) argmax = i;
      }
      std::vector<std::size_t> candidates;
      for (std::size_t i = 0; i < batch.size(); ++i)
        if (sims[i] >= cfg.threshold || i == argmax) candidates.push_back(i);
      std::uniform_int_distribution<std::size_t> pick_cand(
          0, candidates.size() - 1);
      const std::size_t sel = candidates[pick_cand(rng)];
      chosen = batch[sel];
      record.similarity = sims[sel];
      record.scored = true;
      record.argmax_fallback = sims[sel] < cfg.threshold;
    }
    record.component_index = static_cast<int>(chosen);
    sample.ink = concat_inks(sample.ink, corpus[chosen], cfg.space_width);
    sample.joins.push_back(record);
  }
  return sample;
}

std::vector<AugmentedSample> build_augmented_dataset(
    const std::vector<Ink>& corpus, const AugmentationConfig& cfg,
    const StyleScorer* scorer, AugmentStrategy strategy, std::uint64_t seed) {
  std::vector<AugmentedSample> samples;
  samples.reserve(static_cast<std::size_t>(cfg.n_samples));
  for (int i = 0; i < cfg.n_samples; ++i) {
    std::mt19937_64 rng = rng_stream(seed, 51, static_cast<std::uint64_t>(i));
    samples.push_back(
        generate_long_sample(corpus, cfg, scorer, strategy, rng));
  }
  return samples;
}

void write_audit_csv(const std::string& path,
                     const std::vector<AugmentedSample>& samples) {
  std::ofstream out(path, std::ios::binary);
  if (!out)
    throw Error(ErrorKind::missing_artifact, "cannot write audit: " + path);
  out << "sample_id,step,component_index,similarity,argmax_fallback\n";
  for (std::size_t s = 0; s < samples.size(); ++s) {
    out << s << ",0," << samples[s].seed_index << ",,\n";
    for (std::size_t j = 0; j < samples[s].joins.size(); ++j) {
      const JoinRecord& r = samples[s].joins[j];
      out << s << ',' << (j + 1) << ',' << r.component_index << ',';
      if (r.scored) out << r.similarity;
      out << ',' << (r.scored ? (r.argmax_fallback ? "1" : "0") : "") << '\n';
    }
  }
}

}  // namespace longink
