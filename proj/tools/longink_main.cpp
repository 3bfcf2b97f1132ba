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

#include <CLI11.hpp>
#include <chrono>
#include <fstream>
#include <iostream>

#include "longink/experiment.hpp"
#include "longink/ink_io.hpp"
#include "longink/random.hpp"

#ifndef LONGINK_VERSION
#define LONGINK_VERSION "unknown"
#endif

namespace {

using namespace longink;
using nlohmann::json;

// ---------------------------------------------------------------------
// Manifest + config handling

/// Values from a JSON config file become defaults; explicit flags win.
std::vector<std::string> merge_config_args(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  std::string config_path;
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (args[i] == "--config" && i + 1 < args.size())
      config_path = args[i + 1];
    else if (args[i].rfind("--config=", 0) == 0)
      config_path = args[i].substr(9);
  }
  if (config_path.empty()) return args;
  std::ifstream in(config_path);
  if (!in)
    throw Error(ErrorKind::missing_artifact,
                "config file not found: " + config_path);
  json config;
  in >> config;
  for (const auto& [key, value] : config.items()) {
    const std::string flag = "--" + key;
    bool present = false;
    for (const auto& arg : args)
      if (arg == flag || arg.rfind(flag + "=", 0) == 0) {
        present = true;
        break;
      }
    if (present) continue;
    if (value.is_boolean()) {
      if (value.get<bool>()) args.push_back(flag);
    } else if (value.is_string()) {
      args.push_back(flag + "=" + value.get<std::string>());
    } else {
      args.push_back(flag + "=" + value.dump());
    }
  }
  return args;
}

void write_manifest(const std::string& path, const std::string& command,
                    const CLI::App* app, std::uint64_t seed) {
  json manifest;
  manifest["command"] = command;
  manifest["version"] = LONGINK_VERSION;
  manifest["seed"] = seed;
  json config;
  for (const CLI::Option* opt : app->get_options()) {
    const std::string name = opt->get_name();
    if (name.empty() || name == "--help" || name == "--config") continue;
    if (opt->count() > 0 || !opt->get_default_str().empty())
      config[name] = opt->count() > 0 ? opt->results().front()
                                      : opt->get_default_str();
  }
  manifest["config"] = std::move(config);
  manifest["wall_clock"] = static_cast<long>(
      std::chrono::duration_cast<std::chrono::seconds>(
          std::chrono::system_clock::now().time_since_epoch())
          .count());
  std::ofstream out(path, std::ios::binary);
  if (!out)
    throw Error(ErrorKind::missing_artifact, "cannot write manifest: " + path);
  out << manifest.dump(2) << '\n';
}

// ---------------------------------------------------------------------
// Style checkpoint helpers (generator checkpoints have their own
// helpers in the library)

Checkpoint make_style_checkpoint(ParamStore params,
                                 const StyleTrainConfig& cfg,
                                 const NormStats& stats) {
  Checkpoint ckpt;
  ckpt.params = std::move(params);
  ckpt.meta["model_kind"] = "style";
  ckpt.meta["repr"] = cfg.repr == ReprKind::raw ? "raw" : "curve";
  ckpt.meta["normalization"] = {
      {"mean", std::vector<double>(stats.mean.data(),
                                   stats.mean.data() + stats.mean.size())},
      {"std", std::vector<double>(stats.stddev.data(),
                                  stats.stddev.data() + stats.stddev.size())}};
  ckpt.meta["arch"] = {{"bi", cfg.arch.bi_hidden},
                       {"uni", cfg.arch.uni_hidden},
                       {"d1", cfg.arch.dense1},
                       {"d2", cfg.arch.dense2},
                       {"out", cfg.arch.out_dim}};
  return ckpt;
}

StyleConfig style_config_from_meta(const json& meta, ReprKind repr) {
  StyleConfig cfg;
  cfg.input_dim = cont_dim(repr) + 1;
  cfg.bi_hidden = meta.at("arch").at("bi").get<int>();
  cfg.uni_hidden = meta.at("arch").at("uni").get<int>();
  cfg.dense1 = meta.at("arch").at("d1").get<int>();
  cfg.dense2 = meta.at("arch").at("d2").get<int>();
  cfg.out_dim = meta.at("arch").at("out").get<int>();
  return cfg;
}

ReprKind repr_from_string(const std::string& name) {
  if (name == "raw") return ReprKind::raw;
  if (name == "curve") return ReprKind::curve;
  throw CLI::ValidationError("--repr", "must be raw or curve");
}

SplitConfig::Mode mode_from_string(const std::string& name) {
  if (name == "style") return SplitConfig::Mode::style_conditioned;
  if (name == "primed") return SplitConfig::Mode::primed;
  if (name == "none") return SplitConfig::Mode::no_style;
  throw CLI::ValidationError("--mode", "must be style, primed or none");
}

Arm arm_from_string(const std::string& name) {
  for (Arm arm : {Arm::full, Arm::base, Arm::no_aug, Arm::no_split,
                  Arm::no_style, Arm::aug_random, Arm::aug_repetition,
                  Arm::primed})
    if (name == arm_name(arm)) return arm;
  throw CLI::ValidationError("--arms", "unknown arm: " + name);
}

// ---------------------------------------------------------------------

int run(int argc, char** argv) {
  CLI::App app{"Long-form digital ink synthesis toolkit"};
  app.require_subcommand(1);
  std::string config_path;
  app.add_option("--config", config_path, "JSON config file; flags win");

  // Shared knobs
  std::uint64_t seed = 1;
  std::string repr_name = "raw";

  // ---- gen-corpus
  auto* gen_corpus = app.add_subcommand("gen-corpus",
                                        "Render a synthetic ink corpus");
  int n_inks = 600, n_styles = 10;
  std::string corpus_out = "corpus.jsonl";
  gen_corpus->add_option("--n-inks", n_inks, "number of inks");
  gen_corpus->add_option("--n-styles", n_styles, "number of base styles");
  gen_corpus->add_option("--seed", seed, "rng seed");
  gen_corpus->add_option("--out", corpus_out, "output JSONL path");

  // ---- train-style
  auto* train_style_cmd =
      app.add_subcommand("train-style", "Train the contrastive style model");
  std::string corpus_path = "corpus.jsonl";
  std::string style_out = "style";
  StyleTrainConfig style_cfg;
  style_cfg.arch.bi_hidden = 32;
  style_cfg.arch.uni_hidden = 32;
  style_cfg.arch.dense1 = 32;
  style_cfg.arch.dense2 = 32;
  train_style_cmd->add_option("--corpus", corpus_path, "corpus JSONL");
  train_style_cmd->add_option("--out", style_out, "checkpoint prefix");
  train_style_cmd->add_option("--steps", style_cfg.steps, "training steps");
  train_style_cmd->add_option("--batch", style_cfg.batch_inks, "inks/batch");
  train_style_cmd->add_option("--tau", style_cfg.tau, "temperature");
  train_style_cmd->add_option("--lr", style_cfg.lr, "learning rate");
  train_style_cmd->add_option("--seed", seed, "rng seed");
  train_style_cmd->add_option("--repr", repr_name, "raw or curve");

  // ---- augment
  auto* augment_cmd =
      app.add_subcommand("augment", "Build long samples by concatenation");
  std::string style_ckpt = "style";
  std::string aug_out = "augmented.jsonl";
  std::string audit_out;
  std::string strategy_name_arg = "style";
  AugmentationConfig aug_cfg;
  aug_cfg.n_samples = 150;
  augment_cmd->add_option("--corpus", corpus_path, "corpus JSONL");
  augment_cmd->add_option("--style-ckpt", style_ckpt, "style model prefix");
  augment_cmd->add_option("--strategy", strategy_name_arg,
                          "style, random or repetition");
  augment_cmd->add_option("--target-len", aug_cfg.target_len,
                          "label characters per sample");
  augment_cmd->add_option("--batch-size", aug_cfg.batch_size,
                          "candidates scored per join");
  augment_cmd->add_option("--threshold", aug_cfg.threshold,
                          "style similarity threshold");
  augment_cmd->add_option("--space-width", aug_cfg.space_width,
                          "gap in mean char widths");
  augment_cmd->add_option("--n-samples", aug_cfg.n_samples, "sample count");
  augment_cmd->add_option("--seed", seed, "rng seed");
  augment_cmd->add_option("--repr", repr_name, "raw or curve");
  augment_cmd->add_option("--out", aug_out, "output JSONL");
  augment_cmd->add_option("--audit", audit_out, "audit CSV path");

  // ---- train
  auto* train_cmd =
      app.add_subcommand("train", "Train the style-conditioned generator");
  std::string aug_path;
  std::string gen_out = "generator";
  std::string preset = "desk";
  GeneratorTrainConfig gen_cfg;
  gen_cfg.steps = 1200;
  gen_cfg.lr = 3e-3;
  train_cmd->add_option("--corpus", corpus_path, "corpus JSONL");
  train_cmd->add_option("--aug", aug_path, "augmented JSONL (optional)");
  train_cmd->add_option("--out", gen_out, "checkpoint prefix");
  train_cmd->add_option("--preset", preset, "desk or paper sizes");
  train_cmd->add_option("--steps", gen_cfg.steps, "training steps");
  train_cmd->add_option("--batch", gen_cfg.batch, "batch size");
  train_cmd->add_option("--lr", gen_cfg.lr, "learning rate");
  train_cmd->add_option("--tau", gen_cfg.tau, "contrastive temperature");
  train_cmd->add_option("--seed", seed, "rng seed");
  train_cmd->add_option("--repr", repr_name, "raw or curve");

  // ---- synth
  auto* synth_cmd = app.add_subcommand("synth", "Synthesize ink for a text");
  std::string gen_ckpt = "generator";
  std::string style_ink_path;
  int style_index = 0;
  std::string text;
  std::string mode_name = "style";
  SplitConfig split_cfg;
  double bias = 2.0;
  std::string synth_out = "synth.jsonl";
  std::string svg_out;
  synth_cmd->add_option("--ckpt", gen_ckpt, "generator prefix");
  synth_cmd->add_option("--style-ink", style_ink_path,
                        "JSONL with style sources")
      ->required();
  synth_cmd->add_option("--style-index", style_index, "ink index");
  synth_cmd->add_option("--text", text, "text to write")->required();
  synth_cmd->add_option("--n-words", split_cfg.n_words, "words per piece");
  synth_cmd->add_option("--candidates", split_cfg.n_candidates,
                        "candidates per piece");
  synth_cmd->add_option("--mode", mode_name, "style, primed or none");
  synth_cmd->add_option("--bias", bias, "sampling bias (inf = greedy)");
  synth_cmd->add_option("--seed", seed, "rng seed");
  synth_cmd->add_option("--out", synth_out, "output JSONL");
  synth_cmd->add_option("--svg", svg_out, "optional SVG path");

  // ---- eval
  auto* eval_cmd =
      app.add_subcommand("eval", "Evaluate one checkpoint's CER per bucket");
  std::string style_pool_path;
  std::string report_prefix = "eval";
  std::string eval_arm_label = "model";
  int labels_per_bucket = 10;
  int long_lo = 20, long_hi = 26;
  std::uint64_t eval_seed = 500;
  eval_cmd->add_option("--ckpt", gen_ckpt, "generator prefix");
  eval_cmd->add_option("--style-pool", style_pool_path,
                       "JSONL of style sources")
      ->required();
  eval_cmd->add_option("--labels-per-bucket", labels_per_bucket, "count");
  eval_cmd->add_option("--long-words-lo", long_lo, "long bucket min words");
  eval_cmd->add_option("--long-words-hi", long_hi, "long bucket max words");
  eval_cmd->add_option("--eval-seed", eval_seed, "label rng seed");
  eval_cmd->add_option("--n-words", split_cfg.n_words, "words per piece");
  eval_cmd->add_option("--candidates", split_cfg.n_candidates, "candidates");
  eval_cmd->add_option("--mode", mode_name, "style, primed or none");
  eval_cmd->add_option("--bias", bias, "sampling bias");
  eval_cmd->add_option("--arm-label", eval_arm_label, "name in the CSV");
  eval_cmd->add_option("--seed", seed, "rng seed");
  eval_cmd->add_option("--report", report_prefix, "report prefix");

  // ---- ablate
  auto* ablate_cmd = app.add_subcommand(
      "ablate", "Train and evaluate the ablation arms end to end");
  std::string arms_csv = "full,base";
  std::string seeds_csv = "1,2,3";
  std::string out_dir = "ablation";
  int jobs = 1;
  int corpus_inks_opt = 600;
  int gen_steps_opt = 1200;
  int labels_opt = 10;
  ablate_cmd->add_option("--arms", arms_csv, "comma-separated arm list");
  ablate_cmd->add_option("--seeds", seeds_csv, "comma-separated seeds");
  ablate_cmd->add_option("--out-dir", out_dir, "output directory");
  ablate_cmd->add_option("--jobs", jobs, "parallel seed workers");
  ablate_cmd->add_option("--corpus-inks", corpus_inks_opt, "corpus size");
  ablate_cmd->add_option("--steps", gen_steps_opt, "generator steps");
  ablate_cmd->add_option("--labels-per-bucket", labels_opt, "eval labels");
  ablate_cmd->add_option("--repr", repr_name, "raw or curve");

  // ---- render
  auto* render_cmd = app.add_subcommand("render", "Render ink JSONL to SVG");
  std::string render_in, render_out = "ink.svg";
  int render_index = 0;
  render_cmd->add_option("--in", render_in, "input JSONL")->required();
  render_cmd->add_option("--index", render_index, "ink index");
  render_cmd->add_option("--out", render_out, "SVG path");

  std::vector<std::string> args = merge_config_args(argc, argv);
  std::reverse(args.begin(), args.end());
  app.parse(args);

  const ReprKind repr = repr_from_string(repr_name);

  if (*gen_corpus) {
    const auto styles = default_styles(n_styles, seed);
    const auto corpus =
        make_synthetic_corpus(n_inks, styles, default_lexicon(), seed);
    write_jsonl(corpus_out, corpus);
    write_manifest(corpus_out + ".manifest.json", "gen-corpus", gen_corpus,
                   seed);
    std::cout << "wrote " << corpus.size() << " inks to " << corpus_out
              << "\n";
  } else if (*train_style_cmd) {
    const auto corpus = read_jsonl(corpus_path);
    style_cfg.repr = repr;
    style_cfg.arch.input_dim = cont_dim(repr) + 1;
    style_cfg.seed = seed;
    ParamStore params;
    NormStats stats;
    const StyleTrainLog log = train_style(corpus, style_cfg, params, &stats);
    save_checkpoint(make_style_checkpoint(std::move(params), style_cfg, stats),
                    style_out);
    write_manifest(style_out + ".manifest.json", "train-style",
                   train_style_cmd, seed);
    std::cout << "trained style model, final loss "
              << (log.loss.empty() ? 0.0 : log.loss.back()) << "\n";
  } else if (*augment_cmd) {
    const auto corpus = read_jsonl(corpus_path);
    AugmentStrategy strategy = AugmentStrategy::style;
    if (strategy_name_arg == "random") strategy = AugmentStrategy::random;
    else if (strategy_name_arg == "repetition")
      strategy = AugmentStrategy::repetition;
    else if (strategy_name_arg != "style")
      throw CLI::ValidationError("--strategy", "unknown strategy");
    std::optional<Checkpoint> style_model;
    std::optional<EncoderScorer> scorer;
    if (strategy == AugmentStrategy::style) {
      style_model = load_checkpoint(style_ckpt);
      const StyleConfig arch =
          style_config_from_meta(style_model->meta, repr);
      scorer.emplace(style_model->params, arch, "style.", repr,
                     norm_stats_from_meta(style_model->meta), corpus);
    }
    const auto samples = build_augmented_dataset(
        corpus, aug_cfg, scorer.has_value() ? &scorer.value() : nullptr,
        strategy, seed);
    std::vector<Ink> inks;
    inks.reserve(samples.size());
    for (const auto& s : samples) inks.push_back(s.ink);
    write_jsonl(aug_out, inks);
    if (!audit_out.empty()) write_audit_csv(audit_out, samples);
    write_manifest(aug_out + ".manifest.json", "augment", augment_cmd, seed);
    std::cout << "wrote " << inks.size() << " long samples to " << aug_out
              << "\n";
  } else if (*train_cmd) {
    auto dataset = read_jsonl(corpus_path);
    if (!aug_path.empty()) {
      const auto aug = read_jsonl(aug_path);
      dataset.insert(dataset.end(), aug.begin(), aug.end());
    }
    gen_cfg.arch = preset == "paper" ? paper_generator_config(repr)
                                     : desk_generator_config(repr);
    gen_cfg.seed = seed;
    GeneratorTrainLog log;
    const Checkpoint ckpt = train_generator(dataset, gen_cfg, &log);
    save_checkpoint(ckpt, gen_out);
    write_manifest(gen_out + ".manifest.json", "train", train_cmd, seed);
    std::cout << "trained generator on " << dataset.size()
              << " inks; best val step " << log.best_step << "\n";
  } else if (*synth_cmd) {
    Checkpoint ckpt = load_checkpoint(gen_ckpt);
    const GeneratorConfig arch = generator_config_from_meta(ckpt.meta);
    const NormStats stats = norm_stats_from_meta(ckpt.meta);
    const auto pool = read_jsonl(style_ink_path);
    if (pool.empty() ||
        style_index >= static_cast<int>(pool.size()) || style_index < 0)
      throw Error(ErrorKind::missing_artifact, "style ink index out of range");
    split_cfg.mode = mode_from_string(mode_name);
    SamplingConfig sampling;
    sampling.bias = bias;
    sampling.max_frames_per_char = arch.repr == ReprKind::raw ? 16 : 8;
    const Ink out = synthesize_long(text, pool[static_cast<std::size_t>(
                                              style_index)],
                                    ckpt.params, arch, stats, split_cfg,
                                    sampling, seed);
    write_jsonl(synth_out, {out});
    if (!svg_out.empty()) write_svg(svg_out, out);
    write_manifest(synth_out + ".manifest.json", "synth", synth_cmd, seed);
    std::cout << "synthesized \"" << out.label << "\" ("
              << point_count(out) << " points)\n";
  } else if (*eval_cmd) {
    Checkpoint ckpt = load_checkpoint(gen_ckpt);
    const GeneratorConfig arch = generator_config_from_meta(ckpt.meta);
    const NormStats stats = norm_stats_from_meta(ckpt.meta);
    const auto pool = read_jsonl(style_pool_path);
    if (pool.empty())
      throw Error(ErrorKind::missing_artifact, "empty style pool");
    split_cfg.mode = mode_from_string(mode_name);
    SamplingConfig sampling;
    sampling.bias = bias;
    sampling.max_frames_per_char = arch.repr == ReprKind::raw ? 16 : 8;
    const auto lexicon = default_lexicon();
    std::map<std::string, std::vector<std::string>> buckets;
    buckets["short"] = make_phrases(lexicon, 1, 3, labels_per_bucket,
                                    eval_seed);
    buckets["medium"] = make_phrases(lexicon, 4, 7, labels_per_bucket,
                                     eval_seed);
    buckets["long"] = make_phrases(lexicon, long_lo, long_hi,
                                   labels_per_bucket, eval_seed);
    std::ofstream csv(report_prefix + ".csv", std::ios::binary);
    csv << "arm,seed,bucket,cer\n";
    json summary;
    for (const auto& [bucket, labels] : buckets) {
      double total = 0.0;
      for (std::size_t i = 0; i < labels.size(); ++i) {
        std::mt19937_64 pick_rng = rng_stream(eval_seed, 91, i);
        const Ink& style_ink = pool[pick_rng() % pool.size()];
        const Ink out = synthesize_long(labels[i], style_ink, ckpt.params,
                                        arch, stats, split_cfg, sampling,
                                        mix64(seed ^ mix64(1000 + i)));
        total += cer(recognize(out, builtin_glyphs()), labels[i]);
      }
      const double mean = total / static_cast<double>(labels.size());
      csv << eval_arm_label << ',' << seed << ',' << bucket << ',' << mean
          << '\n';
      summary[bucket] = mean;
    }
    std::ofstream js(report_prefix + ".json", std::ios::binary);
    js << summary.dump(2) << '\n';
    write_manifest(report_prefix + ".manifest.json", "eval", eval_cmd, seed);
    std::cout << "wrote " << report_prefix << ".csv\n";
  } else if (*ablate_cmd) {
    ExperimentConfig cfg = desk_experiment_config(repr);
    cfg.corpus_inks = corpus_inks_opt;
    cfg.gen_train.steps = gen_steps_opt;
    cfg.labels_per_bucket = labels_opt;
    cfg.jobs = jobs;
    cfg.arms.clear();
    for (const auto& name : CLI::detail::split(arms_csv, ','))
      cfg.arms.push_back(arm_from_string(name));
    cfg.seeds.clear();
    for (const auto& s : CLI::detail::split(seeds_csv, ','))
      cfg.seeds.push_back(std::stoull(s));
    std::filesystem::create_directories(out_dir);
    const EvalReport report = run_experiment(cfg, &std::cerr);
    write_report_csv(report, out_dir + "/report.csv");
    std::ofstream js(out_dir + "/summary.json", std::ios::binary);
    js << report_summary_json(report).dump(2) << '\n';
    write_manifest(out_dir + "/manifest.json", "ablate", ablate_cmd,
                   cfg.seeds.empty() ? 0 : cfg.seeds.front());
    std::cout << "wrote " << out_dir << "/report.csv ("
              << report.runtime_seconds << " s)\n";
  } else if (*render_cmd) {
    const auto inks = read_jsonl(render_in);
    if (render_index < 0 || render_index >= static_cast<int>(inks.size()))
      throw Error(ErrorKind::missing_artifact, "ink index out of range");
    write_svg(render_out, inks[static_cast<std::size_t>(render_index)]);
    std::cout << "wrote " << render_out << "\n";
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const CLI::ParseError& e) {
    CLI::App dummy;
    const int code = dummy.exit(e);
    return code == 0 ? 0 : 2;
  } catch (const longink::Error& e) {
    std::cerr << longink::error_kind_name(e.kind()) << ": " << e.what()
              << "\n";
    switch (e.kind()) {
      case longink::ErrorKind::missing_artifact: return 3;
      case longink::ErrorKind::numeric: return 4;
      default: return 2;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
