#pragma once

// Command-line front end. Exit codes: 0 ok, 1 usage or validation error,
// 2 training divergence, 3 verification failure.

#include <algorithm>
#include <cstdint>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <memory>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "srnn/data/corpus.hpp"
#include "srnn/data/generators.hpp"
#include "srnn/data/metrics.hpp"
#include "srnn/errors.hpp"
#include "srnn/model.hpp"
#include "srnn/model_io.hpp"
#include "srnn/training.hpp"
#include "srnn/verify/suites.hpp"

namespace srnn {

enum ExitCode : int { exit_ok = 0, exit_usage = 1, exit_divergence = 2, exit_verification = 3 };

namespace cli_detail {

inline TrainMode parse_mode(const std::string& s) {
  if (s == "full") return TrainMode::full;
  if (s == "partial") return TrainMode::partial;
  if (s == "bio") return TrainMode::bio;
  if (s == "ctc") return TrainMode::ctc;
  throw ValidationError("unknown mode '" + s + "'");
}

// "1-4" for every label, or one "lo-hi" (or single "d") per label separated by commas.
inline std::vector<DurationRange> parse_durations(const std::string& spec, std::size_t labels) {
  std::vector<DurationRange> out;
  std::istringstream in(spec);
  std::string item;
  while (std::getline(in, item, ',')) {
    DurationRange r;
    try {
      const auto dash = item.find('-');
      r.lo = std::stoul(item.substr(0, dash));
      r.hi = dash == std::string::npos ? r.lo : std::stoul(item.substr(dash + 1));
    } catch (const std::exception&) {
      throw ValidationError("bad duration range '" + item + "'");
    }
    if (r.lo == 0 || r.lo > r.hi) throw ValidationError("bad duration range '" + item + "'");
    out.push_back(r);
  }
  if (out.size() == 1) out.assign(labels, out.front());
  if (out.size() != labels) {
    throw ValidationError("--durations needs one range or one per label (" + std::to_string(labels) + ")");
  }
  return out;
}

inline std::vector<std::string> merged_labels(const Corpus& a, const Corpus& b) {
  std::set<std::string> s(a.labels.begin(), a.labels.end());
  s.insert(b.labels.begin(), b.labels.end());
  return {s.begin(), s.end()};
}

inline void check_compatible(const Model& model, const Corpus& corpus) {
  if (corpus.kind != model.config().input) {
    throw ValidationError(std::string("corpus holds ") + to_string(corpus.kind) + " but the model reads " +
                          to_string(model.config().input));
  }
  if (corpus.kind == InputKind::vectors && corpus.feature_dim() != model.config().feature_dim) {
    throw ValidationError("corpus feature dimension " + std::to_string(corpus.feature_dim()) +
                          " differs from the model's " + std::to_string(model.config().feature_dim));
  }
}

inline Corpus decode_corpus(const Model& model, const Corpus& input) {
  Corpus out;
  out.kind = input.kind;
  out.labels = model.config().labels;
  for (const auto& seq : input.instances) {
    Prediction p = predict(model, seq);
    Sequence s;
    s.vectors = seq.vectors;
    s.symbols = seq.symbols;
    s.strokes = seq.strokes;
    s.labels = p.labels;
    if (p.segmentation) s.durations = p.segmentation->durations();
    out.instances.push_back(std::move(s));
  }
  return out;
}

inline void print_metrics(std::ostream& out, const SegMetrics& m) {
  write_metrics_header(out);
  write_metrics_row(out, m);
}

}  // namespace cli_detail

inline int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Segmental recurrent neural network toolkit", "srnn"};
  app.require_subcommand(1);

  // shared settings
  std::string mode = "full", train_path, dev_path, test_path, out_path, model_path, log_path, pred_path,
              pretrained_path, dims_spec;
  std::uint64_t seed = 1;
  std::size_t max_seg_len = 0, epochs = 50, patience = 10, workers = 1;
  double lr = 1e-3, l2 = 1e-6;

  auto* gen = app.add_subcommand("gen-data", "Write a synthetic corpus");
  std::string gen_kind = "segmental", durations = "1-4";
  std::size_t count = 100, labels = 4, feature_dim = 0, alphabet = 6, min_segments = 2, max_segments = 6,
              min_chars = 1, max_chars = 5;
  double sigma = 0.1, jitter = 0.02;
  std::uint64_t prototype_seed = 0;
  gen->add_option("--kind", gen_kind, "segmental or strokes")->check(CLI::IsMember({"segmental", "strokes"}));
  gen->add_option("--count", count, "number of instances");
  gen->add_option("--labels", labels, "label inventory size (segmental)");
  gen->add_option("--durations", durations, "lo-hi for all labels, or one range per label");
  gen->add_option("--sigma", sigma, "emission noise (segmental)");
  gen->add_option("--feature-dim", feature_dim, "token dimension, 0 for one per label");
  gen->add_option("--min-segments", min_segments);
  gen->add_option("--max-segments", max_segments);
  gen->add_option("--alphabet", alphabet, "characters (strokes)");
  gen->add_option("--min-chars", min_chars);
  gen->add_option("--max-chars", max_chars);
  gen->add_option("--jitter", jitter, "point noise (strokes)");
  gen->add_option("--prototype-seed", prototype_seed, "character shapes (strokes)");
  gen->add_option("--seed", seed);
  gen->add_option("--out", out_path, "output corpus")->required();

  auto* tr = app.add_subcommand("train", "Train a model");
  tr->add_option("--mode", mode, "full, partial, bio or ctc")->check(CLI::IsMember({"full", "partial", "bio", "ctc"}));
  tr->add_option("--train", train_path, "training corpus")->required();
  tr->add_option("--dev", dev_path, "development corpus (default: the training corpus)");
  tr->add_option("--out", out_path, "model file")->required();
  tr->add_option("--log", log_path, "metrics log (default: <out>.log)");
  tr->add_option("--seed", seed);
  tr->add_option("--max-seg-len", max_seg_len, "maximum segment length, 0 for automatic");
  tr->add_option("--epochs", epochs);
  tr->add_option("--patience", patience);
  tr->add_option("--lr", lr);
  tr->add_option("--l2", l2);
  tr->add_option("--dims", dims_spec, "e.g. context=24,segment=18");
  tr->add_option("--workers", workers, "instances per update evaluated in parallel");
  tr->add_option("--pretrained", pretrained_path, "pretrained symbol embeddings");

  auto* dec = app.add_subcommand("decode", "Predict segmentations");
  dec->add_option("--model", model_path)->required();
  dec->add_option("--test", test_path, "input corpus")->required();
  dec->add_option("--out", out_path, "predictions (default: standard output)");

  auto* ev = app.add_subcommand("eval", "Score predictions against gold");
  ev->add_option("--test", test_path, "gold corpus")->required();
  auto* pred_opt = ev->add_option("--pred", pred_path, "predicted corpus");
  auto* model_opt = ev->add_option("--model", model_path, "decode with this model instead of reading --pred");
  pred_opt->excludes(model_opt);

  auto* gc = app.add_subcommand("gradcheck", "Compare tape gradients with finite differences");
  std::size_t instances = 1, per_tensor = 2;
  double tolerance = 1e-4;
  bool corrupt = false;
  gc->add_option("--mode", mode)->check(CLI::IsMember({"full", "partial", "bio", "ctc"}));
  gc->add_option("--train", train_path, "take instances from this corpus instead of generating them");
  gc->add_option("--instances", instances);
  gc->add_option("--coords", per_tensor, "coordinates per parameter tensor");
  gc->add_option("--tolerance", tolerance);
  gc->add_option("--seed", seed);
  gc->add_option("--max-seg-len", max_seg_len);
  gc->add_option("--dims", dims_spec);
  gc->add_flag("--corrupt-backward", corrupt, "deliberately break one backward rule");

  auto* orc = app.add_subcommand("oracle", "Check dynamic programs against enumeration");
  verify::OracleConfig oc;
  double oracle_tol = 1e-9;
  orc->add_option("--max-length", oc.max_length);
  orc->add_option("--max-labels", oc.max_labels);
  orc->add_option("--seeds", oc.seeds);
  orc->add_option("--seed", oc.seed);
  orc->add_option("--tolerance", oracle_tol);
  orc->add_option("--dims", dims_spec);

  std::vector<const char*> argv{"srnn"};
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return exit_ok;
  } catch (const CLI::CallForAllHelp& e) {
    out << app.help("", CLI::AppFormatMode::All);
    return exit_ok;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return exit_usage;
  }

  try {
    if (*gen) {
      Corpus c;
      if (gen_kind == "segmental") {
        SegmentalConfig cfg;
        cfg.instances = count;
        cfg.labels = labels;
        cfg.durations = cli_detail::parse_durations(durations, labels);
        cfg.sigma = sigma;
        cfg.feature_dim = feature_dim;
        cfg.min_segments = min_segments;
        cfg.max_segments = max_segments;
        c = gen_synthetic_segmental(cfg, seed);
      } else {
        StrokeConfig cfg;
        cfg.instances = count;
        cfg.alphabet = alphabet;
        cfg.min_chars = min_chars;
        cfg.max_chars = max_chars;
        cfg.jitter = jitter;
        cfg.prototype_seed = prototype_seed;
        c = gen_synthetic_strokes(cfg, seed);
      }
      save_corpus(out_path, c);
      out << "wrote " << c.size() << " instances to " << out_path << '\n';
      return exit_ok;
    }

    if (*tr) {
      TrainConfig tc;
      tc.mode = cli_detail::parse_mode(mode);
      tc.lr = lr;
      tc.l2 = l2;
      tc.epochs = epochs;
      tc.patience = patience;
      tc.seed = seed;
      tc.workers = workers;
      tc.validate();
      // gold durations matter to the loss only under full supervision
      const std::size_t check_len = tc.mode == TrainMode::full ? max_seg_len : 0;
      Corpus train_set = load_corpus(train_path, check_len);
      Corpus dev = dev_path.empty() ? train_set : load_corpus(dev_path);
      if (dev.kind != train_set.kind) throw ValidationError("training and development corpora differ in kind");

      ModelConfig mc;
      mc.kind = model_kind_for(tc.mode);
      mc.input = train_set.kind;
      mc.feature_dim = train_set.feature_dim();
      mc.dims = parse_dims(dims_spec);
      mc.max_seg_len = max_seg_len;
      mc.labels = cli_detail::merged_labels(train_set, dev);
      if (mc.input == InputKind::symbols) mc.vocab = train_set.vocabulary();
      train_set = remap_labels(std::move(train_set), mc.labels);
      dev = remap_labels(std::move(dev), mc.labels);

      Model model(mc);
      model.initialize(seed);
      if (!pretrained_path.empty()) {
        if (mc.input != InputKind::symbols) throw ValidationError("--pretrained needs a symbol corpus");
        auto entries = read_pretrained(pretrained_path, mc.dims.embed);
        const auto used = apply_pretrained(*model.encoder().embeddings, model.encoder().vocab, entries);
        out << "pretrained vectors applied to " << used << " of " << model.encoder().vocab.size()
            << " symbols\n";
      }

      if (log_path.empty()) log_path = out_path + ".log";
      std::ofstream log(log_path);
      if (!log) throw ValidationError("cannot write metrics log '" + log_path + "'");
      TrainResult r = train(model, train_set, dev, tc, &log, &err);
      save_model(out_path, model);
      out << "trained " << to_string(tc.mode) << " model for " << r.history.size() << " epochs; best epoch "
          << r.best_epoch << " dev metric " << std::fixed << std::setprecision(4) << r.best_metric << '\n';
      out << "model written to " << out_path << ", metrics to " << log_path << '\n';
      return exit_ok;
    }

    if (*dec) {
      auto model = load_model(model_path);
      Corpus input = load_corpus(test_path);
      cli_detail::check_compatible(*model, input);
      if (!input.labels.empty()) input = remap_labels(std::move(input), model->config().labels);
      Corpus pred = cli_detail::decode_corpus(*model, input);
      if (out_path.empty()) {
        write_corpus(out, pred);
      } else {
        save_corpus(out_path, pred);
      }
      return exit_ok;
    }

    if (*ev) {
      Corpus gold = load_corpus(test_path);
      Corpus pred;
      if (!model_path.empty()) {
        auto model = load_model(model_path);
        cli_detail::check_compatible(*model, gold);
        gold = remap_labels(std::move(gold), model->config().labels);
        pred = cli_detail::decode_corpus(*model, gold);
      } else {
        if (pred_path.empty()) throw ValidationError("eval needs --pred or --model");
        pred = load_corpus(pred_path);
        const auto names = cli_detail::merged_labels(gold, pred);
        gold = remap_labels(std::move(gold), names);
        pred = remap_labels(std::move(pred), names);
      }
      if (pred.size() != gold.size()) {
        throw ValidationError("prediction has " + std::to_string(pred.size()) + " instances, gold has " +
                              std::to_string(gold.size()));
      }
      std::vector<Prediction> preds;
      for (std::size_t k = 0; k < pred.size(); ++k) {
        const auto& s = pred.instances[k];
        if (s.length() != gold.instances[k].length()) {
          throw ValidationError("instance " + std::to_string(k + 1) + ": token counts differ");
        }
        Prediction p;
        p.labels = s.labels;
        if (s.has_durations()) p.segmentation = s.gold();
        preds.push_back(std::move(p));
      }
      cli_detail::print_metrics(out, score_predictions(preds, gold));
      return exit_ok;
    }

    if (*gc) {
      const TrainMode m = cli_detail::parse_mode(mode);
      std::vector<Sequence> seqs;
      ModelConfig mc;
      mc.kind = model_kind_for(m);
      mc.dims = parse_dims(dims_spec);
      mc.max_seg_len = max_seg_len;
      if (!train_path.empty()) {
        Corpus c = load_corpus(train_path);
        mc.input = c.kind;
        mc.feature_dim = c.feature_dim();
        mc.labels = c.labels;
        if (c.kind == InputKind::symbols) mc.vocab = c.vocabulary();
        for (std::size_t k = 0; k < std::min(instances, c.size()); ++k) seqs.push_back(c.instances[k]);
      } else {
        SegmentalConfig sc;
        sc.instances = instances;
        sc.labels = 3;
        sc.durations = {{1, 2}, {1, 3}, {2, 3}};
        sc.min_segments = 2;
        sc.max_segments = 3;
        sc.sigma = 0.3;
        Corpus c = gen_synthetic_segmental(sc, seed);
        mc.input = c.kind;
        mc.feature_dim = c.feature_dim();
        mc.labels = c.labels;
        seqs = c.instances;
      }
      Model model(mc);
      model.initialize(seed);
      for (std::size_t k = 0; k < seqs.size(); ++k) validate_training_instance(model, seqs[k], m, k);
      Rng rng = make_stream(seed, "gradcheck");
      auto report = verify::run_gradient_suite(model, seqs, m, per_tensor, rng,
                                               corrupt ? ad::Fault::tanh_backward : ad::Fault::none);
      for (std::size_t k = 0; k < report.instances.size(); ++k) {
        out << "instance " << k + 1 << ": " << report.instances[k].checks.size()
            << " coordinates, max relative error " << std::scientific << std::setprecision(3)
            << report.instances[k].max_rel_error << '\n';
      }
      const bool ok = report.passed(tolerance);
      out << "max relative error " << std::scientific << std::setprecision(3) << report.max_rel_error
          << " over " << report.coordinates << " coordinates (tolerance " << tolerance << ")"
          << (report.all_finite ? "" : ", non-finite values present") << '\n'
          << (ok ? "PASS" : "FAIL") << '\n';
      return ok ? exit_ok : exit_verification;
    }

    if (*orc) {
      if (!dims_spec.empty()) oc.dims = parse_dims(dims_spec);
      if (oc.max_length == 0 || oc.max_labels == 0 || oc.seeds == 0) {
        throw ValidationError("oracle sizes must be positive");
      }
      if (oc.max_length > 10) throw ValidationError("--max-length above 10 is too large to enumerate");
      auto r = verify::run_oracle_suite(oc);
      out << std::scientific << std::setprecision(3);
      out << "cases " << r.cases << '\n'
          << "log Z(x)        max deviation " << r.log_z << '\n'
          << "log Z(x,y)      max deviation " << r.log_constrained << '\n'
          << "log Z(x,y,z)    max deviation " << r.log_path << '\n'
          << "map score       max deviation " << r.map_score << '\n'
          << "map mismatches " << r.map_mismatches << ", infinity mismatches " << r.infinity_mismatches
          << '\n';
      const bool ok = r.passed(oracle_tol);
      out << (ok ? "PASS" : "FAIL") << '\n';
      return ok ? exit_ok : exit_verification;
    }
  } catch (const DivergenceError& e) {
    err << "error: " << e.what() << '\n';
    return exit_divergence;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return exit_usage;
  }
  return exit_usage;
}

}  // namespace srnn
