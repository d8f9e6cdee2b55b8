#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <exception>
#include <memory>
#include <numeric>
#include <ostream>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "srnn/baselines.hpp"
#include "srnn/data/corpus.hpp"
#include "srnn/data/metrics.hpp"
#include "srnn/diffgraph.hpp"
#include "srnn/errors.hpp"
#include "srnn/model.hpp"
#include "srnn/rng.hpp"
#include "srnn/segcrf.hpp"

namespace srnn {

enum class TrainMode { full, partial, bio, ctc };

inline const char* to_string(TrainMode m) {
  switch (m) {
    case TrainMode::full: return "full";
    case TrainMode::partial: return "partial";
    case TrainMode::bio: return "bio";
    case TrainMode::ctc: return "ctc";
  }
  return "?";
}

inline ModelKind model_kind_for(TrainMode m) {
  switch (m) {
    case TrainMode::bio: return ModelKind::bio;
    case TrainMode::ctc: return ModelKind::ctc;
    default: return ModelKind::srnn;
  }
}

struct TrainConfig {
  TrainMode mode = TrainMode::full;
  double lr = 1e-3;
  double l2 = 1e-6;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  std::size_t epochs = 50;
  std::size_t patience = 10;
  std::uint64_t seed = 1;
  std::size_t workers = 1;  // instances per optimizer step, evaluated concurrently

  void validate() const {
    if (!(lr > 0)) throw ValidationError("learning rate must be positive");
    if (l2 < 0) throw ValidationError("L2 strength must be non-negative");
    if (beta1 < 0 || beta1 >= 1 || beta2 < 0 || beta2 >= 1) {
      throw ValidationError("Adam betas must lie in [0, 1)");
    }
    if (patience < 1) throw ValidationError("patience must be at least 1");
    if (workers < 1) throw ValidationError("workers must be at least 1");
  }
};

// ---------------------------------------------------------------------------
// Losses

// log Z(x) - log Z(x, y, z)
inline ad::Expr supervised_loss(ad::Graph& g, const Model& model, const Sequence& seq) {
  if (!seq.has_durations()) throw ValidationError("full supervision needs gold durations");
  SrnnForward fwd(g, model, seq);
  const auto gold = seq.gold();
  ad::Expr path = log_path_score(*fwd.scorer, gold);
  return log_partition(*fwd.scorer) - path;
}

// log Z(x) - log Z(x, y); durations, if any, are ignored.
inline ad::Expr partial_loss(ad::Graph& g, const Model& model, const Sequence& seq) {
  if (seq.labels.empty() || seq.labels.size() > seq.length()) {
    throw ValidationError("partial supervision needs between 1 and |x| labels");
  }
  SrnnForward fwd(g, model, seq);
  ad::Expr constrained = log_constrained(*fwd.scorer, seq.labels);
  if (std::isinf(g.scalar(constrained))) {
    std::ostringstream os;
    os << seq.labels.size() << " labels cannot cover " << seq.length()
       << " tokens with segments of length <= " << fwd.table.max_len();
    throw ValidationError(os.str());
  }
  return log_partition(*fwd.scorer) - constrained;
}

inline ad::Expr bio_instance_loss(ad::Graph& g, const Model& model, const Sequence& seq) {
  if (!seq.has_durations()) throw ValidationError("BIO training needs gold durations");
  const auto tags = segments_to_bio(seq.gold());
  return bio_loss(g, model.head(), model.encoder().encode(g, seq), tags);
}

inline ad::Expr ctc_instance_loss(ad::Graph& g, const Model& model, const Sequence& seq) {
  if (seq.labels.size() > seq.length()) throw ValidationError("CTC reference longer than input");
  auto lps = model.head().log_probs(g, model.encoder().encode(g, seq));
  return -ctc_log_marginal(g, lps, seq.labels, CtcOutputSpace{model.num_labels()}.blank());
}

inline ad::Expr instance_loss(ad::Graph& g, const Model& model, const Sequence& seq,
                              TrainMode mode) {
  switch (mode) {
    case TrainMode::full: return supervised_loss(g, model, seq);
    case TrainMode::partial: return partial_loss(g, model, seq);
    case TrainMode::bio: return bio_instance_loss(g, model, seq);
    case TrainMode::ctc: return ctc_instance_loss(g, model, seq);
  }
  throw ValidationError("unknown training mode");
}

// Cheap structural checks so that bad data fails before any update.
inline void validate_training_instance(const Model& model, const Sequence& seq, TrainMode mode,
                                       std::size_t index) {
  auto fail = [&](const std::string& msg) {
    throw ValidationError("training instance " + std::to_string(index + 1) + ": " + msg);
  };
  const std::size_t n = seq.length();
  if (n == 0) fail("no tokens");
  if (seq.labels.empty()) fail("no gold labels");
  for (int y : seq.labels) {
    if (y < 0 || static_cast<std::size_t>(y) >= model.num_labels()) fail("label outside inventory");
  }
  const std::size_t L = model.max_len_for(n);
  switch (mode) {
    case TrainMode::full:
    case TrainMode::bio:
      if (!seq.has_durations()) fail("gold durations are required");
      try {
        seq.gold().validate(n);
      } catch (const ValidationError& e) {
        fail(e.what());
      }
      if (mode == TrainMode::full) {
        for (std::size_t k = 0; k < seq.durations.size(); ++k) {
          if (seq.durations[k] > L) {
            fail("gold segment " + std::to_string(k + 1) + " has duration " +
                 std::to_string(seq.durations[k]) + " > maximum segment length " +
                 std::to_string(L));
          }
        }
      }
      break;
    case TrainMode::partial:
      if (seq.labels.size() > n || seq.labels.size() * L < n) {
        fail("no segmentation with these labels fits the maximum segment length");
      }
      break;
    case TrainMode::ctc:
      if (seq.labels.size() > n) fail("more labels than frames");
      break;
  }
}

// ---------------------------------------------------------------------------
// Optimizer

// One Adam update from the accumulated gradients plus l2 * theta. Returns
// false, leaving everything but the gradients untouched, when any gradient
// is non-finite. Gradients are zeroed either way.
inline bool adam_step(ad::ParameterCollection& params, const TrainConfig& cfg) {
  bool finite = true;
  for (std::size_t p = 0; p < params.size() && finite; ++p) {
    for (double gk : params[p].grad) {
      if (!std::isfinite(gk)) {
        finite = false;
        break;
      }
    }
  }
  if (!finite) {
    params.zero_grad();
    return false;
  }
  const std::int64_t t = ++params.step();
  const double c1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(t));
  const double c2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(t));
  for (std::size_t p = 0; p < params.size(); ++p) {
    ad::Parameter& par = params[p];
    auto theta = par.value.data();
    for (std::size_t k = 0; k < theta.size(); ++k) {
      const double gk = par.grad[k] + cfg.l2 * theta[k];
      par.m[k] = cfg.beta1 * par.m[k] + (1 - cfg.beta1) * gk;
      par.v[k] = cfg.beta2 * par.v[k] + (1 - cfg.beta2) * gk * gk;
      theta[k] -= cfg.lr * (par.m[k] / c1) / (std::sqrt(par.v[k] / c2) + cfg.eps);
    }
  }
  params.zero_grad();
  return true;
}

// ---------------------------------------------------------------------------
// Evaluation used for model selection

inline std::vector<Prediction> predict_all(const Model& model, const Corpus& corpus) {
  std::vector<Prediction> out;
  out.reserve(corpus.size());
  for (const auto& s : corpus.instances) out.push_back(predict(model, s));
  return out;
}

// Seg/tag scores when both sides carry segmentations; error rate always.
inline SegMetrics score_predictions(const std::vector<Prediction>& pred, const Corpus& gold) {
  if (pred.size() != gold.size()) throw ValidationError("prediction and gold counts differ");
  const bool segmented =
      gold.all_have_durations() &&
      std::all_of(pred.begin(), pred.end(), [](const Prediction& p) { return p.segmentation.has_value(); });
  if (segmented) {
    std::vector<LabeledSegmentation> p, g;
    for (std::size_t k = 0; k < pred.size(); ++k) {
      p.push_back(*pred[k].segmentation);
      g.push_back(gold.instances[k].gold());
    }
    return evaluate(p, g);
  }
  std::vector<std::vector<int>> pl, gl;
  for (std::size_t k = 0; k < pred.size(); ++k) {
    pl.push_back(pred[k].labels);
    gl.push_back(gold.instances[k].labels);
  }
  SegMetrics m;
  m.error_rate = label_error_rate(pl, gl);
  return m;
}

// Segment F1 with a single label, tag F1 with several, and label accuracy
// (1 - error rate) for handwriting or when segmentations are unavailable.
inline double selection_metric(const SegMetrics& m, InputKind input, std::size_t num_labels) {
  if (input == InputKind::strokes || !m.seg) return 1.0 - m.error_rate;
  return num_labels == 1 ? m.seg->f1 : m.tag->f1;
}

inline double dev_metric(const Model& model, const Corpus& dev) {
  return selection_metric(score_predictions(predict_all(model, dev), dev), model.config().input,
                          model.num_labels());
}

// ---------------------------------------------------------------------------
// Training loop

struct EpochStats {
  std::size_t epoch = 0;
  double train_loss = 0.0;  // mean over instances with a finite loss
  double dev_metric = 0.0;
  double seconds = 0.0;
};

struct TrainResult {
  std::vector<EpochStats> history;
  std::size_t best_epoch = 0;
  double best_metric = 0.0;
  std::size_t skipped_updates = 0;
  std::size_t updates = 0;
};

inline constexpr std::size_t divergence_limit = 10;

// Trains in place and leaves the model at its best dev epoch. `log`, when
// given, receives "epoch,train_loss,dev_metric,seconds" lines; `warn`
// receives skipped-update warnings.
inline TrainResult train(Model& model, const Corpus& train_set, const Corpus& dev,
                         const TrainConfig& cfg, std::ostream* log = nullptr,
                         std::ostream* warn = nullptr) {
  cfg.validate();
  if (train_set.empty()) throw ValidationError("empty training corpus");
  if (dev.empty()) throw ValidationError("empty development corpus");
  if (model.kind() != model_kind_for(cfg.mode)) {
    throw ValidationError(std::string("mode '") + to_string(cfg.mode) + "' cannot train a " +
                          to_string(model.kind()) + " model");
  }
  for (std::size_t k = 0; k < train_set.size(); ++k) {
    validate_training_instance(model, train_set.instances[k], cfg.mode, k);
  }

  ad::ParameterCollection& params = model.params();
  params.zero_grad();
  Rng shuffle = make_stream(cfg.seed, "shuffle");
  std::vector<std::size_t> order(train_set.size());
  std::iota(order.begin(), order.end(), 0);

  TrainResult result;
  result.best_metric = -1.0;
  auto best = params.snapshot();
  std::size_t since_best = 0;
  std::size_t bad_in_a_row = 0;
  if (log) *log << "epoch,train_loss,dev_metric,seconds\n";

  for (std::size_t epoch = 1; epoch <= cfg.epochs; ++epoch) {
    const auto t0 = std::chrono::steady_clock::now();
    std::shuffle(order.begin(), order.end(), shuffle);
    double loss_sum = 0.0;
    std::size_t loss_count = 0;

    for (std::size_t b = 0; b < order.size(); b += cfg.workers) {
      const std::size_t batch = std::min(cfg.workers, order.size() - b);
      std::vector<std::unique_ptr<ad::Graph>> graphs(batch);
      std::vector<double> losses(batch, 0.0);
      std::vector<std::exception_ptr> errors(batch);
      auto run = [&](std::size_t k) {
        try {
          graphs[k] = std::make_unique<ad::Graph>();
          ad::Expr loss = instance_loss(*graphs[k], model, train_set.instances[order[b + k]], cfg.mode);
          losses[k] = graphs[k]->scalar(loss);
          if (std::isfinite(losses[k])) graphs[k]->backward(loss);
        } catch (...) {
          errors[k] = std::current_exception();
        }
      };
      if (batch == 1) {
        run(0);
      } else {
        std::vector<std::thread> threads;
        for (std::size_t k = 0; k < batch; ++k) threads.emplace_back(run, k);
        for (auto& th : threads) th.join();
      }
      for (auto& e : errors) {
        if (e) std::rethrow_exception(e);
      }
      // fixed-order reduction
      std::size_t finite = 0;
      for (std::size_t k = 0; k < batch; ++k) {
        if (!std::isfinite(losses[k])) continue;
        graphs[k]->accumulate_parameter_gradients();
        loss_sum += losses[k];
        ++loss_count;
        ++finite;
      }
      const bool stepped = finite == batch ? adam_step(params, cfg) : false;
      if (stepped) {
        bad_in_a_row = 0;
        ++result.updates;
      } else {
        params.zero_grad();
        ++bad_in_a_row;
        ++result.skipped_updates;
        if (warn) {
          *warn << "warning: epoch " << epoch << ": non-finite "
                << (finite == batch ? "gradient" : "loss") << ", update skipped\n";
        }
        if (bad_in_a_row >= divergence_limit) {
          throw DivergenceError("training diverged: " + std::to_string(bad_in_a_row) +
                                " consecutive updates with non-finite losses or gradients"
                                " (epoch " + std::to_string(epoch) + ")");
        }
      }
    }

    EpochStats stats;
    stats.epoch = epoch;
    stats.train_loss = loss_count ? loss_sum / loss_count : std::nan("");
    stats.dev_metric = dev_metric(model, dev);
    stats.seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    result.history.push_back(stats);
    if (log) {
      *log << stats.epoch << ',' << stats.train_loss << ',' << stats.dev_metric << ','
           << stats.seconds << '\n';
      log->flush();
    }
    if (stats.dev_metric > result.best_metric) {
      result.best_metric = stats.dev_metric;
      result.best_epoch = epoch;
      best = params.snapshot();
      since_best = 0;
    } else if (++since_best >= cfg.patience) {
      break;
    }
  }
  params.restore(best);
  return result;
}

}  // namespace srnn
