#pragma once

// Verification suites shared by the `oracle` and `gradcheck` subcommands:
// dynamic programs against exhaustive enumeration over plain-double
// potentials, and tape gradients against central differences.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <random>
#include <vector>

#include "srnn/gradcheck.hpp"
#include "srnn/model.hpp"
#include "srnn/rng.hpp"
#include "srnn/segcrf.hpp"
#include "srnn/training.hpp"
#include "srnn/verify/enumerate.hpp"
#include "srnn/verify/reference.hpp"

namespace srnn::verify {

struct OracleConfig {
  std::size_t max_length = 6;
  std::size_t max_labels = 3;
  std::size_t seeds = 20;
  std::uint64_t seed = 1;
  std::size_t feature_dim = 3;
  double init_scale = 0.5;
  Dims dims;
};

// Largest absolute log-space deviation per quantity.
struct OracleReport {
  std::size_t cases = 0;
  double log_z = 0.0;
  double log_constrained = 0.0;
  double log_path = 0.0;
  double map_score = 0.0;
  std::size_t map_mismatches = 0;  // decoded path not an enumerated maximizer
  std::size_t infinity_mismatches = 0;

  double worst() const { return std::max({log_z, log_constrained, log_path, map_score}); }
  bool passed(double tolerance) const {
    return map_mismatches == 0 && infinity_mismatches == 0 && worst() <= tolerance;
  }
};

inline double log_gap(double a, double b) {
  if (std::isinf(a) && std::isinf(b) && (a < 0) == (b < 0)) return 0.0;
  return std::abs(a - b);
}

// Every |x| in 1..max_length, |Y| in 1..max_labels, L in {2, 3, |x|} (those
// not above |x|), and `seeds` random models each.
inline OracleReport run_oracle_suite(const OracleConfig& cfg) {
  OracleReport report;
  for (std::size_t n = 1; n <= cfg.max_length; ++n) {
    std::vector<std::size_t> bounds;
    for (std::size_t L : {std::size_t{2}, std::size_t{3}, n}) {
      const std::size_t eff = std::min(L, n);
      if (std::find(bounds.begin(), bounds.end(), eff) == bounds.end()) bounds.push_back(eff);
    }
    for (std::size_t Y = 1; Y <= cfg.max_labels; ++Y) {
      for (std::size_t L : bounds) {
        for (std::size_t s = 0; s < cfg.seeds; ++s) {
          const std::uint64_t seed = cfg.seed + 1000003 * s + 7919 * n + 131 * Y + L;
          ModelConfig mc;
          mc.kind = ModelKind::srnn;
          mc.input = InputKind::vectors;
          mc.feature_dim = cfg.feature_dim;
          mc.dims = cfg.dims;
          mc.max_seg_len = L;
          for (std::size_t y = 0; y < Y; ++y) mc.labels.push_back("y" + std::to_string(y));
          Model model(mc);
          model.initialize(seed, cfg.init_scale);
          Rng rng = make_stream(seed, "data");
          std::normal_distribution<double> nd;
          Sequence seq;
          for (std::size_t t = 0; t < n; ++t) {
            std::vector<double> v(cfg.feature_dim);
            for (double& x : v) x = nd(rng);
            seq.vectors.push_back(v);
          }

          const PotentialTable table = ref_potentials(model, seq.vectors);
          const PotentialFn f = [&table](int y, std::size_t i, std::size_t d) { return table(y, i, d); };
          const EnumerationResult brute = enumerate_all(n, L, Y, f);

          ad::Graph g;
          SrnnForward fwd(g, model, seq);
          SegmentScorer& scorer = *fwd.scorer;
          report.log_z = std::max(report.log_z, log_gap(g.scalar(log_partition(scorer)), brute.log_z));

          double map_score = 0.0;
          const LabeledSegmentation best = map_decode(scorer, &map_score);
          report.map_score = std::max(report.map_score, log_gap(map_score, brute.max_score));
          if (std::abs(path_score(best, f) - brute.max_score) > 1e-9) ++report.map_mismatches;

          for (const auto& labels : all_label_sequences(n, Y)) {
            const double dp = g.scalar(log_constrained(scorer, labels));
            const double en = enumerate_constrained(n, L, labels, f);
            if (std::isinf(dp) != std::isinf(en)) ++report.infinity_mismatches;
            report.log_constrained = std::max(report.log_constrained, log_gap(dp, en));
          }

          for_each_labeled_segmentation(n, L, Y, [&](const LabeledSegmentation& seg) {
            report.log_path =
                std::max(report.log_path, log_gap(g.scalar(log_path_score(scorer, seg)), path_score(seg, f)));
          });
          ++report.cases;
        }
      }
    }
  }
  return report;
}

struct GradientSuiteReport {
  std::vector<GradCheckReport> instances;
  double max_rel_error = 0.0;
  bool all_finite = true;
  std::size_t coordinates = 0;

  bool passed(double tolerance) const { return all_finite && max_rel_error < tolerance && coordinates > 0; }
};

// Checks the training loss of `mode` on each instance, sampling
// `per_tensor` coordinates from every parameter tensor per instance.
inline GradientSuiteReport run_gradient_suite(Model& model, const std::vector<Sequence>& instances,
                                              TrainMode mode, std::size_t per_tensor, Rng& rng,
                                              ad::Fault fault = ad::Fault::none) {
  GradientSuiteReport out;
  for (const Sequence& seq : instances) {
    const auto coords = sample_coordinates(model.params(), per_tensor, rng);
    auto build = [&](ad::Graph& g) { return instance_loss(g, model, seq, mode); };
    GradCheckReport r = check_gradients(model.params(), build, coords, 1e-4, fault);
    out.max_rel_error = std::max(out.max_rel_error, r.max_rel_error);
    out.all_finite = out.all_finite && r.all_finite;
    out.coordinates += r.checks.size();
    out.instances.push_back(std::move(r));
  }
  return out;
}

}  // namespace srnn::verify
