#pragma once

// Synthetic corpora: label-conditioned segment durations with Gaussian
// emissions, and handwriting-like words built from per-character stroke
// prototypes.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "srnn/data/corpus.hpp"
#include "srnn/errors.hpp"
#include "srnn/rng.hpp"

namespace srnn {

struct DurationRange {
  std::size_t lo = 1;
  std::size_t hi = 1;
};

struct SegmentalConfig {
  std::size_t instances = 100;
  std::size_t labels = 4;
  std::vector<DurationRange> durations;  // per label; empty: 1..4 for all
  double sigma = 0.1;
  std::size_t feature_dim = 0;  // 0: one dimension per label
  std::vector<std::vector<double>> means;  // per label; empty: unit vectors e_y
  std::size_t min_segments = 2;
  std::size_t max_segments = 6;
};

inline std::string synthetic_label_name(std::size_t y, std::size_t count) {
  std::string digits = std::to_string(y);
  const std::size_t width = std::to_string(count > 0 ? count - 1 : 0).size();
  return "L" + std::string(width - digits.size(), '0') + digits;
}

inline Corpus gen_synthetic_segmental(const SegmentalConfig& cfg, std::uint64_t seed) {
  if (cfg.labels == 0) throw ValidationError("at least one label is required");
  if (cfg.sigma < 0) throw ValidationError("sigma must be non-negative");
  if (cfg.min_segments == 0 || cfg.min_segments > cfg.max_segments) {
    throw ValidationError("bad segment count range");
  }
  std::vector<DurationRange> ranges = cfg.durations;
  if (ranges.empty()) ranges.assign(cfg.labels, {1, 4});
  if (ranges.size() != cfg.labels) throw ValidationError("one duration range per label");
  for (const auto& r : ranges) {
    if (r.lo == 0 || r.lo > r.hi) throw ValidationError("duration ranges must satisfy 1 <= lo <= hi");
  }
  std::vector<std::vector<double>> means = cfg.means;
  const std::size_t dim = cfg.feature_dim ? cfg.feature_dim
                          : means.empty() ? cfg.labels
                                          : means.front().size();
  if (means.empty()) {
    if (dim < cfg.labels) throw ValidationError("unit-vector means need feature_dim >= labels");
    for (std::size_t y = 0; y < cfg.labels; ++y) {
      std::vector<double> mu(dim, 0.0);
      mu[y] = 1.0;
      means.push_back(mu);
    }
  }
  if (means.size() != cfg.labels) throw ValidationError("one mean per label");
  for (const auto& mu : means) {
    if (mu.size() != dim) throw ValidationError("every mean needs feature_dim entries");
  }

  Rng rng = make_stream(seed, "data");
  std::uniform_int_distribution<std::size_t> count(cfg.min_segments, cfg.max_segments);
  std::uniform_int_distribution<int> label(0, static_cast<int>(cfg.labels) - 1);
  std::normal_distribution<double> noise(0.0, 1.0);

  Corpus corpus;
  corpus.kind = InputKind::vectors;
  for (std::size_t y = 0; y < cfg.labels; ++y) corpus.labels.push_back(synthetic_label_name(y, cfg.labels));
  for (std::size_t n = 0; n < cfg.instances; ++n) {
    Sequence s;
    const std::size_t m = count(rng);
    for (std::size_t k = 0; k < m; ++k) {
      const int y = label(rng);
      std::uniform_int_distribution<std::size_t> dur(ranges[y].lo, ranges[y].hi);
      const std::size_t d = dur(rng);
      s.labels.push_back(y);
      s.durations.push_back(d);
      for (std::size_t t = 0; t < d; ++t) {
        std::vector<double> v = means[y];
        for (double& x : v) x += cfg.sigma * noise(rng);
        s.vectors.push_back(std::move(v));
      }
    }
    corpus.instances.push_back(std::move(s));
  }
  return corpus;
}

struct StrokeConfig {
  std::size_t instances = 100;
  std::size_t alphabet = 6;
  std::size_t min_chars = 1;
  std::size_t max_chars = 5;
  double jitter = 0.02;
  std::size_t min_points = 3;
  std::size_t max_points = 8;
  std::uint64_t prototype_seed = 0;  // prototypes are shared by corpora with the same value
};

// Per-character stroke shapes in a unit box.
inline std::vector<std::vector<Stroke>> stroke_prototypes(const StrokeConfig& cfg) {
  Rng rng = make_stream(cfg.prototype_seed, "prototypes");
  std::uniform_int_distribution<std::size_t> strokes(1, 3);
  std::uniform_int_distribution<std::size_t> points(cfg.min_points, cfg.max_points);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::normal_distribution<double> step(0.0, 0.25);
  std::vector<std::vector<Stroke>> out(cfg.alphabet);
  for (auto& ch : out) {
    const std::size_t k = strokes(rng);
    for (std::size_t s = 0; s < k; ++s) {
      Stroke stroke;
      Point p{unit(rng), unit(rng)};
      const std::size_t np = points(rng);
      for (std::size_t i = 0; i < np; ++i) {
        stroke.push_back(p);
        p[0] = std::clamp(p[0] + step(rng), 0.0, 1.0);
        p[1] = std::clamp(p[1] + step(rng), 0.0, 1.0);
      }
      ch.push_back(std::move(stroke));
    }
  }
  return out;
}

// Single letters for alphabets up to 26, zero-padded "c" names beyond, so
// that name order equals id order.
inline std::string character_name(std::size_t c, std::size_t alphabet) {
  if (alphabet <= 26) return std::string(1, static_cast<char>('a' + c));
  std::string digits = std::to_string(c);
  return "c" + std::string(std::to_string(alphabet - 1).size() - digits.size(), '0') + digits;
}

// A word is a run of characters written left to right; each token is one
// stroke and each character is one segment.
inline Corpus gen_synthetic_strokes(const StrokeConfig& cfg, std::uint64_t seed) {
  if (cfg.alphabet == 0) throw ValidationError("alphabet must be non-empty");
  if (cfg.min_chars == 0 || cfg.min_chars > cfg.max_chars) {
    throw ValidationError("bad characters-per-word range");
  }
  if (cfg.min_points == 0 || cfg.min_points > cfg.max_points) {
    throw ValidationError("bad points-per-stroke range");
  }
  const auto protos = stroke_prototypes(cfg);
  Rng rng = make_stream(seed, "data");
  std::uniform_int_distribution<std::size_t> chars(cfg.min_chars, cfg.max_chars);
  std::uniform_int_distribution<int> pick(0, static_cast<int>(cfg.alphabet) - 1);
  std::normal_distribution<double> noise(0.0, 1.0);

  Corpus corpus;
  corpus.kind = InputKind::strokes;
  for (std::size_t c = 0; c < cfg.alphabet; ++c) corpus.labels.push_back(character_name(c, cfg.alphabet));
  for (std::size_t n = 0; n < cfg.instances; ++n) {
    Sequence s;
    const std::size_t m = chars(rng);
    for (std::size_t k = 0; k < m; ++k) {
      const int c = pick(rng);
      const double offset = static_cast<double>(k) * 1.2;
      for (const Stroke& proto : protos[c]) {
        Stroke stroke;
        for (const Point& p : proto) {
          stroke.push_back({p[0] + offset + cfg.jitter * noise(rng), p[1] + cfg.jitter * noise(rng)});
        }
        s.strokes.push_back(std::move(stroke));
      }
      s.labels.push_back(c);
      s.durations.push_back(protos[c].size());
    }
    corpus.instances.push_back(std::move(s));
  }
  return corpus;
}

}  // namespace srnn
