#pragma once

// Exhaustive enumeration over labeled segmentations and CTC frame labelings.
// Exponential; meant for sequences of a handful of tokens.

#include <cstddef>
#include <functional>
#include <vector>

#include "srnn/numerics.hpp"
#include "srnn/sequence.hpp"

namespace srnn::verify {

using PotentialFn = std::function<double(int label, std::size_t start, std::size_t duration)>;

// Every composition of n into parts of size <= max_part.
inline std::vector<std::vector<std::size_t>> compositions(std::size_t n, std::size_t max_part) {
  std::vector<std::vector<std::size_t>> out;
  if (n == 0) return out;
  // Bit k of mask set: a boundary after position k.
  for (std::size_t mask = 0; mask < (std::size_t{1} << (n - 1)); ++mask) {
    std::vector<std::size_t> parts;
    std::size_t run = 1;
    for (std::size_t k = 0; k + 1 < n; ++k) {
      if (mask & (std::size_t{1} << k)) {
        parts.push_back(run);
        run = 1;
      } else {
        ++run;
      }
    }
    parts.push_back(run);
    bool ok = true;
    for (std::size_t p : parts) ok = ok && p <= max_part;
    if (ok) out.push_back(std::move(parts));
  }
  return out;
}

// Calls visit(segmentation) for every labeled segmentation of n tokens with
// durations <= max_len and labels in [0, num_labels).
template <class Visit>
void for_each_labeled_segmentation(std::size_t n, std::size_t max_len, std::size_t num_labels,
                                   Visit&& visit) {
  for (const auto& parts : compositions(n, max_len)) {
    const std::size_t m = parts.size();
    std::vector<int> labels(m, 0);
    while (true) {
      visit(LabeledSegmentation::from_durations(labels, parts));
      std::size_t k = 0;
      while (k < m && ++labels[k] == static_cast<int>(num_labels)) {
        labels[k] = 0;
        ++k;
      }
      if (k == m) break;
    }
  }
}

inline double path_score(const LabeledSegmentation& seg, const PotentialFn& f) {
  double s = 0.0;
  for (const Segment& x : seg.segments) s += f(x.label, x.start, x.duration);
  return s;
}

struct EnumerationResult {
  double log_z = neg_inf;
  LabeledSegmentation argmax;
  double max_score = neg_inf;
  std::size_t count = 0;
};

inline EnumerationResult enumerate_all(std::size_t n, std::size_t max_len,
                                       std::size_t num_labels, const PotentialFn& f) {
  EnumerationResult r;
  std::vector<double> scores;
  for_each_labeled_segmentation(n, max_len, num_labels, [&](const LabeledSegmentation& seg) {
    const double s = path_score(seg, f);
    scores.push_back(s);
    if (s > r.max_score) {
      r.max_score = s;
      r.argmax = seg;
    }
  });
  r.count = scores.size();
  r.log_z = log_sum_exp(scores);
  return r;
}

// log of the summed scores of segmentations whose label sequence is `labels`.
inline double enumerate_constrained(std::size_t n, std::size_t max_len,
                                    const std::vector<int>& labels, const PotentialFn& f) {
  std::vector<double> scores;
  for (const auto& parts : compositions(n, max_len)) {
    if (parts.size() != labels.size()) continue;
    scores.push_back(path_score(LabeledSegmentation::from_durations(labels, parts), f));
  }
  return log_sum_exp(scores);
}

// Every label sequence over [0, num_labels) of length 1..max_length.
inline std::vector<std::vector<int>> all_label_sequences(std::size_t max_length,
                                                         std::size_t num_labels,
                                                         std::size_t min_length = 1) {
  std::vector<std::vector<int>> out;
  for (std::size_t len = min_length; len <= max_length; ++len) {
    std::vector<int> cur(len, 0);
    while (true) {
      out.push_back(cur);
      std::size_t k = 0;
      while (k < len && ++cur[k] == static_cast<int>(num_labels)) {
        cur[k] = 0;
        ++k;
      }
      if (k == len) break;
    }
  }
  return out;
}

// Brute-force CTC marginal: sum over all (|Y|+1)^T frame labelings whose
// interpretation (drop blanks, keep repeats) equals the reference.
inline double enumerate_ctc(const std::vector<std::vector<double>>& frame_log_probs,
                            const std::vector<int>& reference, int blank) {
  const std::size_t T = frame_log_probs.size();
  const std::size_t S = frame_log_probs.empty() ? 0 : frame_log_probs.front().size();
  std::vector<double> scores;
  std::vector<int> frames(T, 0);
  while (true) {
    std::vector<int> read;
    double s = 0.0;
    for (std::size_t t = 0; t < T; ++t) {
      s += frame_log_probs[t][frames[t]];
      if (frames[t] != blank) read.push_back(frames[t]);
    }
    if (read == reference) scores.push_back(s);
    std::size_t k = 0;
    while (k < T && ++frames[k] == static_cast<int>(S)) {
      frames[k] = 0;
      ++k;
    }
    if (k == T) break;
  }
  return log_sum_exp(scores);
}

}  // namespace srnn::verify
