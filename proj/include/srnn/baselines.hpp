#pragma once

// Per-position baselines on top of the context encoder: a greedy BIO tagger
// and CTC with blank-only duration extension (a repeated symbol is two
// emissions, so "a a" reads as "aa").

#include <algorithm>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "srnn/diffgraph.hpp"
#include "srnn/encoder.hpp"
#include "srnn/numerics.hpp"
#include "srnn/sequence.hpp"

namespace srnn {

// logits = W tanh(c) + b
struct TaggerHead {
  ad::Parameter* w = nullptr;
  ad::Parameter* b = nullptr;
  std::size_t outputs = 0;

  static TaggerHead create(ad::ParameterCollection& pc, const std::string& name,
                           std::size_t input_dim, std::size_t outputs) {
    return {&pc.add(name + ".W", {outputs, input_dim}), &pc.add(name + ".b", {outputs}), outputs};
  }

  ad::Expr logits(ad::Graph& g, ad::Expr c) const {
    return g.affine(g.parameter(*b), {{g.parameter(*w), ad::tanh(c)}});
  }

  std::vector<ad::Expr> log_probs(ad::Graph& g, const ContextTable& ctx) const {
    std::vector<ad::Expr> out;
    out.reserve(ctx.size());
    for (ad::Expr c : ctx.c) out.push_back(ad::log_softmax(logits(g, c)));
    return out;
  }
};

inline std::size_t argmax(std::span<const double> v) {
  return static_cast<std::size_t>(std::max_element(v.begin(), v.end()) - v.begin());
}

// ---------------------------------------------------------------------------
// BIO

// Tag 2y is B-y, tag 2y+1 is I-y.
struct BioTagSet {
  std::size_t num_labels = 0;

  std::size_t size() const { return 2 * num_labels; }
  static int begin(int label) { return 2 * label; }
  static int inside(int label) { return 2 * label + 1; }
  static int label_of(int tag) { return tag / 2; }
  static bool is_begin(int tag) { return tag % 2 == 0; }

  static std::string name(int tag, const std::vector<std::string>& labels) {
    return (is_begin(tag) ? "B-" : "I-") + labels.at(label_of(tag));
  }
};

inline std::vector<int> segments_to_bio(const LabeledSegmentation& seg) {
  std::vector<int> tags;
  for (const Segment& s : seg.segments) {
    tags.push_back(BioTagSet::begin(s.label));
    for (std::size_t k = 1; k < s.duration; ++k) tags.push_back(BioTagSet::inside(s.label));
  }
  return tags;
}

// I-y continues only a segment labeled y; any other I-y opens a new segment,
// as if it were B-y.
inline LabeledSegmentation bio_to_segments(std::span<const int> tags) {
  LabeledSegmentation out;
  for (std::size_t t = 0; t < tags.size(); ++t) {
    const int label = BioTagSet::label_of(tags[t]);
    const bool extends = !BioTagSet::is_begin(tags[t]) && !out.segments.empty() &&
                         out.segments.back().label == label;
    if (extends) {
      ++out.segments.back().duration;
    } else {
      out.segments.push_back({t, 1, label});
    }
  }
  return out;
}

// Greedy per-position argmax; ties go to the lower tag id.
inline std::vector<int> bio_tag(ad::Graph& g, const TaggerHead& head, const ContextTable& ctx) {
  std::vector<int> tags;
  for (ad::Expr lp : head.log_probs(g, ctx)) tags.push_back(static_cast<int>(argmax(g.value(lp))));
  return tags;
}

// Sum over positions of -log p(gold tag).
inline ad::Expr bio_loss(ad::Graph& g, const TaggerHead& head, const ContextTable& ctx,
                         std::span<const int> gold_tags) {
  if (gold_tags.size() != ctx.size()) {
    throw ValidationError("bio_loss: one gold tag per position is required");
  }
  auto lps = head.log_probs(g, ctx);
  std::vector<ad::Expr> picked;
  for (std::size_t t = 0; t < lps.size(); ++t) picked.push_back(ad::pick(lps[t], gold_tags[t]));
  return -ad::sum(picked);
}

// ---------------------------------------------------------------------------
// CTC

struct CtcOutputSpace {
  std::size_t num_labels = 0;

  std::size_t size() const { return num_labels + 1; }
  int blank() const { return static_cast<int>(num_labels); }
};

// Drops blanks; every non-blank frame is one output symbol.
inline std::vector<int> ctc_interpret(std::span<const int> frames, int blank) {
  std::vector<int> out;
  for (int s : frames) {
    if (s != blank) out.push_back(s);
  }
  return out;
}

// log of the total probability of frame labelings that read as `reference`.
// Lattice state k = symbols emitted so far; a frame either emits the next
// reference symbol (k -> k+1) or is blank (k -> k).
inline ad::Expr ctc_log_marginal(ad::Graph& g, std::span<const ad::Expr> frame_log_probs,
                                 std::span<const int> reference, int blank) {
  const std::size_t T = frame_log_probs.size();
  const std::size_t n = reference.size();
  if (n > T) return g.constant(neg_inf);
  // prev[k] for frames consumed so far; only k in [max(0, n - (T - t)), min(t, n)] survive.
  std::vector<ad::Expr> prev(n + 1);
  prev[0] = g.constant(0.0);
  for (std::size_t t = 1; t <= T; ++t) {
    std::vector<ad::Expr> cur(n + 1);
    const ad::Expr lp = frame_log_probs[t - 1];
    const std::size_t lo = n + t > T ? n + t - T : 0;
    const std::size_t hi = std::min(t, n);
    for (std::size_t k = lo; k <= hi; ++k) {
      ad::Expr stay;
      ad::Expr emit;
      if (k <= t - 1 && prev[k].valid()) stay = prev[k] + ad::pick(lp, blank);
      if (k >= 1 && prev[k - 1].valid()) emit = prev[k - 1] + ad::pick(lp, reference[k - 1]);
      if (stay.valid() && emit.valid()) {
        cur[k] = ad::log_sum_exp({stay, emit});
      } else {
        cur[k] = stay.valid() ? stay : emit;
      }
    }
    prev = std::move(cur);
  }
  return prev[n];
}

// Per-frame argmax, then interpretation.
inline std::vector<int> ctc_best_path_decode(const ad::Graph& g,
                                             std::span<const ad::Expr> frame_log_probs,
                                             int blank) {
  std::vector<int> frames;
  for (ad::Expr lp : frame_log_probs) frames.push_back(static_cast<int>(argmax(g.value(lp))));
  return ctc_interpret(frames, blank);
}

}  // namespace srnn
