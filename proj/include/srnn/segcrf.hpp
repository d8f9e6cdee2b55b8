#pragma once

// Zeroth-order semi-Markov CRF over neural segment potentials.
//
//   f(y, z, span) = w . tanh(V [g_y(y); g_z(z); h_fwd(span); h_rev(span)] + a) + b
//
// The matrix-vector product is split by column block so that the span part
// is computed once per span and the label part once per label; the sum is
// the same affine map.

#include <algorithm>
#include <cstddef>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "srnn/diffgraph.hpp"
#include "srnn/errors.hpp"
#include "srnn/numerics.hpp"
#include "srnn/segment_embed.hpp"
#include "srnn/sequence.hpp"

namespace srnn {

struct PotentialParams {
  ad::Parameter* label_emb = nullptr;     // [labels, label_dim]
  ad::Parameter* duration_emb = nullptr;  // [max_duration, duration_dim], row z-1
  ad::Parameter* v = nullptr;             // [hidden, label_dim + duration_dim + 2 segment_dim]
  ad::Parameter* a = nullptr;             // [hidden]
  ad::Parameter* w = nullptr;             // [hidden]
  ad::Parameter* b = nullptr;             // [1]
  std::size_t num_labels = 0;
  std::size_t max_duration = 0;
  std::size_t label_dim = 0;
  std::size_t duration_dim = 0;
  std::size_t segment_dim = 0;
  std::size_t hidden_dim = 0;

  static PotentialParams create(ad::ParameterCollection& pc, std::size_t num_labels,
                                std::size_t max_duration, std::size_t label_dim,
                                std::size_t duration_dim, std::size_t segment_dim,
                                std::size_t hidden_dim) {
    PotentialParams p;
    p.num_labels = num_labels;
    p.max_duration = max_duration;
    p.label_dim = label_dim;
    p.duration_dim = duration_dim;
    p.segment_dim = segment_dim;
    p.hidden_dim = hidden_dim;
    p.label_emb = &pc.add("potential.label_emb", {num_labels, label_dim});
    p.duration_emb = &pc.add("potential.duration_emb", {max_duration, duration_dim});
    p.v = &pc.add("potential.V", {hidden_dim, label_dim + duration_dim + 2 * segment_dim});
    p.a = &pc.add("potential.a", {hidden_dim});
    p.w = &pc.add("potential.w", {hidden_dim});
    p.b = &pc.add("potential.b", {1});
    return p;
  }

  std::size_t duration_col() const { return label_dim; }
  std::size_t fwd_col() const { return label_dim + duration_dim; }
  std::size_t rev_col() const { return label_dim + duration_dim + segment_dim; }
};

// Builds (and caches) potential nodes for one instance on one graph.
class SegmentScorer {
 public:
  SegmentScorer(ad::Graph& g, const PotentialParams& params, const SegmentTable& table)
      : g_(&g), p_(&params), table_(&table) {
    const std::size_t spans = table.length() * table.max_len();
    span_cache_.resize(spans);
    potential_cache_.resize(spans * params.num_labels);
    label_cache_.resize(params.num_labels);
  }

  ad::Graph& graph() const { return *g_; }
  std::size_t length() const { return table_->length(); }
  std::size_t max_len() const { return table_->max_len(); }
  std::size_t num_labels() const { return p_->num_labels; }

  ad::Expr operator()(int label, std::size_t start, std::size_t duration) {
    check(label, start, duration);
    const std::size_t k = span_index(start, duration) * p_->num_labels + label;
    if (!potential_cache_[k].valid()) {
      ad::Graph& g = *g_;
      ad::Expr hidden = ad::tanh(span_term(start, duration) + label_term(label));
      potential_cache_[k] = ad::dot(g.parameter(*p_->w), hidden) + g.parameter(*p_->b);
    }
    return potential_cache_[k];
  }

  double value(int label, std::size_t start, std::size_t duration) {
    return g_->scalar((*this)(label, start, duration));
  }

 private:
  void check(int label, std::size_t start, std::size_t duration) const {
    if (label < 0 || static_cast<std::size_t>(label) >= p_->num_labels) {
      std::ostringstream os;
      os << "potential: label id " << label << " outside inventory of " << p_->num_labels;
      throw ValidationError(os.str());
    }
    if (duration == 0 || duration > table_->max_len() || duration > p_->max_duration ||
        start + duration > table_->length()) {
      std::ostringstream os;
      os << "potential: segment (start " << start << ", duration " << duration
         << ") exceeds the maximum segment length " << table_->max_len()
         << " or the sequence length " << table_->length();
      throw ValidationError(os.str());
    }
  }

  std::size_t span_index(std::size_t start, std::size_t duration) const {
    return start * table_->max_len() + duration - 1;
  }

  // a + V_dur g_z(z) + V_fwd h_fwd + V_rev h_rev
  ad::Expr span_term(std::size_t start, std::size_t duration) {
    ad::Expr& slot = span_cache_[span_index(start, duration)];
    if (!slot.valid()) {
      ad::Graph& g = *g_;
      ad::Expr v = g.parameter(*p_->v);
      slot = g.affine(g.parameter(*p_->a),
                      {{v, g.lookup(*p_->duration_emb, duration - 1), p_->duration_col()},
                       {v, table_->fwd(start, duration), p_->fwd_col()},
                       {v, table_->rev(start, duration), p_->rev_col()}});
    }
    return slot;
  }

  // V_label g_y(y)
  ad::Expr label_term(int label) {
    ad::Expr& slot = label_cache_[label];
    if (!slot.valid()) {
      ad::Graph& g = *g_;
      slot = g.affine(std::nullopt, {{g.parameter(*p_->v), g.lookup(*p_->label_emb, label), 0}});
    }
    return slot;
  }

  ad::Graph* g_;
  const PotentialParams* p_;
  const SegmentTable* table_;
  std::vector<ad::Expr> span_cache_;
  std::vector<ad::Expr> label_cache_;
  std::vector<ad::Expr> potential_cache_;
};

inline ad::Expr potential(SegmentScorer& f, int label, std::size_t duration, std::size_t start) {
  return f(label, start, duration);
}

// ---------------------------------------------------------------------------
// Partition function

struct AlphaChart {
  std::vector<ad::Expr> alpha;  // alpha[j] = log-sum over labeled segmentations of [0, j)

  ad::Expr log_z() const { return alpha.back(); }
};

inline AlphaChart alpha_chart(SegmentScorer& f) {
  const std::size_t n = f.length();
  if (n == 0) throw ValidationError("log_partition: empty sequence");
  ad::Graph& g = f.graph();
  const std::size_t L = f.max_len();
  AlphaChart chart;
  chart.alpha.resize(n + 1);
  chart.alpha[0] = g.constant(0.0);
  std::vector<ad::Expr> per_label;
  std::vector<ad::Expr> terms;
  for (std::size_t j = 1; j <= n; ++j) {
    terms.clear();
    for (std::size_t i = j > L ? j - L : 0; i < j; ++i) {
      per_label.clear();
      for (std::size_t y = 0; y < f.num_labels(); ++y) {
        per_label.push_back(f(static_cast<int>(y), i, j - i));
      }
      ad::Expr inner = per_label.size() == 1 ? per_label.front() : ad::log_sum_exp(per_label);
      terms.push_back(i == 0 ? inner : chart.alpha[i] + inner);
    }
    chart.alpha[j] = ad::log_sum_exp(terms);
  }
  return chart;
}

inline ad::Expr log_partition(SegmentScorer& f) { return alpha_chart(f).log_z(); }

// ---------------------------------------------------------------------------
// MAP decoding

// Highest-scoring labeled segmentation. Ties go to the longer final segment,
// then to the lower label id.
inline LabeledSegmentation map_decode(SegmentScorer& f, double* score = nullptr) {
  const std::size_t n = f.length();
  if (n == 0) throw ValidationError("map_decode: empty sequence");
  const std::size_t L = f.max_len();
  std::vector<double> best(n + 1, neg_inf);
  std::vector<std::size_t> back_pos(n + 1, 0);
  std::vector<int> back_label(n + 1, 0);
  best[0] = 0.0;
  for (std::size_t j = 1; j <= n; ++j) {
    for (std::size_t i = j > L ? j - L : 0; i < j; ++i) {
      for (std::size_t y = 0; y < f.num_labels(); ++y) {
        const double s = best[i] + f.value(static_cast<int>(y), i, j - i);
        if (s > best[j]) {
          best[j] = s;
          back_pos[j] = i;
          back_label[j] = static_cast<int>(y);
        }
      }
    }
  }
  LabeledSegmentation out;
  for (std::size_t j = n; j > 0; j = back_pos[j]) {
    out.segments.push_back({back_pos[j], j - back_pos[j], back_label[j]});
  }
  std::reverse(out.segments.begin(), out.segments.end());
  if (score) *score = best[n];
  return out;
}

// ---------------------------------------------------------------------------
// Constrained marginal over segmentations compatible with a label sequence

struct GammaChart {
  std::size_t length = 0;
  std::size_t labels = 0;
  std::vector<ad::Expr> cells;  // (j, m) at j * (labels + 1) + m; invalid = -inf

  bool reachable(std::size_t j, std::size_t m) const { return cells[j * (labels + 1) + m].valid(); }
  ad::Expr at(std::size_t j, std::size_t m) const { return cells[j * (labels + 1) + m]; }

  double value(const ad::Graph& g, std::size_t j, std::size_t m) const {
    return reachable(j, m) ? g.scalar(at(j, m)) : neg_inf;
  }
};

inline GammaChart gamma_chart(SegmentScorer& f, std::span<const int> gold_labels) {
  const std::size_t n = f.length();
  if (n == 0) throw ValidationError("log_constrained: empty sequence");
  ad::Graph& g = f.graph();
  const std::size_t L = f.max_len();
  const std::size_t M = gold_labels.size();
  GammaChart chart;
  chart.length = n;
  chart.labels = M;
  chart.cells.resize((n + 1) * (M + 1));
  chart.cells[0] = g.constant(0.0);
  std::vector<ad::Expr> terms;
  for (std::size_t j = 1; j <= n; ++j) {
    for (std::size_t m = 1; m <= std::min(j, M); ++m) {
      terms.clear();
      for (std::size_t i = j > L ? j - L : 0; i < j; ++i) {
        if (!chart.reachable(i, m - 1)) continue;
        ad::Expr pot = f(gold_labels[m - 1], i, j - i);
        terms.push_back(i == 0 ? pot : chart.at(i, m - 1) + pot);
      }
      if (!terms.empty()) {
        chart.cells[j * (M + 1) + m] = terms.size() == 1 ? terms.front() : ad::log_sum_exp(terms);
      }
    }
  }
  return chart;
}

// log Z(x, y); a constant -inf node when no segmentation within the length
// bound carries exactly these labels.
inline ad::Expr log_constrained(SegmentScorer& f, std::span<const int> gold_labels) {
  if (gold_labels.empty() || gold_labels.size() > f.length()) {
    return f.graph().constant(neg_inf);
  }
  GammaChart chart = gamma_chart(f, gold_labels);
  if (!chart.reachable(f.length(), gold_labels.size())) return f.graph().constant(neg_inf);
  return chart.at(f.length(), gold_labels.size());
}

// ---------------------------------------------------------------------------

// Sum of potentials along one labeled segmentation, i.e. log Z(x, y, z).
inline ad::Expr log_path_score(SegmentScorer& f, const LabeledSegmentation& gold) {
  gold.validate(f.length());
  for (std::size_t k = 0; k < gold.size(); ++k) {
    if (gold.segments[k].duration > f.max_len()) {
      std::ostringstream os;
      os << "gold segment " << k + 1 << " (start " << gold.segments[k].start << ", duration "
         << gold.segments[k].duration << ") is longer than the maximum segment length "
         << f.max_len();
      throw ValidationError(os.str());
    }
  }
  std::vector<ad::Expr> parts;
  for (const Segment& s : gold.segments) parts.push_back(f(s.label, s.start, s.duration));
  return parts.size() == 1 ? parts.front() : ad::sum(parts);
}

}  // namespace srnn
