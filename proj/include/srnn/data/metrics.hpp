#pragma once

#include <algorithm>
#include <cstddef>
#include <iomanip>
#include <optional>
#include <ostream>
#include <set>
#include <span>
#include <tuple>
#include <vector>

#include "srnn/errors.hpp"
#include "srnn/sequence.hpp"

namespace srnn {

struct PRF {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

inline PRF prf(std::size_t correct, std::size_t predicted, std::size_t gold) {
  PRF r;
  r.precision = predicted ? static_cast<double>(correct) / predicted : 0.0;
  r.recall = gold ? static_cast<double>(correct) / gold : 0.0;
  const double s = r.precision + r.recall;
  r.f1 = s > 0 ? 2 * r.precision * r.recall / s : 0.0;
  return r;
}

struct SegMetrics {
  std::optional<PRF> seg;  // absent when predictions carry no segmentation
  std::optional<PRF> tag;
  double error_rate = 0.0;
};

template <class T>
std::size_t edit_distance(std::span<const T> a, std::span<const T> b) {
  std::vector<std::size_t> row(b.size() + 1);
  for (std::size_t j = 0; j <= b.size(); ++j) row[j] = j;
  for (std::size_t i = 1; i <= a.size(); ++i) {
    std::size_t diag = row[0];
    row[0] = i;
    for (std::size_t j = 1; j <= b.size(); ++j) {
      const std::size_t up = row[j];
      row[j] = std::min({row[j] + 1, row[j - 1] + 1, diag + (a[i - 1] == b[j - 1] ? 0 : 1)});
      diag = up;
    }
  }
  return row[b.size()];
}

// Corpus-level edit distance between label sequences over total gold labels.
inline double label_error_rate(const std::vector<std::vector<int>>& pred,
                               const std::vector<std::vector<int>>& gold) {
  if (pred.size() != gold.size()) throw ValidationError("prediction and gold counts differ");
  std::size_t dist = 0, total = 0;
  for (std::size_t k = 0; k < gold.size(); ++k) {
    dist += edit_distance<int>(pred[k], gold[k]);
    total += gold[k].size();
  }
  return total ? static_cast<double>(dist) / total : (dist ? 1.0 : 0.0);
}

// A predicted segment counts for seg scores when its (start, duration) is
// a gold span, and for tag scores when its label also agrees.
inline SegMetrics evaluate(const std::vector<LabeledSegmentation>& pred,
                           const std::vector<LabeledSegmentation>& gold) {
  if (pred.size() != gold.size()) throw ValidationError("prediction and gold counts differ");
  std::size_t n_pred = 0, n_gold = 0, seg_ok = 0, tag_ok = 0;
  std::vector<std::vector<int>> pl, gl;
  for (std::size_t k = 0; k < gold.size(); ++k) {
    if (pred[k].length() != gold[k].length()) {
      throw ValidationError("instance " + std::to_string(k + 1) +
                            ": prediction and gold cover different token counts");
    }
    std::set<std::pair<std::size_t, std::size_t>> spans;
    std::set<std::tuple<std::size_t, std::size_t, int>> tagged;
    for (const Segment& s : gold[k].segments) {
      spans.insert({s.start, s.duration});
      tagged.insert({s.start, s.duration, s.label});
    }
    for (const Segment& s : pred[k].segments) {
      seg_ok += spans.count({s.start, s.duration});
      tag_ok += tagged.count({s.start, s.duration, s.label});
    }
    n_pred += pred[k].size();
    n_gold += gold[k].size();
    pl.push_back(pred[k].labels());
    gl.push_back(gold[k].labels());
  }
  SegMetrics m;
  m.seg = prf(seg_ok, n_pred, n_gold);
  m.tag = prf(tag_ok, n_pred, n_gold);
  m.error_rate = label_error_rate(pl, gl);
  return m;
}

inline void write_metrics_header(std::ostream& out) {
  out << "P_seg\tR_seg\tF_seg\tP_tag\tR_tag\tF_tag\tError\n";
}

// One tab-separated row; "-" where a value does not apply.
inline void write_metrics_row(std::ostream& out, const SegMetrics& m) {
  auto put = [&](const std::optional<PRF>& p) {
    if (p) {
      out << p->precision << '\t' << p->recall << '\t' << p->f1 << '\t';
    } else {
      out << "-\t-\t-\t";
    }
  };
  const auto flags = out.flags();
  const auto prec = out.precision();
  out << std::fixed << std::setprecision(4);
  put(m.seg);
  put(m.tag);
  out << m.error_rate << '\n';
  out.flags(flags);
  out.precision(prec);
}

}  // namespace srnn
