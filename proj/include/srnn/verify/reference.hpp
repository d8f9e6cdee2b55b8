#pragma once

// Straight-line re-evaluation of the SRNN forward computation in plain
// doubles, reading raw parameter values. Shares no code with the tape, the
// segment-table dynamic program or the column-split potential.

#include <cmath>
#include <cstddef>
#include <vector>

#include "srnn/encoder.hpp"
#include "srnn/model.hpp"
#include "srnn/segcrf.hpp"

namespace srnn::verify {

using Vec = std::vector<double>;

struct RefState {
  Vec h;
  Vec c;
};

inline double ref_sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

inline RefState ref_lstm_step(const LstmCell& cell, const RefState& prev, const Vec& x) {
  const std::size_t d = cell.hidden_dim;
  const auto& wx = cell.w_x->value;
  const auto& wh = cell.w_h->value;
  const auto& b = cell.bias->value;
  Vec z(4 * d);
  for (std::size_t r = 0; r < 4 * d; ++r) {
    double acc = b[r];
    for (std::size_t k = 0; k < x.size(); ++k) acc += wx.at(r, k) * x[k];
    for (std::size_t k = 0; k < d; ++k) acc += wh.at(r, k) * prev.h[k];
    z[r] = acc;
  }
  RefState next{Vec(d), Vec(d)};
  for (std::size_t k = 0; k < d; ++k) {
    const double i = ref_sigmoid(z[k]);
    const double f = ref_sigmoid(z[d + k]);
    const double o = ref_sigmoid(z[2 * d + k]);
    const double g = std::tanh(z[3 * d + k]);
    next.c[k] = f * prev.c[k] + i * g;
    next.h[k] = o * std::tanh(next.c[k]);
  }
  return next;
}

inline RefState ref_zero_state(const LstmCell& cell) {
  return {Vec(cell.hidden_dim, 0.0), Vec(cell.hidden_dim, 0.0)};
}

// Final hidden state after reading xs[first..last] in the given order.
inline Vec ref_lstm_encode(const LstmCell& cell, const std::vector<Vec>& xs, std::size_t first,
                           std::size_t count, bool reverse) {
  RefState s = ref_zero_state(cell);
  for (std::size_t k = 0; k < count; ++k) {
    const std::size_t pos = reverse ? first + count - 1 - k : first + k;
    s = ref_lstm_step(cell, s, xs[pos]);
  }
  return s.h;
}

inline std::vector<Vec> ref_context(const BiLstm& bi, const std::vector<Vec>& xs) {
  const std::size_t n = xs.size();
  std::vector<Vec> fwd(n), bwd(n);
  RefState s = ref_zero_state(bi.fwd);
  for (std::size_t t = 0; t < n; ++t) {
    s = ref_lstm_step(bi.fwd, s, xs[t]);
    fwd[t] = s.h;
  }
  s = ref_zero_state(bi.bwd);
  for (std::size_t t = n; t > 0; --t) {
    s = ref_lstm_step(bi.bwd, s, xs[t - 1]);
    bwd[t - 1] = s.h;
  }
  std::vector<Vec> out(n);
  for (std::size_t t = 0; t < n; ++t) {
    out[t] = fwd[t];
    out[t].insert(out[t].end(), bwd[t].begin(), bwd[t].end());
  }
  return out;
}

// w . tanh(V [g_y; g_z; h_fwd; h_rev] + a) + b with the full concatenation.
inline double ref_potential(const PotentialParams& p, int label, std::size_t duration,
                            const Vec& h_fwd, const Vec& h_rev) {
  Vec in;
  for (std::size_t k = 0; k < p.label_dim; ++k) in.push_back(p.label_emb->value.at(label, k));
  for (std::size_t k = 0; k < p.duration_dim; ++k)
    in.push_back(p.duration_emb->value.at(duration - 1, k));
  in.insert(in.end(), h_fwd.begin(), h_fwd.end());
  in.insert(in.end(), h_rev.begin(), h_rev.end());
  double f = p.b->value[0];
  for (std::size_t r = 0; r < p.hidden_dim; ++r) {
    double acc = p.a->value[r];
    for (std::size_t k = 0; k < in.size(); ++k) acc += p.v->value.at(r, k) * in[k];
    f += p.w->value[r] * std::tanh(acc);
  }
  return f;
}

// All potentials of an instance, indexed [start][duration - 1][label].
struct PotentialTable {
  std::size_t length = 0;
  std::size_t max_len = 0;
  std::size_t labels = 0;
  std::vector<double> values;

  double operator()(int label, std::size_t start, std::size_t duration) const {
    return values[(start * max_len + duration - 1) * labels + label];
  }
};

// Requires a vectors-input SRNN model.
inline PotentialTable ref_potentials(const Model& model, const std::vector<Vec>& tokens) {
  const auto ctx = ref_context(model.encoder().context, tokens);
  const auto& seg = model.segment_encoder();
  const auto& pot = model.potential();
  PotentialTable t;
  t.length = tokens.size();
  t.max_len = model.max_len_for(t.length);
  t.labels = model.num_labels();
  t.values.assign(t.length * t.max_len * t.labels, 0.0);
  for (std::size_t i = 0; i < t.length; ++i) {
    for (std::size_t len = 1; len <= t.max_len && i + len <= t.length; ++len) {
      const Vec hf = ref_lstm_encode(seg.fwd, ctx, i, len, false);
      const Vec hr = ref_lstm_encode(seg.rev, ctx, i, len, true);
      for (std::size_t y = 0; y < t.labels; ++y) {
        t.values[(i * t.max_len + len - 1) * t.labels + y] =
            ref_potential(pot, static_cast<int>(y), len, hf, hr);
      }
    }
  }
  return t;
}

}  // namespace srnn::verify
