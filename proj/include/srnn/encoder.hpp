#pragma once

#include <algorithm>
#include <array>
#include <cstddef>
#include <fstream>
#include <istream>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <unordered_map>
#include <vector>

#include "srnn/diffgraph.hpp"
#include "srnn/errors.hpp"
#include "srnn/rng.hpp"
#include "srnn/sequence.hpp"

namespace srnn {

// Standard LSTM without peepholes. Gate rows are stacked [input, forget,
// output, candidate] in w_x (4d x in), w_h (4d x d) and bias (4d).
struct LstmCell {
  ad::Parameter* w_x = nullptr;
  ad::Parameter* w_h = nullptr;
  ad::Parameter* bias = nullptr;
  std::size_t input_dim = 0;
  std::size_t hidden_dim = 0;

  static LstmCell create(ad::ParameterCollection& pc, const std::string& name,
                         std::size_t input_dim, std::size_t hidden_dim) {
    LstmCell cell;
    cell.input_dim = input_dim;
    cell.hidden_dim = hidden_dim;
    cell.w_x = &pc.add(name + ".w_x", {4 * hidden_dim, input_dim});
    cell.w_h = &pc.add(name + ".w_h", {4 * hidden_dim, hidden_dim});
    cell.bias = &pc.add(name + ".bias", {4 * hidden_dim});
    return cell;
  }

  void set_forget_bias(double value) const {
    for (std::size_t k = 0; k < hidden_dim; ++k) bias->value[hidden_dim + k] = value;
  }
};

struct LstmState {
  ad::Expr h;
  ad::Expr c;
};

// One step from `prev`; an empty `prev` is the zero state, for which the
// recurrent terms vanish and are skipped.
inline LstmState lstm_step(ad::Graph& g, const LstmCell& cell, const std::optional<LstmState>& prev,
                           ad::Expr x) {
  if (g.size(x) != cell.input_dim) {
    std::ostringstream os;
    os << "lstm_step: input length " << g.size(x) << ", cell expects " << cell.input_dim;
    throw ShapeError(os.str());
  }
  const std::size_t d = cell.hidden_dim;
  ad::Expr b = g.parameter(*cell.bias);
  ad::Expr wx = g.parameter(*cell.w_x);
  ad::Expr gates = prev ? g.affine(b, {{wx, x}, {g.parameter(*cell.w_h), prev->h}})
                        : g.affine(b, {{wx, x}});
  ad::Expr ifo = ad::sigmoid(ad::slice(gates, 0, 3 * d));
  ad::Expr in = ad::slice(ifo, 0, d);
  ad::Expr out = ad::slice(ifo, 2 * d, d);
  ad::Expr cand = ad::tanh(ad::slice(gates, 3 * d, d));
  ad::Expr c = prev ? ad::cmult(ad::slice(ifo, d, d), prev->c) + ad::cmult(in, cand)
                    : ad::cmult(in, cand);
  return {ad::cmult(out, ad::tanh(c)), c};
}

// Hidden states of a left-to-right pass over xs.
inline std::vector<ad::Expr> lstm_run(ad::Graph& g, const LstmCell& cell,
                                      std::span<const ad::Expr> xs) {
  std::vector<ad::Expr> hs;
  std::optional<LstmState> state;
  for (ad::Expr x : xs) {
    state = lstm_step(g, cell, state, x);
    hs.push_back(state->h);
  }
  return hs;
}

struct BiLstm {
  LstmCell fwd;
  LstmCell bwd;

  static BiLstm create(ad::ParameterCollection& pc, const std::string& name,
                       std::size_t input_dim, std::size_t hidden_dim) {
    return {LstmCell::create(pc, name + ".fwd", input_dim, hidden_dim),
            LstmCell::create(pc, name + ".bwd", input_dim, hidden_dim)};
  }

  std::size_t output_dim() const { return fwd.hidden_dim + bwd.hidden_dim; }

  // Per-position [forward; backward] hidden states.
  std::vector<ad::Expr> run(ad::Graph& g, std::span<const ad::Expr> xs) const {
    auto hf = lstm_run(g, fwd, xs);
    std::vector<ad::Expr> reversed(xs.rbegin(), xs.rend());
    auto hb = lstm_run(g, bwd, reversed);
    std::reverse(hb.begin(), hb.end());
    std::vector<ad::Expr> out;
    out.reserve(xs.size());
    for (std::size_t i = 0; i < xs.size(); ++i) out.push_back(ad::concat({hf[i], hb[i]}));
    return out;
  }

  // [forward state after the last input; backward state after the first].
  ad::Expr summarize(ad::Graph& g, std::span<const ad::Expr> xs) const {
    auto hf = lstm_run(g, fwd, xs);
    std::vector<ad::Expr> reversed(xs.rbegin(), xs.rend());
    auto hb = lstm_run(g, bwd, reversed);
    return ad::concat({hf.back(), hb.back()});
  }
};

// Per-position context vectors c_1..c_n.
struct ContextTable {
  std::vector<ad::Expr> c;

  std::size_t size() const { return c.size(); }
  ad::Expr operator[](std::size_t i) const { return c[i]; }
};

inline ContextTable encode_context(ad::Graph& g, const BiLstm& encoder,
                                   std::span<const ad::Expr> tokens) {
  if (tokens.empty()) throw ValidationError("encode_context: empty input");
  return {encoder.run(g, tokens)};
}

// ---------------------------------------------------------------------------
// Handwriting front end

using PointFeature = std::array<double, 4>;

// (x, y, dx, dy) per point. Coordinates are scaled into [0,1]^2 over the
// whole word with one common factor; dx, dy restart at (0,0) on every stroke.
inline std::vector<std::vector<PointFeature>> stroke_point_features(
    const std::vector<Stroke>& strokes) {
  double min_x = 0, min_y = 0, max_x = 0, max_y = 0;
  bool first = true;
  for (const Stroke& s : strokes) {
    for (const Point& p : s) {
      if (first) {
        min_x = max_x = p[0];
        min_y = max_y = p[1];
        first = false;
      }
      min_x = std::min(min_x, p[0]);
      max_x = std::max(max_x, p[0]);
      min_y = std::min(min_y, p[1]);
      max_y = std::max(max_y, p[1]);
    }
  }
  double range = std::max(max_x - min_x, max_y - min_y);
  if (range <= 0.0) range = 1.0;
  std::vector<std::vector<PointFeature>> out;
  for (const Stroke& s : strokes) {
    std::vector<PointFeature> pts;
    for (std::size_t k = 0; k < s.size(); ++k) {
      const double x = (s[k][0] - min_x) / range;
      const double y = (s[k][1] - min_y) / range;
      const double dx = k == 0 ? 0.0 : x - pts.back()[0];
      const double dy = k == 0 ? 0.0 : y - pts.back()[1];
      pts.push_back({x, y, dx, dy});
    }
    out.push_back(std::move(pts));
  }
  return out;
}

inline ad::Expr embed_stroke(ad::Graph& g, const BiLstm& embedder,
                             std::span<const PointFeature> points) {
  if (points.empty()) throw ValidationError("embed_stroke: empty stroke");
  std::vector<ad::Expr> xs;
  xs.reserve(points.size());
  for (const PointFeature& p : points) xs.push_back(g.input(std::span<const double>(p)));
  return embedder.summarize(g, xs);
}

// ---------------------------------------------------------------------------
// Symbol front end

// Row 0 is reserved for unknown symbols.
class Vocabulary {
 public:
  static constexpr const char* unk = "<unk>";

  Vocabulary() { add(unk); }

  std::size_t add(const std::string& symbol) {
    auto [it, inserted] = index_.emplace(symbol, symbols_.size());
    if (inserted) symbols_.push_back(symbol);
    return it->second;
  }

  std::size_t id(const std::string& symbol) const {
    auto it = index_.find(symbol);
    return it == index_.end() ? 0 : it->second;
  }

  bool contains(const std::string& symbol) const { return index_.count(symbol) != 0; }
  std::size_t size() const { return symbols_.size(); }
  const std::vector<std::string>& symbols() const { return symbols_; }

 private:
  std::vector<std::string> symbols_;
  std::unordered_map<std::string, std::size_t> index_;
};

inline std::vector<ad::Expr> embed_symbols(ad::Graph& g, ad::Parameter& table,
                                           const Vocabulary& vocab,
                                           const std::vector<std::string>& symbols) {
  std::vector<ad::Expr> out;
  out.reserve(symbols.size());
  for (const std::string& s : symbols) out.push_back(g.lookup(table, vocab.id(s)));
  return out;
}

struct PretrainedEntry {
  std::string symbol;
  std::vector<double> vector;
};

// `symbol v1 ... vD` per line, whitespace separated.
inline std::vector<PretrainedEntry> read_pretrained(std::istream& in, std::size_t dim) {
  std::vector<PretrainedEntry> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::istringstream fields(line);
    PretrainedEntry e;
    if (!(fields >> e.symbol)) continue;
    double v;
    while (fields >> v) e.vector.push_back(v);
    if (!fields.eof() || e.vector.size() != dim) {
      std::ostringstream os;
      os << "pretrained embeddings line " << line_no << ": expected " << dim
         << " numbers after the symbol";
      throw ValidationError(os.str());
    }
    out.push_back(std::move(e));
  }
  return out;
}

inline std::vector<PretrainedEntry> read_pretrained(const std::string& path, std::size_t dim) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open pretrained embeddings '" + path + "'");
  return read_pretrained(in, dim);
}

// Copies rows for symbols present in `vocab`; returns how many were set.
inline std::size_t apply_pretrained(ad::Parameter& table, const Vocabulary& vocab,
                                    const std::vector<PretrainedEntry>& entries) {
  std::size_t n = 0;
  for (const PretrainedEntry& e : entries) {
    if (!vocab.contains(e.symbol)) continue;
    const std::size_t row = vocab.id(e.symbol);
    std::copy(e.vector.begin(), e.vector.end(), table.value.data().begin() + row * table.value.cols());
    ++n;
  }
  return n;
}

// ---------------------------------------------------------------------------

// Raw tokens -> per-token input vectors -> context BiLSTM.
struct InputEncoder {
  InputKind kind = InputKind::vectors;
  std::size_t input_dim = 0;
  ad::Parameter* embeddings = nullptr;
  Vocabulary vocab;
  std::optional<BiLstm> stroke;
  BiLstm context;

  struct Sizes {
    std::size_t feature_dim = 0;  // vectors only
    std::size_t embed_dim = 64;
    std::size_t stroke_hidden = 5;
    std::size_t context_dim = 24;  // both directions together
  };

  static InputEncoder create(ad::ParameterCollection& pc, InputKind kind, const Sizes& sizes,
                             Vocabulary vocab = {}) {
    if (sizes.context_dim < 2 || sizes.context_dim % 2 != 0) {
      throw ValidationError("context dimension must be a positive even number");
    }
    InputEncoder enc;
    enc.kind = kind;
    switch (kind) {
      case InputKind::vectors:
        enc.input_dim = sizes.feature_dim;
        break;
      case InputKind::symbols:
        enc.vocab = std::move(vocab);
        enc.input_dim = sizes.embed_dim;
        enc.embeddings = &pc.add("embed.symbols", {enc.vocab.size(), sizes.embed_dim});
        break;
      case InputKind::strokes:
        enc.stroke = BiLstm::create(pc, "embed.stroke", 4, sizes.stroke_hidden);
        enc.input_dim = 2 * sizes.stroke_hidden;
        break;
    }
    if (enc.input_dim == 0) throw ValidationError("input dimension must be positive");
    enc.context = BiLstm::create(pc, "context", enc.input_dim, sizes.context_dim / 2);
    return enc;
  }

  std::size_t context_dim() const { return context.output_dim(); }

  void set_forget_biases(double value) const {
    context.fwd.set_forget_bias(value);
    context.bwd.set_forget_bias(value);
    if (stroke) {
      stroke->fwd.set_forget_bias(value);
      stroke->bwd.set_forget_bias(value);
    }
  }

  std::vector<ad::Expr> embed_tokens(ad::Graph& g, const Sequence& seq) const {
    std::vector<ad::Expr> xs;
    switch (kind) {
      case InputKind::vectors:
        for (const auto& v : seq.vectors) {
          if (v.size() != input_dim) {
            std::ostringstream os;
            os << "token vector of length " << v.size() << ", model expects " << input_dim;
            throw ValidationError(os.str());
          }
          xs.push_back(g.input(v));
        }
        break;
      case InputKind::symbols:
        xs = embed_symbols(g, *embeddings, vocab, seq.symbols);
        break;
      case InputKind::strokes:
        for (const auto& pts : stroke_point_features(seq.strokes)) {
          xs.push_back(embed_stroke(g, *stroke, pts));
        }
        break;
    }
    return xs;
  }

  ContextTable encode(ad::Graph& g, const Sequence& seq) const {
    auto xs = embed_tokens(g, seq);
    return encode_context(g, context, xs);
  }
};

}  // namespace srnn
