#pragma once

#include <algorithm>
#include <cstddef>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "srnn/diffgraph.hpp"
#include "srnn/encoder.hpp"

namespace srnn {

// Two independently parameterized single-direction LSTMs over context vectors.
struct SegmentEncoder {
  LstmCell fwd;
  LstmCell rev;

  static SegmentEncoder create(ad::ParameterCollection& pc, std::size_t context_dim,
                               std::size_t hidden_dim) {
    return {LstmCell::create(pc, "segment.fwd", context_dim, hidden_dim),
            LstmCell::create(pc, "segment.rev", context_dim, hidden_dim)};
  }

  std::size_t dim() const { return fwd.hidden_dim; }
};

// Forward and reverse embeddings of every span of length <= max_len,
// stored densely over the band. Spans are addressed by (start, length) with
// 0-based start.
class SegmentTable {
 public:
  SegmentTable() = default;
  SegmentTable(std::size_t length, std::size_t max_len)
      : length_(length), max_len_(std::min(max_len, length)) {
    fwd_.resize(length_ * max_len_);
    rev_.resize(length_ * max_len_);
  }

  std::size_t length() const { return length_; }
  std::size_t max_len() const { return max_len_; }

  bool contains(std::size_t start, std::size_t len) const {
    return len >= 1 && len <= max_len_ && start + len <= length_;
  }

  ad::Expr fwd(std::size_t start, std::size_t len) const { return fwd_[index(start, len)]; }
  ad::Expr rev(std::size_t start, std::size_t len) const { return rev_[index(start, len)]; }

  // Cells per direction.
  std::size_t cell_count() const {
    std::size_t n = 0;
    for (std::size_t len = 1; len <= max_len_; ++len) n += length_ - len + 1;
    return n;
  }

  std::size_t rnn_steps() const { return rnn_steps_; }

 private:
  friend SegmentTable build_segment_table(ad::Graph&, const SegmentEncoder&, const ContextTable&,
                                          std::size_t);

  std::size_t index(std::size_t start, std::size_t len) const {
    if (!contains(start, len)) {
      std::ostringstream os;
      os << "segment table has no span (start " << start << ", length " << len << ")";
      throw std::out_of_range(os.str());
    }
    return start * max_len_ + (len - 1);
  }

  std::size_t length_ = 0;
  std::size_t max_len_ = 0;
  std::size_t rnn_steps_ = 0;
  std::vector<ad::Expr> fwd_;
  std::vector<ad::Expr> rev_;
};

// Forward cells extend h(i, j-1) by c_j; reverse cells extend h(i+1, j) by
// c_i. Every cell costs one LSTM step.
inline SegmentTable build_segment_table(ad::Graph& g, const SegmentEncoder& enc,
                                        const ContextTable& ctx, std::size_t max_len) {
  if (max_len == 0) throw ValidationError("maximum segment length must be at least 1");
  const std::size_t n = ctx.size();
  SegmentTable table(n, max_len);
  const std::size_t L = table.max_len();
  for (std::size_t i = 0; i < n; ++i) {
    std::optional<LstmState> state;
    for (std::size_t len = 1; len <= L && i + len <= n; ++len) {
      state = lstm_step(g, enc.fwd, state, ctx[i + len - 1]);
      table.fwd_[table.index(i, len)] = state->h;
      ++table.rnn_steps_;
    }
  }
  for (std::size_t end = n; end > 0; --end) {
    std::optional<LstmState> state;
    for (std::size_t len = 1; len <= L && len <= end; ++len) {
      const std::size_t start = end - len;
      state = lstm_step(g, enc.rev, state, ctx[start]);
      table.rev_[table.index(start, len)] = state->h;
      ++table.rnn_steps_;
    }
  }
  return table;
}

}  // namespace srnn
