#pragma once

#include <array>
#include <cstddef>
#include <sstream>
#include <string>
#include <vector>

#include "srnn/errors.hpp"

namespace srnn {

enum class InputKind { vectors, symbols, strokes };

using Point = std::array<double, 2>;
using Stroke = std::vector<Point>;

// One labeled span. Positions are 0-based; the span covers
// [start, start + duration).
struct Segment {
  std::size_t start = 0;
  std::size_t duration = 0;
  int label = 0;

  std::size_t end() const { return start + duration; }
  friend bool operator==(const Segment&, const Segment&) = default;
};

struct LabeledSegmentation {
  std::vector<Segment> segments;

  static LabeledSegmentation from_durations(const std::vector<int>& labels,
                                            const std::vector<std::size_t>& durations) {
    if (labels.size() != durations.size()) {
      throw ValidationError("labels and durations differ in length");
    }
    LabeledSegmentation out;
    std::size_t pos = 0;
    for (std::size_t k = 0; k < labels.size(); ++k) {
      out.segments.push_back({pos, durations[k], labels[k]});
      pos += durations[k];
    }
    return out;
  }

  std::size_t size() const { return segments.size(); }
  bool empty() const { return segments.empty(); }

  std::size_t length() const {
    std::size_t n = 0;
    for (const Segment& s : segments) n += s.duration;
    return n;
  }

  std::vector<int> labels() const {
    std::vector<int> out;
    for (const Segment& s : segments) out.push_back(s.label);
    return out;
  }

  std::vector<std::size_t> durations() const {
    std::vector<std::size_t> out;
    for (const Segment& s : segments) out.push_back(s.duration);
    return out;
  }

  // Contiguous, positive durations covering exactly n positions.
  void validate(std::size_t n) const {
    std::size_t pos = 0;
    for (std::size_t k = 0; k < segments.size(); ++k) {
      const Segment& s = segments[k];
      if (s.duration == 0 || s.start != pos) {
        std::ostringstream os;
        os << "segment " << k + 1 << " is empty or not contiguous";
        throw ValidationError(os.str());
      }
      pos += s.duration;
    }
    if (pos != n) {
      std::ostringstream os;
      os << "durations sum to " << pos << " but the sequence has " << n << " tokens";
      throw ValidationError(os.str());
    }
  }

  friend bool operator==(const LabeledSegmentation&, const LabeledSegmentation&) = default;
};

// One input instance. Exactly one of vectors / symbols / strokes is filled,
// according to the corpus kind.
struct Sequence {
  std::vector<std::vector<double>> vectors;
  std::vector<std::string> symbols;
  std::vector<Stroke> strokes;
  std::vector<int> labels;
  std::vector<std::size_t> durations;

  std::size_t length() const {
    if (!vectors.empty()) return vectors.size();
    if (!symbols.empty()) return symbols.size();
    return strokes.size();
  }

  bool has_durations() const { return !durations.empty(); }

  LabeledSegmentation gold() const { return LabeledSegmentation::from_durations(labels, durations); }
};

}  // namespace srnn
