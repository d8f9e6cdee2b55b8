#pragma once

// Line-delimited JSON corpora. One object per line:
//   {"tokens": [...], "labels": ["N", "V"], "durations": [2, 1]}
// Tokens are strings (symbols), lists of numbers (feature vectors) or lists
// of [x, y] point lists (strokes). `labels` and `durations` may be absent on
// input that is only decoded.

#include <algorithm>
#include <cstddef>
#include <fstream>
#include <istream>
#include <ostream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "srnn/errors.hpp"
#include "srnn/sequence.hpp"

namespace srnn {

struct Corpus {
  InputKind kind = InputKind::vectors;
  std::vector<std::string> labels;  // inventory; Sequence::labels index into it
  std::vector<Sequence> instances;

  std::size_t size() const { return instances.size(); }
  bool empty() const { return instances.empty(); }

  std::size_t feature_dim() const {
    for (const auto& s : instances)
      if (!s.vectors.empty()) return s.vectors.front().size();
    return 0;
  }

  // Sorted distinct symbols.
  std::vector<std::string> vocabulary() const {
    std::set<std::string> seen;
    for (const auto& s : instances) seen.insert(s.symbols.begin(), s.symbols.end());
    return {seen.begin(), seen.end()};
  }

  bool all_have_durations() const {
    return std::all_of(instances.begin(), instances.end(),
                       [](const Sequence& s) { return s.has_durations(); });
  }

  bool all_have_labels() const {
    return std::all_of(instances.begin(), instances.end(),
                       [](const Sequence& s) { return !s.labels.empty(); });
  }

  std::size_t longest_segment() const {
    std::size_t m = 0;
    for (const auto& s : instances)
      for (std::size_t d : s.durations) m = std::max(m, d);
    return m;
  }
};

namespace detail {

inline std::string at_line(std::size_t line, const std::string& msg) {
  return "line " + std::to_string(line) + ": " + msg;
}

inline InputKind token_kind(const nlohmann::json& tok, std::size_t line) {
  if (tok.is_string()) return InputKind::symbols;
  if (tok.is_array() && !tok.empty() && tok.front().is_number()) return InputKind::vectors;
  if (tok.is_array() && !tok.empty() && tok.front().is_array()) return InputKind::strokes;
  throw ValidationError(at_line(line, "token must be a string, a number list or a point list"));
}

}  // namespace detail

// Throws ValidationError on malformed lines, inconsistent tokens, label and
// duration mismatches, and (when max_seg_len > 0) gold segments longer than
// max_seg_len, listing every offender.
inline Corpus parse_corpus(std::istream& in, std::size_t max_seg_len = 0) {
  using nlohmann::json;
  struct Raw {
    Sequence seq;
    std::vector<std::string> labels;
    std::size_t line;
  };
  std::vector<Raw> raws;
  std::set<std::string> inventory;
  Corpus corpus;
  bool kind_known = false;
  std::size_t dim = 0;
  std::vector<std::string> offenders;

  std::string text;
  std::size_t line = 0;
  while (std::getline(in, text)) {
    ++line;
    if (text.find_first_not_of(" \t\r") == std::string::npos) continue;
    json obj;
    try {
      obj = json::parse(text);
    } catch (const json::exception& e) {
      throw ValidationError(detail::at_line(line, std::string("malformed record: ") + e.what()));
    }
    if (!obj.is_object() || !obj.contains("tokens") || !obj["tokens"].is_array()) {
      throw ValidationError(detail::at_line(line, "record needs a \"tokens\" list"));
    }
    const json& tokens = obj["tokens"];
    if (tokens.empty()) throw ValidationError(detail::at_line(line, "empty token list"));
    Raw raw{{}, {}, line};
    try {
      for (const json& tok : tokens) {
        const InputKind k = detail::token_kind(tok, line);
        if (!kind_known) {
          corpus.kind = k;
          kind_known = true;
        } else if (k != corpus.kind) {
          throw ValidationError(detail::at_line(line, "token kind differs from earlier records"));
        }
        switch (k) {
          case InputKind::symbols: raw.seq.symbols.push_back(tok.get<std::string>()); break;
          case InputKind::vectors: {
            auto v = tok.get<std::vector<double>>();
            if (dim == 0) dim = v.size();
            if (v.size() != dim) {
              throw ValidationError(detail::at_line(
                  line, "feature vector of size " + std::to_string(v.size()) + ", expected " +
                            std::to_string(dim)));
            }
            raw.seq.vectors.push_back(std::move(v));
            break;
          }
          case InputKind::strokes: {
            Stroke stroke;
            for (const json& p : tok) stroke.push_back(p.get<Point>());
            raw.seq.strokes.push_back(std::move(stroke));
            break;
          }
        }
      }
      if (obj.contains("labels")) raw.labels = obj["labels"].get<std::vector<std::string>>();
      if (obj.contains("durations")) {
        for (const json& d : obj["durations"]) {
          if (!d.is_number_integer() || d.get<long long>() <= 0) {
            throw ValidationError(detail::at_line(line, "durations must be positive integers"));
          }
          raw.seq.durations.push_back(d.get<std::size_t>());
        }
      }
    } catch (const json::exception& e) {
      throw ValidationError(detail::at_line(line, std::string("malformed record: ") + e.what()));
    }
    const std::size_t n = raw.seq.length();
    if (raw.labels.size() > n) {
      throw ValidationError(detail::at_line(line, "more labels than tokens"));
    }
    if (raw.seq.has_durations()) {
      if (raw.seq.durations.size() != raw.labels.size()) {
        throw ValidationError(detail::at_line(line, "one duration per label is required"));
      }
      std::size_t total = 0;
      for (std::size_t k = 0; k < raw.seq.durations.size(); ++k) {
        total += raw.seq.durations[k];
        if (max_seg_len && raw.seq.durations[k] > max_seg_len) {
          offenders.push_back("line " + std::to_string(line) + " segment " +
                              std::to_string(k + 1) + " (duration " +
                              std::to_string(raw.seq.durations[k]) + ")");
        }
      }
      if (total != n) {
        throw ValidationError(detail::at_line(line, "durations sum to " + std::to_string(total) +
                                                        " but there are " + std::to_string(n) +
                                                        " tokens"));
      }
    }
    inventory.insert(raw.labels.begin(), raw.labels.end());
    raws.push_back(std::move(raw));
  }
  if (raws.empty()) throw ValidationError("empty corpus");
  if (!offenders.empty()) {
    std::ostringstream os;
    os << "gold segments longer than the maximum segment length " << max_seg_len << ":";
    for (const auto& o : offenders) os << "\n  " << o;
    throw ValidationError(os.str());
  }
  corpus.labels.assign(inventory.begin(), inventory.end());
  for (auto& raw : raws) {
    for (const auto& name : raw.labels) {
      auto it = std::lower_bound(corpus.labels.begin(), corpus.labels.end(), name);
      raw.seq.labels.push_back(static_cast<int>(it - corpus.labels.begin()));
    }
    corpus.instances.push_back(std::move(raw.seq));
  }
  return corpus;
}

inline Corpus load_corpus(const std::string& path, std::size_t max_seg_len = 0) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open corpus file '" + path + "'");
  try {
    return parse_corpus(in, max_seg_len);
  } catch (const ValidationError& e) {
    throw ValidationError(path + ": " + e.what());
  }
}

inline nlohmann::json to_json(const Sequence& s, const std::vector<std::string>& labels) {
  nlohmann::json obj;
  if (!s.symbols.empty()) {
    obj["tokens"] = s.symbols;
  } else if (!s.vectors.empty()) {
    obj["tokens"] = s.vectors;
  } else {
    obj["tokens"] = s.strokes;
  }
  if (!s.labels.empty()) {
    std::vector<std::string> names;
    for (int y : s.labels) names.push_back(labels.at(y));
    obj["labels"] = names;
  }
  if (s.has_durations()) obj["durations"] = s.durations;
  return obj;
}

inline void write_corpus(std::ostream& out, const Corpus& corpus) {
  for (const auto& s : corpus.instances) out << to_json(s, corpus.labels).dump() << '\n';
}

inline void save_corpus(const std::string& path, const Corpus& corpus) {
  std::ofstream out(path);
  if (!out) throw ValidationError("cannot write corpus file '" + path + "'");
  write_corpus(out, corpus);
}

// Re-expresses label ids against another inventory (a model's).
inline Corpus remap_labels(Corpus corpus, const std::vector<std::string>& inventory) {
  std::vector<int> map(corpus.labels.size(), -1);
  for (std::size_t y = 0; y < corpus.labels.size(); ++y) {
    auto it = std::find(inventory.begin(), inventory.end(), corpus.labels[y]);
    if (it == inventory.end()) {
      throw ValidationError("label '" + corpus.labels[y] + "' is not in the model's inventory");
    }
    map[y] = static_cast<int>(it - inventory.begin());
  }
  for (auto& s : corpus.instances)
    for (int& y : s.labels) y = map[y];
  corpus.labels = inventory;
  return corpus;
}

}  // namespace srnn
