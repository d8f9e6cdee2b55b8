#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "srnn/baselines.hpp"
#include "srnn/diffgraph.hpp"
#include "srnn/encoder.hpp"
#include "srnn/errors.hpp"
#include "srnn/rng.hpp"
#include "srnn/segcrf.hpp"
#include "srnn/segment_embed.hpp"
#include "srnn/sequence.hpp"

namespace srnn {

enum class ModelKind { srnn, bio, ctc };

inline const char* to_string(ModelKind k) {
  switch (k) {
    case ModelKind::srnn: return "srnn";
    case ModelKind::bio: return "bio";
    case ModelKind::ctc: return "ctc";
  }
  return "?";
}

inline const char* to_string(InputKind k) {
  switch (k) {
    case InputKind::vectors: return "vectors";
    case InputKind::symbols: return "symbols";
    case InputKind::strokes: return "strokes";
  }
  return "?";
}

// Layer widths. `context` and `tagger_context` count both directions.
struct Dims {
  std::size_t stroke_hidden = 5;
  std::size_t context = 24;
  std::size_t segment = 18;
  std::size_t potential = 16;
  std::size_t label = 8;
  std::size_t duration = 4;
  std::size_t embed = 64;
  std::size_t tagger_context = 128;

  friend bool operator==(const Dims&, const Dims&) = default;
};

// "context=24,segment=18": any subset of the Dims fields.
inline Dims parse_dims(const std::string& spec, Dims base = {}) {
  std::map<std::string, std::size_t*> fields{
      {"stroke", &base.stroke_hidden}, {"context", &base.context},
      {"segment", &base.segment},      {"potential", &base.potential},
      {"label", &base.label},          {"duration", &base.duration},
      {"embed", &base.embed},          {"tagger", &base.tagger_context}};
  std::istringstream in(spec);
  std::string item;
  while (std::getline(in, item, ',')) {
    if (item.empty()) continue;
    const auto eq = item.find('=');
    auto it = eq == std::string::npos ? fields.end() : fields.find(item.substr(0, eq));
    if (it == fields.end()) throw ValidationError("unknown dimension in '" + item + "'");
    std::size_t value = 0;
    try {
      value = std::stoul(item.substr(eq + 1));
    } catch (const std::exception&) {
      throw ValidationError("bad dimension value in '" + item + "'");
    }
    if (value == 0) throw ValidationError("dimension must be positive in '" + item + "'");
    *it->second = value;
  }
  return base;
}

inline std::string format_dims(const Dims& d) {
  std::ostringstream os;
  os << "stroke=" << d.stroke_hidden << ",context=" << d.context << ",segment=" << d.segment
     << ",potential=" << d.potential << ",label=" << d.label << ",duration=" << d.duration
     << ",embed=" << d.embed << ",tagger=" << d.tagger_context;
  return os.str();
}

struct ModelConfig {
  ModelKind kind = ModelKind::srnn;
  InputKind input = InputKind::vectors;
  std::size_t feature_dim = 0;  // vectors input only
  Dims dims;
  std::size_t max_seg_len = 0;  // 0: automatic per instance
  std::vector<std::string> labels;
  std::vector<std::string> vocab;  // symbols input only, excluding <unk>

  friend bool operator==(const ModelConfig&, const ModelConfig&) = default;
};

inline constexpr std::size_t auto_length_threshold = 64;

// Rows of the duration table.
inline std::size_t duration_capacity(const ModelConfig& c) {
  return c.max_seg_len ? c.max_seg_len : auto_length_threshold;
}

// Without an explicit bound, sequences up to 64 tokens are unpruned; longer
// ones use 6 for handwriting and 8 otherwise.
inline std::size_t max_len_for(const ModelConfig& c, std::size_t n) {
  std::size_t L = c.max_seg_len;
  if (L == 0) {
    L = n <= auto_length_threshold ? n : (c.input == InputKind::strokes ? 6 : 8);
  }
  return std::max<std::size_t>(1, std::min(L, n));
}

struct Prediction {
  std::vector<int> labels;
  std::optional<LabeledSegmentation> segmentation;  // absent for CTC
};

class Model {
 public:
  explicit Model(ModelConfig config) : config_(std::move(config)) {
    if (config_.labels.empty()) throw ValidationError("model needs at least one label");
    Vocabulary vocab;
    for (const auto& s : config_.vocab) vocab.add(s);
    InputEncoder::Sizes sizes;
    sizes.feature_dim = config_.feature_dim;
    sizes.embed_dim = config_.dims.embed;
    sizes.stroke_hidden = config_.dims.stroke_hidden;
    sizes.context_dim =
        config_.kind == ModelKind::bio ? config_.dims.tagger_context : config_.dims.context;
    encoder_ = InputEncoder::create(params_, config_.input, sizes, std::move(vocab));
    const std::size_t Y = config_.labels.size();
    switch (config_.kind) {
      case ModelKind::srnn:
        segment_ = SegmentEncoder::create(params_, encoder_.context_dim(), config_.dims.segment);
        potential_ = PotentialParams::create(params_, Y, duration_capacity(config_),
                                             config_.dims.label, config_.dims.duration,
                                             config_.dims.segment, config_.dims.potential);
        break;
      case ModelKind::bio:
        head_ = TaggerHead::create(params_, "bio", encoder_.context_dim(), BioTagSet{Y}.size());
        break;
      case ModelKind::ctc:
        head_ = TaggerHead::create(params_, "ctc", encoder_.context_dim(), CtcOutputSpace{Y}.size());
        break;
    }
  }

  Model(const Model&) = delete;
  Model& operator=(const Model&) = delete;

  // Glorot-uniform matrices, zero biases, embedding tables and the potential
  // output vector drawn wide enough that the potential's tanh layer starts
  // outside its linear regime. LSTM forget-gate biases at 1.
  void initialize(std::uint64_t seed) {
    Rng rng = make_stream(seed, "init");
    auto uniform = [&](ad::Parameter* p, double r) {
      std::uniform_real_distribution<double> u(-r, r);
      for (double& x : p->value.data()) x = u(rng);
    };
    for (std::size_t i = 0; i < params_.size(); ++i) {
      ad::Parameter& p = params_[i];
      if (p.value.shape().size() == 2) {
        uniform(&p, std::sqrt(6.0 / static_cast<double>(p.value.rows() + p.value.cols())));
      } else {
        for (double& x : p.value.data()) x = 0.0;
      }
    }
    if (encoder_.embeddings) uniform(encoder_.embeddings, 1.0);
    if (potential_) {
      uniform(potential_->label_emb, 1.0);
      uniform(potential_->duration_emb, 1.0);
      uniform(potential_->w, std::sqrt(6.0 / static_cast<double>(potential_->hidden_dim + 1)));
    }
    set_forget_biases();
  }

  // Every entry uniform in [-scale, scale], LSTM forget-gate biases at 1.
  void initialize(std::uint64_t seed, double scale) {
    Rng rng = make_stream(seed, "init");
    std::uniform_real_distribution<double> u(-scale, scale);
    for (std::size_t p = 0; p < params_.size(); ++p) {
      for (double& x : params_[p].value.data()) x = u(rng);
    }
    set_forget_biases();
  }

  const ModelConfig& config() const { return config_; }
  ModelKind kind() const { return config_.kind; }
  std::size_t num_labels() const { return config_.labels.size(); }
  ad::ParameterCollection& params() { return params_; }
  const ad::ParameterCollection& params() const { return params_; }

  const InputEncoder& encoder() const { return encoder_; }
  const SegmentEncoder& segment_encoder() const { return segment_.value(); }
  const PotentialParams& potential() const { return potential_.value(); }
  const TaggerHead& head() const { return head_.value(); }

  std::size_t max_len_for(std::size_t n) const { return srnn::max_len_for(config_, n); }

  std::optional<int> label_id(const std::string& name) const {
    auto it = std::find(config_.labels.begin(), config_.labels.end(), name);
    if (it == config_.labels.end()) return std::nullopt;
    return static_cast<int>(it - config_.labels.begin());
  }

 private:
  void set_forget_biases() {
    encoder_.set_forget_biases(1.0);
    if (segment_) {
      segment_->fwd.set_forget_bias(1.0);
      segment_->rev.set_forget_bias(1.0);
    }
  }

  ModelConfig config_;
  ad::ParameterCollection params_;
  InputEncoder encoder_;
  std::optional<SegmentEncoder> segment_;
  std::optional<PotentialParams> potential_;
  std::optional<TaggerHead> head_;
};

// Per-instance forward state of an SRNN: context, segment table, scorer.
struct SrnnForward {
  ContextTable context;
  SegmentTable table;
  std::optional<SegmentScorer> scorer;

  SrnnForward(ad::Graph& g, const Model& model, const Sequence& seq)
      : context(model.encoder().encode(g, seq)),
        table(build_segment_table(g, model.segment_encoder(), context,
                                  model.max_len_for(seq.length()))) {
    scorer.emplace(g, model.potential(), table);
  }

  SrnnForward(const SrnnForward&) = delete;
  SrnnForward& operator=(const SrnnForward&) = delete;
};

inline Prediction predict(const Model& model, const Sequence& seq) {
  if (seq.length() == 0) throw ValidationError("cannot decode an empty sequence");
  ad::Graph g;
  Prediction out;
  switch (model.kind()) {
    case ModelKind::srnn: {
      SrnnForward fwd(g, model, seq);
      out.segmentation = map_decode(*fwd.scorer);
      out.labels = out.segmentation->labels();
      break;
    }
    case ModelKind::bio: {
      auto tags = bio_tag(g, model.head(), model.encoder().encode(g, seq));
      out.segmentation = bio_to_segments(tags);
      out.labels = out.segmentation->labels();
      break;
    }
    case ModelKind::ctc: {
      auto lps = model.head().log_probs(g, model.encoder().encode(g, seq));
      out.labels = ctc_best_path_decode(g, lps, CtcOutputSpace{model.num_labels()}.blank());
      break;
    }
  }
  return out;
}

}  // namespace srnn
