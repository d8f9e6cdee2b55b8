#pragma once

// Model file layout, all integers and doubles little-endian:
//
//   magic      8 bytes  "SRNNMODL"
//   version    u32      1
//   config     u64 length, then that many bytes of JSON
//   tensors    u32 count, then per tensor: u32 name length, name bytes,
//              u32 rank, rank x u64 extents
//   payload    every tensor's values as IEEE-754 binary64, tensors in the
//              order of the table, elements row-major
//
// Tensor order is parameter creation order, so the payload is a pure
// function of the configuration and the values.

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <istream>
#include <memory>
#include <ostream>
#include <sstream>
#include <string>
#include <type_traits>
#include <vector>

#include "json.hpp"
#include "srnn/errors.hpp"
#include "srnn/model.hpp"

namespace srnn {

inline constexpr char model_magic[8] = {'S', 'R', 'N', 'N', 'M', 'O', 'D', 'L'};
inline constexpr std::uint32_t model_format_version = 1;

namespace detail {

template <class T>
void put_le(std::ostream& out, T value) {
  using U = std::conditional_t<sizeof(T) == 8, std::uint64_t, std::uint32_t>;
  U bits = std::bit_cast<U>(value);
  char bytes[sizeof(U)];
  for (std::size_t k = 0; k < sizeof(U); ++k) bytes[k] = static_cast<char>((bits >> (8 * k)) & 0xff);
  out.write(bytes, sizeof(U));
}

template <class T>
T get_le(std::istream& in) {
  using U = std::conditional_t<sizeof(T) == 8, std::uint64_t, std::uint32_t>;
  unsigned char bytes[sizeof(U)];
  if (!in.read(reinterpret_cast<char*>(bytes), sizeof(U))) {
    throw ValidationError("model file is truncated");
  }
  U bits = 0;
  for (std::size_t k = 0; k < sizeof(U); ++k) bits |= static_cast<U>(bytes[k]) << (8 * k);
  return std::bit_cast<T>(bits);
}

inline ModelKind parse_model_kind(const std::string& s) {
  if (s == "srnn") return ModelKind::srnn;
  if (s == "bio") return ModelKind::bio;
  if (s == "ctc") return ModelKind::ctc;
  throw ValidationError("unknown model kind '" + s + "'");
}

inline InputKind parse_input_kind(const std::string& s) {
  if (s == "vectors") return InputKind::vectors;
  if (s == "symbols") return InputKind::symbols;
  if (s == "strokes") return InputKind::strokes;
  throw ValidationError("unknown input kind '" + s + "'");
}

}  // namespace detail

inline nlohmann::json config_to_json(const ModelConfig& c) {
  return {{"kind", to_string(c.kind)},       {"input", to_string(c.input)},
          {"feature_dim", c.feature_dim},    {"dims", format_dims(c.dims)},
          {"max_seg_len", c.max_seg_len},    {"labels", c.labels},
          {"vocab", c.vocab}};
}

inline ModelConfig config_from_json(const nlohmann::json& j) {
  try {
    ModelConfig c;
    c.kind = detail::parse_model_kind(j.at("kind").get<std::string>());
    c.input = detail::parse_input_kind(j.at("input").get<std::string>());
    c.feature_dim = j.at("feature_dim").get<std::size_t>();
    c.dims = parse_dims(j.at("dims").get<std::string>());
    c.max_seg_len = j.at("max_seg_len").get<std::size_t>();
    c.labels = j.at("labels").get<std::vector<std::string>>();
    c.vocab = j.at("vocab").get<std::vector<std::string>>();
    return c;
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("bad model configuration: ") + e.what());
  }
}

inline void write_model(std::ostream& out, const Model& model) {
  out.write(model_magic, sizeof model_magic);
  detail::put_le<std::uint32_t>(out, model_format_version);
  const std::string config = config_to_json(model.config()).dump();
  detail::put_le<std::uint64_t>(out, config.size());
  out.write(config.data(), static_cast<std::streamsize>(config.size()));
  const auto& params = model.params();
  detail::put_le<std::uint32_t>(out, static_cast<std::uint32_t>(params.size()));
  for (std::size_t p = 0; p < params.size(); ++p) {
    const auto& par = params[p];
    detail::put_le<std::uint32_t>(out, static_cast<std::uint32_t>(par.name.size()));
    out.write(par.name.data(), static_cast<std::streamsize>(par.name.size()));
    detail::put_le<std::uint32_t>(out, static_cast<std::uint32_t>(par.value.shape().size()));
    for (std::size_t e : par.value.shape()) detail::put_le<std::uint64_t>(out, e);
  }
  for (std::size_t p = 0; p < params.size(); ++p) {
    for (double x : params[p].value.data()) detail::put_le<double>(out, x);
  }
}

inline std::unique_ptr<Model> read_model(std::istream& in) {
  char magic[sizeof model_magic];
  if (!in.read(magic, sizeof magic) || std::memcmp(magic, model_magic, sizeof magic) != 0) {
    throw ValidationError("not a model file");
  }
  const auto version = detail::get_le<std::uint32_t>(in);
  if (version != model_format_version) {
    throw ValidationError("unsupported model file version " + std::to_string(version));
  }
  const auto config_len = detail::get_le<std::uint64_t>(in);
  if (config_len > (std::uint64_t{1} << 30)) throw ValidationError("model file is corrupt");
  std::string config(config_len, '\0');
  if (!in.read(config.data(), static_cast<std::streamsize>(config_len))) {
    throw ValidationError("model file is truncated");
  }
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(config);
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("bad model configuration: ") + e.what());
  }
  auto model = std::make_unique<Model>(config_from_json(j));
  auto& params = model->params();
  const auto count = detail::get_le<std::uint32_t>(in);
  if (count != params.size()) {
    throw ValidationError("model file has " + std::to_string(count) + " tensors, configuration implies " +
                          std::to_string(params.size()));
  }
  for (std::size_t p = 0; p < count; ++p) {
    const auto name_len = detail::get_le<std::uint32_t>(in);
    if (name_len > 4096) throw ValidationError("model file is corrupt");
    std::string name(name_len, '\0');
    if (!in.read(name.data(), name_len)) throw ValidationError("model file is truncated");
    const auto rank = detail::get_le<std::uint32_t>(in);
    if (rank > 8) throw ValidationError("model file is corrupt");
    std::vector<std::size_t> shape;
    for (std::uint32_t r = 0; r < rank; ++r) shape.push_back(detail::get_le<std::uint64_t>(in));
    if (name != params[p].name || shape != params[p].value.shape()) {
      throw ValidationError("model file tensor " + std::to_string(p + 1) + " ('" + name +
                            "') does not match the configuration");
    }
  }
  for (std::size_t p = 0; p < count; ++p) {
    for (double& x : params[p].value.data()) x = detail::get_le<double>(in);
  }
  return model;
}

inline void save_model(const std::string& path, const Model& model) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ValidationError("cannot write model file '" + path + "'");
  write_model(out, model);
  if (!out) throw ValidationError("failed writing model file '" + path + "'");
}

inline std::unique_ptr<Model> load_model(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open model file '" + path + "'");
  try {
    return read_model(in);
  } catch (const ValidationError& e) {
    throw ValidationError(path + ": " + e.what());
  }
}

}  // namespace srnn
