#include "attnsum/weights.hpp"

#include <algorithm>
#include <bit>
#include <cstring>
#include <fstream>
#include <functional>
#include <numeric>
#include <sstream>

#include <json.hpp>

#include "attnsum/error.hpp"

static_assert(std::endian::native == std::endian::little,
              "weight files are little-endian; big-endian hosts need byte swapping");

namespace attnsum {
namespace {

using Shape = std::vector<std::int64_t>;

std::int64_t numel(const Shape& shape) {
  return std::accumulate(shape.begin(), shape.end(), std::int64_t{1}, std::multiplies<>());
}

std::string shape_str(const Shape& shape) {
  std::ostringstream os;
  os << '[';
  for (std::size_t i = 0; i < shape.size(); ++i) os << (i ? "," : "") << shape[i];
  os << ']';
  return os.str();
}

EncoderConfig config_from_json(const nlohmann::json& j) {
  EncoderConfig c;
  try {
    c.num_layers = j.at("num_layers").get<int>();
    c.num_heads = j.at("num_heads").get<int>();
    c.hidden_size = j.at("hidden_size").get<int>();
    c.intermediate_size = j.at("intermediate_size").get<int>();
    c.vocab_size = j.at("vocab_size").get<int>();
    c.max_positions = j.at("max_positions").get<int>();
    c.type_vocab_size = j.value("type_vocab_size", 2);
    c.layer_norm_epsilon = j.value("layer_norm_epsilon", 1e-12);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::ParseError, std::string("bad config in manifest: ") + e.what());
  }
  c.validate();
  return c;
}

nlohmann::json config_to_json(const EncoderConfig& c) {
  return {{"num_layers", c.num_layers},
          {"num_heads", c.num_heads},
          {"hidden_size", c.hidden_size},
          {"intermediate_size", c.intermediate_size},
          {"vocab_size", c.vocab_size},
          {"max_positions", c.max_positions},
          {"type_vocab_size", c.type_vocab_size},
          {"layer_norm_epsilon", c.layer_norm_epsilon}};
}

template <typename T>
void write_le(std::ostream& out, T value) {
  out.write(reinterpret_cast<const char*>(&value), sizeof(T));
}

}  // namespace

void EncoderConfig::validate() const {
  const bool positive = num_layers >= 1 && num_heads >= 1 && hidden_size >= 1 &&
                        intermediate_size >= 1 && vocab_size >= 1 && max_positions >= 1 &&
                        type_vocab_size >= 1;
  if (!positive) throw Error(ErrorCode::InvalidArgument, "encoder dimensions must be >= 1");
  if (hidden_size % num_heads != 0)
    throw Error(ErrorCode::InvalidArgument, "hidden_size must be divisible by num_heads");
  if (!(layer_norm_epsilon > 0.0))
    throw Error(ErrorCode::InvalidArgument, "layer_norm_epsilon must be positive");
}

std::vector<std::pair<std::string, Shape>> required_tensors(const EncoderConfig& c) {
  const std::int64_t d = c.hidden_size;
  const std::int64_t ff = c.intermediate_size;
  std::vector<std::pair<std::string, Shape>> out = {
      {"embeddings.token", {c.vocab_size, d}},
      {"embeddings.position", {c.max_positions, d}},
      {"embeddings.segment", {c.type_vocab_size, d}},
      {"embeddings.layernorm.gain", {d}},
      {"embeddings.layernorm.bias", {d}},
  };
  for (int l = 0; l < c.num_layers; ++l) {
    const auto p = "layer." + std::to_string(l) + ".";
    for (const char* proj : {"q", "k", "v", "out"}) {
      out.push_back({p + "attn." + proj + ".weight", {d, d}});
      out.push_back({p + "attn." + proj + ".bias", {d}});
    }
    out.push_back({p + "attn_layernorm.gain", {d}});
    out.push_back({p + "attn_layernorm.bias", {d}});
    out.push_back({p + "ffn.in.weight", {ff, d}});
    out.push_back({p + "ffn.in.bias", {ff}});
    out.push_back({p + "ffn.out.weight", {d, ff}});
    out.push_back({p + "ffn.out.bias", {d}});
    out.push_back({p + "ffn_layernorm.gain", {d}});
    out.push_back({p + "ffn_layernorm.bias", {d}});
  }
  return out;
}

WeightStore::WeightStore(EncoderConfig config, std::map<std::string, Tensor> tensors,
                         std::vector<TensorRecord> manifest)
    : config_(config), tensors_(std::move(tensors)), manifest_(std::move(manifest)) {
  config_.validate();
  for (const auto& [name, t] : tensors_) {
    if (numel(t.shape) != static_cast<std::int64_t>(t.data.size()))
      throw Error(ErrorCode::ShapeMismatch,
                  name + ": shape " + shape_str(t.shape) + " over " +
                      std::to_string(t.data.size()) + " floats");
  }
  for (const auto& [name, shape] : required_tensors(config_)) {
    auto it = tensors_.find(name);
    if (it == tensors_.end()) throw Error(ErrorCode::ShapeMismatch, name + ": missing tensor");
    if (it->second.shape != shape)
      throw Error(ErrorCode::ShapeMismatch, name + ": expected " + shape_str(shape) + ", got " +
                                                shape_str(it->second.shape));
  }
  if (manifest_.empty()) {
    std::uint64_t offset = 0;
    for (const auto& [name, t] : tensors_) {
      manifest_.push_back({name, t.shape, offset});
      offset += t.data.size();
    }
  }
}

const Tensor& WeightStore::tensor(const std::string& name) const {
  auto it = tensors_.find(name);
  if (it == tensors_.end()) throw Error(ErrorCode::ShapeMismatch, name + ": missing tensor");
  return it->second;
}

ConstMatrixMap WeightStore::matrix(const std::string& name) const {
  const auto& t = tensor(name);
  if (t.shape.size() != 2) throw Error(ErrorCode::ShapeMismatch, name + ": not a matrix");
  return ConstMatrixMap(t.data.data(), t.shape[0], t.shape[1]);
}

ConstVectorMap WeightStore::vector(const std::string& name) const {
  const auto& t = tensor(name);
  if (t.shape.size() != 1) throw Error(ErrorCode::ShapeMismatch, name + ": not a vector");
  return ConstVectorMap(t.data.data(), t.shape[0]);
}

WeightStore load_weights(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, "cannot open weights " + path.string());
  std::vector<char> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());

  if (bytes.size() < sizeof(kWeightMagic) ||
      std::memcmp(bytes.data(), kWeightMagic, sizeof(kWeightMagic)) != 0)
    throw Error(ErrorCode::BadMagic, path.string() + " is not an ATNSUMW1 file");

  constexpr std::size_t kHeader = 8 + 4 + 8;
  if (bytes.size() < kHeader) throw Error(ErrorCode::TruncatedBlob, "header cut short");
  std::uint32_t version = 0;
  std::uint64_t manifest_len = 0;
  std::memcpy(&version, bytes.data() + 8, 4);
  std::memcpy(&manifest_len, bytes.data() + 12, 8);
  if (version != kWeightVersion)
    throw Error(ErrorCode::VersionMismatch, "file version " + std::to_string(version) +
                                                ", expected " + std::to_string(kWeightVersion));
  if (manifest_len > bytes.size() - kHeader)
    throw Error(ErrorCode::TruncatedBlob, "manifest extends past end of file");

  nlohmann::json manifest;
  try {
    manifest = nlohmann::json::parse(bytes.begin() + kHeader,
                                     bytes.begin() + static_cast<std::ptrdiff_t>(kHeader + manifest_len));
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorCode::ParseError, std::string("manifest: ") + e.what());
  }

  const char* blob = bytes.data() + kHeader + manifest_len;
  const std::size_t blob_bytes = bytes.size() - kHeader - manifest_len;
  if (blob_bytes % sizeof(float) != 0)
    throw Error(ErrorCode::TruncatedBlob, "blob is not a whole number of float32 values");
  const std::uint64_t blob_len = blob_bytes / sizeof(float);

  const EncoderConfig config = config_from_json(manifest.value("config", nlohmann::json::object()));

  std::vector<TensorRecord> records;
  try {
    for (const auto& t : manifest.at("tensors")) {
      records.push_back({t.at("name").get<std::string>(), t.at("shape").get<Shape>(),
                         t.at("offset").get<std::uint64_t>()});
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::ParseError, std::string("manifest tensors: ") + e.what());
  }

  // Each tensor must exactly fill the span up to the next tensor (or the blob end).
  std::vector<const TensorRecord*> by_offset;
  for (const auto& r : records) by_offset.push_back(&r);
  std::stable_sort(by_offset.begin(), by_offset.end(),
                   [](const auto* a, const auto* b) { return a->offset < b->offset; });

  std::map<std::string, Tensor> tensors;
  for (std::size_t i = 0; i < by_offset.size(); ++i) {
    const auto& r = *by_offset[i];
    if (std::any_of(r.shape.begin(), r.shape.end(), [](auto d) { return d < 0; }))
      throw Error(ErrorCode::ShapeMismatch, r.name + ": negative dimension");
    const auto count = static_cast<std::uint64_t>(numel(r.shape));
    const bool last = i + 1 == by_offset.size();
    if (last) {
      if (r.offset > blob_len || blob_len - r.offset < count)
        throw Error(ErrorCode::TruncatedBlob, r.name + ": needs " + std::to_string(count) +
                                                  " floats past offset " + std::to_string(r.offset));
      if (blob_len - r.offset != count)
        throw Error(ErrorCode::ShapeMismatch, r.name + ": shape " + shape_str(r.shape) + " over " +
                                                  std::to_string(blob_len - r.offset) + " floats");
    } else {
      const auto span = by_offset[i + 1]->offset - r.offset;
      if (span != count)
        throw Error(ErrorCode::ShapeMismatch, r.name + ": shape " + shape_str(r.shape) + " over " +
                                                  std::to_string(span) + " floats");
    }
    Tensor t;
    t.shape = r.shape;
    t.data.resize(count);
    std::memcpy(t.data.data(), blob + r.offset * sizeof(float), count * sizeof(float));
    if (!tensors.emplace(r.name, std::move(t)).second)
      throw Error(ErrorCode::ParseError, r.name + ": duplicate tensor name");
  }

  return WeightStore(config, std::move(tensors), std::move(records));
}

void save_weights(const WeightStore& store, const std::filesystem::path& path) {
  nlohmann::json tensors = nlohmann::json::array();
  std::uint64_t offset = 0;
  for (const auto& [name, t] : store.tensors()) {
    tensors.push_back({{"name", name}, {"shape", t.shape}, {"offset", offset}});
    offset += t.data.size();
  }
  const std::string manifest =
      nlohmann::json{{"config", config_to_json(store.config())}, {"tensors", tensors}}.dump();

  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::Io, "cannot write " + path.string());
  out.write(kWeightMagic, sizeof(kWeightMagic));
  write_le<std::uint32_t>(out, kWeightVersion);
  write_le<std::uint64_t>(out, manifest.size());
  out.write(manifest.data(), static_cast<std::streamsize>(manifest.size()));
  for (const auto& [name, t] : store.tensors())
    out.write(reinterpret_cast<const char*>(t.data.data()),
              static_cast<std::streamsize>(t.data.size() * sizeof(float)));
  if (!out) throw Error(ErrorCode::Io, "short write to " + path.string());
}

}  // namespace attnsum
