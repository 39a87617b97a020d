#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace attnsum {

using RowMatrixXf = Eigen::Matrix<float, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using ConstMatrixMap = Eigen::Map<const RowMatrixXf>;
using ConstVectorMap = Eigen::Map<const Eigen::RowVectorXf>;

struct EncoderConfig {
  int num_layers = 12;
  int num_heads = 12;
  int hidden_size = 768;
  int intermediate_size = 3072;
  int vocab_size = 30522;
  int max_positions = 512;
  int type_vocab_size = 2;
  double layer_norm_epsilon = 1e-12;

  int head_dim() const { return hidden_size / num_heads; }

  /// Throws Error(InvalidArgument) when a dimension is non-positive or the
  /// hidden size does not split evenly across heads.
  void validate() const;
};

struct Tensor {
  std::vector<std::int64_t> shape;
  std::vector<float> data;
};

/// One manifest entry as it appears on disk.
struct TensorRecord {
  std::string name;
  std::vector<std::int64_t> shape;
  std::uint64_t offset = 0;
};

inline constexpr char kWeightMagic[8] = {'A', 'T', 'N', 'S', 'U', 'M', 'W', '1'};
inline constexpr std::uint32_t kWeightVersion = 1;

/// Every tensor name the encoder reads, paired with its expected shape.
std::vector<std::pair<std::string, std::vector<std::int64_t>>> required_tensors(
    const EncoderConfig& config);

/// Immutable after construction; safe to share across threads.
class WeightStore {
 public:
  WeightStore(EncoderConfig config, std::map<std::string, Tensor> tensors,
              std::vector<TensorRecord> manifest = {});

  const EncoderConfig& config() const { return config_; }
  const std::vector<TensorRecord>& manifest() const { return manifest_; }
  const std::map<std::string, Tensor>& tensors() const { return tensors_; }

  const Tensor& tensor(const std::string& name) const;
  ConstMatrixMap matrix(const std::string& name) const;
  ConstVectorMap vector(const std::string& name) const;

 private:
  EncoderConfig config_;
  std::map<std::string, Tensor> tensors_;
  std::vector<TensorRecord> manifest_;
};

WeightStore load_weights(const std::filesystem::path& path);

/// Writes the store in the ATNSUMW1 layout, tensors in name order and packed
/// without gaps.
void save_weights(const WeightStore& store, const std::filesystem::path& path);

}  // namespace attnsum
