#include "attnsum/encoder.hpp"

#include <string>

namespace attnsum {
namespace {

void layer_norm_rows(RowMatrixXf& x, const ConstVectorMap& gain, const ConstVectorMap& bias,
                     float eps) {
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    auto row = x.row(i);
    const float mean = row.mean();
    row.array() -= mean;
    const float var = row.squaredNorm() / static_cast<float>(row.size());
    row *= 1.0f / std::sqrt(var + eps);
    row = row.cwiseProduct(gain) + bias;
  }
}

// x W^T + b with W stored output-major.
RowMatrixXf linear(const RowMatrixXf& x, const WeightStore& w, const std::string& prefix) {
  RowMatrixXf y = x * w.matrix(prefix + ".weight").transpose();
  y.rowwise() += w.vector(prefix + ".bias");
  return y;
}

float gelu(float x) {
  constexpr float kSqrt2OverPi = 0.7978845608028654f;
  return 0.5f * x * (1.0f + std::tanh(kSqrt2OverPi * (x + 0.044715f * x * x * x)));
}

}  // namespace

RowMatrixXf embed(const TokenSequence& seq, const WeightStore& weights) {
  const auto& cfg = weights.config();
  const auto n = static_cast<Eigen::Index>(seq.ids.size());
  if (n > cfg.max_positions)
    throw Error(ErrorCode::SequenceTooLong, std::to_string(n) + " tokens exceed " +
                                                std::to_string(cfg.max_positions) + " positions");
  if (seq.segment_ids.size() != seq.ids.size())
    throw Error(ErrorCode::DimensionMismatch, "segment_ids length differs from ids");

  const auto token = weights.matrix("embeddings.token");
  const auto position = weights.matrix("embeddings.position");
  const auto segment = weights.matrix("embeddings.segment");

  RowMatrixXf x(n, cfg.hidden_size);
  for (Eigen::Index i = 0; i < n; ++i) {
    const int id = seq.ids[static_cast<std::size_t>(i)];
    const int seg = seq.segment_ids[static_cast<std::size_t>(i)];
    if (id < 0 || id >= cfg.vocab_size)
      throw Error(ErrorCode::IdOutOfRange, "token id " + std::to_string(id));
    if (seg < 0 || seg >= cfg.type_vocab_size)
      throw Error(ErrorCode::IdOutOfRange, "segment id " + std::to_string(seg));
    x.row(i) = token.row(id) + position.row(i) + segment.row(seg);
  }
  layer_norm_rows(x, weights.vector("embeddings.layernorm.gain"),
                  weights.vector("embeddings.layernorm.bias"),
                  static_cast<float>(cfg.layer_norm_epsilon));
  return x;
}

EncoderOutput encoder_forward(const TokenSequence& seq, const WeightStore& weights) {
  const auto& cfg = weights.config();
  const auto eps = static_cast<float>(cfg.layer_norm_epsilon);
  const int dk = cfg.head_dim();

  EncoderOutput out;
  RowMatrixXf x = embed(seq, weights);
  const Eigen::Index n = x.rows();
  out.attentions.resize(static_cast<std::size_t>(cfg.num_layers));

  for (int l = 0; l < cfg.num_layers; ++l) {
    const auto p = "layer." + std::to_string(l) + ".";
    const RowMatrixXf q = linear(x, weights, p + "attn.q");
    const RowMatrixXf k = linear(x, weights, p + "attn.k");
    const RowMatrixXf v = linear(x, weights, p + "attn.v");

    RowMatrixXf context(n, cfg.hidden_size);
    auto& layer_attn = out.attentions[static_cast<std::size_t>(l)];
    layer_attn.reserve(static_cast<std::size_t>(cfg.num_heads));
    for (int h = 0; h < cfg.num_heads; ++h) {
      auto head = attention_head(q.middleCols(h * dk, dk), k.middleCols(h * dk, dk),
                                 v.middleCols(h * dk, dk));
      context.middleCols(h * dk, dk) = head.context;
      layer_attn.push_back(std::move(head.weights));
    }

    RowMatrixXf attn = linear(context, weights, p + "attn.out");
    x += attn;
    layer_norm_rows(x, weights.vector(p + "attn_layernorm.gain"),
                    weights.vector(p + "attn_layernorm.bias"), eps);

    RowMatrixXf ff = linear(x, weights, p + "ffn.in").unaryExpr(&gelu);
    x += linear(ff, weights, p + "ffn.out");
    layer_norm_rows(x, weights.vector(p + "ffn_layernorm.gain"),
                    weights.vector(p + "ffn_layernorm.bias"), eps);
  }
  out.hidden = std::move(x);
  return out;
}

}  // namespace attnsum
