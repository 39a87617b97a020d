#pragma once

#include <cmath>
#include <vector>

#include <Eigen/Core>

#include "attnsum/corpus.hpp"
#include "attnsum/error.hpp"
#include "attnsum/weights.hpp"

namespace attnsum {

template <typename Scalar>
using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

template <typename Scalar>
struct HeadOutput {
  Matrix<Scalar> context;  // n x d_k
  Matrix<Scalar> weights;  // n x n, row-stochastic
};

/// Scaled dot-product attention for one head:
///   weights = softmax_rows(Q K^T / sqrt(d_k)),  context = weights V.
/// Accepts any Eigen expression, so column blocks of a packed projection can
/// be passed without copying.
template <typename DerivedQ, typename DerivedK, typename DerivedV>
HeadOutput<typename DerivedQ::Scalar> attention_head(const Eigen::MatrixBase<DerivedQ>& q,
                                                     const Eigen::MatrixBase<DerivedK>& k,
                                                     const Eigen::MatrixBase<DerivedV>& v) {
  using Scalar = typename DerivedQ::Scalar;
  if (q.rows() != k.rows() || q.rows() != v.rows() || q.cols() != k.cols() ||
      q.cols() != v.cols() || q.rows() == 0)
    throw Error(ErrorCode::DimensionMismatch, "Q, K, V must share n >= 1 and d_k");

  const Scalar scale = Scalar(1) / std::sqrt(static_cast<Scalar>(q.cols()));
  HeadOutput<Scalar> out;
  out.weights.noalias() = (q * k.transpose()) * scale;
  for (Eigen::Index i = 0; i < out.weights.rows(); ++i) {
    auto row = out.weights.row(i);
    row = (row.array() - row.maxCoeff()).exp().matrix();
    row /= row.sum();
  }
  out.context.noalias() = out.weights * v;
  return out;
}

struct EncoderOutput {
  RowMatrixXf hidden;                            // n x hidden_size, last layer
  std::vector<std::vector<RowMatrixXf>> attentions;  // [layer][head], each n x n
};

/// Token + position + segment embeddings followed by LayerNorm.
RowMatrixXf embed(const TokenSequence& seq, const WeightStore& weights);

/// Post-LayerNorm transformer encoder (GELU feed-forward). Re-entrant: all
/// scratch lives in the call, so one WeightStore can serve many threads.
EncoderOutput encoder_forward(const TokenSequence& seq, const WeightStore& weights);

}  // namespace attnsum
