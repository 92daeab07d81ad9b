#pragma once

#include <optional>
#include <string>
#include <vector>

#include "botdetect/lstm.hpp"

namespace botdetect::nn {

enum class LstmVariant {
  /// Text only: final hidden state -> dense stack -> main head.
  TweetOnly,
  /// Text + metadata: the final hidden state feeds an auxiliary head and is
  /// concatenated with the metadata vector before the dense stack.
  Contextual,
};

struct LstmArchitecture {
  LstmVariant variant = LstmVariant::Contextual;
  Index embedding_dim = 50;
  Index hidden_dim = 32;
  Index metadata_dim = 6;
  Index dense1_dim = 128;
  Index dense2_dim = 64;

  bool contextual() const { return variant == LstmVariant::Contextual; }
  Index head_input_dim() const { return hidden_dim + (contextual() ? metadata_dim : 0); }
};

struct LossWeights {
  double main = 0.8;
  double aux = 0.2;
};

template <typename Scalar>
struct ContextualLstmParams {
  LstmCell<Scalar> cell;
  DenseLayer<Scalar> aux_head;   // 1 x h (empty for TweetOnly)
  DenseLayer<Scalar> dense1;     // d1 x (h [+ m])
  DenseLayer<Scalar> dense2;     // d2 x d1
  DenseLayer<Scalar> main_head;  // 1 x d2

  ContextualLstmParams() = default;
  explicit ContextualLstmParams(const LstmArchitecture& a)
      : cell(a.embedding_dim, a.hidden_dim),
        aux_head(a.hidden_dim, a.contextual() ? 1 : 0),
        dense1(a.head_input_dim(), a.dense1_dim),
        dense2(a.dense1_dim, a.dense2_dim),
        main_head(a.dense2_dim, 1) {}

  /// Every tensor, in a fixed order; empty tensors are skipped.
  std::vector<ParamBlock<Scalar>> blocks() {
    std::vector<ParamBlock<Scalar>> out;
    auto add = [&](std::string_view name, auto& m) {
      if (m.size() > 0) out.push_back(block<Scalar>(name, m));
    };
    add("lstm.input_weights", cell.input_weights);
    add("lstm.recurrent_weights", cell.recurrent_weights);
    add("lstm.bias", cell.bias);
    add("aux_head.weight", aux_head.weight);
    add("aux_head.bias", aux_head.bias);
    add("dense1.weight", dense1.weight);
    add("dense1.bias", dense1.bias);
    add("dense2.weight", dense2.weight);
    add("dense2.bias", dense2.bias);
    add("main_head.weight", main_head.weight);
    add("main_head.bias", main_head.bias);
    return out;
  }

  void set_zero() {
    cell.set_zero();
    aux_head.set_zero();
    dense1.set_zero();
    dense2.set_zero();
    main_head.set_zero();
  }
};

/// Intermediate values of one forward pass.
template <typename Scalar>
struct ForwardPass {
  LstmTrace<Scalar> lstm;
  VectorX<Scalar> head_input;  // final hidden [; standardized metadata]
  VectorX<Scalar> pre1, pre2;  // dense pre-activations
  VectorX<Scalar> act1, act2;
  Scalar main_score{};
  /// Equals main_score for the TweetOnly variant.
  Scalar aux_score{};

  auto final_hidden() const { return lstm.final_hidden(); }
};

template <typename Scalar>
struct LossParts {
  Scalar total{};
  Scalar main{};
  Scalar aux{};
};

/// total = w_main * bce(main) + w_aux * bce(aux). TweetOnly models pass
/// weights {1, 0}.
template <typename Scalar>
LossParts<Scalar> loss(Scalar main_score, Scalar aux_score, Scalar target, const LossWeights& w) {
  LossParts<Scalar> out;
  out.main = bce(main_score, target);
  out.aux = bce(aux_score, target);
  out.total = Scalar(w.main) * out.main + Scalar(w.aux) * out.aux;
  return out;
}

/// The network of the tweet-level detector. Metadata arrives raw and is
/// standardized with the stored training-set statistics.
template <typename Scalar>
class ContextualLstm {
 public:
  ContextualLstm() = default;
  explicit ContextualLstm(const LstmArchitecture& arch)
      : arch_(arch),
        params_(arch),
        metadata_mean_(VectorX<Scalar>::Zero(arch.contextual() ? arch.metadata_dim : 0)),
        metadata_scale_(VectorX<Scalar>::Ones(arch.contextual() ? arch.metadata_dim : 0)) {
    if (!arch.contextual()) weights_ = LossWeights{1.0, 0.0};
  }

  const LstmArchitecture& architecture() const { return arch_; }
  ContextualLstmParams<Scalar>& params() { return params_; }
  const ContextualLstmParams<Scalar>& params() const { return params_; }
  const LossWeights& loss_weights() const { return weights_; }
  void set_loss_weights(const LossWeights& w) { weights_ = w; }

  void set_metadata_standardizer(VectorX<Scalar> mean, VectorX<Scalar> scale) {
    metadata_mean_ = std::move(mean);
    metadata_scale_ = std::move(scale);
  }
  const VectorX<Scalar>& metadata_mean() const { return metadata_mean_; }
  const VectorX<Scalar>& metadata_scale() const { return metadata_scale_; }

  void init(Rng& rng) {
    params_.cell.init(rng);
    if (arch_.contextual()) params_.aux_head.init_glorot(rng);
    params_.dense1.init_glorot(rng);
    params_.dense2.init_glorot(rng);
    params_.main_head.init_glorot(rng);
  }

  template <typename DerivedS, typename DerivedM>
  ForwardPass<Scalar> forward(const Eigen::MatrixBase<DerivedS>& sequence, Index length,
                              const Eigen::MatrixBase<DerivedM>& metadata) const {
    ForwardPass<Scalar> fp;
    fp.lstm = lstm_forward(params_.cell, sequence, length);
    const auto h = fp.lstm.final_hidden();
    if (arch_.contextual()) {
      if (metadata.size() != arch_.metadata_dim) {
        throw Error(ErrorKind::DimensionMismatch, "metadata width " + std::to_string(metadata.size()) +
                                                      " != " + std::to_string(arch_.metadata_dim));
      }
      fp.head_input.resize(arch_.head_input_dim());
      fp.head_input << h, (metadata.template cast<Scalar>() - metadata_mean_).cwiseQuotient(metadata_scale_);
      fp.aux_score = sigmoid(params_.aux_head(h)(0));
    } else {
      fp.head_input = h;
    }
    fp.pre1 = params_.dense1(fp.head_input);
    fp.act1 = relu(fp.pre1);
    fp.pre2 = params_.dense2(fp.act1);
    fp.act2 = relu(fp.pre2);
    fp.main_score = sigmoid(params_.main_head(fp.act2)(0));
    if (!arch_.contextual()) fp.aux_score = fp.main_score;
    return fp;
  }

  /// Accumulates `scale` x d(loss)/d(params) for one sample into `grad`.
  template <typename DerivedS>
  void backward(const Eigen::MatrixBase<DerivedS>& sequence, const ForwardPass<Scalar>& fp, Scalar target,
                Scalar scale, ContextualLstmParams<Scalar>& grad) const {
    const Index h = arch_.hidden_dim;
    VectorX<Scalar> d_main(1);
    d_main(0) = scale * Scalar(weights_.main) * bce_logit_grad(fp.main_score, target);
    VectorX<Scalar> d_act2 = params_.main_head.backward(d_main, fp.act2, grad.main_head);
    VectorX<Scalar> d_pre2 = d_act2.cwiseProduct(relu_mask(fp.pre2));
    VectorX<Scalar> d_act1 = params_.dense2.backward(d_pre2, fp.act1, grad.dense2);
    VectorX<Scalar> d_pre1 = d_act1.cwiseProduct(relu_mask(fp.pre1));
    VectorX<Scalar> d_input = params_.dense1.backward(d_pre1, fp.head_input, grad.dense1);
    VectorX<Scalar> d_hidden = d_input.head(h);
    if (arch_.contextual()) {
      VectorX<Scalar> d_aux(1);
      d_aux(0) = scale * Scalar(weights_.aux) * bce_logit_grad(fp.aux_score, target);
      d_hidden += params_.aux_head.backward(d_aux, fp.final_hidden(), grad.aux_head);
    }
    if (fp.lstm.steps() > 0) lstm_backward(params_.cell, sequence, fp.lstm, d_hidden, grad.cell);
  }

  LossParts<Scalar> loss(const ForwardPass<Scalar>& fp, Scalar target) const {
    return nn::loss(fp.main_score, fp.aux_score, target, weights_);
  }

 private:
  LstmArchitecture arch_;
  ContextualLstmParams<Scalar> params_;
  LossWeights weights_;
  VectorX<Scalar> metadata_mean_;
  VectorX<Scalar> metadata_scale_;
};

}  // namespace botdetect::nn
