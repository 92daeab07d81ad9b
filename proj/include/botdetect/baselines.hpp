#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "botdetect/checkpoint.hpp"
#include "botdetect/core_data.hpp"
#include "botdetect/nn.hpp"
#include "botdetect/text_io.hpp"

namespace botdetect {

enum class BaselineKind { LogReg, SgdLinear, RandomForest, AdaBoost, Mlp };

const char* to_string(BaselineKind kind);
/// Accepts logreg, sgd, random_forest (rf), adaboost, mlp.
BaselineKind parse_baseline_kind(std::string_view text);
inline constexpr BaselineKind kAllBaselines[] = {BaselineKind::LogReg, BaselineKind::SgdLinear,
                                                 BaselineKind::RandomForest, BaselineKind::AdaBoost,
                                                 BaselineKind::Mlp};

struct BaselineConfig {
  std::uint64_t seed = 0;

  int logreg_epochs = 500;
  double logreg_learning_rate = 0.1;

  int sgd_epochs = 50;
  double sgd_learning_rate = 0.01;
  double sgd_l2 = 1e-4;

  int forest_trees = 100;
  int forest_max_depth = 0;  // 0 = unlimited
  int forest_min_leaf = 1;
  int forest_max_features = 0;  // 0 = floor(sqrt(d))

  int adaboost_rounds = 100;

  /// Hidden sizes followed by the output size, which must be 1.
  std::vector<Index> mlp_layers{500, 200, 1};
  nn::AdamSettings mlp_adam;
  std::size_t mlp_batch_size = 64;
  int mlp_epochs = 50;

  /// The hyperparameters relevant to `kind`, for reports.
  KeyValueFile to_key_values(BaselineKind kind) const;
};

/// Parses "500,200,1".
std::vector<Index> parse_layer_sizes(std::string_view text);
std::string format_layer_sizes(std::span<const Index> sizes);

struct TreeNode {
  int feature = -1;  // -1 for leaves
  double threshold = 0.0;
  int left = -1;
  int right = -1;
  /// Weighted fraction of Bot rows reaching the node.
  double value = 0.0;

  bool is_leaf() const { return feature < 0; }
};

/// A CART tree over standardized features; x[feature] <= threshold goes left.
struct DecisionTree {
  std::vector<TreeNode> nodes;

  const TreeNode& leaf_for(const Eigen::Ref<const VecX>& x) const;
  /// 1 if the leaf is majority Bot, 0 if majority Human, 0.5 on an exact tie.
  double vote(const Eigen::Ref<const VecX>& x) const;
  int depth() const;
};

struct Stump {
  int feature = 0;
  double threshold = 0.0;
  /// +1: x > threshold predicts Bot; -1: x <= threshold predicts Bot.
  int polarity = 1;
  double alpha = 0.0;
  /// Weighted training error at the round the stump was chosen.
  double error = 0.0;

  int predict(const Eigen::Ref<const VecX>& x) const {
    const bool above = x(feature) > threshold;
    return (above == (polarity > 0)) ? 1 : -1;
  }
};

/// Fully connected ReLU network with a sigmoid output, batched column-wise.
template <typename Scalar>
struct MlpNet {
  std::vector<nn::DenseLayer<Scalar>> layers;

  MlpNet() = default;
  MlpNet(Index inputs, std::span<const Index> sizes) {
    Index in = inputs;
    for (Index out : sizes) {
      layers.emplace_back(in, out);
      in = out;
    }
  }

  void init(Rng& rng) {
    for (auto& l : layers) l.init_glorot(rng);
  }

  void set_zero() {
    for (auto& l : layers) l.set_zero();
  }

  std::vector<nn::ParamBlock<Scalar>> blocks() {
    std::vector<nn::ParamBlock<Scalar>> out;
    for (auto& l : layers) {
      out.push_back(nn::block<Scalar>("weight", l.weight));
      out.push_back(nn::block<Scalar>("bias", l.bias));
    }
    return out;
  }

  /// Columns of `x` are samples; returns 1 x B probabilities. When `acts` is
  /// given it receives the input followed by every layer's post-activation
  /// (pre-activations can be recovered from the ReLU mask).
  RowVectorX<Scalar> forward(const MatrixX<Scalar>& x, std::vector<MatrixX<Scalar>>* acts = nullptr) const {
    MatrixX<Scalar> a = x;
    if (acts) acts->assign(1, a);
    for (std::size_t i = 0; i < layers.size(); ++i) {
      MatrixX<Scalar> z = layers[i].weight * a;
      z.colwise() += layers[i].bias;
      if (i + 1 < layers.size()) {
        a = z.cwiseMax(Scalar(0));
      } else {
        a = z.unaryExpr([](Scalar v) { return nn::sigmoid(v); });
      }
      if (acts) acts->push_back(a);
    }
    return a.row(0);
  }

  /// Mean binary cross-entropy over the batch; accumulates its gradient into `grad`.
  Scalar loss_and_gradient(const MatrixX<Scalar>& x, const RowVectorX<Scalar>& y, MlpNet& grad) const {
    std::vector<MatrixX<Scalar>> acts;
    const RowVectorX<Scalar> p = forward(x, &acts);
    const Index batch = x.cols();
    const Scalar inv = Scalar(1) / Scalar(batch);
    Scalar total(0);
    MatrixX<Scalar> delta(1, batch);
    for (Index j = 0; j < batch; ++j) {
      total += nn::bce(p(j), y(j));
      delta(0, j) = inv * nn::bce_logit_grad(p(j), y(j));
    }
    for (std::size_t i = layers.size(); i-- > 0;) {
      const MatrixX<Scalar>& input = acts[i];
      grad.layers[i].weight.noalias() += delta * input.transpose();
      grad.layers[i].bias += delta.rowwise().sum();
      if (i == 0) break;
      MatrixX<Scalar> back = layers[i].weight.transpose() * delta;
      delta = back.cwiseProduct(
          input.unaryExpr([](Scalar v) { return v > Scalar(0) ? Scalar(1) : Scalar(0); }));
    }
    return total * inv;
  }
};

/// A fitted classical classifier together with its training-set standardizer.
class BaselineModel {
 public:
  BaselineKind kind() const { return kind_; }
  const BaselineConfig& config() const { return config_; }
  const std::vector<std::string>& schema() const { return schema_; }
  const Standardizer& standardizer() const { return standardizer_; }

  /// Probability of Bot per row. Throws SchemaMismatch on a foreign schema.
  std::vector<double> predict_proba(const FeatureMatrix& matrix) const;
  std::vector<double> predict_proba(const RowMatX& raw_rows) const;
  /// Bot probability from an already standardized row.
  double score_standardized(const Eigen::Ref<const VecX>& z) const;

  /// Set when training saw one class only; every prediction equals it.
  const std::optional<double>& constant() const { return constant_; }

  // Kind-specific learned state.
  const VecX& linear_weights() const { return weights_; }
  double linear_bias() const { return bias_; }
  double platt_a() const { return platt_a_; }
  double platt_b() const { return platt_b_; }
  const std::vector<DecisionTree>& trees() const { return trees_; }
  const std::vector<Stump>& stumps() const { return stumps_; }
  const MlpNet<double>& mlp() const { return mlp_; }

  /// Training error after 1..T stumps on standardized rows (AdaBoost only).
  std::vector<double> staged_error(const RowMatX& z, std::span<const Label> labels) const;

  void write(StructuredText& out) const;
  static BaselineModel read(const StructuredText& in);

  /// Zero-weight linear model over `schema`, for tests and fixtures.
  static BaselineModel zero_logreg(std::vector<std::string> schema);

 private:
  friend BaselineModel fit_baseline(BaselineKind, const FeatureMatrix&, const BaselineConfig&);

  BaselineKind kind_ = BaselineKind::LogReg;
  BaselineConfig config_;
  std::vector<std::string> schema_;
  Standardizer standardizer_;
  std::optional<double> constant_;

  VecX weights_;
  double bias_ = 0.0;
  double platt_a_ = 1.0;
  double platt_b_ = 0.0;
  std::vector<DecisionTree> trees_;
  std::vector<Stump> stumps_;
  MlpNet<double> mlp_;
};

/// Deterministic under config.seed. Throws DegenerateData on empty or
/// non-finite input; single-class input yields a constant model.
BaselineModel fit_baseline(BaselineKind kind, const FeatureMatrix& matrix, const BaselineConfig& config);

/// Platt scaling: (A, B) minimising the cross-entropy of sigmoid(A s + B)
/// against smoothed targets.
std::pair<double, double> fit_platt(std::span<const double> scores, std::span<const Label> labels);

}  // namespace botdetect
