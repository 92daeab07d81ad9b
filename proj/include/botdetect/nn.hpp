#pragma once

#include <algorithm>
#include <cmath>
#include <string_view>
#include <type_traits>
#include <vector>

#include <Eigen/Core>

#include "botdetect/rng.hpp"
#include "botdetect/types.hpp"

namespace botdetect::nn {

template <typename Scalar>
  requires std::is_floating_point_v<Scalar>
Scalar sigmoid(Scalar x) {
  using std::exp;
  return Scalar(1) / (Scalar(1) + exp(-x));
}

template <typename Derived>
auto sigmoid(const Eigen::MatrixBase<Derived>& x) {
  using Scalar = typename Derived::Scalar;
  return x.unaryExpr([](Scalar v) { return sigmoid(v); });
}

template <typename Derived>
auto relu(const Eigen::MatrixBase<Derived>& x) {
  return x.cwiseMax(typename Derived::Scalar(0));
}

/// 1 where x > 0, else 0.
template <typename Derived>
auto relu_mask(const Eigen::MatrixBase<Derived>& x) {
  using Scalar = typename Derived::Scalar;
  return x.unaryExpr([](Scalar v) { return v > Scalar(0) ? Scalar(1) : Scalar(0); });
}

inline constexpr double kProbabilityClamp = 1e-7;

/// Binary cross-entropy with the probability clamped to [1e-7, 1 - 1e-7].
template <typename Scalar>
Scalar bce(Scalar p, Scalar target) {
  using std::log;
  const Scalar lo(kProbabilityClamp);
  const Scalar q = std::clamp(p, lo, Scalar(1) - lo);
  return -(target * log(q) + (Scalar(1) - target) * log(Scalar(1) - q));
}

/// d bce / d logit for p = sigmoid(logit); zero where the clamp is active.
template <typename Scalar>
Scalar bce_logit_grad(Scalar p, Scalar target) {
  const Scalar lo(kProbabilityClamp);
  if (p < lo || p > Scalar(1) - lo) return Scalar(0);
  return p - target;
}

/// Flat view of one parameter tensor.
template <typename Scalar>
struct ParamBlock {
  std::string_view name;
  Eigen::Map<VectorX<Scalar>> values;
};

template <typename Scalar, typename Derived>
ParamBlock<Scalar> block(std::string_view name, Eigen::PlainObjectBase<Derived>& m) {
  return {name, Eigen::Map<VectorX<Scalar>>(m.data(), m.size())};
}

/// Glorot/Xavier uniform fill.
template <typename Derived>
void glorot_uniform(Eigen::MatrixBase<Derived>&& m, Index fan_in, Index fan_out, Rng& rng) {
  const double limit = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
  for (Index c = 0; c < m.cols(); ++c) {
    for (Index r = 0; r < m.rows(); ++r) {
      m(r, c) = static_cast<typename Derived::Scalar>(rng.uniform(-limit, limit));
    }
  }
}

template <typename Derived>
void glorot_uniform(Eigen::MatrixBase<Derived>& m, Index fan_in, Index fan_out, Rng& rng) {
  glorot_uniform(std::move(m), fan_in, fan_out, rng);
}

/// y = W x + b
template <typename Scalar>
struct DenseLayer {
  MatrixX<Scalar> weight;  // out x in
  VectorX<Scalar> bias;    // out

  DenseLayer() = default;
  DenseLayer(Index in, Index out) : weight(MatrixX<Scalar>::Zero(out, in)), bias(VectorX<Scalar>::Zero(out)) {}

  Index inputs() const { return weight.cols(); }
  Index outputs() const { return weight.rows(); }

  template <typename Derived>
  VectorX<Scalar> operator()(const Eigen::MatrixBase<Derived>& x) const {
    return weight * x + bias;
  }

  void init_glorot(Rng& rng) {
    glorot_uniform(weight, inputs(), outputs(), rng);
    bias.setZero();
  }

  void set_zero() {
    weight.setZero();
    bias.setZero();
  }

  /// Accumulate parameter gradients for upstream gradient `dy` at input `x`;
  /// returns the gradient with respect to x.
  template <typename DerivedY, typename DerivedX>
  VectorX<Scalar> backward(const Eigen::MatrixBase<DerivedY>& dy, const Eigen::MatrixBase<DerivedX>& x,
                           DenseLayer& grad) const {
    grad.weight.noalias() += dy * x.transpose();
    grad.bias += dy;
    return weight.transpose() * dy;
  }
};

struct AdamSettings {
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

/// Adam over a fixed list of parameter blocks; moment buffers are allocated on
/// the first step and matched to blocks by position.
template <typename Scalar>
class Adam {
 public:
  explicit Adam(AdamSettings settings = {}) : settings_(settings) {}

  void step(std::vector<ParamBlock<Scalar>>& params, const std::vector<ParamBlock<Scalar>>& grads) {
    if (first_.empty()) {
      for (const auto& p : params) {
        first_.push_back(VectorX<Scalar>::Zero(p.values.size()));
        second_.push_back(VectorX<Scalar>::Zero(p.values.size()));
      }
    }
    ++t_;
    using std::pow;
    using std::sqrt;
    const Scalar b1(settings_.beta1), b2(settings_.beta2);
    const Scalar correction1 = Scalar(1) - pow(b1, Scalar(t_));
    const Scalar correction2 = Scalar(1) - pow(b2, Scalar(t_));
    const Scalar lr(settings_.learning_rate), eps(settings_.epsilon);
    for (std::size_t i = 0; i < params.size(); ++i) {
      auto& m = first_[i];
      auto& v = second_[i];
      const auto& g = grads[i].values;
      m = b1 * m + (Scalar(1) - b1) * g;
      v = b2 * v + (Scalar(1) - b2) * g.cwiseAbs2();
      params[i].values.array() -=
          lr * (m.array() / correction1) / ((v.array() / correction2).sqrt() + eps);
    }
  }

  long steps() const { return t_; }
  const AdamSettings& settings() const { return settings_; }

 private:
  AdamSettings settings_;
  std::vector<VectorX<Scalar>> first_;
  std::vector<VectorX<Scalar>> second_;
  long t_ = 0;
};

}  // namespace botdetect::nn
