#pragma once

#include <vector>

#include "botdetect/error.hpp"
#include "botdetect/nn.hpp"

namespace botdetect::nn {

/// Standard LSTM cell. Gate rows are stacked in the order input, forget,
/// output, candidate:
///
///   z_t = W x_t + U h_{t-1} + b
///   i, f, o = sigmoid(z_i, z_f, z_o),  g = tanh(z_c)
///   c_t = f * c_{t-1} + i * g
///   h_t = o * tanh(c_t)
template <typename Scalar>
struct LstmCell {
  MatrixX<Scalar> input_weights;      // 4h x d
  MatrixX<Scalar> recurrent_weights;  // 4h x h
  VectorX<Scalar> bias;               // 4h

  LstmCell() = default;
  LstmCell(Index input_dim, Index hidden_dim)
      : input_weights(MatrixX<Scalar>::Zero(4 * hidden_dim, input_dim)),
        recurrent_weights(MatrixX<Scalar>::Zero(4 * hidden_dim, hidden_dim)),
        bias(VectorX<Scalar>::Zero(4 * hidden_dim)) {}

  Index input_dim() const { return input_weights.cols(); }
  Index hidden_dim() const { return recurrent_weights.cols(); }

  /// Glorot per gate block, zero biases except the forget gate at 1.
  void init(Rng& rng) {
    const Index h = hidden_dim();
    for (Index gate = 0; gate < 4; ++gate) {
      glorot_uniform(input_weights.middleRows(gate * h, h), input_dim(), h, rng);
      glorot_uniform(recurrent_weights.middleRows(gate * h, h), h, h, rng);
    }
    bias.setZero();
    bias.segment(h, h).setConstant(Scalar(1));
  }

  void set_zero() {
    input_weights.setZero();
    recurrent_weights.setZero();
    bias.setZero();
  }
};

/// Per-step state kept for backpropagation and introspection. Column t+1 of
/// `hidden`/`cell` is the state after step t; column 0 is the zero initial state.
template <typename Scalar>
struct LstmTrace {
  MatrixX<Scalar> gates;   // 4h x T (activated)
  MatrixX<Scalar> hidden;  // h x (T+1)
  MatrixX<Scalar> cell;    // h x (T+1)

  Index steps() const { return gates.cols(); }
  auto final_hidden() const { return hidden.col(hidden.cols() - 1); }
};

/// Runs the first `length` rows of `inputs` (one timestep per row) from a
/// zero state. length == 0 yields a zero final state.
template <typename Scalar, typename Derived>
LstmTrace<Scalar> lstm_forward(const LstmCell<Scalar>& cell, const Eigen::MatrixBase<Derived>& inputs,
                               Index length) {
  if (inputs.cols() != cell.input_dim()) {
    throw Error(ErrorKind::DimensionMismatch, "sequence width " + std::to_string(inputs.cols()) +
                                                  " != LSTM input dimension " +
                                                  std::to_string(cell.input_dim()));
  }
  const Index h = cell.hidden_dim();
  LstmTrace<Scalar> trace;
  trace.gates.resize(4 * h, length);
  trace.hidden = MatrixX<Scalar>::Zero(h, length + 1);
  trace.cell = MatrixX<Scalar>::Zero(h, length + 1);
  VectorX<Scalar> z(4 * h);
  for (Index t = 0; t < length; ++t) {
    z.noalias() = cell.input_weights * inputs.row(t).transpose();
    z.noalias() += cell.recurrent_weights * trace.hidden.col(t);
    z += cell.bias;
    auto gates = trace.gates.col(t);
    gates.head(3 * h) = sigmoid(z.head(3 * h));
    gates.tail(h) = z.tail(h).array().tanh().matrix();
    trace.cell.col(t + 1) = gates.segment(h, h).cwiseProduct(trace.cell.col(t)) +
                            gates.head(h).cwiseProduct(gates.tail(h));
    trace.hidden.col(t + 1) =
        gates.segment(2 * h, h).cwiseProduct(trace.cell.col(t + 1).array().tanh().matrix());
  }
  return trace;
}

/// Backpropagation through time from a gradient on the final hidden state.
/// Accumulates into `grad`.
template <typename Scalar, typename Derived, typename DerivedG>
void lstm_backward(const LstmCell<Scalar>& cell, const Eigen::MatrixBase<Derived>& inputs,
                   const LstmTrace<Scalar>& trace, const Eigen::MatrixBase<DerivedG>& d_final_hidden,
                   LstmCell<Scalar>& grad) {
  const Index h = cell.hidden_dim();
  VectorX<Scalar> dh = d_final_hidden;
  VectorX<Scalar> dc = VectorX<Scalar>::Zero(h);
  VectorX<Scalar> dz(4 * h);
  for (Index t = trace.steps() - 1; t >= 0; --t) {
    const auto gates = trace.gates.col(t);
    const auto i = gates.head(h).array();
    const auto f = gates.segment(h, h).array();
    const auto o = gates.segment(2 * h, h).array();
    const auto g = gates.tail(h).array();
    const auto c_prev = trace.cell.col(t).array();
    const VectorX<Scalar> tc = trace.cell.col(t + 1).array().tanh().matrix();

    dc.array() += dh.array() * o * (Scalar(1) - tc.array().square());
    dz.segment(0, h) = (dc.array() * g * i * (Scalar(1) - i)).matrix();
    dz.segment(h, h) = (dc.array() * c_prev * f * (Scalar(1) - f)).matrix();
    dz.segment(2 * h, h) = (dh.array() * tc.array() * o * (Scalar(1) - o)).matrix();
    dz.segment(3 * h, h) = (dc.array() * i * (Scalar(1) - g.square())).matrix();

    grad.input_weights.noalias() += dz * inputs.row(t);
    grad.recurrent_weights.noalias() += dz * trace.hidden.col(t).transpose();
    grad.bias += dz;
    dh.noalias() = cell.recurrent_weights.transpose() * dz;
    dc.array() *= f;
  }
}

}  // namespace botdetect::nn
