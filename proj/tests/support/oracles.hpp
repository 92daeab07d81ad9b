#pragma once

// Deliberately naive reference implementations used as test oracles. They
// share no code with the library beyond the plain data types.

#include <algorithm>
#include <cmath>
#include <functional>
#include <set>
#include <utility>
#include <vector>

#include "botdetect/core_data.hpp"
#include "botdetect/lstm.hpp"
#include "botdetect/rng.hpp"

namespace botdetect::testing {

inline double squared_distance(const FeatureMatrix& m, Index a, Index b) {
  double s = 0.0;
  for (Index c = 0; c < m.cols(); ++c) {
    const double d = m.values()(a, c) - m.values()(b, c);
    s += d * d;
  }
  return s;
}

/// Every other row sorted by (distance, index); first k returned.
inline std::vector<Index> brute_knn(const FeatureMatrix& m, Index q, int k, bool same_class) {
  std::vector<std::pair<double, Index>> all;
  for (Index j = 0; j < m.rows(); ++j) {
    if (j == q) continue;
    if (same_class && m.label(j) != m.label(q)) continue;
    all.emplace_back(squared_distance(m, q, j), j);
  }
  std::sort(all.begin(), all.end());
  std::vector<Index> out;
  for (int i = 0; i < k && i < static_cast<int>(all.size()); ++i) out.push_back(all[static_cast<std::size_t>(i)].second);
  return out;
}

inline Index brute_nearest(const FeatureMatrix& m, Index q) {
  Index best = -1;
  double best_d = 0.0;
  for (Index j = 0; j < m.rows(); ++j) {
    if (j == q) continue;
    const double d = squared_distance(m, q, j);
    if (best < 0 || d < best_d) {
      best = j;
      best_d = d;
    }
  }
  return best;
}

inline std::vector<std::pair<Index, Index>> brute_tomek(const FeatureMatrix& m) {
  std::set<std::pair<Index, Index>> links;
  for (Index a = 0; a < m.rows(); ++a) {
    for (Index b = a + 1; b < m.rows(); ++b) {
      if (m.label(a) == m.label(b)) continue;
      if (brute_nearest(m, a) == b && brute_nearest(m, b) == a) links.insert({a, b});
    }
  }
  return {links.begin(), links.end()};
}

/// Rows whose label matches at least half of their k nearest neighbours.
inline std::vector<Index> brute_enn_keep(const FeatureMatrix& m, int k) {
  std::vector<Index> keep;
  for (Index i = 0; i < m.rows(); ++i) {
    int agree = 0;
    for (Index j : brute_knn(m, i, k, false)) agree += m.label(j) == m.label(i) ? 1 : 0;
    if (2 * agree >= k) keep.push_back(i);
  }
  return keep;
}

/// (concordant pairs + half of tied pairs) / (positives * negatives).
inline double pair_auc(const std::vector<double>& scores, const std::vector<Label>& labels) {
  double num = 0.0;
  double pairs = 0.0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    if (labels[i] != Label::Bot) continue;
    for (std::size_t j = 0; j < scores.size(); ++j) {
      if (labels[j] != Label::Human) continue;
      pairs += 1.0;
      if (scores[i] > scores[j]) num += 1.0;
      else if (scores[i] == scores[j]) num += 0.5;
    }
  }
  return num / pairs;
}

/// Whether `point` lies on a segment between two rows of `pool` (row indices
/// in `candidates`) within `tol` per coordinate.
inline bool on_some_segment(const RowMatX& pool, const std::vector<Index>& candidates,
                            const Eigen::Ref<const VecX>& point, double tol) {
  for (Index a : candidates) {
    for (Index b : candidates) {
      const VecX xa = pool.row(a).transpose();
      const VecX dir = pool.row(b).transpose() - xa;
      const double len2 = dir.squaredNorm();
      double u = len2 > 0 ? (point - xa).dot(dir) / len2 : 0.0;
      u = std::clamp(u, 0.0, 1.0);
      if ((xa + u * dir - point).cwiseAbs().maxCoeff() <= tol) return true;
    }
  }
  return false;
}

inline double naive_sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

/// Scalar-loop LSTM recurrence; returns h_1..h_T as rows.
inline std::vector<std::vector<double>> naive_lstm(const nn::LstmCell<double>& cell, const RowMatX& inputs,
                                                   Index length) {
  const Index h = cell.hidden_dim();
  const Index d = cell.input_dim();
  std::vector<double> hp(static_cast<std::size_t>(h), 0.0), cp(static_cast<std::size_t>(h), 0.0);
  std::vector<std::vector<double>> out;
  for (Index t = 0; t < length; ++t) {
    std::vector<double> hn(hp.size()), cn(cp.size());
    for (Index u = 0; u < h; ++u) {
      double pre[4];
      for (int g = 0; g < 4; ++g) {
        const Index row = g * h + u;
        double s = cell.bias(row);
        for (Index k = 0; k < d; ++k) s += cell.input_weights(row, k) * inputs(t, k);
        for (Index k = 0; k < h; ++k) s += cell.recurrent_weights(row, k) * hp[static_cast<std::size_t>(k)];
        pre[g] = s;
      }
      const double i = naive_sigmoid(pre[0]);
      const double f = naive_sigmoid(pre[1]);
      const double o = naive_sigmoid(pre[2]);
      const double g = std::tanh(pre[3]);
      const auto uu = static_cast<std::size_t>(u);
      cn[uu] = f * cp[uu] + i * g;
      hn[uu] = o * std::tanh(cn[uu]);
    }
    hp = hn;
    cp = cn;
    out.push_back(hn);
  }
  return out;
}

/// Naive dense layer y = W x + b.
inline std::vector<double> naive_dense(const MatX& w, const VecX& b, const std::vector<double>& x) {
  std::vector<double> y(static_cast<std::size_t>(w.rows()));
  for (Index r = 0; r < w.rows(); ++r) {
    double s = b(r);
    for (Index c = 0; c < w.cols(); ++c) s += w(r, c) * x[static_cast<std::size_t>(c)];
    y[static_cast<std::size_t>(r)] = s;
  }
  return y;
}

inline double relative_error(double analytic, double numeric) {
  const double denom = std::max({std::abs(analytic), std::abs(numeric), 1e-6});
  return std::abs(analytic - numeric) / denom;
}

/// Central differences of `loss` with respect to every entry of `params`,
/// compared with `analytic` (same layout). Returns the worst relative error.
template <typename Blocks>
double max_gradient_error(Blocks params, const Blocks& analytic, const std::function<double()>& loss,
                          double eps = 1e-5) {
  double worst = 0.0;
  for (std::size_t b = 0; b < params.size(); ++b) {
    auto& values = params[b].values;
    for (Index i = 0; i < values.size(); ++i) {
      const double saved = values(i);
      values(i) = saved + eps;
      const double up = loss();
      values(i) = saved - eps;
      const double down = loss();
      values(i) = saved;
      const double numeric = (up - down) / (2.0 * eps);
      worst = std::max(worst, relative_error(analytic[b].values(i), numeric));
    }
  }
  return worst;
}

inline RowMatX random_matrix(Index rows, Index cols, Rng& rng, double scale = 1.0) {
  RowMatX m(rows, cols);
  for (Index r = 0; r < rows; ++r) {
    for (Index c = 0; c < cols; ++c) m(r, c) = rng.normal(0.0, scale);
  }
  return m;
}

inline FeatureMatrix random_labeled(Index n, Index d, Rng& rng, double bot_fraction = 0.3) {
  RowMatX values = random_matrix(n, d, rng);
  std::vector<std::string> schema;
  for (Index c = 0; c < d; ++c) schema.push_back("f" + std::to_string(c));
  std::vector<Label> labels;
  for (Index i = 0; i < n; ++i) labels.push_back(rng.bernoulli(bot_fraction) ? Label::Bot : Label::Human);
  return FeatureMatrix(std::move(values), std::move(schema), std::move(labels));
}

}  // namespace botdetect::testing
