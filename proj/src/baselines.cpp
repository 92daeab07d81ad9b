#include "botdetect/baselines.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <numeric>

#include "botdetect/error.hpp"

namespace botdetect {

namespace {

constexpr std::uint64_t kForestStream = 0xF0E5;
constexpr std::uint64_t kSgdStream = 0x5600;
constexpr std::uint64_t kMlpInitStream = 0x3119;
constexpr std::uint64_t kMlpShuffleStream = 0xB000;

double logistic(double v) { return nn::sigmoid(v); }

std::vector<int> binary_targets(std::span<const Label> labels) {
  std::vector<int> y(labels.size());
  for (std::size_t i = 0; i < labels.size(); ++i) y[i] = labels[i] == Label::Bot ? 1 : 0;
  return y;
}

// ---------------------------------------------------------------- forest

class TreeBuilder {
 public:
  TreeBuilder(const RowMatX& z, const std::vector<int>& y, const std::vector<double>& weight,
              const BaselineConfig& config, Rng& rng)
      : z_(z), y_(y), weight_(weight), config_(config), rng_(rng) {
    const Index d = z.cols();
    mtry_ = config.forest_max_features > 0
                ? std::min<Index>(config.forest_max_features, d)
                : std::max<Index>(1, static_cast<Index>(std::floor(std::sqrt(static_cast<double>(d)))));
    features_.resize(static_cast<std::size_t>(d));
    std::iota(features_.begin(), features_.end(), 0);
  }

  DecisionTree build(std::vector<Index> rows) {
    tree_.nodes.clear();
    grow(std::move(rows), 0);
    return std::move(tree_);
  }

 private:
  struct Split {
    int feature = -1;
    double threshold = 0.0;
    double score = -1.0;
  };

  int grow(std::vector<Index> rows, int depth) {
    double w = 0.0, p = 0.0;
    for (Index r : rows) {
      w += weight_[r];
      p += weight_[r] * y_[r];
    }
    const int id = static_cast<int>(tree_.nodes.size());
    tree_.nodes.push_back({});
    tree_.nodes[id].value = p / w;

    const bool pure = p == 0.0 || p == w;
    const bool too_small = w < 2.0 * config_.forest_min_leaf;
    const bool too_deep = config_.forest_max_depth > 0 && depth >= config_.forest_max_depth;
    if (pure || too_small || too_deep) return id;

    const Split split = best_split(rows);
    if (split.feature < 0) return id;

    std::vector<Index> left, right;
    for (Index r : rows) (z_(r, split.feature) <= split.threshold ? left : right).push_back(r);
    rows.clear();
    rows.shrink_to_fit();
    tree_.nodes[id].feature = split.feature;
    tree_.nodes[id].threshold = split.threshold;
    const int l = grow(std::move(left), depth + 1);
    const int r = grow(std::move(right), depth + 1);
    tree_.nodes[id].left = l;
    tree_.nodes[id].right = r;
    return id;
  }

  Split best_split(const std::vector<Index>& rows) {
    rng_.shuffle(std::span<int>(features_));
    Split best;
    Index examined = 0;
    std::vector<Index> order(rows);
    for (int f : features_) {
      if (examined >= mtry_ && best.feature >= 0) break;
      std::stable_sort(order.begin(), order.end(), [&](Index a, Index b) { return z_(a, f) < z_(b, f); });
      if (z_(order.front(), f) == z_(order.back(), f)) continue;
      ++examined;
      evaluate_feature(order, f, best);
    }
    return best;
  }

  void evaluate_feature(const std::vector<Index>& order, int f, Split& best) const {
    double total_w = 0.0, total_p = 0.0;
    for (Index r : order) {
      total_w += weight_[r];
      total_p += weight_[r] * y_[r];
    }
    const double min_leaf = config_.forest_min_leaf;
    double wl = 0.0, pl = 0.0;
    for (std::size_t k = 0; k + 1 < order.size(); ++k) {
      wl += weight_[order[k]];
      pl += weight_[order[k]] * y_[order[k]];
      const double lo = z_(order[k], f);
      const double hi = z_(order[k + 1], f);
      if (!(lo < hi)) continue;
      const double wr = total_w - wl;
      if (wl < min_leaf || wr < min_leaf) continue;
      const double pr = total_p - pl;
      const double nl = wl - pl, nr = wr - pr;
      // Maximising this is minimising the weighted Gini impurity of the children.
      const double score = (pl * pl + nl * nl) / wl + (pr * pr + nr * nr) / wr;
      if (score > best.score) {
        double t = lo + (hi - lo) / 2.0;
        if (!(t < hi)) t = lo;
        best = {f, t, score};
      }
    }
  }

  const RowMatX& z_;
  const std::vector<int>& y_;
  const std::vector<double>& weight_;
  const BaselineConfig& config_;
  Rng& rng_;
  Index mtry_ = 1;
  std::vector<int> features_;
  DecisionTree tree_;
};

// Rows sorted lexicographically by (values, label) so that fitting does not
// depend on the order rows arrive in.
std::vector<Index> canonical_order(const RowMatX& z, const std::vector<int>& y) {
  std::vector<Index> order(static_cast<std::size_t>(z.rows()));
  std::iota(order.begin(), order.end(), Index{0});
  std::stable_sort(order.begin(), order.end(), [&](Index a, Index b) {
    for (Index c = 0; c < z.cols(); ++c) {
      if (z(a, c) != z(b, c)) return z(a, c) < z(b, c);
    }
    return y[a] < y[b];
  });
  return order;
}

std::vector<DecisionTree> fit_forest(const RowMatX& z_in, const std::vector<int>& y_in,
                                     const BaselineConfig& config) {
  const auto order = canonical_order(z_in, y_in);
  RowMatX z(z_in.rows(), z_in.cols());
  std::vector<int> y(order.size());
  for (std::size_t i = 0; i < order.size(); ++i) {
    z.row(static_cast<Index>(i)) = z_in.row(order[i]);
    y[i] = y_in[order[i]];
  }
  const std::size_t n = order.size();
  std::vector<DecisionTree> trees;
  trees.reserve(static_cast<std::size_t>(config.forest_trees));
  for (int t = 0; t < config.forest_trees; ++t) {
    Rng rng(mix_seed(mix_seed(config.seed, kForestStream), static_cast<std::uint64_t>(t)));
    std::vector<double> weight(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) weight[rng.uniform_index(n)] += 1.0;
    std::vector<Index> rows;
    for (std::size_t i = 0; i < n; ++i) {
      if (weight[i] > 0.0) rows.push_back(static_cast<Index>(i));
    }
    TreeBuilder builder(z, y, weight, config, rng);
    trees.push_back(builder.build(std::move(rows)));
  }
  return trees;
}

// ---------------------------------------------------------------- boosting

Stump best_stump(const RowMatX& z, const std::vector<int>& y, const std::vector<double>& w) {
  double wp = 0.0, wn = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) (y[i] ? wp : wn) += w[i];
  Stump best;
  double best_error = std::numeric_limits<double>::infinity();
  std::vector<Index> order(y.size());
  for (Index f = 0; f < z.cols(); ++f) {
    std::iota(order.begin(), order.end(), Index{0});
    std::stable_sort(order.begin(), order.end(), [&](Index a, Index b) { return z(a, f) < z(b, f); });
    auto consider = [&](double threshold, double error, int polarity) {
      if (error < best_error) {
        best_error = error;
        best = {static_cast<int>(f), threshold, polarity, 0.0, error};
      }
    };
    const double below = z(order.front(), f) - 1.0;
    consider(below, wn, 1);
    consider(below, wp, -1);
    double lp = 0.0, ln = 0.0;
    for (std::size_t k = 0; k + 1 < order.size(); ++k) {
      (y[order[k]] ? lp : ln) += w[order[k]];
      const double lo = z(order[k], f), hi = z(order[k + 1], f);
      if (!(lo < hi)) continue;
      double t = lo + (hi - lo) / 2.0;
      if (!(t < hi)) t = lo;
      consider(t, lp + (wn - ln), 1);
      consider(t, (wp - lp) + ln, -1);
    }
  }
  return best;
}

std::vector<Stump> fit_adaboost(const RowMatX& z, const std::vector<int>& y, const BaselineConfig& config) {
  const std::size_t n = y.size();
  std::vector<double> w(n, 1.0 / static_cast<double>(n));
  std::vector<Stump> stumps;
  for (int round = 0; round < config.adaboost_rounds; ++round) {
    Stump s = best_stump(z, y, w);
    const double total = std::accumulate(w.begin(), w.end(), 0.0);
    const double eps = s.error / total;
    if (eps >= 0.5) break;
    const double clamped = std::max(eps, 1e-10);
    s.error = eps;
    s.alpha = std::log((1.0 - clamped) / clamped);
    stumps.push_back(s);
    if (eps <= 0.0) break;
    const double boost = std::exp(s.alpha);
    double sum = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const int truth = y[i] ? 1 : -1;
      if (s.predict(z.row(static_cast<Index>(i)).transpose()) != truth) w[i] *= boost;
      sum += w[i];
    }
    for (double& v : w) v /= sum;
  }
  return stumps;
}

// ---------------------------------------------------------------- linear

void fit_logreg(const RowMatX& z, const std::vector<int>& y, const BaselineConfig& config, VecX& w, double& b) {
  const Index n = z.rows();
  VecX target(n);
  for (Index i = 0; i < n; ++i) target(i) = y[i];
  w = VecX::Zero(z.cols());
  b = 0.0;
  const double lr = config.logreg_learning_rate;
  for (int epoch = 0; epoch < config.logreg_epochs; ++epoch) {
    VecX residual = ((z * w).array() + b).unaryExpr([](double v) { return logistic(v); }).matrix() - target;
    w -= lr * (z.transpose() * residual) / static_cast<double>(n);
    b -= lr * residual.mean();
  }
}

void fit_sgd(const RowMatX& z, const std::vector<int>& y, const BaselineConfig& config, VecX& w, double& b) {
  const std::size_t n = y.size();
  w = VecX::Zero(z.cols());
  b = 0.0;
  std::vector<std::size_t> order(n);
  std::size_t t = 0;
  for (int epoch = 0; epoch < config.sgd_epochs; ++epoch) {
    std::iota(order.begin(), order.end(), std::size_t{0});
    Rng rng(mix_seed(config.seed, kSgdStream + static_cast<std::uint64_t>(epoch)));
    rng.shuffle(std::span<std::size_t>(order));
    for (std::size_t i : order) {
      const double eta =
          config.sgd_learning_rate / (1.0 + config.sgd_learning_rate * config.sgd_l2 * static_cast<double>(t++));
      const double label = y[i] ? 1.0 : -1.0;
      const auto x = z.row(static_cast<Index>(i)).transpose();
      const double margin = label * (w.dot(x) + b);
      w *= 1.0 - eta * config.sgd_l2;
      if (margin < 1.0) {
        w += eta * label * x;
        b += eta * label;
      }
    }
  }
}

// ---------------------------------------------------------------- mlp

MlpNet<double> fit_mlp(const RowMatX& z, const std::vector<int>& y, const BaselineConfig& config) {
  if (config.mlp_layers.empty() || config.mlp_layers.back() != 1) {
    throw Error(ErrorKind::InvalidConfig, "MLP layer sizes must end with a single output unit");
  }
  for (Index s : config.mlp_layers) {
    if (s <= 0) throw Error(ErrorKind::InvalidConfig, "MLP layer sizes must be positive");
  }
  if (config.mlp_batch_size == 0) throw Error(ErrorKind::InvalidConfig, "MLP batch size must be positive");
  MlpNet<double> net(z.cols(), config.mlp_layers);
  Rng init_rng(mix_seed(config.seed, kMlpInitStream));
  net.init(init_rng);
  MlpNet<double> grad(z.cols(), config.mlp_layers);
  nn::Adam<double> adam(config.mlp_adam);

  const std::size_t n = y.size();
  std::vector<std::size_t> order(n);
  for (int epoch = 0; epoch < config.mlp_epochs; ++epoch) {
    std::iota(order.begin(), order.end(), std::size_t{0});
    Rng rng(mix_seed(config.seed, kMlpShuffleStream + static_cast<std::uint64_t>(epoch)));
    rng.shuffle(std::span<std::size_t>(order));
    for (std::size_t start = 0; start < n; start += config.mlp_batch_size) {
      const std::size_t end = std::min(n, start + config.mlp_batch_size);
      const Index b = static_cast<Index>(end - start);
      MatX x(z.cols(), b);
      RowVectorX<double> target(b);
      for (Index j = 0; j < b; ++j) {
        const std::size_t r = order[start + static_cast<std::size_t>(j)];
        x.col(j) = z.row(static_cast<Index>(r)).transpose();
        target(j) = y[r];
      }
      grad.set_zero();
      net.loss_and_gradient(x, target, grad);
      auto params = net.blocks();
      adam.step(params, grad.blocks());
    }
  }
  return net;
}

std::string join(const std::vector<std::string>& parts, char sep) {
  std::string out;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (i) out += sep;
    out += parts[i];
  }
  return out;
}

std::vector<std::string> split_on(std::string_view text, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = text.find(sep, start);
    out.emplace_back(trim(text.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

template <typename T>
T parse_number(const std::string& text, std::string_view key) {
  T value{};
  const auto* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (ec != std::errc() || ptr != end) {
    throw Error(ErrorKind::ParseError, "bad value '" + text + "' for '" + std::string(key) + "'");
  }
  return value;
}

}  // namespace

const char* to_string(BaselineKind kind) {
  switch (kind) {
    case BaselineKind::LogReg: return "logreg";
    case BaselineKind::SgdLinear: return "sgd";
    case BaselineKind::RandomForest: return "random_forest";
    case BaselineKind::AdaBoost: return "adaboost";
    case BaselineKind::Mlp: return "mlp";
  }
  return "?";
}

BaselineKind parse_baseline_kind(std::string_view text) {
  if (text == "logreg" || text == "logistic_regression") return BaselineKind::LogReg;
  if (text == "sgd" || text == "sgd_linear") return BaselineKind::SgdLinear;
  if (text == "random_forest" || text == "rf") return BaselineKind::RandomForest;
  if (text == "adaboost") return BaselineKind::AdaBoost;
  if (text == "mlp") return BaselineKind::Mlp;
  throw Error(ErrorKind::InvalidConfig, "unknown baseline '" + std::string(text) +
                                            "' (expected logreg, sgd, random_forest, adaboost, mlp)");
}

std::vector<Index> parse_layer_sizes(std::string_view text) {
  std::vector<Index> sizes;
  for (const auto& part : split_on(text, ',')) {
    long long v = 0;
    const auto [ptr, ec] = std::from_chars(part.data(), part.data() + part.size(), v);
    if (part.empty() || ec != std::errc() || ptr != part.data() + part.size() || v <= 0) {
      throw Error(ErrorKind::InvalidConfig, "bad layer sizes '" + std::string(text) + "'");
    }
    sizes.push_back(static_cast<Index>(v));
  }
  return sizes;
}

std::string format_layer_sizes(std::span<const Index> sizes) {
  std::string out;
  for (std::size_t i = 0; i < sizes.size(); ++i) {
    if (i) out += ',';
    out += std::to_string(sizes[i]);
  }
  return out;
}

KeyValueFile BaselineConfig::to_key_values(BaselineKind kind) const {
  KeyValueFile kv;
  kv.set("model", to_string(kind));
  kv.set("seed", std::to_string(seed));
  kv.set("features", "standardized with training-set mean/std");
  switch (kind) {
    case BaselineKind::LogReg:
      kv.set("logreg.epochs", std::to_string(logreg_epochs));
      kv.set("logreg.learning_rate", format_real(logreg_learning_rate));
      break;
    case BaselineKind::SgdLinear:
      kv.set("sgd.epochs", std::to_string(sgd_epochs));
      kv.set("sgd.learning_rate", format_real(sgd_learning_rate));
      kv.set("sgd.l2", format_real(sgd_l2));
      kv.set("sgd.calibration", "platt");
      break;
    case BaselineKind::RandomForest:
      kv.set("forest.trees", std::to_string(forest_trees));
      kv.set("forest.max_depth", std::to_string(forest_max_depth));
      kv.set("forest.min_leaf", std::to_string(forest_min_leaf));
      kv.set("forest.max_features", std::to_string(forest_max_features));
      break;
    case BaselineKind::AdaBoost:
      kv.set("adaboost.rounds", std::to_string(adaboost_rounds));
      break;
    case BaselineKind::Mlp:
      kv.set("mlp.layers", format_layer_sizes(mlp_layers));
      kv.set("mlp.epochs", std::to_string(mlp_epochs));
      kv.set("mlp.batch_size", std::to_string(mlp_batch_size));
      kv.set("mlp.adam.learning_rate", format_real(mlp_adam.learning_rate));
      kv.set("mlp.adam.beta1", format_real(mlp_adam.beta1));
      kv.set("mlp.adam.beta2", format_real(mlp_adam.beta2));
      kv.set("mlp.adam.epsilon", format_real(mlp_adam.epsilon));
      break;
  }
  return kv;
}

const TreeNode& DecisionTree::leaf_for(const Eigen::Ref<const VecX>& x) const {
  const TreeNode* node = &nodes.front();
  while (!node->is_leaf()) node = &nodes[static_cast<std::size_t>(x(node->feature) <= node->threshold ? node->left : node->right)];
  return *node;
}

double DecisionTree::vote(const Eigen::Ref<const VecX>& x) const {
  const double v = leaf_for(x).value;
  return v > 0.5 ? 1.0 : (v < 0.5 ? 0.0 : 0.5);
}

int DecisionTree::depth() const {
  std::vector<int> depth(nodes.size(), 0);
  int deepest = 0;
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    deepest = std::max(deepest, depth[i]);
    if (!nodes[i].is_leaf()) {
      depth[static_cast<std::size_t>(nodes[i].left)] = depth[i] + 1;
      depth[static_cast<std::size_t>(nodes[i].right)] = depth[i] + 1;
    }
  }
  return deepest;
}

std::pair<double, double> fit_platt(std::span<const double> scores, std::span<const Label> labels) {
  double prior1 = 0.0, prior0 = 0.0;
  for (Label l : labels) (l == Label::Bot ? prior1 : prior0) += 1.0;
  const double hi = (prior1 + 1.0) / (prior1 + 2.0);
  const double lo = 1.0 / (prior0 + 2.0);
  const std::size_t n = scores.size();
  std::vector<double> t(n);
  for (std::size_t i = 0; i < n; ++i) t[i] = labels[i] == Label::Bot ? hi : lo;

  // Newton's method with backtracking on P(bot) = 1 / (1 + exp(A s + B)).
  auto objective = [&](double a, double b) {
    double f = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double v = scores[i] * a + b;
      f += v >= 0.0 ? t[i] * v + std::log1p(std::exp(-v)) : (t[i] - 1.0) * v + std::log1p(std::exp(v));
    }
    return f;
  };
  double a = 0.0, b = std::log((prior0 + 1.0) / (prior1 + 1.0));
  double fval = objective(a, b);
  for (int iter = 0; iter < 100; ++iter) {
    double h11 = 1e-12, h22 = 1e-12, h21 = 0.0, g1 = 0.0, g2 = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double v = scores[i] * a + b;
      double p, q;
      if (v >= 0.0) {
        p = std::exp(-v) / (1.0 + std::exp(-v));
        q = 1.0 / (1.0 + std::exp(-v));
      } else {
        p = 1.0 / (1.0 + std::exp(v));
        q = std::exp(v) / (1.0 + std::exp(v));
      }
      const double d2 = p * q;
      h11 += scores[i] * scores[i] * d2;
      h22 += d2;
      h21 += scores[i] * d2;
      const double d1 = t[i] - p;
      g1 += scores[i] * d1;
      g2 += d1;
    }
    if (std::abs(g1) < 1e-5 && std::abs(g2) < 1e-5) break;
    const double det = h11 * h22 - h21 * h21;
    const double da = -(h22 * g1 - h21 * g2) / det;
    const double db = -(-h21 * g1 + h11 * g2) / det;
    const double gd = g1 * da + g2 * db;
    double step = 1.0;
    while (step >= 1e-10) {
      const double na = a + step * da, nb = b + step * db;
      const double nf = objective(na, nb);
      if (nf < fval + 1e-4 * step * gd) {
        a = na;
        b = nb;
        fval = nf;
        break;
      }
      step /= 2.0;
    }
    if (step < 1e-10) break;
  }
  return {-a, -b};
}

BaselineModel fit_baseline(BaselineKind kind, const FeatureMatrix& matrix, const BaselineConfig& config) {
  if (matrix.rows() == 0) throw Error(ErrorKind::DegenerateData, "cannot fit a classifier on zero rows");
  BaselineModel model;
  model.kind_ = kind;
  model.config_ = config;
  model.schema_ = matrix.schema();
  model.standardizer_ = Standardizer::fit(matrix.values());

  const std::size_t bots = matrix.count(Label::Bot);
  if (bots == 0 || bots == static_cast<std::size_t>(matrix.rows())) {
    model.constant_ = bots == 0 ? 0.0 : 1.0;
    return model;
  }

  const RowMatX z = model.standardizer_.transform(matrix.values());
  const std::vector<int> y = binary_targets(matrix.labels());
  switch (kind) {
    case BaselineKind::LogReg:
      fit_logreg(z, y, config, model.weights_, model.bias_);
      break;
    case BaselineKind::SgdLinear: {
      fit_sgd(z, y, config, model.weights_, model.bias_);
      std::vector<double> raw(y.size());
      for (std::size_t i = 0; i < y.size(); ++i) {
        raw[i] = model.weights_.dot(z.row(static_cast<Index>(i)).transpose()) + model.bias_;
      }
      std::tie(model.platt_a_, model.platt_b_) = fit_platt(raw, matrix.labels());
      break;
    }
    case BaselineKind::RandomForest:
      if (config.forest_trees <= 0) throw Error(ErrorKind::InvalidConfig, "forest needs at least one tree");
      if (config.forest_min_leaf <= 0) throw Error(ErrorKind::InvalidConfig, "forest min_leaf must be positive");
      model.trees_ = fit_forest(z, y, config);
      break;
    case BaselineKind::AdaBoost:
      model.stumps_ = fit_adaboost(z, y, config);
      break;
    case BaselineKind::Mlp:
      model.mlp_ = fit_mlp(z, y, config);
      break;
  }
  return model;
}

double BaselineModel::score_standardized(const Eigen::Ref<const VecX>& z) const {
  if (constant_) return *constant_;
  switch (kind_) {
    case BaselineKind::LogReg:
      return logistic(weights_.dot(z) + bias_);
    case BaselineKind::SgdLinear:
      return logistic(platt_a_ * (weights_.dot(z) + bias_) + platt_b_);
    case BaselineKind::RandomForest: {
      double votes = 0.0;
      for (const auto& t : trees_) votes += t.vote(z);
      return votes / static_cast<double>(trees_.size());
    }
    case BaselineKind::AdaBoost: {
      double margin = 0.0;
      for (const auto& s : stumps_) margin += s.alpha * s.predict(z);
      return logistic(margin);
    }
    case BaselineKind::Mlp:
      return mlp_.forward(MatX(z))(0);
  }
  return 0.5;
}

std::vector<double> BaselineModel::predict_proba(const RowMatX& raw_rows) const {
  if (raw_rows.cols() != static_cast<Index>(schema_.size())) {
    throw Error(ErrorKind::SchemaMismatch, "rows have " + std::to_string(raw_rows.cols()) +
                                               " columns, model expects " + std::to_string(schema_.size()));
  }
  const RowMatX z = standardizer_.transform(raw_rows);
  std::vector<double> out(static_cast<std::size_t>(z.rows()));
  if (kind_ == BaselineKind::Mlp && !constant_) {
    const RowVectorX<double> p = mlp_.forward(z.transpose());
    for (Index i = 0; i < z.rows(); ++i) out[static_cast<std::size_t>(i)] = p(i);
    return out;
  }
  for (Index i = 0; i < z.rows(); ++i) out[static_cast<std::size_t>(i)] = score_standardized(z.row(i).transpose());
  return out;
}

std::vector<double> BaselineModel::predict_proba(const FeatureMatrix& matrix) const {
  if (matrix.schema() != schema_) {
    throw Error(ErrorKind::SchemaMismatch, "feature schema [" + join(matrix.schema(), ',') +
                                               "] differs from training schema [" + join(schema_, ',') + "]");
  }
  return predict_proba(matrix.values());
}

std::vector<double> BaselineModel::staged_error(const RowMatX& z, std::span<const Label> labels) const {
  std::vector<double> margin(labels.size(), 0.0);
  std::vector<double> out;
  for (const auto& s : stumps_) {
    std::size_t wrong = 0;
    for (std::size_t i = 0; i < labels.size(); ++i) {
      margin[i] += s.alpha * s.predict(z.row(static_cast<Index>(i)).transpose());
      const bool predicted_bot = margin[i] >= 0.0;
      wrong += predicted_bot != (labels[i] == Label::Bot) ? 1 : 0;
    }
    out.push_back(static_cast<double>(wrong) / static_cast<double>(labels.size()));
  }
  return out;
}

BaselineModel BaselineModel::zero_logreg(std::vector<std::string> schema) {
  BaselineModel m;
  const Index d = static_cast<Index>(schema.size());
  m.schema_ = std::move(schema);
  m.standardizer_ = Standardizer(VecX::Zero(d), VecX::Ones(d));
  m.weights_ = VecX::Zero(d);
  return m;
}

void BaselineModel::write(StructuredText& out) const {
  out.set("model", std::string("baseline.") + to_string(kind_));
  out.set("schema", join(schema_, ','));
  const KeyValueFile config_kv = config_.to_key_values(kind_);
  for (const auto& [k, v] : config_kv.entries()) out.set("config." + k, v);
  if (constant_) out.set("constant", format_real(*constant_));
  out.set_tensor("standardizer.mean", MatX(standardizer_.mean()));
  out.set_tensor("standardizer.scale", MatX(standardizer_.scale()));
  if (constant_) return;
  switch (kind_) {
    case BaselineKind::LogReg:
    case BaselineKind::SgdLinear:
      out.set("linear.bias", format_real(bias_));
      if (kind_ == BaselineKind::SgdLinear) {
        out.set("platt.a", format_real(platt_a_));
        out.set("platt.b", format_real(platt_b_));
      }
      out.set_tensor("linear.weights", MatX(weights_));
      break;
    case BaselineKind::RandomForest:
      out.set("forest.size", std::to_string(trees_.size()));
      for (std::size_t t = 0; t < trees_.size(); ++t) {
        const auto& nodes = trees_[t].nodes;
        MatX m(static_cast<Index>(nodes.size()), 5);
        for (std::size_t i = 0; i < nodes.size(); ++i) {
          const auto& nd = nodes[i];
          m.row(static_cast<Index>(i)) << nd.feature, nd.threshold, nd.left, nd.right, nd.value;
        }
        out.set_tensor("tree." + std::to_string(t), std::move(m));
      }
      break;
    case BaselineKind::AdaBoost: {
      out.set("adaboost.size", std::to_string(stumps_.size()));
      MatX m(static_cast<Index>(stumps_.size()), 5);
      for (std::size_t i = 0; i < stumps_.size(); ++i) {
        const auto& s = stumps_[i];
        m.row(static_cast<Index>(i)) << s.feature, s.threshold, s.polarity, s.alpha, s.error;
      }
      out.set_tensor("stumps", std::move(m));
      break;
    }
    case BaselineKind::Mlp:
      out.set("mlp.size", std::to_string(mlp_.layers.size()));
      for (std::size_t i = 0; i < mlp_.layers.size(); ++i) {
        out.set_tensor("layer." + std::to_string(i) + ".weight", mlp_.layers[i].weight);
        out.set_tensor("layer." + std::to_string(i) + ".bias", MatX(mlp_.layers[i].bias));
      }
      break;
  }
}

BaselineModel BaselineModel::read(const StructuredText& in) {
  const std::string& model = in.require("model");
  constexpr std::string_view prefix = "baseline.";
  if (model.rfind(prefix, 0) != 0) throw Error(ErrorKind::ParseError, "not a baseline model: '" + model + "'");
  BaselineModel m;
  m.kind_ = parse_baseline_kind(std::string_view(model).substr(prefix.size()));
  m.schema_ = split_on(in.require("schema"), ',');
  const Index d = static_cast<Index>(m.schema_.size());

  auto opt = [&](std::string_view key) { return in.get("config." + std::string(key)); };
  if (auto v = opt("seed")) m.config_.seed = parse_number<std::uint64_t>(*v, "seed");
  if (auto v = opt("logreg.epochs")) m.config_.logreg_epochs = parse_number<int>(*v, "logreg.epochs");
  if (auto v = opt("logreg.learning_rate")) m.config_.logreg_learning_rate = parse_number<double>(*v, "lr");
  if (auto v = opt("sgd.epochs")) m.config_.sgd_epochs = parse_number<int>(*v, "sgd.epochs");
  if (auto v = opt("sgd.learning_rate")) m.config_.sgd_learning_rate = parse_number<double>(*v, "sgd.lr");
  if (auto v = opt("sgd.l2")) m.config_.sgd_l2 = parse_number<double>(*v, "sgd.l2");
  if (auto v = opt("forest.trees")) m.config_.forest_trees = parse_number<int>(*v, "forest.trees");
  if (auto v = opt("forest.max_depth")) m.config_.forest_max_depth = parse_number<int>(*v, "forest.max_depth");
  if (auto v = opt("forest.min_leaf")) m.config_.forest_min_leaf = parse_number<int>(*v, "forest.min_leaf");
  if (auto v = opt("forest.max_features")) m.config_.forest_max_features = parse_number<int>(*v, "max_features");
  if (auto v = opt("adaboost.rounds")) m.config_.adaboost_rounds = parse_number<int>(*v, "adaboost.rounds");
  if (auto v = opt("mlp.layers")) m.config_.mlp_layers = parse_layer_sizes(*v);
  if (auto v = opt("mlp.epochs")) m.config_.mlp_epochs = parse_number<int>(*v, "mlp.epochs");
  if (auto v = opt("mlp.batch_size")) m.config_.mlp_batch_size = parse_number<std::size_t>(*v, "mlp.batch_size");
  if (auto v = opt("mlp.adam.learning_rate")) m.config_.mlp_adam.learning_rate = parse_number<double>(*v, "adam");
  if (auto v = opt("mlp.adam.beta1")) m.config_.mlp_adam.beta1 = parse_number<double>(*v, "adam");
  if (auto v = opt("mlp.adam.beta2")) m.config_.mlp_adam.beta2 = parse_number<double>(*v, "adam");
  if (auto v = opt("mlp.adam.epsilon")) m.config_.mlp_adam.epsilon = parse_number<double>(*v, "adam");

  auto column = [&](std::string_view name, Index rows) {
    const MatX& t = in.require_tensor(name);
    if (t.rows() != rows || t.cols() != 1) {
      throw Error(ErrorKind::DimensionMismatch, "tensor '" + std::string(name) + "' has the wrong shape");
    }
    return VecX(t.col(0));
  };
  m.standardizer_ = Standardizer(column("standardizer.mean", d), column("standardizer.scale", d));
  if (auto c = in.get("constant")) {
    m.constant_ = parse_number<double>(*c, "constant");
    return m;
  }
  switch (m.kind_) {
    case BaselineKind::LogReg:
    case BaselineKind::SgdLinear:
      m.bias_ = parse_number<double>(in.require("linear.bias"), "linear.bias");
      m.weights_ = column("linear.weights", d);
      if (m.kind_ == BaselineKind::SgdLinear) {
        m.platt_a_ = parse_number<double>(in.require("platt.a"), "platt.a");
        m.platt_b_ = parse_number<double>(in.require("platt.b"), "platt.b");
      }
      break;
    case BaselineKind::RandomForest: {
      const int size = parse_number<int>(in.require("forest.size"), "forest.size");
      for (int t = 0; t < size; ++t) {
        const MatX& nodes = in.require_tensor("tree." + std::to_string(t));
        DecisionTree tree;
        for (Index i = 0; i < nodes.rows(); ++i) {
          tree.nodes.push_back({static_cast<int>(nodes(i, 0)), nodes(i, 1), static_cast<int>(nodes(i, 2)),
                                static_cast<int>(nodes(i, 3)), nodes(i, 4)});
        }
        m.trees_.push_back(std::move(tree));
      }
      break;
    }
    case BaselineKind::AdaBoost: {
      const MatX& s = in.require_tensor("stumps");
      for (Index i = 0; i < s.rows(); ++i) {
        m.stumps_.push_back({static_cast<int>(s(i, 0)), s(i, 1), static_cast<int>(s(i, 2)), s(i, 3), s(i, 4)});
      }
      break;
    }
    case BaselineKind::Mlp: {
      const int size = parse_number<int>(in.require("mlp.size"), "mlp.size");
      for (int i = 0; i < size; ++i) {
        nn::DenseLayer<double> layer;
        layer.weight = in.require_tensor("layer." + std::to_string(i) + ".weight");
        layer.bias = in.require_tensor("layer." + std::to_string(i) + ".bias").col(0);
        m.mlp_.layers.push_back(std::move(layer));
      }
      break;
    }
  }
  return m;
}

}  // namespace botdetect
