#pragma once

#include <vector>

#include "botdetect/experiment.hpp"
#include "botdetect/neuralnet.hpp"
#include "support/oracles.hpp"

namespace botdetect::testing {

/// Random embedded tweet with `length` real steps and non-negative counts as metadata.
inline TweetExample random_example(Index dim, Index length, Rng& rng, Label label, Index max_len = 8) {
  TweetExample ex;
  ex.sequence.matrix = RowMatX::Zero(max_len, dim);
  ex.sequence.matrix.topRows(length) = random_matrix(length, dim, rng, 0.7);
  ex.sequence.true_length = length;
  ex.metadata.resize(6);
  for (Index i = 0; i < 6; ++i) ex.metadata(i) = static_cast<double>(rng.poisson(2.0 + static_cast<double>(i)));
  ex.label = label;
  return ex;
}

inline nn::LstmArchitecture small_architecture(nn::LstmVariant variant, Index dim) {
  nn::LstmArchitecture a;
  a.variant = variant;
  a.embedding_dim = dim;
  return a;
}

/// A model with random weights and a non-trivial metadata standardizer.
inline ContextualLstmModel random_model(const nn::LstmArchitecture& arch, std::uint64_t seed) {
  auto model = init_lstm(arch, seed);
  Rng rng(seed + 1);
  // Non-zero biases so every term of the backward pass is exercised.
  for (auto& b : model.params().blocks()) {
    if (b.name.find("bias") != std::string_view::npos) {
      for (Index i = 0; i < b.values.size(); ++i) b.values(i) = rng.normal(0.0, 0.1);
    }
  }
  if (arch.contextual()) {
    VecX mean(6), scale(6);
    for (Index i = 0; i < 6; ++i) {
      mean(i) = rng.uniform(0.0, 4.0);
      scale(i) = rng.uniform(0.5, 3.0);
    }
    model.set_metadata_standardizer(mean, scale);
  }
  return model;
}

/// Worst relative error between batch_gradient and central differences of the
/// batch-mean total loss, over every parameter entry.
inline double lstm_gradient_error(ContextualLstmModel model, const std::vector<TweetExample>& batch,
                                  double eps = 1e-5) {
  nn::ContextualLstmParams<double> grad(model.architecture());
  grad.set_zero();
  batch_gradient(model, batch, grad);
  auto loss = [&] {
    double total = 0.0;
    for (const auto& ex : batch) total += model.loss(forward(model, ex), label_value(ex.label)).total;
    return total / static_cast<double>(batch.size());
  };
  return max_gradient_error(model.params().blocks(), grad.blocks(), loss, eps);
}

struct TweetSplit {
  RunConfig config;
  EmbeddingTable table;
  std::vector<TweetExample> train;
  std::vector<TweetExample> test;
};

/// Synthetic tweet corpus embedded with fixture vectors and split the way a
/// run would split it.
inline TweetSplit synthetic_tweets(double separation, std::size_t accounts_per_class, std::size_t tweets_per_account,
                                   std::uint64_t seed, Index dim = 25, double train_fraction = 0.8) {
  TweetSplit s;
  s.config.task = Task::TweetLevel;
  s.config.model = ModelKind::ContextualLstm;
  s.config.synthetic.separation = separation;
  s.config.synthetic.n_accounts_per_class = accounts_per_class;
  s.config.synthetic.tweets_per_account = tweets_per_account;
  s.config.embedding_dim = dim;
  s.config.split.train_fraction = train_fraction;
  s.config.seed = seed;
  const auto data = load_tweet_data(s.config);
  s.table = prepare_embeddings(s.config, data);
  const auto idx = split_tweets(s.config, data);
  s.train = make_examples(data, s.table, s.config, idx.train);
  s.test = make_examples(data, s.table, s.config, idx.test);
  return s;
}

inline std::vector<Label> labels_of(const std::vector<TweetExample>& examples) {
  std::vector<Label> out;
  for (const auto& e : examples) out.push_back(e.label);
  return out;
}

}  // namespace botdetect::testing
