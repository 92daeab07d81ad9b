#pragma once

#include <span>
#include <string>
#include <vector>

#include "botdetect/embedding.hpp"
#include "botdetect/neuralnet.hpp"
#include "botdetect/tokenizer.hpp"

namespace botdetect {

/// LSTM outputs per processed token of one tweet.
struct ActivationTrace {
  /// true_length x hidden_dim hidden states h_t.
  RowMatX hidden;
  /// true_length x hidden_dim cell states c_t; empty unless requested.
  RowMatX cell;
  /// The tokens aligned with the rows.
  TokenSequence tokens;
  /// Set when the tweet produced no tokens; the matrices are then empty.
  bool empty_tweet = false;
};

struct TraceOptions {
  bool include_cell = false;
  TokenizerOptions tokenizer;
  EmbedOptions embed;
};

/// Runs the model's own forward pass and copies the hidden states it produced.
ActivationTrace trace_example(const ContextualLstmModel& model, const TweetExample& example,
                              const TokenSequence& tokens, bool include_cell = false);
ActivationTrace trace_tweet(const ContextualLstmModel& model, const TweetRecord& tweet,
                            const EmbeddingTable& table, const TraceOptions& options = {});

struct UnitDistribution {
  Index unit = 0;
  Label label = Label::Human;
  double low = -1.0;
  double high = 1.0;
  std::vector<std::size_t> histogram;
  std::size_t count = 0;
  double mean = 0.0;
  double variance = 0.0;
  double q25 = 0.0;
  double median = 0.0;
  double q75 = 0.0;

  double bin_low(std::size_t b) const;
  double bin_high(std::size_t b) const;
};

struct UnitSeparation {
  Index unit = 0;
  /// Two-sample Kolmogorov-Smirnov statistic between the class distributions.
  double ks = 0.0;
};

struct DistributionOptions {
  std::size_t bins = 50;
};

struct UnitDistributionReport {
  /// Unit-major: (unit 0, Human), (unit 0, Bot), (unit 1, Human), ...
  std::vector<UnitDistribution> distributions;
  /// Sorted by decreasing KS statistic, ties by unit index.
  std::vector<UnitSeparation> ranking;
  std::size_t human_count = 0;
  std::size_t bot_count = 0;

  const UnitDistribution& at(Index unit, Label label) const;
};

/// Histograms of the final hidden state per unit and class. Throws SingleClass
/// unless both classes occur.
UnitDistributionReport unit_distributions(const ContextualLstmModel& model, std::span<const TweetExample> corpus,
                                          const DistributionOptions& options = {});

double ks_statistic(std::vector<double> a, std::vector<double> b);

/// Rows are units, columns timesteps; the first data row holds the tokens.
std::string heatmap_csv(const ActivationTrace& trace, bool cell_states = false);
/// Long format: unit,class,bin_low,bin_high,count.
std::string distributions_csv(const UnitDistributionReport& report);
/// unit,ks,rank plus per-class summary statistics.
std::string separation_csv(const UnitDistributionReport& report);

}  // namespace botdetect
