#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "botdetect/checkpoint.hpp"
#include "botdetect/contextual_lstm.hpp"
#include "botdetect/core_data.hpp"
#include "botdetect/embedding.hpp"

namespace botdetect {

using ContextualLstmModel = nn::ContextualLstm<double>;

/// One tweet ready for the network: embedded text, raw metadata (6 counts), label.
struct TweetExample {
  EmbeddedSequence sequence;
  VecX metadata;
  Label label = Label::Human;
};

struct LstmTrainConfig {
  int epochs = 30;
  std::size_t batch_size = 64;
  nn::AdamSettings adam;
  std::uint64_t seed = 0;
  nn::LossWeights loss_weights;
};

struct StepRecord {
  int epoch = 0;
  std::size_t step = 0;
  double main = 0.0;
  double aux = 0.0;
  double total = 0.0;
};

struct EpochRecord {
  int epoch = 0;
  double main = 0.0;
  double aux = 0.0;
  double total = 0.0;
  std::optional<double> validation_accuracy;
  std::optional<double> validation_auc;
};

/// Batch-mean losses for every optimizer step plus per-epoch means. Each
/// `total` is accumulated from per-sample weighted sums, independently of the
/// recorded `main` and `aux` means.
struct TrainingTrace {
  std::vector<StepRecord> steps;
  std::vector<EpochRecord> epochs;
  nn::LossWeights loss_weights;
  std::string optimizer;

  std::string to_csv() const;
};

struct LstmTrainResult {
  ContextualLstmModel model;
  TrainingTrace trace;
};

/// Mini-batch Adam with full BPTT; embeddings stay frozen. Throws
/// DegenerateData unless both classes are present. Deterministic in config.seed.
LstmTrainResult train_lstm(const nn::LstmArchitecture& architecture, const LstmTrainConfig& config,
                           std::span<const TweetExample> train,
                           std::span<const TweetExample> validation = {});

/// Initialise a model the way train_lstm does before its first step.
ContextualLstmModel init_lstm(const nn::LstmArchitecture& architecture, std::uint64_t seed);

nn::ForwardPass<double> forward(const ContextualLstmModel& model, const TweetExample& example);
double predict(const ContextualLstmModel& model, const TweetExample& example);
std::vector<double> predict(const ContextualLstmModel& model, std::span<const TweetExample> examples);

/// Mean batch loss and its gradient over `batch` (used by training and by
/// gradient verification).
nn::LossParts<double> batch_gradient(const ContextualLstmModel& model, std::span<const TweetExample> batch,
                                     nn::ContextualLstmParams<double>& grad);

void write_lstm(const ContextualLstmModel& model, StructuredText& out);
ContextualLstmModel read_lstm(const StructuredText& in);

}  // namespace botdetect
