#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "botdetect/baselines.hpp"
#include "botdetect/embedding.hpp"
#include "botdetect/ingest.hpp"
#include "botdetect/metrics.hpp"
#include "botdetect/neuralnet.hpp"
#include "botdetect/resample.hpp"
#include "botdetect/tokenizer.hpp"

namespace botdetect {

enum class Task { AccountLevel, TweetLevel };
enum class ModelKind { LogReg, SgdLinear, RandomForest, AdaBoost, Mlp, LstmTweetOnly, ContextualLstm };
/// Where the rows come from: a generated tweet corpus, the two-Gaussian account
/// set, or a corpus manifest on disk.
enum class DataSource { Synthetic, Gaussian, Manifest };

const char* to_string(Task task);
const char* to_string(ModelKind model);
const char* to_string(DataSource source);
bool is_lstm(ModelKind model);
std::optional<BaselineKind> baseline_kind(ModelKind model);

struct RunConfig {
  Task task = Task::AccountLevel;
  ModelKind model = ModelKind::RandomForest;
  ResampleConfig resample;

  DataSource source = DataSource::Synthetic;
  std::filesystem::path manifest;
  std::size_t max_tweets_per_group = 0;
  SyntheticCorpusSpec synthetic;
  GaussianAccountSpec gaussian;

  /// Empty = deterministic fixture vectors over the corpus vocabulary.
  std::filesystem::path embeddings;
  Index embedding_dim = 25;
  EmbedOptions embed;
  TokenizerOptions tokenizer;

  SplitSpec split;
  BaselineConfig baseline;
  LstmTrainConfig lstm;

  /// Master seed; every stochastic component derives its own stream from it.
  std::uint64_t seed = 0;
  std::filesystem::path output_dir = "runs";
  /// Empty = UTC timestamp plus config hash prefix.
  std::string run_name;

  /// Canonical form: every field, fixed order. Output settings are excluded so
  /// they do not change the hash.
  KeyValueFile to_key_values() const;
  /// Applies known keys over the defaults; unknown keys are InvalidConfig.
  static RunConfig from_key_values(const KeyValueFile& kv, RunConfig base);
  static RunConfig from_key_values(const KeyValueFile& kv);
  void set(std::string_view key, std::string_view value);

  /// Throws InvalidConfig with an actionable message.
  void validate() const;
  std::string hash() const;

  /// Seeds pushed down into the component configs.
  SplitSpec effective_split() const;
  ResampleConfig effective_resample() const;
  BaselineConfig effective_baseline() const;
  LstmTrainConfig effective_lstm() const;
  SyntheticCorpusSpec effective_synthetic() const;
  GaussianAccountSpec effective_gaussian() const;
};

struct ConfigKey {
  std::string name;
  std::string help;
};
/// Every key RunConfig understands, in canonical order.
const std::vector<ConfigKey>& config_keys();

/// Rows ready for training and evaluation.
struct AccountData {
  FeatureMatrix matrix;
  std::vector<std::string> ids;
};

struct TweetData {
  std::vector<TweetRecord> tweets;
  std::vector<TokenSequence> tokens;
};

AccountData load_account_data(const RunConfig& config);
TweetData load_tweet_data(const RunConfig& config);
EmbeddingTable prepare_embeddings(const RunConfig& config, const TweetData& data);
std::vector<TweetExample> make_examples(const TweetData& data, const EmbeddingTable& table,
                                        const RunConfig& config, std::span<const Index> rows);
SplitIndices split_tweets(const RunConfig& config, const TweetData& data);

struct ExperimentResult {
  EvalReport report;
  std::string config_hash;
  std::filesystem::path run_dir;
  ResampleDiagnostics resample;
  std::optional<TrainingTrace> trace;
};

/// Runs the pipeline without touching the disk (except to read inputs).
ExperimentResult run_in_memory(const RunConfig& config, StructuredText* checkpoint = nullptr,
                               EmbeddingTable* embeddings_used = nullptr);

/// Full pipeline plus artifacts: report.txt, report.kv, roc.csv, model.ckpt,
/// trace.csv, resample.txt, config.kv and manifest.kv under
/// `<output_dir>/<run_name>`, with `<output_dir>/latest` pointing at it.
ExperimentResult run_experiment(const RunConfig& config);

/// Reloads a finished run and scores the rows its config describes (`all_rows`
/// = whole corpus, otherwise the held-out split).
EvalReport evaluate_run(const std::filesystem::path& run_dir, bool all_rows = false,
                        const std::optional<std::filesystem::path>& manifest_override = std::nullopt);

RunConfig read_run_config(const std::filesystem::path& run_dir);
/// Checkpoint of a run as an LSTM model plus the embedding table it was trained with.
std::pair<ContextualLstmModel, EmbeddingTable> load_lstm_run(const std::filesystem::path& run_dir);

struct BenchRow {
  std::string name;
  RunConfig config;
  std::optional<EvalReport> report;
  std::string error;
};

/// Manifest keys: `base.<key>` for every row, `row.<name>.<key>` per row, and
/// optional comma-separated `grid.model`, `grid.resample`, `grid.embedding.dim`
/// whose cross product is appended after the explicit rows.
std::vector<BenchRow> expand_bench_manifest(const KeyValueFile& manifest);

/// Runs every row (failures are recorded, not fatal) and writes bench.csv and
/// bench.txt into `output_dir`. Row order equals manifest order.
std::vector<BenchRow> benchmark_suite(const KeyValueFile& manifest, const std::filesystem::path& output_dir,
                                      const std::function<void(const BenchRow&)>& progress = {});

std::string bench_csv(const std::vector<BenchRow>& rows);
std::string bench_table(const std::vector<BenchRow>& rows);

}  // namespace botdetect
