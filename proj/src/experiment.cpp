#include "botdetect/experiment.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <ctime>
#include <iomanip>
#include <map>
#include <set>
#include <sstream>

#include "botdetect/error.hpp"

namespace botdetect {

namespace fs = std::filesystem;

namespace {

constexpr std::uint64_t kSplitStream = 1;
constexpr std::uint64_t kResampleStream = 2;
constexpr std::uint64_t kBaselineStream = 3;
constexpr std::uint64_t kLstmStream = 4;
constexpr std::uint64_t kSyntheticStream = 5;
constexpr std::uint64_t kGaussianStream = 6;
constexpr std::uint64_t kEmbeddingStream = 7;

[[noreturn]] void bad_value(std::string_view key, std::string_view value, std::string_view expected) {
  throw Error(ErrorKind::InvalidConfig,
              "bad value '" + std::string(value) + "' for " + std::string(key) + " (expected " +
                  std::string(expected) + ")");
}

template <typename T>
T parse_num(std::string_view key, std::string_view value, std::string_view expected) {
  T out{};
  const auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
  if (value.empty() || ec != std::errc() || ptr != value.data() + value.size()) bad_value(key, value, expected);
  return out;
}

std::size_t parse_size(std::string_view key, std::string_view value) {
  return parse_num<std::size_t>(key, value, "a non-negative integer");
}
int parse_int(std::string_view key, std::string_view value) { return parse_num<int>(key, value, "an integer"); }
double parse_real(std::string_view key, std::string_view value) {
  const double v = parse_num<double>(key, value, "a number");
  if (!std::isfinite(v)) bad_value(key, value, "a finite number");
  return v;
}

bool parse_bool(std::string_view key, std::string_view value) {
  if (value == "true" || value == "1" || value == "yes") return true;
  if (value == "false" || value == "0" || value == "no") return false;
  bad_value(key, value, "true or false");
}

std::string bool_text(bool v) { return v ? "true" : "false"; }

Task parse_task(std::string_view key, std::string_view v) {
  if (v == "account" || v == "account_level") return Task::AccountLevel;
  if (v == "tweet" || v == "tweet_level") return Task::TweetLevel;
  bad_value(key, v, "account or tweet");
}

ModelKind parse_model(std::string_view key, std::string_view v) {
  if (v == "lstm_tweet_only" || v == "lstm") return ModelKind::LstmTweetOnly;
  if (v == "contextual_lstm") return ModelKind::ContextualLstm;
  try {
    switch (parse_baseline_kind(v)) {
      case BaselineKind::LogReg: return ModelKind::LogReg;
      case BaselineKind::SgdLinear: return ModelKind::SgdLinear;
      case BaselineKind::RandomForest: return ModelKind::RandomForest;
      case BaselineKind::AdaBoost: return ModelKind::AdaBoost;
      case BaselineKind::Mlp: return ModelKind::Mlp;
    }
  } catch (const Error&) {
  }
  bad_value(key, v, "logreg, sgd, random_forest, adaboost, mlp, lstm_tweet_only or contextual_lstm");
}

DataSource parse_source(std::string_view key, std::string_view v) {
  if (v == "synthetic") return DataSource::Synthetic;
  if (v == "gaussian") return DataSource::Gaussian;
  if (v == "manifest") return DataSource::Manifest;
  bad_value(key, v, "synthetic, gaussian or manifest");
}

struct Field {
  const char* name;
  const char* help;
  std::function<std::string(const RunConfig&)> get;
  std::function<void(RunConfig&, std::string_view key, std::string_view value)> set;
  bool hashed = true;
};

const std::vector<Field>& fields() {
  using C = RunConfig;
  using SV = std::string_view;
  static const std::vector<Field> table = {
      {"task", "account or tweet", [](const C& c) { return std::string(to_string(c.task)); },
       [](C& c, SV k, SV v) { c.task = parse_task(k, v); }},
      {"model", "logreg, sgd, random_forest, adaboost, mlp, lstm_tweet_only, contextual_lstm",
       [](const C& c) { return std::string(to_string(c.model)); },
       [](C& c, SV k, SV v) { c.model = parse_model(k, v); }},
      {"resample", "none, smote, smotenn, smotomek",
       [](const C& c) { return std::string(to_string(c.resample.strategy)); },
       [](C& c, SV k, SV v) {
         auto s = parse_resample_strategy(v);
         if (!s) bad_value(k, v, "none, smote, smotenn or smotomek");
         c.resample.strategy = *s;
       }},
      {"resample.smote_k", "SMOTE neighbours", [](const C& c) { return std::to_string(c.resample.smote_k); },
       [](C& c, SV k, SV v) { c.resample.smote_k = parse_int(k, v); }},
      {"resample.enn_k", "ENN neighbours", [](const C& c) { return std::to_string(c.resample.enn_k); },
       [](C& c, SV k, SV v) { c.resample.enn_k = parse_int(k, v); }},
      {"resample.target_ratio", "minority/majority ratio after SMOTE",
       [](const C& c) { return format_real(c.resample.target_ratio); },
       [](C& c, SV k, SV v) { c.resample.target_ratio = parse_real(k, v); }},
      {"resample.standardize", "z-score before distances",
       [](const C& c) { return bool_text(c.resample.standardize); },
       [](C& c, SV k, SV v) { c.resample.standardize = parse_bool(k, v); }},
      {"data.source", "synthetic, gaussian or manifest", [](const C& c) { return std::string(to_string(c.source)); },
       [](C& c, SV k, SV v) { c.source = parse_source(k, v); }},
      {"data.manifest", "corpus manifest path", [](const C& c) { return c.manifest.string(); },
       [](C& c, SV, SV v) { c.manifest = fs::path(std::string(v)); }},
      {"data.max_tweets_per_group", "cap on tweets per group (0 = all)",
       [](const C& c) { return std::to_string(c.max_tweets_per_group); },
       [](C& c, SV k, SV v) { c.max_tweets_per_group = parse_size(k, v); }},
      {"synth.accounts_per_class", "synthetic accounts per class",
       [](const C& c) { return std::to_string(c.synthetic.n_accounts_per_class); },
       [](C& c, SV k, SV v) { c.synthetic.n_accounts_per_class = parse_size(k, v); }},
      {"synth.tweets_per_account", "synthetic tweets per account",
       [](const C& c) { return std::to_string(c.synthetic.tweets_per_account); },
       [](C& c, SV k, SV v) { c.synthetic.tweets_per_account = parse_size(k, v); }},
      {"synth.separation", "class separation in [0,1]", [](const C& c) { return format_real(c.synthetic.separation); },
       [](C& c, SV k, SV v) { c.synthetic.separation = parse_real(k, v); }},
      {"gaussian.n_human", "human rows", [](const C& c) { return std::to_string(c.gaussian.n_human); },
       [](C& c, SV k, SV v) { c.gaussian.n_human = parse_size(k, v); }},
      {"gaussian.n_bot", "bot rows", [](const C& c) { return std::to_string(c.gaussian.n_bot); },
       [](C& c, SV k, SV v) { c.gaussian.n_bot = parse_size(k, v); }},
      {"gaussian.shift", "bot mean shift per axis", [](const C& c) { return format_real(c.gaussian.shift); },
       [](C& c, SV k, SV v) { c.gaussian.shift = parse_real(k, v); }},
      {"embedding.path", "GloVe text file (empty = fixture vectors)",
       [](const C& c) { return c.embeddings.string(); },
       [](C& c, SV, SV v) { c.embeddings = fs::path(std::string(v)); }},
      {"embedding.dim", "embedding dimension", [](const C& c) { return std::to_string(c.embedding_dim); },
       [](C& c, SV k, SV v) { c.embedding_dim = static_cast<Index>(parse_int(k, v)); }},
      {"embedding.max_len", "tokens kept per tweet", [](const C& c) { return std::to_string(c.embed.max_len); },
       [](C& c, SV k, SV v) { c.embed.max_len = static_cast<Index>(parse_int(k, v)); }},
      {"embedding.truncation", "head or tail",
       [](const C& c) { return std::string(c.embed.truncation == Truncation::KeepHead ? "head" : "tail"); },
       [](C& c, SV k, SV v) {
         if (v == "head") c.embed.truncation = Truncation::KeepHead;
         else if (v == "tail") c.embed.truncation = Truncation::KeepTail;
         else bad_value(k, v, "head or tail");
       }},
      {"tokenizer.tag_repeats", "emit <repeat> for punctuation runs",
       [](const C& c) { return bool_text(c.tokenizer.tag_repeats); },
       [](C& c, SV k, SV v) { c.tokenizer.tag_repeats = parse_bool(k, v); }},
      {"split.train_fraction", "training share", [](const C& c) { return format_real(c.split.train_fraction); },
       [](C& c, SV k, SV v) { c.split.train_fraction = parse_real(k, v); }},
      {"split.stratified", "stratify by label", [](const C& c) { return bool_text(c.split.stratified); },
       [](C& c, SV k, SV v) { c.split.stratified = parse_bool(k, v); }},
      {"split.by_account", "keep an account's tweets on one side", [](const C& c) { return bool_text(c.split.by_group); },
       [](C& c, SV k, SV v) { c.split.by_group = parse_bool(k, v); }},
      {"logreg.epochs", "", [](const C& c) { return std::to_string(c.baseline.logreg_epochs); },
       [](C& c, SV k, SV v) { c.baseline.logreg_epochs = parse_int(k, v); }},
      {"logreg.learning_rate", "", [](const C& c) { return format_real(c.baseline.logreg_learning_rate); },
       [](C& c, SV k, SV v) { c.baseline.logreg_learning_rate = parse_real(k, v); }},
      {"sgd.epochs", "", [](const C& c) { return std::to_string(c.baseline.sgd_epochs); },
       [](C& c, SV k, SV v) { c.baseline.sgd_epochs = parse_int(k, v); }},
      {"sgd.learning_rate", "", [](const C& c) { return format_real(c.baseline.sgd_learning_rate); },
       [](C& c, SV k, SV v) { c.baseline.sgd_learning_rate = parse_real(k, v); }},
      {"sgd.l2", "", [](const C& c) { return format_real(c.baseline.sgd_l2); },
       [](C& c, SV k, SV v) { c.baseline.sgd_l2 = parse_real(k, v); }},
      {"forest.trees", "", [](const C& c) { return std::to_string(c.baseline.forest_trees); },
       [](C& c, SV k, SV v) { c.baseline.forest_trees = parse_int(k, v); }},
      {"forest.max_depth", "0 = unlimited", [](const C& c) { return std::to_string(c.baseline.forest_max_depth); },
       [](C& c, SV k, SV v) { c.baseline.forest_max_depth = parse_int(k, v); }},
      {"forest.min_leaf", "", [](const C& c) { return std::to_string(c.baseline.forest_min_leaf); },
       [](C& c, SV k, SV v) { c.baseline.forest_min_leaf = parse_int(k, v); }},
      {"forest.max_features", "0 = sqrt(d)", [](const C& c) { return std::to_string(c.baseline.forest_max_features); },
       [](C& c, SV k, SV v) { c.baseline.forest_max_features = parse_int(k, v); }},
      {"adaboost.rounds", "", [](const C& c) { return std::to_string(c.baseline.adaboost_rounds); },
       [](C& c, SV k, SV v) { c.baseline.adaboost_rounds = parse_int(k, v); }},
      {"mlp.layers", "e.g. 500,200,1", [](const C& c) { return format_layer_sizes(c.baseline.mlp_layers); },
       [](C& c, SV, SV v) { c.baseline.mlp_layers = parse_layer_sizes(v); }},
      {"mlp.epochs", "", [](const C& c) { return std::to_string(c.baseline.mlp_epochs); },
       [](C& c, SV k, SV v) { c.baseline.mlp_epochs = parse_int(k, v); }},
      {"mlp.batch_size", "", [](const C& c) { return std::to_string(c.baseline.mlp_batch_size); },
       [](C& c, SV k, SV v) { c.baseline.mlp_batch_size = parse_size(k, v); }},
      {"mlp.learning_rate", "Adam step size", [](const C& c) { return format_real(c.baseline.mlp_adam.learning_rate); },
       [](C& c, SV k, SV v) { c.baseline.mlp_adam.learning_rate = parse_real(k, v); }},
      {"lstm.epochs", "", [](const C& c) { return std::to_string(c.lstm.epochs); },
       [](C& c, SV k, SV v) { c.lstm.epochs = parse_int(k, v); }},
      {"lstm.batch_size", "", [](const C& c) { return std::to_string(c.lstm.batch_size); },
       [](C& c, SV k, SV v) { c.lstm.batch_size = parse_size(k, v); }},
      {"lstm.learning_rate", "Adam step size", [](const C& c) { return format_real(c.lstm.adam.learning_rate); },
       [](C& c, SV k, SV v) { c.lstm.adam.learning_rate = parse_real(k, v); }},
      {"lstm.loss_weight_main", "", [](const C& c) { return format_real(c.lstm.loss_weights.main); },
       [](C& c, SV k, SV v) { c.lstm.loss_weights.main = parse_real(k, v); }},
      {"lstm.loss_weight_aux", "", [](const C& c) { return format_real(c.lstm.loss_weights.aux); },
       [](C& c, SV k, SV v) { c.lstm.loss_weights.aux = parse_real(k, v); }},
      {"seed", "master seed", [](const C& c) { return std::to_string(c.seed); },
       [](C& c, SV k, SV v) { c.seed = parse_num<std::uint64_t>(k, v, "an unsigned integer"); }},
      {"output.dir", "directory holding run folders", [](const C& c) { return c.output_dir.string(); },
       [](C& c, SV, SV v) { c.output_dir = fs::path(std::string(v)); }, false},
      {"output.run_name", "run folder name (empty = timestamp)", [](const C& c) { return c.run_name; },
       [](C& c, SV, SV v) { c.run_name = std::string(v); }, false},
  };
  return table;
}

std::string hash_line(const std::string& hash) { return "# config_hash: " + hash + "\n"; }

std::string utc_stamp() {
  const std::time_t now = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&now, &tm);
  std::ostringstream out;
  out << std::put_time(&tm, "%Y%m%dT%H%M%SZ");
  return out.str();
}

std::vector<Label> labels_of(const std::vector<TweetRecord>& tweets, std::span<const Index> rows) {
  std::vector<Label> out;
  out.reserve(rows.size());
  for (Index r : rows) out.push_back(tweets[static_cast<std::size_t>(r)].label);
  return out;
}

FeatureMatrix tweet_metadata_rows(const TweetData& data, std::span<const Index> rows) {
  std::vector<TweetRecord> picked;
  picked.reserve(rows.size());
  for (Index r : rows) picked.push_back(data.tweets[static_cast<std::size_t>(r)]);
  return make_tweet_metadata_matrix(picked);
}

std::vector<Index> all_rows(std::size_t n) {
  std::vector<Index> out(n);
  for (std::size_t i = 0; i < n; ++i) out[i] = static_cast<Index>(i);
  return out;
}

nn::LstmArchitecture architecture_for(const RunConfig& config, Index embedding_dim) {
  nn::LstmArchitecture a;
  a.variant = config.model == ModelKind::ContextualLstm ? nn::LstmVariant::Contextual : nn::LstmVariant::TweetOnly;
  a.embedding_dim = embedding_dim;
  return a;
}

void record_embedding(StructuredText& ckpt, const RunConfig& config, const EmbeddingTable& table) {
  ckpt.set("embedding.source", config.embeddings.empty() ? "fixture" : config.embeddings.string());
  ckpt.set("embedding.fingerprint", hex64(table.fingerprint()));
  ckpt.set("embedding.vocabulary", std::to_string(table.size()));
  ckpt.set("embedding.max_len", std::to_string(config.embed.max_len));
  ckpt.set("embedding.truncation", config.embed.truncation == Truncation::KeepHead ? "head" : "tail");
  ckpt.set("tokenizer.tag_repeats", bool_text(config.tokenizer.tag_repeats));
}

}  // namespace

const char* to_string(Task task) { return task == Task::AccountLevel ? "account" : "tweet"; }

const char* to_string(ModelKind model) {
  switch (model) {
    case ModelKind::LogReg: return "logreg";
    case ModelKind::SgdLinear: return "sgd";
    case ModelKind::RandomForest: return "random_forest";
    case ModelKind::AdaBoost: return "adaboost";
    case ModelKind::Mlp: return "mlp";
    case ModelKind::LstmTweetOnly: return "lstm_tweet_only";
    case ModelKind::ContextualLstm: return "contextual_lstm";
  }
  return "?";
}

const char* to_string(DataSource source) {
  switch (source) {
    case DataSource::Synthetic: return "synthetic";
    case DataSource::Gaussian: return "gaussian";
    case DataSource::Manifest: return "manifest";
  }
  return "?";
}

bool is_lstm(ModelKind model) { return model == ModelKind::LstmTweetOnly || model == ModelKind::ContextualLstm; }

std::optional<BaselineKind> baseline_kind(ModelKind model) {
  switch (model) {
    case ModelKind::LogReg: return BaselineKind::LogReg;
    case ModelKind::SgdLinear: return BaselineKind::SgdLinear;
    case ModelKind::RandomForest: return BaselineKind::RandomForest;
    case ModelKind::AdaBoost: return BaselineKind::AdaBoost;
    case ModelKind::Mlp: return BaselineKind::Mlp;
    default: return std::nullopt;
  }
}

const std::vector<ConfigKey>& config_keys() {
  static const std::vector<ConfigKey> keys = [] {
    std::vector<ConfigKey> out;
    for (const auto& f : fields()) out.push_back({f.name, f.help});
    return out;
  }();
  return keys;
}

KeyValueFile RunConfig::to_key_values() const {
  KeyValueFile kv;
  for (const auto& f : fields()) {
    if (f.hashed) kv.set(f.name, f.get(*this));
  }
  return kv;
}

void RunConfig::set(std::string_view key, std::string_view value) {
  for (const auto& f : fields()) {
    if (key == f.name) {
      f.set(*this, key, trim(value));
      return;
    }
  }
  throw Error(ErrorKind::InvalidConfig, "unknown configuration key '" + std::string(key) + "'");
}

RunConfig RunConfig::from_key_values(const KeyValueFile& kv) { return from_key_values(kv, RunConfig{}); }

RunConfig RunConfig::from_key_values(const KeyValueFile& kv, RunConfig base) {
  for (const auto& [k, v] : kv.entries()) base.set(k, v);
  return base;
}

void RunConfig::validate() const {
  auto fail = [](const std::string& msg) { throw Error(ErrorKind::InvalidConfig, msg); };
  if (is_lstm(model) && task != Task::TweetLevel) {
    fail(std::string("model ") + to_string(model) + " classifies tweets; set task=tweet");
  }
  if (is_lstm(model) && resample.strategy != ResampleStrategy::None) {
    fail(std::string("resample=") + std::string(to_string(resample.strategy)) +
         " is not available for LSTM models (their training data is never resampled); set resample=none");
  }
  if (source == DataSource::Gaussian && task != Task::AccountLevel) {
    fail("data.source=gaussian produces account rows only; use task=account");
  }
  if (source == DataSource::Manifest && manifest.empty()) fail("data.source=manifest needs data.manifest=<path>");
  if (!(split.train_fraction > 0.0 && split.train_fraction < 1.0)) fail("split.train_fraction must lie in (0,1)");
  if (embedding_dim <= 0) fail("embedding.dim must be positive");
  if (embed.max_len <= 0) fail("embedding.max_len must be positive");
  if (synthetic.separation < 0.0 || synthetic.separation > 1.0) fail("synth.separation must lie in [0,1]");
  if (resample.smote_k < 1 || resample.enn_k < 1) fail("resample.smote_k and resample.enn_k must be >= 1");
  if (resample.target_ratio <= 0.0 || resample.target_ratio > 1.0) fail("resample.target_ratio must lie in (0,1]");
  if (lstm.epochs < 0 || lstm.batch_size == 0) fail("lstm.epochs must be >= 0 and lstm.batch_size > 0");
  if (lstm.loss_weights.main < 0.0 || lstm.loss_weights.aux < 0.0 ||
      std::abs(lstm.loss_weights.main + lstm.loss_weights.aux - 1.0) > 1e-9) {
    fail("lstm.loss_weight_main and lstm.loss_weight_aux must be non-negative and sum to 1");
  }
  if (baseline.mlp_layers.empty() || baseline.mlp_layers.back() != 1) fail("mlp.layers must end with 1");
  if (baseline.forest_trees < 1 || baseline.forest_min_leaf < 1) fail("forest.trees and forest.min_leaf must be >= 1");
  if (baseline.mlp_batch_size == 0) fail("mlp.batch_size must be positive");
}

std::string RunConfig::hash() const { return hex64(fnv1a(to_key_values().to_string())); }

SplitSpec RunConfig::effective_split() const {
  SplitSpec s = split;
  s.seed = mix_seed(seed, kSplitStream);
  return s;
}

ResampleConfig RunConfig::effective_resample() const {
  ResampleConfig r = resample;
  r.seed = mix_seed(seed, kResampleStream);
  return r;
}

BaselineConfig RunConfig::effective_baseline() const {
  BaselineConfig b = baseline;
  b.seed = mix_seed(seed, kBaselineStream);
  return b;
}

LstmTrainConfig RunConfig::effective_lstm() const {
  LstmTrainConfig l = lstm;
  l.seed = mix_seed(seed, kLstmStream);
  return l;
}

SyntheticCorpusSpec RunConfig::effective_synthetic() const {
  SyntheticCorpusSpec s = synthetic;
  s.seed = mix_seed(seed, kSyntheticStream);
  return s;
}

GaussianAccountSpec RunConfig::effective_gaussian() const {
  GaussianAccountSpec g = gaussian;
  g.seed = mix_seed(seed, kGaussianStream);
  return g;
}

AccountData load_account_data(const RunConfig& config) {
  switch (config.source) {
    case DataSource::Gaussian: {
      FeatureMatrix m = generate_gaussian_accounts(config.effective_gaussian());
      std::vector<std::string> ids;
      for (Index i = 0; i < m.rows(); ++i) ids.push_back("row_" + std::to_string(i));
      return {std::move(m), std::move(ids)};
    }
    case DataSource::Synthetic: {
      auto corpus = generate_synthetic(config.effective_synthetic());
      std::vector<std::string> ids;
      for (const auto& a : corpus.accounts) ids.push_back(a.account_id);
      return {make_account_matrix(corpus.accounts), std::move(ids)};
    }
    case DataSource::Manifest: {
      LoadOptions options;
      options.load_tweets = false;
      auto loaded = load_corpus(CorpusManifest::read(config.manifest), options);
      if (loaded.accounts.empty()) throw Error(ErrorKind::EmptyInput, "the manifest yielded no accounts");
      std::vector<std::string> ids;
      for (const auto& a : loaded.accounts) ids.push_back(a.account_id);
      return {make_account_matrix(loaded.accounts), std::move(ids)};
    }
  }
  throw Error(ErrorKind::InvalidConfig, "unknown data source");
}

TweetData load_tweet_data(const RunConfig& config) {
  TweetData data;
  if (config.source == DataSource::Synthetic) {
    data.tweets = generate_synthetic(config.effective_synthetic()).tweets;
  } else if (config.source == DataSource::Manifest) {
    LoadOptions options;
    options.load_accounts = false;
    options.max_tweets_per_group = config.max_tweets_per_group;
    data.tweets = load_corpus(CorpusManifest::read(config.manifest), options).tweets;
  } else {
    throw Error(ErrorKind::InvalidConfig, "tweet-level runs need data.source=synthetic or manifest");
  }
  if (data.tweets.empty()) throw Error(ErrorKind::EmptyInput, "the corpus contains no tweets");
  data.tokens.reserve(data.tweets.size());
  for (const auto& t : data.tweets) data.tokens.push_back(tokenize(t.text, config.tokenizer));
  return data;
}

EmbeddingTable prepare_embeddings(const RunConfig& config, const TweetData& data) {
  std::set<std::string> vocabulary;
  for (const auto& seq : data.tokens) vocabulary.insert(seq.begin(), seq.end());
  if (!config.embeddings.empty()) {
    const std::unordered_set<std::string> wanted(vocabulary.begin(), vocabulary.end());
    GloveLoadOptions options;
    options.restrict_to = &wanted;
    return load_glove(config.embeddings, config.embedding_dim, options);
  }
  return make_fixture_table(std::vector<std::string>(vocabulary.begin(), vocabulary.end()), config.embedding_dim,
                            mix_seed(config.seed, kEmbeddingStream));
}

std::vector<TweetExample> make_examples(const TweetData& data, const EmbeddingTable& table, const RunConfig& config,
                                        std::span<const Index> rows) {
  std::vector<TweetExample> out;
  out.reserve(rows.size());
  for (Index r : rows) {
    const auto i = static_cast<std::size_t>(r);
    out.push_back({embed(data.tokens[i], table, config.embed), encode_tweet_metadata(data.tweets[i].metadata),
                   data.tweets[i].label});
  }
  return out;
}

SplitIndices split_tweets(const RunConfig& config, const TweetData& data) {
  std::vector<Label> labels;
  std::vector<std::string> groups;
  for (const auto& t : data.tweets) {
    labels.push_back(t.label);
    groups.push_back(t.account_id);
  }
  return split_indices(labels, config.effective_split(), groups);
}

ExperimentResult run_in_memory(const RunConfig& config, StructuredText* checkpoint, EmbeddingTable* embeddings_used) {
  config.validate();
  ExperimentResult result;
  result.config_hash = config.hash();

  KeyValueFile echo = config.to_key_values();
  echo.set("config_hash", result.config_hash);
  echo.set("threshold_rule", "score >= threshold predicts bot");

  std::vector<double> scores;
  std::vector<Label> truth;
  if (auto kind = baseline_kind(config.model)) {
    FeatureMatrix train_m, test_m;
    if (config.task == Task::AccountLevel) {
      auto data = load_account_data(config);
      auto parts = split(data.matrix, config.effective_split());
      train_m = std::move(parts.train);
      test_m = std::move(parts.test);
    } else {
      auto data = load_tweet_data(config);
      const auto idx = split_tweets(config, data);
      train_m = tweet_metadata_rows(data, idx.train);
      test_m = tweet_metadata_rows(data, idx.test);
    }
    auto resampled = apply_strategy(train_m, config.effective_resample());
    result.resample = resampled.diagnostics;
    const BaselineModel model = fit_baseline(*kind, resampled.matrix, config.effective_baseline());
    scores = model.predict_proba(test_m);
    truth = test_m.labels();
    const KeyValueFile fit_kv = config.effective_baseline().to_key_values(*kind);
    for (const auto& [k, v] : fit_kv.entries()) echo.set("fit." + k, v);
    echo.set("rows.train", std::to_string(train_m.rows()));
    echo.set("rows.train_resampled", std::to_string(resampled.matrix.rows()));
    echo.set("rows.test", std::to_string(test_m.rows()));
    if (checkpoint) {
      model.write(*checkpoint);
      checkpoint->set("config_hash", result.config_hash);
    }
  } else {
    auto data = load_tweet_data(config);
    const EmbeddingTable table = prepare_embeddings(config, data);
    const auto idx = split_tweets(config, data);
    const auto train = make_examples(data, table, config, idx.train);
    const auto test = make_examples(data, table, config, idx.test);
    const auto arch = architecture_for(config, table.dimension());
    auto trained = train_lstm(arch, config.effective_lstm(), train, test);
    scores = predict(trained.model, test);
    truth = labels_of(data.tweets, idx.test);
    echo.set("fit.optimizer", trained.trace.optimizer);
    echo.set("fit.loss", "binary cross-entropy, total = main weight * main + aux weight * aux");
    echo.set("fit.init", "glorot uniform, zero biases, forget-gate bias 1");
    echo.set("fit.embedding_fingerprint", hex64(table.fingerprint()));
    echo.set("rows.train", std::to_string(train.size()));
    echo.set("rows.test", std::to_string(test.size()));
    if (checkpoint) {
      write_lstm(trained.model, *checkpoint);
      record_embedding(*checkpoint, config, table);
      checkpoint->set("config_hash", result.config_hash);
    }
    if (embeddings_used) *embeddings_used = table;
    result.trace = std::move(trained.trace);
  }
  result.report = evaluate(scores, truth);
  result.report.config_echo = std::move(echo);
  return result;
}

ExperimentResult run_experiment(const RunConfig& config) {
  config.validate();
  const std::string hash = config.hash();
  const std::string name = config.run_name.empty() ? utc_stamp() + "-" + hash.substr(0, 8) : config.run_name;
  const fs::path run_dir = config.output_dir / name;

  StructuredText checkpoint;
  EmbeddingTable table;
  ExperimentResult result = run_in_memory(config, &checkpoint, &table);
  result.run_dir = run_dir;

  fs::create_directories(run_dir);
  const std::string header = hash_line(hash);
  write_file(run_dir / "report.txt", header + result.report.to_text());
  {
    KeyValueFile kv;
    kv.set("config_hash", hash);
    const KeyValueFile report_kv = result.report.to_key_values();
    for (const auto& [k, v] : report_kv.entries()) kv.set(k, v);
    write_file(run_dir / "report.kv", kv.to_string());
  }
  write_file(run_dir / "roc.csv", header + result.report.roc_csv());
  checkpoint.save(run_dir / "model.ckpt");
  if (result.trace) write_file(run_dir / "trace.csv", header + result.trace->to_csv());
  if (is_lstm(config.model)) write_file(run_dir / "embeddings.txt", to_glove_text(table));
  else write_file(run_dir / "resample.txt", header + result.resample.to_text());

  KeyValueFile full = config.to_key_values();
  full.set("output.dir", config.output_dir.string());
  full.set("output.run_name", name);
  write_file(run_dir / "config.kv", header + full.to_string());

  KeyValueFile manifest;
  manifest.set("config_hash", hash);
  manifest.set("seed.master", std::to_string(config.seed));
  manifest.set("seed.split", std::to_string(config.effective_split().seed));
  manifest.set("seed.resample", std::to_string(config.effective_resample().seed));
  manifest.set("seed.baseline", std::to_string(config.effective_baseline().seed));
  manifest.set("seed.lstm", std::to_string(config.effective_lstm().seed));
  manifest.set("seed.synthetic", std::to_string(config.effective_synthetic().seed));
  manifest.set("seed.gaussian", std::to_string(config.effective_gaussian().seed));
  manifest.set("decision.positive_class", "bot");
  manifest.set("decision.threshold", ">= 0.5");
  manifest.set("decision.features", "standardized with training-set statistics");
  manifest.set("decision.lstm_resampling", "never applied");
  manifest.set("decision.split", config.split.stratified ? "stratified" : "random");
  for (std::size_t i = 0; i < result.resample.assumptions.size(); ++i) {
    manifest.set("assumption." + std::to_string(i), result.resample.assumptions[i]);
  }
  std::string artifacts = "report.txt,report.kv,roc.csv,model.ckpt,config.kv";
  artifacts += result.trace ? ",trace.csv,embeddings.txt" : ",resample.txt";
  manifest.set("artifacts", artifacts);
  write_file(run_dir / "manifest.kv", manifest.to_string());

  const fs::path latest = config.output_dir / "latest";
  std::error_code ec;
  fs::remove(latest, ec);
  fs::create_directory_symlink(name, latest, ec);
  return result;
}

RunConfig read_run_config(const fs::path& run_dir) {
  return RunConfig::from_key_values(KeyValueFile::read(run_dir / "config.kv"));
}

std::pair<ContextualLstmModel, EmbeddingTable> load_lstm_run(const fs::path& run_dir) {
  const auto ckpt = StructuredText::load(run_dir / "model.ckpt");
  auto model = read_lstm(ckpt);
  auto table = load_glove(run_dir / "embeddings.txt", model.architecture().embedding_dim);
  if (hex64(table.fingerprint()) != ckpt.require("embedding.fingerprint")) {
    throw Error(ErrorKind::SchemaMismatch, "embeddings.txt does not match the table the model was trained with");
  }
  return {std::move(model), std::move(table)};
}

EvalReport evaluate_run(const fs::path& run_dir, bool all, const std::optional<fs::path>& manifest_override) {
  RunConfig config = read_run_config(run_dir);
  if (manifest_override) {
    config.source = DataSource::Manifest;
    config.manifest = *manifest_override;
  }
  std::vector<double> scores;
  std::vector<Label> truth;
  if (is_lstm(config.model)) {
    auto [model, table] = load_lstm_run(run_dir);
    const auto data = load_tweet_data(config);
    const auto rows = all ? all_rows(data.tweets.size()) : split_tweets(config, data).test;
    const auto examples = make_examples(data, table, config, rows);
    scores = predict(model, examples);
    truth = labels_of(data.tweets, rows);
  } else {
    const auto model = BaselineModel::read(StructuredText::load(run_dir / "model.ckpt"));
    FeatureMatrix m;
    if (config.task == Task::AccountLevel) {
      auto data = load_account_data(config);
      m = all ? data.matrix : split(data.matrix, config.effective_split()).test;
    } else {
      const auto data = load_tweet_data(config);
      m = tweet_metadata_rows(data, all ? all_rows(data.tweets.size()) : split_tweets(config, data).test);
    }
    scores = model.predict_proba(m);
    truth = m.labels();
  }
  EvalReport report = evaluate(scores, truth);
  report.config_echo = config.to_key_values();
  report.config_echo.set("config_hash", config.hash());
  report.config_echo.set("evaluated_rows", all ? "all" : "held-out split");
  return report;
}

std::vector<BenchRow> expand_bench_manifest(const KeyValueFile& manifest) {
  KeyValueFile base_kv;
  std::vector<std::string> order;
  std::map<std::string, KeyValueFile> rows;
  std::vector<std::string> grid_models, grid_resample, grid_dims;
  auto split_list = [](const std::string& v) {
    std::vector<std::string> out;
    std::stringstream ss(v);
    std::string item;
    while (std::getline(ss, item, ',')) {
      item = trim(item);
      if (!item.empty()) out.push_back(item);
    }
    return out;
  };
  for (const auto& [k, v] : manifest.entries()) {
    if (k.rfind("base.", 0) == 0) {
      base_kv.set(k.substr(5), v);
    } else if (k.rfind("row.", 0) == 0) {
      const std::size_t dot = k.find('.', 4);
      if (dot == std::string::npos || dot == 4) {
        throw Error(ErrorKind::InvalidConfig, "bench key '" + k + "' should look like row.<name>.<key>");
      }
      const std::string name = k.substr(4, dot - 4);
      if (!rows.count(name)) order.push_back(name);
      rows[name].set(k.substr(dot + 1), v);
    } else if (k == "grid.model") {
      grid_models = split_list(v);
    } else if (k == "grid.resample") {
      grid_resample = split_list(v);
    } else if (k == "grid.embedding.dim") {
      grid_dims = split_list(v);
    } else {
      throw Error(ErrorKind::InvalidConfig, "unknown bench manifest key '" + k + "'");
    }
  }
  const RunConfig base = RunConfig::from_key_values(base_kv);
  std::vector<BenchRow> out;
  for (const auto& name : order) out.push_back({name, RunConfig::from_key_values(rows[name], base), {}, {}});
  if (!grid_models.empty() || !grid_resample.empty() || !grid_dims.empty()) {
    const std::vector<std::string> none{""};
    for (const auto& m : grid_models.empty() ? none : grid_models) {
      for (const auto& r : grid_resample.empty() ? none : grid_resample) {
        for (const auto& d : grid_dims.empty() ? none : grid_dims) {
          RunConfig c = base;
          std::string name;
          auto add = [&](const std::string& key, const std::string& value, const std::string& label) {
            if (value.empty()) return;
            c.set(key, value);
            name += (name.empty() ? "" : "+") + label;
          };
          add("model", m, m);
          add("resample", r, r);
          add("embedding.dim", d, d + "d");
          out.push_back({name, c, {}, {}});
        }
      }
    }
  }
  std::set<std::string> seen;
  for (const auto& r : out) {
    if (!seen.insert(r.name).second) throw Error(ErrorKind::InvalidConfig, "duplicate bench row '" + r.name + "'");
  }
  return out;
}

std::vector<BenchRow> benchmark_suite(const KeyValueFile& manifest, const fs::path& output_dir,
                                      const std::function<void(const BenchRow&)>& progress) {
  auto rows = expand_bench_manifest(manifest);
  for (auto& row : rows) {
    row.config.output_dir = output_dir / "runs";
    row.config.run_name = row.name;
    try {
      row.report = run_experiment(row.config).report;
    } catch (const std::exception& e) {
      row.error = e.what();
    }
    if (progress) progress(row);
  }
  fs::create_directories(output_dir);
  write_file(output_dir / "bench.csv", bench_csv(rows));
  write_file(output_dir / "bench.txt", bench_table(rows));
  return rows;
}

std::string bench_csv(const std::vector<BenchRow>& rows) {
  std::ostringstream out;
  write_csv_row(out, {"row", "task", "model", "resample", "embedding_dim", "status", "precision", "recall", "f1",
                      "accuracy", "auc", "macro_f1", "config_hash", "error"});
  for (const auto& r : rows) {
    const auto& c = r.config;
    std::vector<std::string> f{r.name, to_string(c.task), to_string(c.model), std::string(to_string(c.resample.strategy)),
                               is_lstm(c.model) ? std::to_string(c.embedding_dim) : ""};
    if (r.report) {
      const auto& e = *r.report;
      f.insert(f.end(), {"ok", format_real(e.precision), format_real(e.recall), format_real(e.f1),
                         format_real(e.accuracy), format_real(e.auc), format_real(e.macro_f1)});
    } else {
      f.insert(f.end(), {"failed", "", "", "", "", "", ""});
    }
    f.push_back(c.hash());
    f.push_back(r.error);
    write_csv_row(out, f);
  }
  return out.str();
}

std::string bench_table(const std::vector<BenchRow>& rows) {
  std::size_t width = 6;
  for (const auto& r : rows) width = std::max(width, r.name.size());
  std::ostringstream out;
  out << std::left << std::setw(static_cast<int>(width + 2)) << "System" << std::right << std::setw(10) << "Precision"
      << std::setw(10) << "Recall" << std::setw(10) << "F1" << std::setw(10) << "Accuracy" << std::setw(10) << "AUC"
      << '\n';
  out << std::string(width + 52, '-') << '\n';
  out << std::fixed << std::setprecision(4);
  for (const auto& r : rows) {
    out << std::left << std::setw(static_cast<int>(width + 2)) << r.name << std::right;
    if (r.report) {
      out << std::setw(10) << r.report->precision << std::setw(10) << r.report->recall << std::setw(10) << r.report->f1
          << std::setw(10) << r.report->accuracy << std::setw(10) << r.report->auc << '\n';
    } else {
      out << "  failed: " << r.error << '\n';
    }
  }
  return out.str();
}

}  // namespace botdetect
