#include "botdetect/core_data.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <unordered_map>

#include "botdetect/error.hpp"
#include "botdetect/rng.hpp"

namespace botdetect {

const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::InvalidConfig: return "InvalidConfig";
    case ErrorKind::FileNotFound: return "FileNotFound";
    case ErrorKind::HeaderMismatch: return "HeaderMismatch";
    case ErrorKind::ParseError: return "ParseError";
    case ErrorKind::DimensionMismatch: return "DimensionMismatch";
    case ErrorKind::SchemaMismatch: return "SchemaMismatch";
    case ErrorKind::EmptyInput: return "EmptyInput";
    case ErrorKind::EmptyClass: return "EmptyClass";
    case ErrorKind::SingleClass: return "SingleClass";
    case ErrorKind::InsufficientRows: return "InsufficientRows";
    case ErrorKind::DegenerateMinority: return "DegenerateMinority";
    case ErrorKind::DegenerateData: return "DegenerateData";
    case ErrorKind::TrainingFailure: return "TrainingFailure";
  }
  return "Unknown";
}

std::string_view to_string(Label label) { return label == Label::Bot ? "bot" : "human"; }

std::optional<Label> parse_label(std::string_view text) {
  std::string lower(text);
  std::transform(lower.begin(), lower.end(), lower.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  if (lower == "bot" || lower == "1") return Label::Bot;
  if (lower == "human" || lower == "0") return Label::Human;
  return std::nullopt;
}

namespace {

double as_real(std::uint64_t v) { return static_cast<double>(v); }
double as_real(bool v) { return v ? 1.0 : 0.0; }

std::uint64_t as_count(double v) { return static_cast<std::uint64_t>(std::llround(v)); }
bool as_flag(double v) { return v >= 0.5; }

void require_width(Index got, std::size_t want, const char* what) {
  if (got != static_cast<Index>(want)) {
    throw Error(ErrorKind::DimensionMismatch, std::string(what) + " expects width " +
                                                  std::to_string(want) + ", got " +
                                                  std::to_string(got));
  }
}

}  // namespace

VecX encode_account(const AccountFeatures& f) {
  VecX v(kAccountWidth);
  v << as_real(f.statuses_count), as_real(f.followers_count), as_real(f.friends_count),
      as_real(f.favourites_count), as_real(f.listed_count), as_real(f.default_profile),
      as_real(f.geo_enabled), as_real(f.profile_use_background_image), as_real(f.verified),
      as_real(f.is_protected);
  return v;
}

AccountFeatures decode_account(const Eigen::Ref<const VecX>& v) {
  require_width(v.size(), kAccountWidth, "decode_account");
  AccountFeatures f;
  f.statuses_count = as_count(v[0]);
  f.followers_count = as_count(v[1]);
  f.friends_count = as_count(v[2]);
  f.favourites_count = as_count(v[3]);
  f.listed_count = as_count(v[4]);
  f.default_profile = as_flag(v[5]);
  f.geo_enabled = as_flag(v[6]);
  f.profile_use_background_image = as_flag(v[7]);
  f.verified = as_flag(v[8]);
  f.is_protected = as_flag(v[9]);
  return f;
}

VecX encode_tweet_metadata(const TweetMetadata& m) {
  VecX v(kTweetMetadataWidth);
  v << as_real(m.retweet_count), as_real(m.reply_count), as_real(m.favorite_count),
      as_real(m.num_hashtags), as_real(m.num_urls), as_real(m.num_mentions);
  return v;
}

TweetMetadata decode_tweet_metadata(const Eigen::Ref<const VecX>& v) {
  require_width(v.size(), kTweetMetadataWidth, "decode_tweet_metadata");
  TweetMetadata m;
  m.retweet_count = as_count(v[0]);
  m.reply_count = as_count(v[1]);
  m.favorite_count = as_count(v[2]);
  m.num_hashtags = as_count(v[3]);
  m.num_urls = as_count(v[4]);
  m.num_mentions = as_count(v[5]);
  return m;
}

FeatureMatrix::FeatureMatrix(RowMatX values, std::vector<std::string> schema,
                             std::vector<Label> labels)
    : values_(std::move(values)), schema_(std::move(schema)), labels_(std::move(labels)) {
  if (values_.rows() > 0 && values_.cols() != static_cast<Index>(schema_.size())) {
    throw Error(ErrorKind::SchemaMismatch,
                "row width " + std::to_string(values_.cols()) + " != schema width " +
                    std::to_string(schema_.size()));
  }
  if (values_.rows() == 0) values_.resize(0, static_cast<Index>(schema_.size()));
  if (static_cast<std::size_t>(values_.rows()) != labels_.size()) {
    throw Error(ErrorKind::SchemaMismatch, "row count " + std::to_string(values_.rows()) +
                                               " != label count " +
                                               std::to_string(labels_.size()));
  }
  if (!values_.allFinite()) {
    throw Error(ErrorKind::ParseError, "feature matrix contains NaN or infinite entries");
  }
}

std::size_t FeatureMatrix::count(Label label) const {
  return static_cast<std::size_t>(std::count(labels_.begin(), labels_.end(), label));
}

Label FeatureMatrix::minority_label() const {
  return count(Label::Bot) <= count(Label::Human) ? Label::Bot : Label::Human;
}

FeatureMatrix FeatureMatrix::select(std::span<const Index> indices) const {
  RowMatX out(static_cast<Index>(indices.size()), cols());
  std::vector<Label> labels;
  labels.reserve(indices.size());
  for (std::size_t i = 0; i < indices.size(); ++i) {
    out.row(static_cast<Index>(i)) = values_.row(indices[i]);
    labels.push_back(labels_[static_cast<std::size_t>(indices[i])]);
  }
  return FeatureMatrix(std::move(out), schema_, std::move(labels));
}

FeatureMatrix FeatureMatrix::concat(const FeatureMatrix& other) const {
  if (other.schema_ != schema_) {
    throw Error(ErrorKind::SchemaMismatch, "cannot concatenate matrices with different schemas");
  }
  RowMatX out(rows() + other.rows(), cols());
  out.topRows(rows()) = values_;
  out.bottomRows(other.rows()) = other.values_;
  std::vector<Label> labels = labels_;
  labels.insert(labels.end(), other.labels_.begin(), other.labels_.end());
  return FeatureMatrix(std::move(out), schema_, std::move(labels));
}

FeatureMatrix FeatureMatrix::with_values(RowMatX values) const {
  return FeatureMatrix(std::move(values), schema_, labels_);
}

std::vector<std::string> account_schema() {
  return {kAccountSchema.begin(), kAccountSchema.end()};
}

std::vector<std::string> tweet_metadata_schema() {
  return {kTweetMetadataSchema.begin(), kTweetMetadataSchema.end()};
}

FeatureMatrix make_account_matrix(std::span<const AccountRecord> accounts) {
  RowMatX values(static_cast<Index>(accounts.size()), static_cast<Index>(kAccountWidth));
  std::vector<Label> labels;
  labels.reserve(accounts.size());
  for (std::size_t i = 0; i < accounts.size(); ++i) {
    values.row(static_cast<Index>(i)) = encode_account(accounts[i].features).transpose();
    labels.push_back(accounts[i].label);
  }
  return FeatureMatrix(std::move(values), account_schema(), std::move(labels));
}

FeatureMatrix make_tweet_metadata_matrix(std::span<const TweetRecord> tweets) {
  RowMatX values(static_cast<Index>(tweets.size()), static_cast<Index>(kTweetMetadataWidth));
  std::vector<Label> labels;
  labels.reserve(tweets.size());
  for (std::size_t i = 0; i < tweets.size(); ++i) {
    values.row(static_cast<Index>(i)) = encode_tweet_metadata(tweets[i].metadata).transpose();
    labels.push_back(tweets[i].label);
  }
  return FeatureMatrix(std::move(values), tweet_metadata_schema(), std::move(labels));
}

SplitIndices split_indices(std::span<const Label> labels, const SplitSpec& spec,
                           std::span<const std::string> groups) {
  if (!(spec.train_fraction > 0.0 && spec.train_fraction < 1.0)) {
    throw Error(ErrorKind::InvalidConfig, "train_fraction must lie in (0, 1)");
  }
  if (labels.empty()) throw Error(ErrorKind::EmptyInput, "cannot split an empty matrix");
  if (spec.by_group && groups.size() != labels.size()) {
    throw Error(ErrorKind::InvalidConfig, "grouped split needs one group id per row");
  }

  // A unit is a row, or a group of rows when splitting by group. Units are
  // numbered in order of first appearance so the result never depends on
  // hash-map iteration order.
  std::vector<Index> unit_of_row(labels.size());
  std::vector<Label> unit_label;
  if (spec.by_group) {
    std::unordered_map<std::string_view, Index> seen;
    for (std::size_t r = 0; r < labels.size(); ++r) {
      auto [it, inserted] = seen.try_emplace(groups[r], static_cast<Index>(unit_label.size()));
      if (inserted) unit_label.push_back(labels[r]);
      unit_of_row[r] = it->second;
    }
  } else {
    unit_label.assign(labels.begin(), labels.end());
    for (std::size_t r = 0; r < labels.size(); ++r) unit_of_row[r] = static_cast<Index>(r);
  }

  Rng rng(spec.seed);
  std::vector<char> in_train(unit_label.size(), 0);
  auto take = [&](std::vector<Index>& units) {
    rng.shuffle(std::span<Index>(units));
    const auto n_train = static_cast<std::size_t>(
        std::llround(spec.train_fraction * static_cast<double>(units.size())));
    for (std::size_t i = 0; i < n_train && i < units.size(); ++i) {
      in_train[static_cast<std::size_t>(units[i])] = 1;
    }
  };

  if (spec.stratified) {
    for (Label cls : {Label::Human, Label::Bot}) {
      std::vector<Index> units;
      for (std::size_t u = 0; u < unit_label.size(); ++u) {
        if (unit_label[u] == cls) units.push_back(static_cast<Index>(u));
      }
      if (units.empty()) {
        throw Error(ErrorKind::EmptyClass,
                    "stratified split requested but class '" + std::string(to_string(cls)) +
                        "' is absent");
      }
      take(units);
    }
  } else {
    std::vector<Index> units(unit_label.size());
    for (std::size_t u = 0; u < units.size(); ++u) units[u] = static_cast<Index>(u);
    take(units);
  }

  SplitIndices out;
  for (std::size_t r = 0; r < labels.size(); ++r) {
    (in_train[static_cast<std::size_t>(unit_of_row[r])] ? out.train : out.test)
        .push_back(static_cast<Index>(r));
  }
  return out;
}

SplitResult split(const FeatureMatrix& matrix, const SplitSpec& spec) {
  SplitSpec row_spec = spec;
  row_spec.by_group = false;
  const auto idx = split_indices(matrix.labels(), row_spec);
  return {matrix.select(idx.train), matrix.select(idx.test)};
}

Standardizer Standardizer::fit(const RowMatX& values) {
  const Index n = values.rows();
  VecX mean = VecX::Zero(values.cols());
  VecX scale = VecX::Ones(values.cols());
  if (n == 0) return {mean, scale};
  mean = values.colwise().mean().transpose();
  for (Index c = 0; c < values.cols(); ++c) {
    const double var = (values.col(c).array() - mean[c]).square().sum() / static_cast<double>(n);
    const double sd = std::sqrt(var);
    scale[c] = sd > 1e-12 ? sd : 1.0;
  }
  return {mean, scale};
}

RowMatX Standardizer::transform(const RowMatX& values) const {
  RowMatX out = values;
  for (Index r = 0; r < out.rows(); ++r) {
    out.row(r) = (out.row(r) - mean_.transpose()).cwiseQuotient(scale_.transpose());
  }
  return out;
}

RowMatX Standardizer::inverse(const RowMatX& values) const {
  RowMatX out = values;
  for (Index r = 0; r < out.rows(); ++r) {
    out.row(r) = out.row(r).cwiseProduct(scale_.transpose()) + mean_.transpose();
  }
  return out;
}

VecX Standardizer::transform(const Eigen::Ref<const VecX>& row) const {
  return (row - mean_).cwiseQuotient(scale_);
}

}  // namespace botdetect
