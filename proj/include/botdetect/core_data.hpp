#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "botdetect/types.hpp"

namespace botdetect {

/// Bot is the positive class for every metric in the library.
enum class Label : std::uint8_t { Human = 0, Bot = 1 };

constexpr double label_value(Label label) { return label == Label::Bot ? 1.0 : 0.0; }
constexpr Label opposite(Label label) { return label == Label::Bot ? Label::Human : Label::Bot; }
std::string_view to_string(Label label);
/// Accepts "bot"/"human" (any case) and "1"/"0".
std::optional<Label> parse_label(std::string_view text);

struct AccountFeatures {
  std::uint64_t statuses_count = 0;
  std::uint64_t followers_count = 0;
  std::uint64_t friends_count = 0;
  std::uint64_t favourites_count = 0;
  std::uint64_t listed_count = 0;
  bool default_profile = false;
  bool geo_enabled = false;
  bool profile_use_background_image = false;
  bool verified = false;
  bool is_protected = false;

  bool operator==(const AccountFeatures&) const = default;
};

struct TweetMetadata {
  std::uint64_t retweet_count = 0;
  std::uint64_t reply_count = 0;
  std::uint64_t favorite_count = 0;
  std::uint64_t num_hashtags = 0;
  std::uint64_t num_urls = 0;
  std::uint64_t num_mentions = 0;

  bool operator==(const TweetMetadata&) const = default;
};

inline constexpr std::size_t kAccountWidth = 10;
inline constexpr std::size_t kTweetMetadataWidth = 6;

/// Column names in frozen encoding order.
inline constexpr std::array<std::string_view, kAccountWidth> kAccountSchema = {
    "statuses_count", "followers_count", "friends_count", "favourites_count", "listed_count",
    "default_profile", "geo_enabled", "profile_use_background_image", "verified", "protected"};

inline constexpr std::array<std::string_view, kTweetMetadataWidth> kTweetMetadataSchema = {
    "retweet_count", "reply_count", "favorite_count", "num_hashtags", "num_urls", "num_mentions"};

struct AccountRecord {
  std::string account_id;
  AccountFeatures features;
  Label label = Label::Human;
};

struct TweetRecord {
  std::string text;
  TweetMetadata metadata;
  Label label = Label::Human;
  std::string account_id;
};

VecX encode_account(const AccountFeatures& features);
/// Inverse of encode_account; throws DimensionMismatch on width != 10.
AccountFeatures decode_account(const Eigen::Ref<const VecX>& encoded);

VecX encode_tweet_metadata(const TweetMetadata& metadata);
TweetMetadata decode_tweet_metadata(const Eigen::Ref<const VecX>& encoded);

/// Dense numeric rows with a column schema and one label per row.
/// Construction rejects width mismatches and non-finite entries.
class FeatureMatrix {
 public:
  FeatureMatrix() = default;
  FeatureMatrix(RowMatX values, std::vector<std::string> schema, std::vector<Label> labels);

  Index rows() const { return values_.rows(); }
  Index cols() const { return values_.cols(); }
  bool empty() const { return values_.rows() == 0; }

  const RowMatX& values() const { return values_; }
  const std::vector<std::string>& schema() const { return schema_; }
  const std::vector<Label>& labels() const { return labels_; }
  Label label(Index row) const { return labels_[static_cast<std::size_t>(row)]; }
  auto row(Index r) const { return values_.row(r); }

  std::size_t count(Label label) const;
  /// Class with fewer rows; ties resolve to Bot.
  Label minority_label() const;

  FeatureMatrix select(std::span<const Index> indices) const;
  /// Rows of this followed by rows of other; schemas must match.
  FeatureMatrix concat(const FeatureMatrix& other) const;
  FeatureMatrix with_values(RowMatX values) const;

 private:
  RowMatX values_;
  std::vector<std::string> schema_;
  std::vector<Label> labels_;
};

FeatureMatrix make_account_matrix(std::span<const AccountRecord> accounts);
FeatureMatrix make_tweet_metadata_matrix(std::span<const TweetRecord> tweets);

std::vector<std::string> account_schema();
std::vector<std::string> tweet_metadata_schema();

struct SplitSpec {
  double train_fraction = 0.8;
  bool stratified = true;
  std::uint64_t seed = 0;
  /// Keep all rows of one group (e.g. account id) on the same side.
  bool by_group = false;
};

struct SplitIndices {
  std::vector<Index> train;
  std::vector<Index> test;
};

/// Partition row indices 0..labels.size(). `groups` is consulted only when
/// spec.by_group is set and must then be parallel to labels. Index lists come
/// back in ascending order.
SplitIndices split_indices(std::span<const Label> labels, const SplitSpec& spec,
                           std::span<const std::string> groups = {});

struct SplitResult {
  FeatureMatrix train;
  FeatureMatrix test;
};

SplitResult split(const FeatureMatrix& matrix, const SplitSpec& spec);

/// Per-column z-score transform. Columns with zero spread get scale 1.
class Standardizer {
 public:
  Standardizer() = default;
  Standardizer(VecX mean, VecX scale) : mean_(std::move(mean)), scale_(std::move(scale)) {}

  static Standardizer fit(const RowMatX& values);

  RowMatX transform(const RowMatX& values) const;
  RowMatX inverse(const RowMatX& values) const;
  VecX transform(const Eigen::Ref<const VecX>& row) const;

  const VecX& mean() const { return mean_; }
  const VecX& scale() const { return scale_; }
  Index width() const { return mean_.size(); }

 private:
  VecX mean_;
  VecX scale_;
};

}  // namespace botdetect
