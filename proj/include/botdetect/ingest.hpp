#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "botdetect/core_data.hpp"
#include "botdetect/text_io.hpp"

namespace botdetect {

/// One labelled group of the corpus. `path` is a directory holding
/// `users.csv` and/or `tweets.csv` (the layout of the public cresci-2017 dumps).
struct CorpusGroup {
  std::string name;
  std::filesystem::path path;
  Label label = Label::Human;
  std::optional<std::uint64_t> expected_accounts;
  std::optional<std::uint64_t> expected_tweets;
};

struct CorpusManifest {
  std::vector<CorpusGroup> groups;

  /// Grammar: `group.<name>.path`, `group.<name>.label`, optional
  /// `group.<name>.accounts` and `group.<name>.tweets`. Relative paths resolve
  /// against `base_dir`. Groups keep the order of their first key.
  static CorpusManifest parse(const KeyValueFile& kv, const std::filesystem::path& base_dir = {});
  static CorpusManifest read(const std::filesystem::path& path);
  KeyValueFile to_key_values() const;
};

struct LoadOptions {
  bool load_accounts = true;
  bool load_tweets = true;
  /// 0 = unlimited. Caps tweets taken per group (file order).
  std::size_t max_tweets_per_group = 0;
  /// Loading fails when more than this fraction of a file's rows is unparseable.
  double max_bad_row_fraction = 0.10;
};

struct GroupDiagnostics {
  std::string group;
  std::size_t account_rows = 0;
  std::size_t accounts_loaded = 0;
  std::size_t accounts_skipped = 0;
  std::size_t tweet_rows = 0;
  std::size_t tweets_loaded = 0;
  std::size_t tweets_skipped = 0;
  /// Column name -> number of rows filled with 0/false because the column is absent.
  std::map<std::string, std::size_t> filled;
  /// Entity counts (hashtags/urls/mentions) recovered by scanning text.
  std::vector<std::string> derived_from_text;
  std::vector<std::string> warnings;
};

struct LoadResult {
  std::vector<AccountRecord> accounts;
  std::vector<TweetRecord> tweets;
  std::vector<GroupDiagnostics> diagnostics;

  std::vector<std::string> warnings() const;
};

/// Throws FileNotFound, HeaderMismatch, or ParseError (bad-row threshold
/// exceeded). Count mismatches against the manifest are warnings only.
LoadResult load_corpus(const CorpusManifest& manifest, const LoadOptions& options = {});

/// Lower-level loaders for one file; labels and group name come from the caller.
std::vector<AccountRecord> load_accounts_csv(const CsvTable& table, Label label,
                                             GroupDiagnostics& diag);
std::vector<TweetRecord> load_tweets_csv(const CsvTable& table, Label label,
                                         GroupDiagnostics& diag, std::size_t max_rows = 0);

/// Counts of `#tag`, `http...`/`www.`, `@user` whitespace tokens in raw text.
TweetMetadata entity_counts_from_text(std::string_view text);

struct SyntheticCorpusSpec {
  std::size_t n_accounts_per_class = 50;
  std::size_t tweets_per_account = 10;
  std::uint64_t seed = 0;
  /// 0 = identically distributed classes, 1 = disjoint vocabularies and metadata ranges.
  double separation = 0.5;
};

struct SyntheticCorpus {
  std::vector<AccountRecord> accounts;
  std::vector<TweetRecord> tweets;
};

SyntheticCorpus generate_synthetic(const SyntheticCorpusSpec& spec);

/// Word lists the generator draws from. Class lists are disjoint from each
/// other and from the shared list.
const std::vector<std::string>& synthetic_vocabulary(Label label);
const std::vector<std::string>& synthetic_shared_vocabulary();

/// Per-class expected value of each of the 6 tweet metadata fields.
VecX synthetic_metadata_mean(const SyntheticCorpusSpec& spec, Label label);

/// Writes `<dir>/<human|bot>/{users,tweets}.csv` plus `<dir>/manifest.txt`.
/// Returns the manifest path.
std::filesystem::path write_corpus(const SyntheticCorpus& corpus,
                                   const std::filesystem::path& dir);

std::string accounts_to_csv(const std::vector<AccountRecord>& accounts);
std::string tweets_to_csv(const std::vector<TweetRecord>& tweets);

struct GaussianAccountSpec {
  std::size_t n_human = 400;
  std::size_t n_bot = 100;
  /// Mean shift of the bot class along every axis, in units of the common stddev.
  double shift = 1.0;
  std::uint64_t seed = 0;
};

/// Imbalanced two-Gaussian account matrix in the 10-column account schema.
FeatureMatrix generate_gaussian_accounts(const GaussianAccountSpec& spec);

}  // namespace botdetect
