#include "botdetect/ingest.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <charconv>
#include <sstream>

#include "botdetect/error.hpp"
#include "botdetect/rng.hpp"

namespace botdetect {

namespace fs = std::filesystem;

namespace {

std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

std::optional<std::uint64_t> parse_count(std::string_view raw) {
  const std::string s = trim(raw);
  if (s.empty()) return std::nullopt;
  std::uint64_t value = 0;
  const char* first = s.data();
  const char* last = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc{}) return std::nullopt;
  // Some dumps write integral counts as "12.0".
  if (ptr != last) {
    if (*ptr != '.') return std::nullopt;
    for (++ptr; ptr != last; ++ptr) {
      if (*ptr != '0') return std::nullopt;
    }
  }
  return value;
}

std::optional<bool> parse_flag(std::string_view raw) {
  const std::string s = lower(trim(raw));
  if (s.empty() || s == "0" || s == "false" || s == "null" || s == "none") return false;
  if (s == "1" || s == "true") return true;
  return std::nullopt;
}

const std::string& field(const std::vector<std::string>& row, std::size_t col) {
  static const std::string empty;
  return col < row.size() ? row[col] : empty;
}

void check_bad_rows(const std::string& what, std::size_t skipped, std::size_t total,
                    double max_fraction) {
  if (total > 0 && static_cast<double>(skipped) > max_fraction * static_cast<double>(total)) {
    throw Error(ErrorKind::ParseError, what + ": " + std::to_string(skipped) + " of " +
                                           std::to_string(total) +
                                           " rows unparseable, above the bad-row threshold");
  }
}

bool starts_with_ci(std::string_view s, std::string_view prefix) {
  if (s.size() < prefix.size()) return false;
  for (std::size_t i = 0; i < prefix.size(); ++i) {
    if (std::tolower(static_cast<unsigned char>(s[i])) != prefix[i]) return false;
  }
  return true;
}

}  // namespace

CorpusManifest CorpusManifest::parse(const KeyValueFile& kv, const fs::path& base_dir) {
  CorpusManifest manifest;
  auto group_index = [&](const std::string& name) -> CorpusGroup& {
    for (auto& g : manifest.groups) {
      if (g.name == name) return g;
    }
    manifest.groups.push_back(CorpusGroup{name, {}, Label::Human, {}, {}});
    return manifest.groups.back();
  };
  std::vector<std::string> has_label;
  for (const auto& [key, value] : kv.entries()) {
    if (key.rfind("group.", 0) != 0) continue;
    const auto dot = key.rfind('.');
    if (dot <= 6) throw Error(ErrorKind::InvalidConfig, "malformed manifest key '" + key + "'");
    const std::string name = key.substr(6, dot - 6);
    const std::string attr = key.substr(dot + 1);
    CorpusGroup& g = group_index(name);
    if (attr == "path") {
      fs::path p(value);
      g.path = p.is_relative() && !base_dir.empty() ? base_dir / p : p;
    } else if (attr == "label") {
      auto label = parse_label(value);
      if (!label) throw Error(ErrorKind::InvalidConfig, "group '" + name + "': bad label '" + value + "'");
      g.label = *label;
      has_label.push_back(name);
    } else if (attr == "accounts" || attr == "tweets") {
      auto n = parse_count(value);
      if (!n) throw Error(ErrorKind::InvalidConfig, "group '" + name + "': bad count '" + value + "'");
      (attr == "accounts" ? g.expected_accounts : g.expected_tweets) = *n;
    } else {
      throw Error(ErrorKind::InvalidConfig, "unknown manifest attribute '" + attr + "'");
    }
  }
  for (const auto& g : manifest.groups) {
    if (g.path.empty()) throw Error(ErrorKind::InvalidConfig, "group '" + g.name + "' has no path");
    if (std::find(has_label.begin(), has_label.end(), g.name) == has_label.end()) {
      throw Error(ErrorKind::InvalidConfig, "group '" + g.name + "' has no label");
    }
  }
  return manifest;
}

CorpusManifest CorpusManifest::read(const fs::path& path) {
  return parse(KeyValueFile::read(path), path.parent_path());
}

KeyValueFile CorpusManifest::to_key_values() const {
  KeyValueFile kv;
  for (const auto& g : groups) {
    const std::string prefix = "group." + g.name + ".";
    kv.set(prefix + "path", g.path.string());
    kv.set(prefix + "label", std::string(to_string(g.label)));
    if (g.expected_accounts) kv.set(prefix + "accounts", std::to_string(*g.expected_accounts));
    if (g.expected_tweets) kv.set(prefix + "tweets", std::to_string(*g.expected_tweets));
  }
  return kv;
}

std::vector<std::string> LoadResult::warnings() const {
  std::vector<std::string> out;
  for (const auto& d : diagnostics) out.insert(out.end(), d.warnings.begin(), d.warnings.end());
  return out;
}

std::vector<AccountRecord> load_accounts_csv(const CsvTable& table, Label label,
                                             GroupDiagnostics& diag) {
  static constexpr std::array<std::string_view, 5> kCounts = {
      "statuses_count", "followers_count", "friends_count", "favourites_count", "listed_count"};
  static constexpr std::array<std::string_view, 5> kFlags = {
      "default_profile", "geo_enabled", "profile_use_background_image", "verified", "protected"};

  std::array<std::size_t, 5> count_col{};
  for (std::size_t i = 0; i < kCounts.size(); ++i) {
    auto c = table.column(kCounts[i]);
    if (!c) throw Error(ErrorKind::HeaderMismatch, "accounts file lacks column '" + std::string(kCounts[i]) + "'");
    count_col[i] = *c;
  }
  std::array<std::optional<std::size_t>, 5> flag_col{};
  for (std::size_t i = 0; i < kFlags.size(); ++i) flag_col[i] = table.column(kFlags[i]);
  const auto id_col = table.column("id");

  std::vector<AccountRecord> out;
  out.reserve(table.rows.size());
  for (const auto& row : table.rows) {
    ++diag.account_rows;
    std::array<std::uint64_t, 5> counts{};
    std::array<bool, 5> flags{};
    bool ok = true;
    for (std::size_t i = 0; i < counts.size() && ok; ++i) {
      auto v = parse_count(field(row, count_col[i]));
      ok = v.has_value();
      if (ok) counts[i] = *v;
    }
    for (std::size_t i = 0; i < flags.size() && ok; ++i) {
      if (!flag_col[i]) {
        ++diag.filled[std::string(kFlags[i])];
        continue;
      }
      auto v = parse_flag(field(row, *flag_col[i]));
      ok = v.has_value();
      if (ok) flags[i] = *v;
    }
    if (!ok) {
      ++diag.accounts_skipped;
      continue;
    }
    AccountRecord rec;
    rec.account_id = id_col ? trim(field(row, *id_col)) : std::to_string(out.size());
    rec.label = label;
    rec.features = AccountFeatures{counts[0], counts[1], counts[2], counts[3], counts[4],
                                   flags[0],  flags[1],  flags[2],  flags[3],  flags[4]};
    out.push_back(std::move(rec));
  }
  diag.accounts_loaded += out.size();
  return out;
}

TweetMetadata entity_counts_from_text(std::string_view text) {
  TweetMetadata m;
  std::size_t pos = 0;
  while (pos < text.size()) {
    while (pos < text.size() && std::isspace(static_cast<unsigned char>(text[pos]))) ++pos;
    const std::size_t start = pos;
    while (pos < text.size() && !std::isspace(static_cast<unsigned char>(text[pos]))) ++pos;
    const std::string_view tok = text.substr(start, pos - start);
    if (tok.size() < 2) continue;
    if (tok.front() == '#') ++m.num_hashtags;
    else if (tok.front() == '@') ++m.num_mentions;
    else if (starts_with_ci(tok, "http") || starts_with_ci(tok, "www.")) ++m.num_urls;
  }
  return m;
}

std::vector<TweetRecord> load_tweets_csv(const CsvTable& table, Label label,
                                         GroupDiagnostics& diag, std::size_t max_rows) {
  const auto text_col = table.column("text");
  if (!text_col) throw Error(ErrorKind::HeaderMismatch, "tweets file lacks column 'text'");
  const auto user_col = table.column("user_id");

  std::array<std::optional<std::size_t>, kTweetMetadataWidth> cols{};
  for (std::size_t i = 0; i < kTweetMetadataWidth; ++i) cols[i] = table.column(kTweetMetadataSchema[i]);
  // Indices 3..5 are hashtags/urls/mentions: recoverable from text when absent.
  for (std::size_t i = 3; i < kTweetMetadataWidth; ++i) {
    if (!cols[i]) diag.derived_from_text.emplace_back(kTweetMetadataSchema[i]);
  }

  std::vector<TweetRecord> out;
  out.reserve(max_rows ? std::min(max_rows, table.rows.size()) : table.rows.size());
  for (const auto& row : table.rows) {
    if (max_rows && out.size() >= max_rows) break;
    ++diag.tweet_rows;
    std::array<std::uint64_t, kTweetMetadataWidth> values{};
    bool ok = true;
    const std::string& text = field(row, *text_col);
    TweetMetadata from_text;
    bool have_from_text = false;
    for (std::size_t i = 0; i < kTweetMetadataWidth && ok; ++i) {
      if (cols[i]) {
        auto v = parse_count(field(row, *cols[i]));
        ok = v.has_value();
        if (ok) values[i] = *v;
      } else if (i < 3) {
        ++diag.filled[std::string(kTweetMetadataSchema[i])];
      } else {
        if (!have_from_text) {
          from_text = entity_counts_from_text(text);
          have_from_text = true;
        }
        values[i] = i == 3 ? from_text.num_hashtags : i == 4 ? from_text.num_urls : from_text.num_mentions;
      }
    }
    if (!ok) {
      ++diag.tweets_skipped;
      continue;
    }
    TweetRecord rec;
    rec.text = text;
    rec.label = label;
    rec.account_id = user_col ? trim(field(row, *user_col)) : std::string{};
    rec.metadata = TweetMetadata{values[0], values[1], values[2], values[3], values[4], values[5]};
    out.push_back(std::move(rec));
  }
  diag.tweets_loaded += out.size();
  return out;
}

LoadResult load_corpus(const CorpusManifest& manifest, const LoadOptions& options) {
  LoadResult result;
  for (const auto& group : manifest.groups) {
    GroupDiagnostics diag;
    diag.group = group.name;
    const fs::path users = group.path / "users.csv";
    const fs::path tweets = group.path / "tweets.csv";
    const bool want_users = options.load_accounts && fs::exists(users);
    const bool want_tweets = options.load_tweets && fs::exists(tweets);
    if (!fs::exists(group.path)) throw Error(ErrorKind::FileNotFound, group.path.string());
    if ((options.load_accounts && !options.load_tweets && !want_users) ||
        (options.load_tweets && !options.load_accounts && !want_tweets) ||
        (!want_users && !want_tweets)) {
      throw Error(ErrorKind::FileNotFound,
                  "group '" + group.name + "': no usable users.csv/tweets.csv under " +
                      group.path.string());
    }
    if (want_users) {
      auto rows = load_accounts_csv(read_csv(users), group.label, diag);
      check_bad_rows(users.string(), diag.accounts_skipped, diag.account_rows,
                     options.max_bad_row_fraction);
      result.accounts.insert(result.accounts.end(), std::make_move_iterator(rows.begin()),
                             std::make_move_iterator(rows.end()));
      if (group.expected_accounts && *group.expected_accounts != diag.accounts_loaded) {
        diag.warnings.push_back("CountMismatch: group '" + group.name + "' expected " +
                                std::to_string(*group.expected_accounts) + " accounts, loaded " +
                                std::to_string(diag.accounts_loaded));
      }
    }
    if (want_tweets) {
      auto rows = load_tweets_csv(read_csv(tweets), group.label, diag, options.max_tweets_per_group);
      check_bad_rows(tweets.string(), diag.tweets_skipped, diag.tweet_rows,
                     options.max_bad_row_fraction);
      result.tweets.insert(result.tweets.end(), std::make_move_iterator(rows.begin()),
                           std::make_move_iterator(rows.end()));
      if (group.expected_tweets && *group.expected_tweets != diag.tweets_loaded) {
        diag.warnings.push_back("CountMismatch: group '" + group.name + "' expected " +
                                std::to_string(*group.expected_tweets) + " tweets, loaded " +
                                std::to_string(diag.tweets_loaded));
      }
    }
    for (const auto& col : diag.derived_from_text) {
      diag.warnings.push_back("group '" + group.name + "': column '" + col +
                              "' absent, counted from tweet text");
    }
    result.diagnostics.push_back(std::move(diag));
  }
  return result;
}

// ---------------------------------------------------------------------------
// Synthetic corpora

namespace {

constexpr std::size_t kWordsPerList = 60;

std::vector<std::string> make_word_list(std::size_t offset) {
  static constexpr std::string_view consonants = "bdfgklmnprstvz";
  static constexpr std::string_view vowels = "aeiou";
  const std::size_t n_syll = consonants.size() * vowels.size();
  auto syllable = [&](std::size_t k) {
    return std::string{consonants[k % consonants.size()], vowels[(k / consonants.size()) % vowels.size()]};
  };
  std::vector<std::string> words;
  for (std::size_t i = offset; i < offset + kWordsPerList; ++i) {
    words.push_back(syllable(i % n_syll) + syllable(i / n_syll) + syllable((7 * i + 3) % n_syll));
  }
  return words;
}

// Per-field base means for the shared (class-independent) distribution.
constexpr std::array<double, kTweetMetadataWidth> kTweetMeans = {3, 1, 4, 1, 1, 1};
constexpr std::array<double, 5> kAccountMeans = {2000, 300, 400, 500, 5};

// With probability `separation` draw from the class-specific distribution,
// otherwise from the shared Poisson(mean). Class-specific supports are
// disjoint: human in [0, 2*mean], bot in [2*mean + 1, inf).
std::uint64_t draw_count(Rng& rng, double mean, Label label, double separation) {
  if (rng.bernoulli(separation)) {
    const auto span = static_cast<std::uint64_t>(2.0 * mean);
    if (label == Label::Human) return rng.binomial(span, 0.5);
    return span + 1 + rng.poisson(mean);
  }
  return rng.poisson(mean);
}

bool draw_flag(Rng& rng, Label label, double separation) {
  if (rng.bernoulli(separation)) return label == Label::Bot;
  return rng.bernoulli(0.5);
}

double expected_count(double mean, Label label, double separation) {
  const double span = std::floor(2.0 * mean);
  const double specific = label == Label::Human ? span * 0.5 : span + 1.0 + mean;
  return separation * specific + (1.0 - separation) * mean;
}

std::string make_id(Label label, std::size_t i) {
  std::string num = std::to_string(i);
  if (num.size() < 5) num.insert(0, 5 - num.size(), '0');
  return std::string(to_string(label)) + "_" + num;
}

}  // namespace

const std::vector<std::string>& synthetic_vocabulary(Label label) {
  static const std::vector<std::string> human = make_word_list(0);
  static const std::vector<std::string> bot = make_word_list(kWordsPerList);
  return label == Label::Human ? human : bot;
}

const std::vector<std::string>& synthetic_shared_vocabulary() {
  static const std::vector<std::string> shared = make_word_list(2 * kWordsPerList);
  return shared;
}

VecX synthetic_metadata_mean(const SyntheticCorpusSpec& spec, Label label) {
  VecX out(kTweetMetadataWidth);
  for (std::size_t i = 0; i < kTweetMetadataWidth; ++i) {
    out[static_cast<Index>(i)] = expected_count(kTweetMeans[i], label, spec.separation);
  }
  return out;
}

SyntheticCorpus generate_synthetic(const SyntheticCorpusSpec& spec) {
  if (spec.n_accounts_per_class == 0 || spec.tweets_per_account == 0) {
    throw Error(ErrorKind::InvalidConfig, "synthetic corpus needs positive account and tweet counts");
  }
  if (!(spec.separation >= 0.0 && spec.separation <= 1.0)) {
    throw Error(ErrorKind::InvalidConfig, "separation must lie in [0, 1]");
  }
  Rng rng(spec.seed);
  const double sep = spec.separation;
  const auto& shared = synthetic_shared_vocabulary();
  SyntheticCorpus corpus;
  for (Label label : {Label::Human, Label::Bot}) {
    const auto& own = synthetic_vocabulary(label);
    for (std::size_t a = 0; a < spec.n_accounts_per_class; ++a) {
      AccountRecord acc;
      acc.account_id = make_id(label, a);
      acc.label = label;
      auto& f = acc.features;
      f.statuses_count = draw_count(rng, kAccountMeans[0], label, sep);
      f.followers_count = draw_count(rng, kAccountMeans[1], label, sep);
      f.friends_count = draw_count(rng, kAccountMeans[2], label, sep);
      f.favourites_count = draw_count(rng, kAccountMeans[3], label, sep);
      f.listed_count = draw_count(rng, kAccountMeans[4], label, sep);
      f.default_profile = draw_flag(rng, label, sep);
      f.geo_enabled = draw_flag(rng, label, sep);
      f.profile_use_background_image = draw_flag(rng, label, sep);
      f.verified = draw_flag(rng, label, sep);
      f.is_protected = draw_flag(rng, label, sep);
      corpus.accounts.push_back(acc);

      for (std::size_t t = 0; t < spec.tweets_per_account; ++t) {
        TweetRecord tw;
        tw.account_id = acc.account_id;
        tw.label = label;
        const std::size_t length = 6 + rng.uniform_index(10);
        for (std::size_t w = 0; w < length; ++w) {
          const auto& list = rng.bernoulli(sep) ? own : shared;
          if (w) tw.text.push_back(' ');
          tw.text += list[rng.uniform_index(list.size())];
        }
        auto& m = tw.metadata;
        m.retweet_count = draw_count(rng, kTweetMeans[0], label, sep);
        m.reply_count = draw_count(rng, kTweetMeans[1], label, sep);
        m.favorite_count = draw_count(rng, kTweetMeans[2], label, sep);
        m.num_hashtags = draw_count(rng, kTweetMeans[3], label, sep);
        m.num_urls = draw_count(rng, kTweetMeans[4], label, sep);
        m.num_mentions = draw_count(rng, kTweetMeans[5], label, sep);
        corpus.tweets.push_back(std::move(tw));
      }
    }
  }
  return corpus;
}

std::string accounts_to_csv(const std::vector<AccountRecord>& accounts) {
  std::ostringstream out;
  std::vector<std::string> header = {"id"};
  for (auto name : kAccountSchema) header.emplace_back(name);
  write_csv_row(out, header);
  for (const auto& a : accounts) {
    const auto& f = a.features;
    write_csv_row(out, {a.account_id, std::to_string(f.statuses_count),
                        std::to_string(f.followers_count), std::to_string(f.friends_count),
                        std::to_string(f.favourites_count), std::to_string(f.listed_count),
                        f.default_profile ? "1" : "0", f.geo_enabled ? "1" : "0",
                        f.profile_use_background_image ? "1" : "0", f.verified ? "1" : "0",
                        f.is_protected ? "1" : "0"});
  }
  return out.str();
}

std::string tweets_to_csv(const std::vector<TweetRecord>& tweets) {
  std::ostringstream out;
  std::vector<std::string> header = {"user_id", "text"};
  for (auto name : kTweetMetadataSchema) header.emplace_back(name);
  write_csv_row(out, header);
  for (const auto& t : tweets) {
    const auto& m = t.metadata;
    write_csv_row(out, {t.account_id, t.text, std::to_string(m.retweet_count),
                        std::to_string(m.reply_count), std::to_string(m.favorite_count),
                        std::to_string(m.num_hashtags), std::to_string(m.num_urls),
                        std::to_string(m.num_mentions)});
  }
  return out.str();
}

fs::path write_corpus(const SyntheticCorpus& corpus, const fs::path& dir) {
  CorpusManifest manifest;
  for (Label label : {Label::Human, Label::Bot}) {
    std::vector<AccountRecord> accounts;
    std::vector<TweetRecord> tweets;
    for (const auto& a : corpus.accounts) {
      if (a.label == label) accounts.push_back(a);
    }
    for (const auto& t : corpus.tweets) {
      if (t.label == label) tweets.push_back(t);
    }
    const std::string name(to_string(label));
    write_file(dir / name / "users.csv", accounts_to_csv(accounts));
    write_file(dir / name / "tweets.csv", tweets_to_csv(tweets));
    manifest.groups.push_back(CorpusGroup{name, name, label, accounts.size(), tweets.size()});
  }
  const fs::path manifest_path = dir / "manifest.txt";
  write_file(manifest_path, manifest.to_key_values().to_string());
  return manifest_path;
}

FeatureMatrix generate_gaussian_accounts(const GaussianAccountSpec& spec) {
  Rng rng(spec.seed);
  const Index n = static_cast<Index>(spec.n_human + spec.n_bot);
  RowMatX values(n, static_cast<Index>(kAccountWidth));
  std::vector<Label> labels;
  labels.reserve(static_cast<std::size_t>(n));
  for (Index r = 0; r < n; ++r) {
    const Label label = static_cast<std::size_t>(r) < spec.n_human ? Label::Human : Label::Bot;
    const double mean = label == Label::Bot ? spec.shift : 0.0;
    for (Index c = 0; c < values.cols(); ++c) values(r, c) = rng.normal(mean, 1.0);
    labels.push_back(label);
  }
  return FeatureMatrix(std::move(values), account_schema(), std::move(labels));
}

}  // namespace botdetect
