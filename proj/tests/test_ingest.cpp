#include <doctest.h>

#include <filesystem>
#include <set>

#include "botdetect/error.hpp"
#include "botdetect/ingest.hpp"
#include "botdetect/tokenizer.hpp"

using namespace botdetect;
namespace fs = std::filesystem;

namespace {

fs::path fresh_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("botdetect_ingest_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

const char* kUserHeader =
    "id,statuses_count,followers_count,friends_count,favourites_count,listed_count,default_profile,"
    "geo_enabled,profile_use_background_image,verified,protected\n";

}  // namespace

TEST_CASE("manifest grammar") {
  const auto kv = KeyValueFile::parse(
      "group.genuine.path = genuine\ngroup.genuine.label = human\ngroup.genuine.accounts = 3474\n"
      "group.genuine.tweets = 8377522\ngroup.spam1.path = /abs/spam\ngroup.spam1.label = bot\n");
  const auto m = CorpusManifest::parse(kv, "/data");
  REQUIRE(m.groups.size() == 2);
  CHECK(m.groups[0].name == "genuine");
  CHECK(m.groups[0].path == fs::path("/data/genuine"));
  CHECK(m.groups[0].expected_accounts == 3474u);
  CHECK(m.groups[0].expected_tweets == 8377522u);
  CHECK(m.groups[1].label == Label::Bot);
  CHECK(m.groups[1].path == fs::path("/abs/spam"));
  CHECK_FALSE(m.groups[1].expected_accounts.has_value());

  CHECK_THROWS_AS(CorpusManifest::parse(KeyValueFile::parse("group.x.path = p\n")), Error);
  CHECK_THROWS_AS(CorpusManifest::parse(KeyValueFile::parse("group.x.path = p\ngroup.x.label = alien\n")), Error);
  CHECK_THROWS_AS(CorpusManifest::parse(KeyValueFile::parse("group.x.colour = red\n")), Error);
}

TEST_CASE("empty csv with a valid header loads nothing") {
  GroupDiagnostics diag;
  CHECK(load_accounts_csv(parse_csv(kUserHeader), Label::Human, diag).empty());
  CHECK(diag.accounts_skipped == 0);
  CHECK(load_tweets_csv(parse_csv("text,retweet_count\n"), Label::Bot, diag).empty());
  CHECK(diag.tweets_skipped == 0);
}

TEST_CASE("a corrupt numeric field skips its row") {
  const std::string csv = std::string(kUserHeader) +
                          "a,10,2,3,4,0,1,0,1,0,0\n"
                          "b,ten,2,3,4,0,1,0,1,0,0\n"
                          "c,7,1,1,1,1,0,1,0,1,1\n";
  GroupDiagnostics diag;
  const auto accounts = load_accounts_csv(parse_csv(csv), Label::Bot, diag);
  REQUIRE(accounts.size() == 2);
  CHECK(diag.accounts_skipped == 1);
  CHECK(accounts[0].account_id == "a");
  CHECK(accounts[0].features.statuses_count == 10);
  CHECK(accounts[0].features.default_profile);
  CHECK(accounts[1].account_id == "c");
  CHECK(accounts[1].features.is_protected);
  CHECK(accounts[1].label == Label::Bot);
}

TEST_CASE("missing mandatory columns") {
  GroupDiagnostics diag;
  CHECK_THROWS_AS(load_accounts_csv(parse_csv("id,statuses_count\n"), Label::Human, diag), Error);
  CHECK_THROWS_AS(load_tweets_csv(parse_csv("retweet_count\n"), Label::Human, diag), Error);
}

TEST_CASE("absent count columns are filled or recovered from text") {
  const std::string csv =
      "user_id,text,retweet_count,favorite_count\n"
      "u1,\"#a #b http://x.co @c hi\",3,4\n"
      "u2,plain text,0,1\n";
  GroupDiagnostics diag;
  const auto tweets = load_tweets_csv(parse_csv(csv), Label::Human, diag);
  REQUIRE(tweets.size() == 2);
  CHECK(tweets[0].metadata == TweetMetadata{3, 0, 4, 2, 1, 1});
  CHECK(tweets[1].metadata == TweetMetadata{0, 0, 1, 0, 0, 0});
  CHECK(diag.filled.at("reply_count") == 2);
  CHECK(diag.derived_from_text.size() == 3);
  CHECK(tweets[0].account_id == "u1");
}

TEST_CASE("entity counts from text") {
  CHECK(entity_counts_from_text("#x @y www.z.com HTTPS://q # @") == TweetMetadata{0, 0, 0, 1, 2, 1});
  CHECK(entity_counts_from_text("") == TweetMetadata{});
}

TEST_CASE("bad-row threshold aborts the load") {
  std::string csv = kUserHeader;
  for (int i = 0; i < 8; ++i) csv += "a,1,1,1,1,1,0,0,0,0,0\n";
  csv += "b,x,1,1,1,1,0,0,0,0,0\nc,y,1,1,1,1,0,0,0,0,0\n";
  const fs::path dir = fresh_dir("threshold");
  write_file(dir / "g" / "users.csv", csv);
  CorpusManifest m;
  m.groups.push_back({"g", dir / "g", Label::Human, std::nullopt, std::nullopt});
  CHECK_THROWS_AS(load_corpus(m), Error);
  LoadOptions lenient;
  lenient.max_bad_row_fraction = 0.25;
  CHECK(load_corpus(m, lenient).accounts.size() == 8);
  fs::remove_all(dir);
}

TEST_CASE("missing files are reported") {
  CorpusManifest m;
  m.groups.push_back({"g", "/nonexistent/botdetect", Label::Human, std::nullopt, std::nullopt});
  try {
    load_corpus(m);
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::FileNotFound);
  }
}

TEST_CASE("synthetic corpora round-trip through disk") {
  SyntheticCorpusSpec spec;
  spec.n_accounts_per_class = 6;
  spec.tweets_per_account = 3;
  spec.seed = 42;
  const auto corpus = generate_synthetic(spec);
  CHECK(corpus.accounts.size() == 12);
  CHECK(corpus.tweets.size() == 36);

  const fs::path dir = fresh_dir("roundtrip");
  const auto manifest_path = write_corpus(corpus, dir);
  const auto loaded = load_corpus(CorpusManifest::read(manifest_path));
  CHECK(loaded.warnings().empty());
  REQUIRE(loaded.accounts.size() == corpus.accounts.size());
  REQUIRE(loaded.tweets.size() == corpus.tweets.size());
  for (std::size_t i = 0; i < corpus.accounts.size(); ++i) {
    CHECK(loaded.accounts[i].features == corpus.accounts[i].features);
    CHECK(loaded.accounts[i].label == corpus.accounts[i].label);
    CHECK(loaded.accounts[i].account_id == corpus.accounts[i].account_id);
  }
  for (std::size_t i = 0; i < corpus.tweets.size(); ++i) {
    CHECK(loaded.tweets[i].text == corpus.tweets[i].text);
    CHECK(loaded.tweets[i].metadata == corpus.tweets[i].metadata);
  }
  // Loading twice gives the same records in the same order.
  const auto again = load_corpus(CorpusManifest::read(manifest_path));
  CHECK(accounts_to_csv(again.accounts) == accounts_to_csv(loaded.accounts));
  CHECK(tweets_to_csv(again.tweets) == tweets_to_csv(loaded.tweets));

  LoadOptions capped;
  capped.max_tweets_per_group = 5;
  CHECK(load_corpus(CorpusManifest::read(manifest_path), capped).tweets.size() == 10);
  fs::remove_all(dir);
}

TEST_CASE("count mismatches are warnings") {
  SyntheticCorpusSpec spec;
  spec.n_accounts_per_class = 2;
  spec.tweets_per_account = 1;
  const fs::path dir = fresh_dir("counts");
  write_corpus(generate_synthetic(spec), dir);
  CorpusManifest m = CorpusManifest::read(dir / "manifest.txt");
  m.groups[0].expected_accounts = 3474;
  const auto loaded = load_corpus(m);
  CHECK(loaded.accounts.size() == 4);
  CHECK(loaded.warnings().size() == 1);
  fs::remove_all(dir);
}

TEST_CASE("synthetic generation is deterministic") {
  SyntheticCorpusSpec spec;
  spec.seed = 42;
  const auto a = generate_synthetic(spec);
  const auto b = generate_synthetic(spec);
  CHECK(tweets_to_csv(a.tweets) == tweets_to_csv(b.tweets));
  CHECK(accounts_to_csv(a.accounts) == accounts_to_csv(b.accounts));
  spec.seed = 43;
  CHECK(tweets_to_csv(generate_synthetic(spec).tweets) != tweets_to_csv(a.tweets));
}

TEST_CASE("full separation gives disjoint vocabularies and metadata ranges") {
  SyntheticCorpusSpec spec;
  spec.n_accounts_per_class = 100;
  spec.tweets_per_account = 2;
  spec.separation = 1.0;
  const auto corpus = generate_synthetic(spec);
  std::set<std::string> words[2];
  std::uint64_t max_human_retweets = 0, min_bot_retweets = ~0ULL;
  for (const auto& t : corpus.tweets) {
    const auto tokens = tokenize(t.text);
    words[t.label == Label::Bot].insert(tokens.begin(), tokens.end());
    if (t.label == Label::Bot) min_bot_retweets = std::min(min_bot_retweets, t.metadata.retweet_count);
    else max_human_retweets = std::max(max_human_retweets, t.metadata.retweet_count);
  }
  std::vector<std::string> common;
  std::set_intersection(words[0].begin(), words[0].end(), words[1].begin(), words[1].end(),
                        std::back_inserter(common));
  CHECK(common.empty());
  CHECK(max_human_retweets < min_bot_retweets);
}

TEST_CASE("synthetic metadata means converge") {
  for (double sep : {0.0, 0.5, 1.0}) {
    SyntheticCorpusSpec spec;
    spec.n_accounts_per_class = 1000;
    spec.tweets_per_account = 10;
    spec.separation = sep;
    spec.seed = 9;
    const auto corpus = generate_synthetic(spec);
    for (Label label : {Label::Human, Label::Bot}) {
      VecX sum = VecX::Zero(6);
      double n = 0;
      for (const auto& t : corpus.tweets) {
        if (t.label != label) continue;
        sum += encode_tweet_metadata(t.metadata);
        n += 1;
      }
      CHECK(n == 10000);
      const VecX mean = sum / n;
      const VecX want = synthetic_metadata_mean(spec, label);
      for (Index i = 0; i < 6; ++i) CHECK(std::abs(mean(i) - want(i)) <= 0.05 * want(i));
    }
  }
}

TEST_CASE("gaussian account sets") {
  GaussianAccountSpec spec;
  spec.n_human = 40;
  spec.n_bot = 10;
  spec.shift = 2.0;
  const auto m = generate_gaussian_accounts(spec);
  CHECK(m.rows() == 50);
  CHECK(m.cols() == 10);
  CHECK(m.count(Label::Bot) == 10);
  CHECK(generate_gaussian_accounts(spec).values() == m.values());
}
