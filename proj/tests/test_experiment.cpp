#include <doctest.h>

#include <cstdlib>
#include <filesystem>

#include "botdetect/error.hpp"
#include "botdetect/experiment.hpp"

using namespace botdetect;
namespace fs = std::filesystem;

namespace {

fs::path scratch_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("botdetect_test_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

RunConfig small_account_run() {
  RunConfig c;
  c.task = Task::AccountLevel;
  c.model = ModelKind::RandomForest;
  c.synthetic.n_accounts_per_class = 40;
  c.baseline.forest_trees = 20;
  c.seed = 5;
  return c;
}

RunConfig small_tweet_run() {
  RunConfig c;
  c.task = Task::TweetLevel;
  c.model = ModelKind::ContextualLstm;
  c.synthetic.n_accounts_per_class = 6;
  c.synthetic.tweets_per_account = 5;
  c.embedding_dim = 8;
  c.lstm.epochs = 2;
  c.seed = 9;
  return c;
}

void expect_invalid(const RunConfig& c) {
  try {
    c.validate();
    FAIL("expected InvalidConfig");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::InvalidConfig);
    CHECK(e.category() == ErrorCategory::Config);
  }
}

}  // namespace

TEST_CASE("config validation") {
  CHECK_NOTHROW(RunConfig{}.validate());
  RunConfig c;
  c.model = ModelKind::ContextualLstm;
  expect_invalid(c);
  c.task = Task::TweetLevel;
  CHECK_NOTHROW(c.validate());
  c.resample.strategy = ResampleStrategy::Smotenn;
  expect_invalid(c);

  RunConfig g;
  g.source = DataSource::Gaussian;
  g.task = Task::TweetLevel;
  expect_invalid(g);

  RunConfig m;
  m.source = DataSource::Manifest;
  expect_invalid(m);

  RunConfig w;
  w.lstm.loss_weights.main = 0.5;
  expect_invalid(w);

  RunConfig f;
  f.split.train_fraction = 1.0;
  expect_invalid(f);

  RunConfig l;
  l.baseline.mlp_layers = {10, 2};
  expect_invalid(l);
}

TEST_CASE("config keys round-trip and drive the hash") {
  RunConfig c = small_account_run();
  c.set("resample", "smotomek");
  c.set("mlp.layers", "32,1");
  c.set("gaussian.shift", "0.25");
  const auto kv = c.to_key_values();
  const auto back = RunConfig::from_key_values(kv);
  CHECK(back.to_key_values().to_string() == kv.to_string());
  CHECK(back.hash() == c.hash());
  CHECK(back.resample.strategy == ResampleStrategy::Smotomek);

  RunConfig other = c;
  other.seed = 6;
  CHECK(other.hash() != c.hash());
  RunConfig renamed = c;
  renamed.run_name = "elsewhere";
  renamed.output_dir = "/tmp/x";
  CHECK(renamed.hash() == c.hash());

  CHECK_THROWS_AS(c.set("no.such.key", "1"), Error);
  CHECK_THROWS_AS(c.set("seed", "-3"), Error);
  CHECK_THROWS_AS(c.set("split.stratified", "maybe"), Error);
  CHECK(config_keys().size() >= kv.entries().size());
}

TEST_CASE("derived seeds differ per component and follow the master seed") {
  RunConfig c;
  c.seed = 1;
  const auto a = c.effective_split().seed, b = c.effective_resample().seed, d = c.effective_lstm().seed;
  CHECK(a != b);
  CHECK(b != d);
  c.seed = 2;
  CHECK(c.effective_split().seed != a);
}

TEST_CASE("bench grids expand in a fixed order") {
  KeyValueFile manifest;
  manifest.set("base.task", "account");
  manifest.set("base.synth.accounts_per_class", "30");
  manifest.set("grid.model", "logreg,sgd,random_forest,adaboost,mlp");
  manifest.set("grid.resample", "none,smotenn,smotomek");
  const auto rows = expand_bench_manifest(manifest);
  REQUIRE(rows.size() == 15);
  CHECK(rows[0].name == "logreg+none");
  CHECK(rows[1].name == "logreg+smotenn");
  CHECK(rows[14].name == "mlp+smotomek");
  for (const auto& r : rows) CHECK(r.config.synthetic.n_accounts_per_class == 30);

  KeyValueFile lstm;
  lstm.set("base.task", "tweet");
  lstm.set("row.tweet_only.model", "lstm_tweet_only");
  lstm.set("grid.model", "contextual_lstm");
  lstm.set("grid.embedding.dim", "25,50,100,200");
  const auto lrows = expand_bench_manifest(lstm);
  REQUIRE(lrows.size() == 5);
  CHECK(lrows[0].name == "tweet_only");
  CHECK(lrows[1].config.embedding_dim == 25);
  CHECK(lrows[4].config.embedding_dim == 200);
  CHECK(lrows[4].name == "contextual_lstm+200d");

  KeyValueFile bad;
  bad.set("grid.colour", "red");
  CHECK_THROWS_AS(expand_bench_manifest(bad), Error);
}

TEST_CASE("a failing bench row is recorded without stopping the suite") {
  const auto dir = scratch_dir("bench");
  KeyValueFile manifest;
  manifest.set("base.synth.accounts_per_class", "20");
  manifest.set("base.forest.trees", "5");
  manifest.set("row.good.model", "random_forest");
  manifest.set("row.bad.model", "contextual_lstm");
  manifest.set("row.after.model", "logreg");
  const auto rows = benchmark_suite(manifest, dir);
  REQUIRE(rows.size() == 3);
  CHECK(rows[0].report.has_value());
  CHECK_FALSE(rows[1].report.has_value());
  CHECK_FALSE(rows[1].error.empty());
  CHECK(rows[2].report.has_value());
  const auto csv = parse_csv(read_file(dir / "bench.csv"));
  REQUIRE(csv.rows.size() == 3);
  CHECK(csv.rows[0][0] == "good");
  CHECK(csv.rows[1][5] == "failed");
  CHECK(fs::exists(dir / "bench.txt"));
  fs::remove_all(dir);
}

TEST_CASE("a forest separates a separable account corpus") {
  RunConfig c = small_account_run();
  c.synthetic.separation = 1.0;
  CHECK(run_in_memory(c).report.auc >= 0.99);
}

TEST_CASE("account runs write their artifacts deterministically") {
  const auto dir = scratch_dir("account_run");
  RunConfig c = small_account_run();
  c.resample.strategy = ResampleStrategy::Smotenn;
  c.output_dir = dir;
  c.run_name = "a";
  const auto first = run_experiment(c);
  c.run_name = "b";
  run_experiment(c);
  for (const char* f : {"report.txt", "report.kv", "roc.csv", "model.ckpt", "resample.txt", "manifest.kv"}) {
    CAPTURE(f);
    REQUIRE(fs::exists(dir / "a" / f));
    CHECK(read_file(dir / "a" / f) == read_file(dir / "b" / f));
  }
  CHECK(fs::exists(dir / "latest"));
  const auto again = evaluate_run(dir / "a");
  CHECK(again.auc == first.report.auc);
  CHECK(again.confusion == first.report.confusion);
  CHECK(read_run_config(dir / "a").hash() == first.config_hash);
  fs::remove_all(dir);
}

TEST_CASE("lstm runs reload and re-score identically") {
  const auto dir = scratch_dir("lstm_run");
  RunConfig c = small_tweet_run();
  c.output_dir = dir;
  c.run_name = "r";
  const auto result = run_experiment(c);
  REQUIRE(result.trace.has_value());
  CHECK(fs::exists(dir / "r" / "trace.csv"));
  CHECK(fs::exists(dir / "r" / "embeddings.txt"));
  const auto again = evaluate_run(dir / "r");
  CHECK(again.auc == result.report.auc);
  const auto [model, table] = load_lstm_run(dir / "r");
  CHECK(model.architecture().embedding_dim == 8);
  CHECK(table.dimension() == 8);
  fs::remove_all(dir);
}

#ifdef BOTDETECT_CLI_PATH
TEST_CASE("command-line exit codes") {
  const auto dir = scratch_dir("cli");
  const std::string cli = BOTDETECT_CLI_PATH;
  auto run = [&](const std::string& args) {
    const int status = std::system((cli + " " + args + " > " + (dir / "out.txt").string() + " 2>&1").c_str());
    return WEXITSTATUS(status);
  };
  CHECK(run("tokenize 'hello WORLD'") == 0);
  CHECK(read_file(dir / "out.txt") == "hello world <allcaps>\n");
  CHECK(run("train --model contextual_lstm --task account") == 2);
  CHECK(run("train --seed banana") == 2);
  CHECK(run("ingest --manifest " + (dir / "missing.txt").string()) == 3);
  CHECK(run("train --synth-accounts-per-class 10 --forest-trees 5 --output-dir " + (dir / "runs").string() +
            " --output-run-name x") == 0);
  CHECK(fs::exists(dir / "runs" / "x" / "report.txt"));
  fs::remove_all(dir);
}
#endif
