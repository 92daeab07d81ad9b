// Command-line front end: ingest, tokenize, resample, train, eval, inspect,
// bench, synth.

#include <CLI11.hpp>

#include <iostream>
#include <map>
#include <sstream>

#include "botdetect/error.hpp"
#include "botdetect/experiment.hpp"
#include "botdetect/introspect.hpp"

namespace fs = std::filesystem;
using namespace botdetect;

namespace {

enum ExitCode { kOk = 0, kConfigError = 2, kDataError = 3, kTrainingError = 4 };

int exit_code(ErrorCategory c) {
  switch (c) {
    case ErrorCategory::Config: return kConfigError;
    case ErrorCategory::Data: return kDataError;
    case ErrorCategory::Training: return kTrainingError;
  }
  return kDataError;
}

std::string flag_name(const std::string& key) {
  std::string out = key;
  for (char& c : out) {
    if (c == '.' || c == '_') c = '-';
  }
  return "--" + out;
}

/// RunConfig flags shared by train and resample: one flag per config key, a
/// config file, and free-form key=value overrides. Precedence: defaults, then
/// the file, then flags.
struct ConfigFlags {
  std::map<std::string, std::string> values;
  std::string file;
  std::vector<std::string> overrides;

  void attach(CLI::App* cmd) {
    cmd->add_option("--config", file, "key = value file; command-line flags override it");
    cmd->add_option("--set", overrides, "extra key=value setting (repeatable)");
    for (const auto& key : config_keys()) {
      cmd->add_option_function<std::string>(
          flag_name(key.name), [this, name = key.name](const std::string& v) { values[name] = v; },
          key.help.empty() ? key.name : key.help);
    }
  }

  RunConfig build() const {
    RunConfig config;
    if (!file.empty()) config = RunConfig::from_key_values(KeyValueFile::read(file));
    for (const auto& [k, v] : values) config.set(k, v);
    for (const auto& o : overrides) {
      const auto eq = o.find('=');
      if (eq == std::string::npos) throw Error(ErrorKind::InvalidConfig, "--set expects key=value, got '" + o + "'");
      config.set(trim(std::string_view(o).substr(0, eq)), std::string_view(o).substr(eq + 1));
    }
    return config;
  }
};

void print_diagnostics(const LoadResult& loaded) {
  for (const auto& d : loaded.diagnostics) {
    std::cout << d.group << ": accounts " << d.accounts_loaded << "/" << d.account_rows << " (skipped "
              << d.accounts_skipped << "), tweets " << d.tweets_loaded << "/" << d.tweet_rows << " (skipped "
              << d.tweets_skipped << ")\n";
    for (const auto& [column, n] : d.filled) std::cout << "  filled missing column " << column << " in " << n << " rows\n";
    for (const auto& c : d.derived_from_text) std::cout << "  derived " << c << " from tweet text\n";
  }
  for (const auto& w : loaded.warnings()) std::cerr << "warning: " << w << '\n';
}

std::string matrix_csv(const FeatureMatrix& m) {
  std::ostringstream out;
  auto header = m.schema();
  header.push_back("label");
  write_csv_row(out, header);
  for (Index i = 0; i < m.rows(); ++i) {
    std::vector<std::string> row;
    for (Index c = 0; c < m.cols(); ++c) row.push_back(format_real(m.values()(i, c)));
    row.emplace_back(to_string(m.label(i)));
    write_csv_row(out, row);
  }
  return out.str();
}

int run(int argc, char** argv) {
  CLI::App app{"Twitter bot detection: account-level baselines and tweet-level LSTM models"};
  app.require_subcommand(1);

  // synth
  auto* synth = app.add_subcommand("synth", "Write a synthetic labelled corpus");
  SyntheticCorpusSpec synth_spec;
  fs::path synth_out;
  Index synth_dim = 0;
  synth->add_option("--out", synth_out, "output directory")->required();
  synth->add_option("--accounts-per-class", synth_spec.n_accounts_per_class);
  synth->add_option("--tweets-per-account", synth_spec.tweets_per_account);
  synth->add_option("--separation", synth_spec.separation, "0 = identical classes, 1 = disjoint")
      ->check(CLI::Range(0.0, 1.0));
  synth->add_option("--seed", synth_spec.seed);
  synth->add_option("--embedding-dim", synth_dim, "also write fixture GloVe vectors of this dimension");

  // ingest
  auto* ingest = app.add_subcommand("ingest", "Load a corpus manifest and report what was read");
  fs::path ingest_manifest, ingest_out;
  std::size_t ingest_cap = 0;
  ingest->add_option("--manifest", ingest_manifest, "corpus manifest")->required();
  ingest->add_option("--max-tweets-per-group", ingest_cap);
  ingest->add_option("--out", ingest_out, "write normalized users.csv / tweets.csv here");

  // tokenize
  auto* tok = app.add_subcommand("tokenize", "Tokenize text (arguments, or stdin lines)");
  std::vector<std::string> tok_text;
  bool tok_repeats = false;
  tok->add_option("text", tok_text, "text to tokenize");
  tok->add_flag("--tag-repeats", tok_repeats, "emit <repeat> for punctuation runs");

  // resample
  auto* resample = app.add_subcommand("resample", "Resample an account matrix and write it as CSV");
  ConfigFlags resample_flags;
  resample_flags.attach(resample);
  fs::path resample_out;
  resample->add_option("--out", resample_out, "output CSV")->required();

  // train
  auto* train = app.add_subcommand("train", "Run one experiment and write its artifacts");
  ConfigFlags train_flags;
  train_flags.attach(train);

  // eval
  auto* eval = app.add_subcommand("eval", "Re-score a finished run");
  fs::path eval_run, eval_manifest;
  bool eval_all = false;
  eval->add_option("--run", eval_run, "run directory")->required();
  eval->add_option("--manifest", eval_manifest, "score another corpus instead");
  eval->add_flag("--all", eval_all, "score every row, not just the held-out split");

  // inspect
  auto* inspect = app.add_subcommand("inspect", "Export LSTM activations of a finished run");
  fs::path inspect_run, inspect_out;
  std::string inspect_text;
  bool inspect_cell = false;
  std::size_t inspect_bins = 50;
  inspect->add_option("--run", inspect_run, "run directory of an LSTM model")->required();
  inspect->add_option("--out", inspect_out, "output directory")->required();
  inspect->add_option("--text", inspect_text, "trace this tweet (heatmap.csv)");
  inspect->add_flag("--cell", inspect_cell, "also export cell states");
  inspect->add_option("--bins", inspect_bins, "histogram bins over [-1, 1]");

  // bench
  auto* bench = app.add_subcommand("bench", "Run a benchmark manifest");
  fs::path bench_manifest, bench_out;
  bench->add_option("--manifest", bench_manifest, "bench manifest")->required();
  bench->add_option("--out", bench_out, "output directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kConfigError;
  }

  if (synth->parsed()) {
    const auto corpus = generate_synthetic(synth_spec);
    const auto manifest = write_corpus(corpus, synth_out);
    std::cout << "wrote " << corpus.accounts.size() << " accounts and " << corpus.tweets.size() << " tweets; manifest "
              << manifest.string() << '\n';
    if (synth_dim > 0) {
      std::set<std::string> vocab;
      for (const auto& t : corpus.tweets) {
        const auto tokens = tokenize(t.text);
        vocab.insert(tokens.begin(), tokens.end());
      }
      const auto table = make_fixture_table({vocab.begin(), vocab.end()}, synth_dim, mix_seed(synth_spec.seed, 7));
      write_file(synth_out / "embeddings.txt", to_glove_text(table));
      std::cout << "wrote " << table.size() << " fixture vectors to " << (synth_out / "embeddings.txt").string() << '\n';
    }
  } else if (ingest->parsed()) {
    LoadOptions options;
    options.max_tweets_per_group = ingest_cap;
    const auto loaded = load_corpus(CorpusManifest::read(ingest_manifest), options);
    print_diagnostics(loaded);
    std::cout << "total: " << loaded.accounts.size() << " accounts, " << loaded.tweets.size() << " tweets\n";
    if (!ingest_out.empty()) {
      write_file(ingest_out / "users.csv", accounts_to_csv(loaded.accounts));
      write_file(ingest_out / "tweets.csv", tweets_to_csv(loaded.tweets));
    }
  } else if (tok->parsed()) {
    TokenizerOptions options;
    options.tag_repeats = tok_repeats;
    if (tok_text.empty()) {
      std::string line;
      while (std::getline(std::cin, line)) std::cout << join_tokens(tokenize(line, options)) << '\n';
    } else {
      for (const auto& t : tok_text) std::cout << join_tokens(tokenize(t, options)) << '\n';
    }
  } else if (resample->parsed()) {
    RunConfig config = resample_flags.build();
    config.validate();
    FeatureMatrix m = config.task == Task::AccountLevel ? load_account_data(config).matrix
                                                        : make_tweet_metadata_matrix(load_tweet_data(config).tweets);
    const auto result = apply_strategy(m, config.effective_resample());
    write_file(resample_out, matrix_csv(result.matrix));
    std::cout << result.diagnostics.to_text();
  } else if (train->parsed()) {
    const RunConfig config = train_flags.build();
    const auto result = run_experiment(config);
    std::cout << result.report.to_text() << "artifacts: " << result.run_dir.string() << '\n';
  } else if (eval->parsed()) {
    std::optional<fs::path> override_manifest;
    if (!eval_manifest.empty()) override_manifest = eval_manifest;
    std::cout << evaluate_run(eval_run, eval_all, override_manifest).to_text();
  } else if (inspect->parsed()) {
    const RunConfig config = read_run_config(inspect_run);
    if (!is_lstm(config.model)) throw Error(ErrorKind::InvalidConfig, "inspect needs a run of an LSTM model");
    auto [model, table] = load_lstm_run(inspect_run);
    if (!inspect_text.empty()) {
      TraceOptions options;
      options.include_cell = inspect_cell;
      options.tokenizer = config.tokenizer;
      options.embed = config.embed;
      TweetRecord tweet;
      tweet.text = inspect_text;
      tweet.metadata = entity_counts_from_text(inspect_text);
      const auto trace = trace_tweet(model, tweet, table, options);
      if (trace.empty_tweet) std::cerr << "warning: the text produced no tokens\n";
      write_file(inspect_out / "heatmap.csv", heatmap_csv(trace));
      if (inspect_cell) write_file(inspect_out / "heatmap_cell.csv", heatmap_csv(trace, true));
    }
    const auto data = load_tweet_data(config);
    const auto examples = make_examples(data, table, config, split_tweets(config, data).test);
    DistributionOptions options;
    options.bins = inspect_bins;
    const auto report = unit_distributions(model, examples, options);
    write_file(inspect_out / "distributions.csv", distributions_csv(report));
    write_file(inspect_out / "separation.csv", separation_csv(report));
    std::cout << "units by class separation (KS):";
    for (std::size_t i = 0; i < std::min<std::size_t>(5, report.ranking.size()); ++i) {
      std::cout << " " << report.ranking[i].unit << "=" << format_real(report.ranking[i].ks);
    }
    std::cout << "\nwrote " << inspect_out.string() << '\n';
  } else if (bench->parsed()) {
    const auto rows = benchmark_suite(KeyValueFile::read(bench_manifest), bench_out, [](const BenchRow& r) {
      std::cerr << r.name << ": " << (r.report ? "ok" : "failed: " + r.error) << '\n';
    });
    std::cout << bench_table(rows);
  }
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return exit_code(e.category());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kDataError;
  }
}
