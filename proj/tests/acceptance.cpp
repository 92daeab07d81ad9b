// Acceptance suite: one PASS/FAIL line per criterion. Exit status is nonzero
// if any criterion fails.
//
// The real-corpus check runs only when a corpus manifest is given, either as
// the first argument or through BOTDETECT_REAL_MANIFEST.

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <iostream>
#include <sstream>

#include "botdetect/experiment.hpp"
#include "botdetect/introspect.hpp"
#include "support/fixtures.hpp"
#include "support/tokenizer_cases.hpp"

using namespace botdetect;
using namespace botdetect::testing;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

int failures = 0;

void report(int id, const std::string& title, double limit_seconds, const std::function<Outcome()>& check) {
  const auto start = std::chrono::steady_clock::now();
  Outcome o;
  try {
    o = check();
  } catch (const std::exception& e) {
    o = {false, std::string("exception: ") + e.what()};
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  if (limit_seconds > 0 && secs >= limit_seconds) {
    o.pass = false;
    o.detail += "; over the time limit";
  }
  std::ostringstream line;
  line << (o.pass ? "PASS" : "FAIL") << " [" << id << "] " << title << ": " << o.detail << " (" << std::fixed;
  line.precision(2);
  line << secs << " s";
  if (limit_seconds > 0) line << ", limit " << limit_seconds << " s";
  line << ")";
  std::cout << line.str() << std::endl;
  if (!o.pass) ++failures;
}

std::string num(double v, int precision = 4) {
  std::ostringstream out;
  out.precision(precision);
  out << v;
  return out.str();
}

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("botdetect_acceptance_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

Outcome tokenizer_suite() {
  const auto& cases = tokenizer_cases();
  std::size_t bad = 0;
  bool allcaps_example = false;
  for (const auto& c : cases) {
    TokenizerOptions options;
    options.tag_repeats = c.tag_repeats;
    if (tokenize(c.input, options) != c.expected) {
      ++bad;
      std::cout << "  mismatch: " << c.input << " -> " << join_tokens(tokenize(c.input, options)) << '\n';
    }
    if (std::string(c.input) == "HAPPY") allcaps_example = c.expected == TokenSequence{"happy", "<allcaps>"};
  }
  return {cases.size() >= 40 && bad == 0 && allcaps_example,
          std::to_string(cases.size()) + " cases, " + std::to_string(bad) + " mismatches"};
}

Outcome resampling_oracles() {
  std::size_t tomek_bad = 0, enn_bad = 0, smote_rows = 0, smote_bad = 0;
  for (std::uint64_t s = 0; s < 25; ++s) {
    Rng rng(mix_seed(2000, s));
    const Index n = 20 + static_cast<Index>(rng.uniform_index(41));
    const Index d = 1 + static_cast<Index>(rng.uniform_index(5));
    FeatureMatrix m = random_labeled(n, d, rng, rng.uniform(0.2, 0.45));
    // Keep at least smote_k + 1 rows of each class.
    std::vector<Label> labels = m.labels();
    for (Index i = 0; i < 6; ++i) labels[static_cast<std::size_t>(i)] = Label::Bot;
    for (Index i = 6; i < 12; ++i) labels[static_cast<std::size_t>(i)] = Label::Human;
    m = FeatureMatrix(m.values(), m.schema(), labels);

    if (tomek_links(m) != brute_tomek(m)) ++tomek_bad;
    const auto keep = brute_enn_keep(m, 3);
    const auto filtered = enn_filter(m, 3);
    bool same = filtered.rows() == static_cast<Index>(keep.size());
    for (std::size_t i = 0; same && i < keep.size(); ++i) {
      same = filtered.row(static_cast<Index>(i)) == m.row(keep[i]) &&
             filtered.label(static_cast<Index>(i)) == m.label(keep[i]);
    }
    if (!same) ++enn_bad;

    ResampleConfig config;
    config.seed = s;
    const auto out = smote(m, config);
    const Label minority = m.minority_label();
    std::vector<Index> pool;
    for (Index r = 0; r < m.rows(); ++r) {
      if (m.label(r) == minority) pool.push_back(r);
    }
    for (Index r = m.rows(); r < out.rows(); ++r) {
      ++smote_rows;
      if (out.label(r) != minority || !on_some_segment(m.values(), pool, out.row(r).transpose(), 1e-9)) ++smote_bad;
    }
  }
  return {tomek_bad == 0 && enn_bad == 0 && smote_bad == 0 && smote_rows > 0,
          "25 datasets; tomek mismatches " + std::to_string(tomek_bad) + ", enn mismatches " +
              std::to_string(enn_bad) + ", " + std::to_string(smote_bad) + "/" + std::to_string(smote_rows) +
              " synthetic rows off-segment"};
}

Outcome auc_oracle() {
  double worst = 0.0;
  std::size_t invariance_bad = 0;
  for (std::uint64_t s = 0; s < 100; ++s) {
    Rng rng(mix_seed(3000, s));
    const std::size_t n = 2 + rng.uniform_index(49);
    const double levels = static_cast<double>(2 + rng.uniform_index(20));
    std::vector<double> scores;
    std::vector<Label> labels;
    for (std::size_t i = 0; i < n; ++i) {
      scores.push_back(static_cast<double>(rng.uniform_index(static_cast<std::uint64_t>(levels))) / levels);
      labels.push_back(i == 0 ? Label::Bot : i == 1 ? Label::Human : (rng.bernoulli(0.4) ? Label::Bot : Label::Human));
    }
    const double a = auc(scores, labels);
    worst = std::max(worst, std::abs(a - pair_auc(scores, labels)));
    std::vector<double> t1, t2;
    for (double v : scores) {
      t1.push_back(std::exp(4.0 * v) - 3.0);
      t2.push_back(10.0 * v * v * v + v);
    }
    if (auc(t1, labels) != a || auc(t2, labels) != a) ++invariance_bad;
  }
  return {worst <= 1e-9 && invariance_bad == 0,
          "100 sets; max |auc - pair count| = " + num(worst) + ", invariance failures " +
              std::to_string(invariance_bad)};
}

Outcome gradient_check() {
  nn::LstmArchitecture arch;
  arch.variant = nn::LstmVariant::Contextual;
  arch.embedding_dim = 25;
  double worst = 0.0;
  std::vector<std::string> groups;
  for (std::uint64_t b = 0; b < 5; ++b) {
    auto model = random_model(arch, 100 + b);
    Rng rng(200 + b);
    std::vector<TweetExample> batch;
    for (int i = 0; i < 3; ++i) {
      batch.push_back(random_example(arch.embedding_dim, 1 + static_cast<Index>(rng.uniform_index(6)), rng,
                                     i == 1 ? Label::Bot : Label::Human, 6));
    }
    worst = std::max(worst, lstm_gradient_error(model, batch, 1e-5));
    groups.clear();
    for (const auto& block : model.params().blocks()) groups.emplace_back(block.name);
  }
  auto has = [&](const std::string& name) { return std::find(groups.begin(), groups.end(), name) != groups.end(); };
  const bool covered = has("lstm.recurrent_weights") && has("aux_head.weight") && has("main_head.weight");
  return {worst < 1e-4 && covered,
          "5 batches of 3, " + std::to_string(groups.size()) + " parameter groups, max relative error " + num(worst)};
}

RunConfig tweet_desk(ModelKind model, std::uint64_t seed) {
  RunConfig c;
  c.task = Task::TweetLevel;
  c.model = model;
  c.synthetic.separation = 0.8;
  c.synthetic.n_accounts_per_class = 50;
  c.synthetic.tweets_per_account = 10;
  c.embedding_dim = 25;
  c.seed = seed;
  return c;
}

Outcome loss_identity() {
  RunConfig c = tweet_desk(ModelKind::ContextualLstm, 1);
  c.lstm.epochs = 10;
  const auto result = run_in_memory(c);
  const auto& trace = *result.trace;
  double worst = 0.0;
  for (const auto& s : trace.steps) worst = std::max(worst, std::abs(s.total - (0.8 * s.main + 0.2 * s.aux)));
  const bool weights = trace.loss_weights.main == 0.8 && trace.loss_weights.aux == 0.2;
  const bool epochs = trace.epochs.size() == 10;
  return {worst <= 1e-12 && weights && epochs && !trace.steps.empty(),
          std::to_string(trace.steps.size()) + " steps over " + std::to_string(trace.epochs.size()) +
              " epochs; max |total - (0.8 main + 0.2 aux)| = " + num(worst)};
}

Outcome tweet_benchmark() {
  double contextual = 0.0, tweet_only = 0.0;
  std::string per_seed;
  for (std::uint64_t seed = 1; seed <= 3; ++seed) {
    const double a = run_in_memory(tweet_desk(ModelKind::ContextualLstm, seed)).report.auc;
    const double b = run_in_memory(tweet_desk(ModelKind::LstmTweetOnly, seed)).report.auc;
    contextual += a / 3.0;
    tweet_only += b / 3.0;
    per_seed += (seed > 1 ? ", " : "") + num(a) + "/" + num(b);
  }
  return {contextual >= tweet_only - 0.01 && contextual >= 0.90 && tweet_only >= 0.90,
          "mean AUC contextual " + num(contextual) + ", tweet-only " + num(tweet_only) + " (per seed " + per_seed +
              ")"};
}

Outcome account_benchmark() {
  bool ok = true;
  std::string detail;
  for (auto kind : kAllBaselines) {
    double recall[2] = {0.0, 0.0};
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
      for (int r = 0; r < 2; ++r) {
        RunConfig c;
        c.task = Task::AccountLevel;
        c.source = DataSource::Gaussian;
        c.gaussian.n_human = 800;
        c.gaussian.n_bot = 200;
        c.gaussian.shift = 0.5;
        c.set("model", to_string(kind));
        c.resample.strategy = r == 0 ? ResampleStrategy::None : ResampleStrategy::Smotenn;
        c.seed = seed;
        recall[r] += run_in_memory(c).report.recall / 5.0;
      }
    }
    const double gain = recall[1] - recall[0];
    ok = ok && gain >= 0.05;
    detail += std::string(detail.empty() ? "" : ", ") + to_string(kind) + " " + num(recall[0], 3) + "->" +
              num(recall[1], 3);
  }
  return {ok, "bot recall none->smotenn: " + detail};
}

Outcome real_corpus(const fs::path& manifest) {
  auto run = [&](ModelKind model, ResampleStrategy strategy) {
    RunConfig c;
    c.task = Task::AccountLevel;
    c.source = DataSource::Manifest;
    c.manifest = manifest;
    c.model = model;
    c.resample.strategy = strategy;
    return run_in_memory(c).report.auc;
  };
  const double rf = run(ModelKind::RandomForest, ResampleStrategy::None);
  const double ada = run(ModelKind::AdaBoost, ResampleStrategy::Smotenn);
  return {rf >= 0.95 && ada >= rf, "random_forest AUC " + num(rf) + ", adaboost+smotenn AUC " + num(ada)};
}

Outcome determinism() {
  const fs::path dir = scratch("determinism");
  RunConfig account;
  account.model = ModelKind::AdaBoost;
  account.resample.strategy = ResampleStrategy::Smotenn;
  account.synthetic.n_accounts_per_class = 60;
  account.seed = 11;
  RunConfig lstm = tweet_desk(ModelKind::ContextualLstm, 11);
  lstm.synthetic.n_accounts_per_class = 10;
  lstm.lstm.epochs = 3;
  std::size_t compared = 0, differing = 0;
  for (RunConfig* c : {&account, &lstm}) {
    c->output_dir = dir;
    for (const char* name : {"first", "second"}) {
      c->run_name = std::string(to_string(c->model)) + "_" + name;
      run_experiment(*c);
    }
    const std::string stem = to_string(c->model);
    for (const char* f : {"report.txt", "report.kv", "roc.csv", "model.ckpt"}) {
      ++compared;
      if (read_file(dir / (stem + "_first") / f) != read_file(dir / (stem + "_second") / f)) ++differing;
    }
  }
  fs::remove_all(dir);
  return {differing == 0, std::to_string(compared) + " artifact pairs compared, " + std::to_string(differing) +
                              " differ"};
}

Outcome introspection() {
  auto data = synthetic_tweets(0.8, 20, 10, 5);
  LstmTrainConfig config;
  config.epochs = 3;
  config.seed = 5;
  const auto model = train_lstm(small_architecture(nn::LstmVariant::Contextual, 25), config, data.train).model;
  const auto report = unit_distributions(model, data.test);
  std::size_t bots = 0;
  for (const auto& e : data.test) bots += e.label == Label::Bot;
  std::size_t mass_bad = 0;
  for (const auto& d : report.distributions) {
    std::size_t mass = 0;
    for (auto c : d.histogram) mass += c;
    if (mass != (d.label == Label::Bot ? bots : data.test.size() - bots)) ++mass_bad;
  }
  const bool counts = report.bot_count == bots && report.human_count == data.test.size() - bots;
  std::size_t trace_bad = 0, traced = 0;
  for (const auto& ex : data.test) {
    const auto trace = trace_example(model, ex, {}, true);
    if (trace.empty_tweet) continue;
    const auto fp = forward(model, ex);
    const Index steps = fp.lstm.steps();
    ++traced;
    const RowMatX hidden = fp.lstm.hidden.rightCols(steps).transpose();
    const RowMatX cell = fp.lstm.cell.rightCols(steps).transpose();
    if (!(trace.hidden == hidden) || !(trace.cell == cell) ||
        !(VecX(trace.hidden.bottomRows(1).transpose()) == VecX(fp.final_hidden()))) {
      ++trace_bad;
    }
  }
  return {mass_bad == 0 && counts && trace_bad == 0 && traced > 0,
          std::to_string(report.distributions.size()) + " histograms, " + std::to_string(mass_bad) +
              " with wrong mass; " + std::to_string(trace_bad) + "/" + std::to_string(traced) +
              " traces differ from the forward pass"};
}

}  // namespace

int main(int argc, char** argv) {
  std::optional<fs::path> manifest;
  if (argc > 1) manifest = argv[1];
  else if (const char* env = std::getenv("BOTDETECT_REAL_MANIFEST"); env && *env) manifest = env;

  report(1, "tokenizer golden suite", 1, tokenizer_suite);
  report(2, "resampling oracles", 10, resampling_oracles);
  report(3, "auc oracle", 0, auc_oracle);
  report(4, "contextual lstm gradient check", 60, gradient_check);
  report(5, "weighted loss identity", 0, loss_identity);
  report(6, "tweet-level desk benchmark", 600, tweet_benchmark);
  report(7, "account-level desk benchmark", 300, account_benchmark);
  if (manifest) {
    report(8, "real corpus", 0, [&] { return real_corpus(*manifest); });
  } else {
    std::cout << "SKIP [8] real corpus: no manifest given (pass one as the first argument or set "
                 "BOTDETECT_REAL_MANIFEST)"
              << std::endl;
  }
  report(9, "determinism", 0, determinism);
  report(10, "introspection conservation", 0, introspection);
  return failures == 0 ? 0 : 1;
}
