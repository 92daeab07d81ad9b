#include "botdetect/introspect.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "botdetect/error.hpp"
#include "botdetect/text_io.hpp"

namespace botdetect {

namespace {

// Type-7 quantile of sorted values.
double quantile(const std::vector<double>& sorted, double q) {
  if (sorted.empty()) return 0.0;
  const double pos = q * static_cast<double>(sorted.size() - 1);
  const std::size_t lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (pos - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

UnitDistribution summarise(Index unit, Label label, std::vector<double> values, std::size_t bins) {
  UnitDistribution d;
  d.unit = unit;
  d.label = label;
  d.histogram.assign(bins, 0);
  d.count = values.size();
  for (double v : values) {
    const double pos = (v - d.low) / (d.high - d.low) * static_cast<double>(bins);
    const auto b = static_cast<std::ptrdiff_t>(std::floor(pos));
    const auto clamped = std::clamp<std::ptrdiff_t>(b, 0, static_cast<std::ptrdiff_t>(bins) - 1);
    ++d.histogram[static_cast<std::size_t>(clamped)];
  }
  if (values.empty()) return d;
  double sum = 0.0;
  for (double v : values) sum += v;
  d.mean = sum / static_cast<double>(values.size());
  double sq = 0.0;
  for (double v : values) sq += (v - d.mean) * (v - d.mean);
  d.variance = sq / static_cast<double>(values.size());
  std::sort(values.begin(), values.end());
  d.q25 = quantile(values, 0.25);
  d.median = quantile(values, 0.5);
  d.q75 = quantile(values, 0.75);
  return d;
}

}  // namespace

ActivationTrace trace_example(const ContextualLstmModel& model, const TweetExample& example,
                              const TokenSequence& tokens, bool include_cell) {
  ActivationTrace trace;
  trace.tokens = tokens;
  const Index h = model.architecture().hidden_dim;
  if (example.sequence.true_length == 0) {
    trace.empty_tweet = true;
    trace.hidden.resize(0, h);
    trace.cell.resize(0, h);
    return trace;
  }
  const auto fp = forward(model, example);
  const Index steps = fp.lstm.steps();
  // Column 0 of the stored states is the zero initial state.
  trace.hidden = fp.lstm.hidden.rightCols(steps).transpose();
  if (include_cell) trace.cell = fp.lstm.cell.rightCols(steps).transpose();
  else trace.cell.resize(0, h);
  return trace;
}

ActivationTrace trace_tweet(const ContextualLstmModel& model, const TweetRecord& tweet, const EmbeddingTable& table,
                            const TraceOptions& options) {
  const TokenSequence tokens = tokenize(tweet.text, options.tokenizer);
  TweetExample example{embed(tokens, table, options.embed), encode_tweet_metadata(tweet.metadata), tweet.label};
  return trace_example(model, example, embedded_tokens(tokens, options.embed), options.include_cell);
}

double UnitDistribution::bin_low(std::size_t b) const {
  return low + (high - low) * static_cast<double>(b) / static_cast<double>(histogram.size());
}

double UnitDistribution::bin_high(std::size_t b) const {
  return low + (high - low) * static_cast<double>(b + 1) / static_cast<double>(histogram.size());
}

const UnitDistribution& UnitDistributionReport::at(Index unit, Label label) const {
  return distributions.at(static_cast<std::size_t>(2 * unit + (label == Label::Bot ? 1 : 0)));
}

double ks_statistic(std::vector<double> a, std::vector<double> b) {
  if (a.empty() || b.empty()) return 0.0;
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  const double na = static_cast<double>(a.size()), nb = static_cast<double>(b.size());
  std::size_t i = 0, j = 0;
  double best = 0.0;
  while (i < a.size() && j < b.size()) {
    const double v = std::min(a[i], b[j]);
    while (i < a.size() && a[i] == v) ++i;
    while (j < b.size() && b[j] == v) ++j;
    best = std::max(best, std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
  }
  return best;
}

UnitDistributionReport unit_distributions(const ContextualLstmModel& model, std::span<const TweetExample> corpus,
                                          const DistributionOptions& options) {
  if (options.bins == 0) throw Error(ErrorKind::InvalidConfig, "histogram needs at least one bin");
  const Index h = model.architecture().hidden_dim;
  std::vector<std::vector<double>> human(static_cast<std::size_t>(h)), bot(static_cast<std::size_t>(h));
  UnitDistributionReport report;
  for (const auto& ex : corpus) {
    const auto fp = forward(model, ex);
    const VecX final_h = fp.final_hidden();
    auto& target = ex.label == Label::Bot ? bot : human;
    (ex.label == Label::Bot ? report.bot_count : report.human_count)++;
    for (Index u = 0; u < h; ++u) target[static_cast<std::size_t>(u)].push_back(final_h(u));
  }
  if (report.human_count == 0 || report.bot_count == 0) {
    throw Error(ErrorKind::SingleClass, "unit distributions need tweets of both classes");
  }
  for (Index u = 0; u < h; ++u) {
    const auto uu = static_cast<std::size_t>(u);
    report.ranking.push_back({u, ks_statistic(human[uu], bot[uu])});
    report.distributions.push_back(summarise(u, Label::Human, std::move(human[uu]), options.bins));
    report.distributions.push_back(summarise(u, Label::Bot, std::move(bot[uu]), options.bins));
  }
  std::stable_sort(report.ranking.begin(), report.ranking.end(),
                   [](const UnitSeparation& a, const UnitSeparation& b) { return a.ks > b.ks; });
  return report;
}

std::string heatmap_csv(const ActivationTrace& trace, bool cell_states) {
  const RowMatX& m = cell_states ? trace.cell : trace.hidden;
  std::ostringstream out;
  std::vector<std::string> row{"unit"};
  for (Index t = 0; t < m.rows(); ++t) row.push_back("t" + std::to_string(t));
  write_csv_row(out, row);
  row.assign(1, "token");
  for (Index t = 0; t < m.rows(); ++t) {
    row.push_back(static_cast<std::size_t>(t) < trace.tokens.size() ? trace.tokens[static_cast<std::size_t>(t)] : "");
  }
  write_csv_row(out, row);
  for (Index u = 0; u < m.cols(); ++u) {
    row.assign(1, std::to_string(u));
    for (Index t = 0; t < m.rows(); ++t) row.push_back(format_real(m(t, u)));
    write_csv_row(out, row);
  }
  return out.str();
}

std::string distributions_csv(const UnitDistributionReport& report) {
  std::ostringstream out;
  out << "unit,class,bin_low,bin_high,count\n";
  for (const auto& d : report.distributions) {
    for (std::size_t b = 0; b < d.histogram.size(); ++b) {
      out << d.unit << ',' << to_string(d.label) << ',' << format_real(d.bin_low(b)) << ','
          << format_real(d.bin_high(b)) << ',' << d.histogram[b] << '\n';
    }
  }
  return out.str();
}

std::string separation_csv(const UnitDistributionReport& report) {
  std::ostringstream out;
  out << "rank,unit,ks,human_mean,human_median,bot_mean,bot_median\n";
  for (std::size_t r = 0; r < report.ranking.size(); ++r) {
    const auto& s = report.ranking[r];
    const auto& hu = report.at(s.unit, Label::Human);
    const auto& bo = report.at(s.unit, Label::Bot);
    out << r + 1 << ',' << s.unit << ',' << format_real(s.ks) << ',' << format_real(hu.mean) << ','
        << format_real(hu.median) << ',' << format_real(bo.mean) << ',' << format_real(bo.median) << '\n';
  }
  return out.str();
}

}  // namespace botdetect
