#include "botdetect/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "botdetect/error.hpp"

namespace botdetect {

namespace {

void check_inputs(std::span<const double> scores, std::span<const Label> labels) {
  if (scores.empty()) throw Error(ErrorKind::EmptyInput, "no scores to evaluate");
  if (scores.size() != labels.size()) {
    throw Error(ErrorKind::DimensionMismatch, "score and label counts differ");
  }
  for (double s : scores) {
    if (std::isnan(s)) throw Error(ErrorKind::ParseError, "NaN score");
  }
}

struct RocSteps {
  std::size_t positives = 0;
  std::size_t negatives = 0;
  // Cumulative (fp, tp) after each group of equal scores.
  std::vector<std::pair<std::size_t, std::size_t>> cumulative;
};

RocSteps roc_steps(std::span<const double> scores, std::span<const Label> labels) {
  check_inputs(scores, labels);
  RocSteps steps;
  for (Label l : labels) (l == Label::Bot ? steps.positives : steps.negatives)++;
  if (steps.positives == 0 || steps.negatives == 0) {
    throw Error(ErrorKind::SingleClass, "ROC analysis needs both classes");
  }
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
  std::size_t tp = 0, fp = 0;
  for (std::size_t i = 0; i < order.size();) {
    const double s = scores[order[i]];
    while (i < order.size() && scores[order[i]] == s) {
      (labels[order[i]] == Label::Bot ? tp : fp)++;
      ++i;
    }
    steps.cumulative.emplace_back(fp, tp);
  }
  return steps;
}

double ratio(std::size_t num, std::size_t den, bool& undefined) {
  undefined = den == 0;
  return den == 0 ? 0.0 : static_cast<double>(num) / static_cast<double>(den);
}

double harmonic(double p, double r) { return p + r > 0.0 ? 2.0 * p * r / (p + r) : 0.0; }

}  // namespace

Confusion confusion_at(std::span<const double> scores, std::span<const Label> labels, double threshold) {
  check_inputs(scores, labels);
  Confusion c;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    const bool predicted_bot = scores[i] >= threshold;
    const bool is_bot = labels[i] == Label::Bot;
    if (predicted_bot && is_bot) ++c.tp;
    else if (predicted_bot) ++c.fp;
    else if (is_bot) ++c.fn;
    else ++c.tn;
  }
  return c;
}

std::vector<RocPoint> roc_curve(std::span<const double> scores, std::span<const Label> labels) {
  const RocSteps steps = roc_steps(scores, labels);
  std::vector<RocPoint> out;
  out.reserve(steps.cumulative.size() + 1);
  out.push_back({0.0, 0.0});
  for (auto [fp, tp] : steps.cumulative) {
    out.push_back({static_cast<double>(fp) / static_cast<double>(steps.negatives),
                   static_cast<double>(tp) / static_cast<double>(steps.positives)});
  }
  return out;
}

double auc(std::span<const double> scores, std::span<const Label> labels) {
  const RocSteps steps = roc_steps(scores, labels);
  // Twice the trapezoid area in count units: sum over steps of
  // dfp * (tp_before + tp_after). Integer-valued, so exact in double.
  double doubled = 0.0;
  std::size_t fp_prev = 0, tp_prev = 0;
  for (auto [fp, tp] : steps.cumulative) {
    doubled += static_cast<double>(fp - fp_prev) * static_cast<double>(tp_prev + tp);
    fp_prev = fp;
    tp_prev = tp;
  }
  return doubled / (2.0 * static_cast<double>(steps.positives) * static_cast<double>(steps.negatives));
}

EvalReport evaluate(std::span<const double> scores, std::span<const Label> labels, double threshold) {
  EvalReport r;
  r.threshold = threshold;
  r.confusion = confusion_at(scores, labels, threshold);
  const Confusion& c = r.confusion;
  r.precision = ratio(c.tp, c.tp + c.fp, r.precision_undefined);
  r.recall = ratio(c.tp, c.tp + c.fn, r.recall_undefined);
  r.f1 = harmonic(r.precision, r.recall);
  r.accuracy = static_cast<double>(c.tp + c.tn) / static_cast<double>(c.total());
  bool ignored = false;
  const double human_precision = ratio(c.tn, c.tn + c.fn, ignored);
  const double human_recall = ratio(c.tn, c.tn + c.fp, ignored);
  r.macro_precision = 0.5 * (r.precision + human_precision);
  r.macro_recall = 0.5 * (r.recall + human_recall);
  r.macro_f1 = 0.5 * (r.f1 + harmonic(human_precision, human_recall));
  r.roc_points = roc_curve(scores, labels);
  r.auc = auc(scores, labels);
  return r;
}

KeyValueFile EvalReport::to_key_values() const {
  KeyValueFile kv;
  kv.set("precision", format_real(precision));
  kv.set("recall", format_real(recall));
  kv.set("f1", format_real(f1));
  kv.set("accuracy", format_real(accuracy));
  kv.set("auc", format_real(auc));
  kv.set("macro_precision", format_real(macro_precision));
  kv.set("macro_recall", format_real(macro_recall));
  kv.set("macro_f1", format_real(macro_f1));
  kv.set("precision_undefined", precision_undefined ? "true" : "false");
  kv.set("recall_undefined", recall_undefined ? "true" : "false");
  kv.set("threshold", format_real(threshold));
  kv.set("tp", std::to_string(confusion.tp));
  kv.set("fp", std::to_string(confusion.fp));
  kv.set("fn", std::to_string(confusion.fn));
  kv.set("tn", std::to_string(confusion.tn));
  for (const auto& [k, v] : config_echo.entries()) kv.set("config." + k, v);
  return kv;
}

std::string EvalReport::to_text() const {
  std::ostringstream out;
  out.setf(std::ios::fixed);
  out.precision(4);
  out << "Evaluation report (positive class: bot, threshold >= " << threshold << ")\n";
  out << "  precision  " << precision << (precision_undefined ? "  (undefined: no predicted bots)" : "") << '\n';
  out << "  recall     " << recall << (recall_undefined ? "  (undefined: no bots)" : "") << '\n';
  out << "  f1         " << f1 << '\n';
  out << "  accuracy   " << accuracy << '\n';
  out << "  auc        " << auc << '\n';
  out << "  macro P/R/F1  " << macro_precision << " / " << macro_recall << " / " << macro_f1 << '\n';
  out << "  confusion  tp=" << confusion.tp << " fp=" << confusion.fp << " fn=" << confusion.fn
      << " tn=" << confusion.tn << '\n';
  if (!config_echo.entries().empty()) {
    out << "Configuration\n";
    for (const auto& [k, v] : config_echo.entries()) out << "  " << k << " = " << v << '\n';
  }
  return out.str();
}

std::string EvalReport::roc_csv() const {
  std::string out = "fpr,tpr\n";
  for (const auto& p : roc_points) out += format_real(p.fpr) + ',' + format_real(p.tpr) + '\n';
  return out;
}

}  // namespace botdetect
