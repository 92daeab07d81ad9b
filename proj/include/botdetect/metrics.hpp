#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "botdetect/core_data.hpp"
#include "botdetect/text_io.hpp"

namespace botdetect {

struct Confusion {
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t fn = 0;
  std::size_t tn = 0;

  std::size_t total() const { return tp + fp + fn + tn; }
  bool operator==(const Confusion&) const = default;
};

/// Bot is positive; score >= threshold predicts Bot. Throws EmptyInput.
Confusion confusion_at(std::span<const double> scores, std::span<const Label> labels,
                       double threshold = 0.5);

struct RocPoint {
  double fpr = 0.0;
  double tpr = 0.0;
};

/// ROC vertices from (0,0) to (1,1), one per distinct score (descending),
/// equal scores forming a single step. Throws SingleClass / EmptyInput.
std::vector<RocPoint> roc_curve(std::span<const double> scores, std::span<const Label> labels);

/// Trapezoidal area under roc_curve; equals the Mann-Whitney statistic with
/// half credit for ties.
double auc(std::span<const double> scores, std::span<const Label> labels);

struct EvalReport {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  double accuracy = 0.0;
  double auc = 0.0;
  /// Unweighted mean over the Bot and Human classes.
  double macro_precision = 0.0;
  double macro_recall = 0.0;
  double macro_f1 = 0.0;
  /// Set when the metric had a zero denominator and was reported as 0.
  bool precision_undefined = false;
  bool recall_undefined = false;
  double threshold = 0.5;
  Confusion confusion;
  std::vector<RocPoint> roc_points;
  /// Hyperparameters and decisions that produced the scores.
  KeyValueFile config_echo;

  std::string to_text() const;
  KeyValueFile to_key_values() const;
  /// Two columns: fpr,tpr.
  std::string roc_csv() const;
};

EvalReport evaluate(std::span<const double> scores, std::span<const Label> labels,
                    double threshold = 0.5);

}  // namespace botdetect
