#pragma once

#include <cstdint>
#include <optional>
#include <string_view>
#include <string>
#include <utility>
#include <vector>

#include "botdetect/core_data.hpp"

namespace botdetect {

enum class ResampleStrategy { None, Smote, Smotenn, Smotomek };

std::string_view to_string(ResampleStrategy strategy);
std::optional<ResampleStrategy> parse_resample_strategy(std::string_view text);

struct ResampleConfig {
  int smote_k = 5;
  int enn_k = 3;
  /// Desired minority/majority row ratio after oversampling.
  double target_ratio = 1.0;
  std::uint64_t seed = 0;
  ResampleStrategy strategy = ResampleStrategy::None;
  /// z-score columns before any distance computation (inverted afterwards).
  bool standardize = true;
  /// ENN may remove minority rows too (whole-set cleaning).
  bool enn_edit_minority = true;
};

/// The k nearest rows to `query` by Euclidean distance, excluding the query
/// itself, nearest first; equal distances resolve to the lower row index.
/// With same_class_only only rows sharing the query's label are eligible.
/// Throws InsufficientRows unless k < eligible row count (query included).
std::vector<Index> knn_indices(const FeatureMatrix& matrix, Index query, int k,
                               bool same_class_only);

/// Original rows followed by synthetic minority rows
/// x_i + u (x_nn - x_i), u ~ U[0,1), x_nn drawn from x_i's k nearest minority
/// neighbours. Adds exactly enough rows to reach config.target_ratio.
/// Throws DegenerateMinority (< 2 minority rows), InsufficientRows
/// (smote_k >= minority size) or InvalidConfig (target below current ratio).
FeatureMatrix smote(const FeatureMatrix& matrix, const ResampleConfig& config);

/// Number of synthetic rows smote() will append.
std::size_t smote_deficit(const FeatureMatrix& matrix, double target_ratio);

/// Cross-class pairs that are each other's single nearest neighbour, as
/// (lower index, higher index), sorted.
std::vector<std::pair<Index, Index>> tomek_links(const FeatureMatrix& matrix);

/// Indices of rows ENN keeps: a row is dropped when fewer than half of its
/// enn_k nearest neighbours share its label. All votes use the unedited matrix.
/// `protect` rows of that label from removal when set.
std::vector<Index> enn_keep(const FeatureMatrix& matrix, int enn_k,
                            std::optional<Label> protect = std::nullopt);
FeatureMatrix enn_filter(const FeatureMatrix& matrix, int enn_k);

struct ResampleStage {
  std::string name;
  std::size_t rows_before = 0;
  std::size_t rows_after = 0;
  std::size_t added = 0;
  std::size_t removed = 0;
  std::size_t humans_after = 0;
  std::size_t bots_after = 0;
};

struct ResampleDiagnostics {
  ResampleStrategy strategy = ResampleStrategy::None;
  std::vector<ResampleStage> stages;
  /// Defaults used because the source reports no value for them.
  std::vector<std::string> assumptions;

  double final_ratio() const;
  std::string to_text() const;
};

struct ResampleResult {
  FeatureMatrix matrix;
  ResampleDiagnostics diagnostics;
};

/// None = identity; Smote; Smotenn = smote then ENN; Smotomek = smote then
/// removal of both endpoints of every Tomek link.
ResampleResult apply_strategy(const FeatureMatrix& matrix, const ResampleConfig& config);

}  // namespace botdetect
