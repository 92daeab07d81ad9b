#include "botdetect/resample.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "botdetect/error.hpp"
#include "botdetect/rng.hpp"
#include "botdetect/text_io.hpp"

namespace botdetect {

std::string_view to_string(ResampleStrategy strategy) {
  switch (strategy) {
    case ResampleStrategy::None: return "none";
    case ResampleStrategy::Smote: return "smote";
    case ResampleStrategy::Smotenn: return "smotenn";
    case ResampleStrategy::Smotomek: return "smotomek";
  }
  return "none";
}

std::optional<ResampleStrategy> parse_resample_strategy(std::string_view text) {
  for (auto s : {ResampleStrategy::None, ResampleStrategy::Smote, ResampleStrategy::Smotenn,
                 ResampleStrategy::Smotomek}) {
    if (to_string(s) == text) return s;
  }
  return std::nullopt;
}

namespace {

// Squared distances from `query` to every row.
VecX squared_distances(const RowMatX& values, Index query) {
  return (values.rowwise() - values.row(query)).rowwise().squaredNorm();
}

// k nearest among `candidates` (which must not contain the query).
std::vector<Index> nearest(const VecX& dist, std::vector<Index> candidates, std::size_t k) {
  auto closer = [&](Index a, Index b) { return dist[a] < dist[b] || (dist[a] == dist[b] && a < b); };
  if (k < candidates.size()) {
    std::partial_sort(candidates.begin(), candidates.begin() + static_cast<std::ptrdiff_t>(k),
                      candidates.end(), closer);
    candidates.resize(k);
  } else {
    std::sort(candidates.begin(), candidates.end(), closer);
  }
  return candidates;
}

}  // namespace

std::vector<Index> knn_indices(const FeatureMatrix& matrix, Index query, int k,
                               bool same_class_only) {
  if (query < 0 || query >= matrix.rows()) {
    throw Error(ErrorKind::InsufficientRows, "query row out of range");
  }
  std::vector<Index> candidates;
  candidates.reserve(static_cast<std::size_t>(matrix.rows()));
  const Label own = matrix.label(query);
  for (Index r = 0; r < matrix.rows(); ++r) {
    if (r == query) continue;
    if (same_class_only && matrix.label(r) != own) continue;
    candidates.push_back(r);
  }
  if (k < 1 || static_cast<std::size_t>(k) > candidates.size()) {
    throw Error(ErrorKind::InsufficientRows, "k=" + std::to_string(k) + " needs more than " +
                                                 std::to_string(candidates.size() + 1) +
                                                 " eligible rows");
  }
  return nearest(squared_distances(matrix.values(), query), std::move(candidates),
                 static_cast<std::size_t>(k));
}

std::size_t smote_deficit(const FeatureMatrix& matrix, double target_ratio) {
  const Label minority = matrix.minority_label();
  const auto n_min = static_cast<double>(matrix.count(minority));
  const auto n_maj = static_cast<double>(matrix.count(opposite(minority)));
  const double wanted = std::ceil(target_ratio * n_maj - 1e-9);
  return wanted > n_min ? static_cast<std::size_t>(wanted - n_min) : 0;
}

FeatureMatrix smote(const FeatureMatrix& matrix, const ResampleConfig& config) {
  const Label minority = matrix.minority_label();
  const std::size_t n_min = matrix.count(minority);
  const std::size_t n_maj = matrix.count(opposite(minority));
  if (n_min == 0 || n_maj == 0) {
    throw Error(ErrorKind::SingleClass, "SMOTE needs both classes present");
  }
  if (n_min < 2) throw Error(ErrorKind::DegenerateMinority, "minority class has fewer than 2 rows");
  if (config.target_ratio + 1e-12 < static_cast<double>(n_min) / static_cast<double>(n_maj)) {
    throw Error(ErrorKind::InvalidConfig, "target_ratio is below the current minority/majority ratio");
  }
  if (config.smote_k < 1 || static_cast<std::size_t>(config.smote_k) >= n_min) {
    throw Error(ErrorKind::InsufficientRows, "smote_k=" + std::to_string(config.smote_k) +
                                                 " must be below the minority size " +
                                                 std::to_string(n_min));
  }

  const std::size_t deficit = smote_deficit(matrix, config.target_ratio);
  if (deficit == 0) return matrix;

  std::vector<Index> minority_rows;
  for (Index r = 0; r < matrix.rows(); ++r) {
    if (matrix.label(r) == minority) minority_rows.push_back(r);
  }
  std::vector<std::vector<Index>> neighbours(minority_rows.size());

  Rng rng(mix_seed(config.seed, 0x5307E));
  RowMatX synthetic(static_cast<Index>(deficit), matrix.cols());
  for (std::size_t s = 0; s < deficit; ++s) {
    const std::size_t base = rng.uniform_index(minority_rows.size());
    auto& nn = neighbours[base];
    if (nn.empty()) nn = knn_indices(matrix, minority_rows[base], config.smote_k, true);
    const Index partner = nn[rng.uniform_index(nn.size())];
    const double u = rng.uniform();
    const auto xi = matrix.row(minority_rows[base]);
    synthetic.row(static_cast<Index>(s)) = xi + u * (matrix.row(partner) - xi);
  }
  FeatureMatrix extra(std::move(synthetic), matrix.schema(), std::vector<Label>(deficit, minority));
  return matrix.concat(extra);
}

std::vector<std::pair<Index, Index>> tomek_links(const FeatureMatrix& matrix) {
  const Index n = matrix.rows();
  std::vector<std::pair<Index, Index>> links;
  if (n < 2 || matrix.count(Label::Bot) == 0 || matrix.count(Label::Human) == 0) return links;
  std::vector<Index> nn(static_cast<std::size_t>(n));
  for (Index r = 0; r < n; ++r) nn[static_cast<std::size_t>(r)] = knn_indices(matrix, r, 1, false)[0];
  for (Index a = 0; a < n; ++a) {
    const Index b = nn[static_cast<std::size_t>(a)];
    if (a < b && nn[static_cast<std::size_t>(b)] == a && matrix.label(a) != matrix.label(b)) {
      links.emplace_back(a, b);
    }
  }
  return links;
}

std::vector<Index> enn_keep(const FeatureMatrix& matrix, int enn_k, std::optional<Label> protect) {
  const Index n = matrix.rows();
  if (enn_k < 1 || enn_k >= n) {
    throw Error(ErrorKind::InsufficientRows,
                "enn_k=" + std::to_string(enn_k) + " must be below the row count " + std::to_string(n));
  }
  std::vector<Index> keep;
  keep.reserve(static_cast<std::size_t>(n));
  for (Index r = 0; r < n; ++r) {
    const Label own = matrix.label(r);
    if (protect && own == *protect) {
      keep.push_back(r);
      continue;
    }
    int agree = 0;
    for (Index j : knn_indices(matrix, r, enn_k, false)) agree += matrix.label(j) == own ? 1 : 0;
    if (2 * agree >= enn_k) keep.push_back(r);
  }
  return keep;
}

FeatureMatrix enn_filter(const FeatureMatrix& matrix, int enn_k) {
  return matrix.select(enn_keep(matrix, enn_k));
}

double ResampleDiagnostics::final_ratio() const {
  if (stages.empty()) return 0.0;
  const auto& s = stages.back();
  const auto lo = static_cast<double>(std::min(s.humans_after, s.bots_after));
  const auto hi = static_cast<double>(std::max(s.humans_after, s.bots_after));
  return hi > 0 ? lo / hi : 0.0;
}

std::string ResampleDiagnostics::to_text() const {
  std::ostringstream out;
  out << "strategy = " << to_string(strategy) << '\n';
  for (const auto& s : stages) {
    out << "stage." << s.name << " = rows_before " << s.rows_before << ", added " << s.added
        << ", removed " << s.removed << ", rows_after " << s.rows_after << ", human "
        << s.humans_after << ", bot " << s.bots_after << '\n';
  }
  out << "final_minority_ratio = " << format_real(final_ratio()) << '\n';
  for (const auto& a : assumptions) out << "assumption = " << a << '\n';
  return out.str();
}

namespace {

ResampleStage make_stage(std::string name, const FeatureMatrix& before, const FeatureMatrix& after) {
  ResampleStage s;
  s.name = std::move(name);
  s.rows_before = static_cast<std::size_t>(before.rows());
  s.rows_after = static_cast<std::size_t>(after.rows());
  s.added = s.rows_after > s.rows_before ? s.rows_after - s.rows_before : 0;
  s.removed = s.rows_before > s.rows_after ? s.rows_before - s.rows_after : 0;
  s.humans_after = after.count(Label::Human);
  s.bots_after = after.count(Label::Bot);
  return s;
}

}  // namespace

ResampleResult apply_strategy(const FeatureMatrix& matrix, const ResampleConfig& config) {
  ResampleResult result;
  result.diagnostics.strategy = config.strategy;
  if (config.strategy == ResampleStrategy::None) {
    result.matrix = matrix;
    result.diagnostics.stages.push_back(make_stage("none", matrix, matrix));
    return result;
  }
  result.diagnostics.assumptions = {
      "smote_k = " + std::to_string(config.smote_k) + " (canonical SMOTE default; unreported)",
      "enn_k = " + std::to_string(config.enn_k) + " (Wilson editing default; unreported)",
      "target_ratio = " + format_real(config.target_ratio) + " (full balance; unreported)",
      std::string("standardize = ") + (config.standardize ? "true" : "false")};

  // Distances are computed in z-score space; kept original rows are copied
  // from the input untouched and only synthetic rows pass through the inverse map.
  const Standardizer standardizer =
      config.standardize ? Standardizer::fit(matrix.values())
                         : Standardizer(VecX::Zero(matrix.cols()), VecX::Ones(matrix.cols()));
  const FeatureMatrix scaled = matrix.with_values(standardizer.transform(matrix.values()));

  const FeatureMatrix oversampled_scaled = smote(scaled, config);
  const Index n_orig = matrix.rows();
  const Index n_syn = oversampled_scaled.rows() - n_orig;
  FeatureMatrix oversampled = matrix;
  if (n_syn > 0) {
    const RowMatX syn = standardizer.inverse(oversampled_scaled.values().bottomRows(n_syn));
    std::vector<Label> syn_labels(oversampled_scaled.labels().begin() + n_orig,
                                  oversampled_scaled.labels().end());
    oversampled = matrix.concat(FeatureMatrix(syn, matrix.schema(), std::move(syn_labels)));
  }
  result.diagnostics.stages.push_back(make_stage("smote", matrix, oversampled));

  if (config.strategy == ResampleStrategy::Smote) {
    result.matrix = std::move(oversampled);
    return result;
  }

  std::vector<Index> keep;
  if (config.strategy == ResampleStrategy::Smotenn) {
    std::optional<Label> protect;
    if (!config.enn_edit_minority) protect = matrix.minority_label();
    keep = enn_keep(oversampled_scaled, config.enn_k, protect);
  } else {
    const auto links = tomek_links(oversampled_scaled);
    std::vector<char> drop(static_cast<std::size_t>(oversampled_scaled.rows()), 0);
    for (auto [a, b] : links) {
      drop[static_cast<std::size_t>(a)] = 1;
      drop[static_cast<std::size_t>(b)] = 1;
    }
    for (Index r = 0; r < oversampled_scaled.rows(); ++r) {
      if (!drop[static_cast<std::size_t>(r)]) keep.push_back(r);
    }
  }
  result.matrix = oversampled.select(keep);
  result.diagnostics.stages.push_back(
      make_stage(config.strategy == ResampleStrategy::Smotenn ? "enn" : "tomek", oversampled,
                 result.matrix));
  return result;
}

}  // namespace botdetect
