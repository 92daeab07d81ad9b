#include "botdetect/embedding.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstring>
#include <map>
#include <sstream>

#include "botdetect/error.hpp"
#include "botdetect/rng.hpp"
#include "botdetect/text_io.hpp"

namespace botdetect {

EmbeddingTable::EmbeddingTable(std::vector<std::string> tokens, RowMatX vectors)
    : tokens_(std::move(tokens)), vectors_(std::move(vectors)) {
  if (static_cast<Index>(tokens_.size()) != vectors_.rows()) {
    throw Error(ErrorKind::DimensionMismatch, "token count differs from vector count");
  }
  if (vectors_.cols() <= 0) throw Error(ErrorKind::DimensionMismatch, "embedding dimension must be positive");
  if (!vectors_.allFinite()) throw Error(ErrorKind::ParseError, "embedding contains non-finite values");
  index_.reserve(tokens_.size());
  for (std::size_t i = 0; i < tokens_.size(); ++i) {
    if (!index_.emplace(tokens_[i], static_cast<Index>(i)).second) {
      throw Error(ErrorKind::ParseError, "duplicate token '" + tokens_[i] + "'");
    }
  }
  unknown_ = vectors_.rows() > 0 ? VecX(vectors_.colwise().mean().transpose())
                                 : VecX::Zero(vectors_.cols());
}

std::optional<Index> EmbeddingTable::index_of(std::string_view token) const {
  auto it = index_.find(std::string(token));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

std::uint64_t EmbeddingTable::fingerprint() const {
  std::uint64_t h = fnv1a(std::to_string(dimension()));
  for (Index r = 0; r < size(); ++r) {
    h = fnv1a(tokens_[static_cast<std::size_t>(r)], h);
    h = fnv1a(std::string_view("\0", 1), h);
    for (Index c = 0; c < dimension(); ++c) {
      const double v = vectors_(r, c);
      char bytes[sizeof(double)];
      std::memcpy(bytes, &v, sizeof(double));
      h = fnv1a(std::string_view(bytes, sizeof(double)), h);
    }
  }
  return h;
}

EmbeddingTable parse_glove(std::string_view content, Index expected_dimension,
                           const GloveLoadOptions& options) {
  if (expected_dimension <= 0) throw Error(ErrorKind::InvalidConfig, "embedding dimension must be positive");
  std::vector<std::string> tokens;
  std::vector<double> values;
  std::unordered_set<std::string> seen;
  std::vector<std::string_view> fields;

  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos < content.size()) {
    std::size_t eol = content.find('\n', pos);
    if (eol == std::string_view::npos) eol = content.size();
    std::string_view line = content.substr(pos, eol - pos);
    pos = eol + 1;
    ++line_no;

    fields.clear();
    std::size_t i = 0;
    while (i < line.size()) {
      while (i < line.size() && (line[i] == ' ' || line[i] == '\t' || line[i] == '\r')) ++i;
      const std::size_t start = i;
      while (i < line.size() && line[i] != ' ' && line[i] != '\t' && line[i] != '\r') ++i;
      if (i > start) fields.push_back(line.substr(start, i - start));
    }
    if (fields.empty()) continue;
    if (static_cast<Index>(fields.size()) != expected_dimension + 1) {
      throw Error(ErrorKind::DimensionMismatch,
                  "line " + std::to_string(line_no) + ": expected " +
                      std::to_string(expected_dimension) + " values, found " +
                      std::to_string(fields.size() - 1));
    }
    std::string token(fields[0]);
    if (options.restrict_to && !options.restrict_to->contains(token)) continue;
    if (!seen.insert(token).second) continue;
    for (std::size_t f = 1; f < fields.size(); ++f) {
      double v = 0.0;
      const auto* first = fields[f].data();
      const auto* last = first + fields[f].size();
      auto [ptr, ec] = std::from_chars(first, last, v);
      if (ec != std::errc{} || ptr != last || !std::isfinite(v)) {
        throw Error(ErrorKind::ParseError, "line " + std::to_string(line_no) + ": bad number '" +
                                               std::string(fields[f]) + "'");
      }
      values.push_back(v);
    }
    tokens.push_back(std::move(token));
  }

  RowMatX vectors(static_cast<Index>(tokens.size()), expected_dimension);
  if (!values.empty()) {
    vectors = Eigen::Map<const RowMatX>(values.data(), static_cast<Index>(tokens.size()), expected_dimension);
  }
  return EmbeddingTable(std::move(tokens), std::move(vectors));
}

EmbeddingTable load_glove(const std::filesystem::path& path, Index expected_dimension,
                          const GloveLoadOptions& options) {
  return parse_glove(read_file(path), expected_dimension, options);
}

std::string to_glove_text(const EmbeddingTable& table) {
  std::string out;
  for (Index r = 0; r < table.size(); ++r) {
    out += table.tokens()[static_cast<std::size_t>(r)];
    for (Index c = 0; c < table.dimension(); ++c) {
      out.push_back(' ');
      out += format_real(table.vectors()(r, c));
    }
    out.push_back('\n');
  }
  return out;
}

std::unordered_set<std::string> most_frequent_tokens(std::span<const TokenSequence> corpus,
                                                     std::size_t n) {
  std::map<std::string, std::size_t> counts;
  for (const auto& seq : corpus) {
    for (const auto& tok : seq) ++counts[tok];
  }
  std::vector<std::pair<std::string, std::size_t>> ranked(counts.begin(), counts.end());
  std::stable_sort(ranked.begin(), ranked.end(),
                   [](const auto& a, const auto& b) { return a.second > b.second; });
  std::unordered_set<std::string> out;
  for (std::size_t i = 0; i < ranked.size() && i < n; ++i) out.insert(ranked[i].first);
  return out;
}

EmbeddingTable make_fixture_table(const std::vector<std::string>& tokens, Index dimension,
                                  std::uint64_t seed, double scale) {
  Rng rng(seed);
  RowMatX vectors(static_cast<Index>(tokens.size()), dimension);
  for (Index r = 0; r < vectors.rows(); ++r) {
    for (Index c = 0; c < dimension; ++c) vectors(r, c) = scale * rng.normal();
  }
  return EmbeddingTable(tokens, std::move(vectors));
}

EmbeddedSequence embed(const TokenSequence& tokens, const EmbeddingTable& table,
                       const EmbedOptions& options) {
  if (options.max_len < 1) throw Error(ErrorKind::InvalidConfig, "max_len must be >= 1");
  const TokenSequence kept = embedded_tokens(tokens, options);
  EmbeddedSequence out;
  out.true_length = static_cast<Index>(kept.size());
  out.matrix = RowMatX::Zero(options.max_len, table.dimension());
  for (Index t = 0; t < out.true_length; ++t) {
    if (auto idx = table.index_of(kept[static_cast<std::size_t>(t)])) {
      out.matrix.row(t) = table.vectors().row(*idx);
    } else {
      out.matrix.row(t) = table.unknown_vector().transpose();
    }
  }
  return out;
}

TokenSequence embedded_tokens(const TokenSequence& tokens, const EmbedOptions& options) {
  const auto max_len = static_cast<std::size_t>(std::max<Index>(options.max_len, 0));
  if (tokens.size() <= max_len) return tokens;
  if (options.truncation == Truncation::KeepHead) {
    return TokenSequence(tokens.begin(), tokens.begin() + static_cast<std::ptrdiff_t>(max_len));
  }
  return TokenSequence(tokens.end() - static_cast<std::ptrdiff_t>(max_len), tokens.end());
}

}  // namespace botdetect
