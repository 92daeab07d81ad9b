#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "botdetect/tokenizer.hpp"
#include "botdetect/types.hpp"

namespace botdetect {

/// Frozen pre-trained word vectors. Out-of-vocabulary tokens map to the
/// mean of all loaded vectors; padding is the zero vector.
class EmbeddingTable {
 public:
  EmbeddingTable() = default;
  EmbeddingTable(std::vector<std::string> tokens, RowMatX vectors);

  Index dimension() const { return vectors_.cols(); }
  Index size() const { return vectors_.rows(); }

  std::optional<Index> index_of(std::string_view token) const;
  const std::vector<std::string>& tokens() const { return tokens_; }
  const RowMatX& vectors() const { return vectors_; }
  const VecX& unknown_vector() const { return unknown_; }
  VecX pad_vector() const { return VecX::Zero(dimension()); }

  /// Content hash over tokens and vector bits; checkpoints record it.
  std::uint64_t fingerprint() const;

 private:
  std::vector<std::string> tokens_;
  std::unordered_map<std::string, Index> index_;
  RowMatX vectors_;
  VecX unknown_;
};

struct GloveLoadOptions {
  /// When set, only these tokens are kept (memory-capped mode).
  const std::unordered_set<std::string>* restrict_to = nullptr;
};

/// Whitespace-separated GloVe text: token followed by `expected_dimension`
/// floats per line, no header. Duplicate tokens keep their first occurrence.
/// Throws DimensionMismatch or ParseError carrying the 1-based line number.
EmbeddingTable load_glove(const std::filesystem::path& path, Index expected_dimension,
                          const GloveLoadOptions& options = {});
EmbeddingTable parse_glove(std::string_view content, Index expected_dimension,
                           const GloveLoadOptions& options = {});

std::string to_glove_text(const EmbeddingTable& table);

/// The `n` most frequent tokens of a corpus; ties broken lexicographically.
std::unordered_set<std::string> most_frequent_tokens(std::span<const TokenSequence> corpus,
                                                     std::size_t n);

/// Random N(0, scale^2) vectors for the given tokens; test fixtures and
/// desk-scale runs without a real GloVe download.
EmbeddingTable make_fixture_table(const std::vector<std::string>& tokens, Index dimension,
                                  std::uint64_t seed, double scale = 0.5);

enum class Truncation { KeepHead, KeepTail };

struct EmbeddedSequence {
  /// max_len x d; rows at and beyond true_length are zero.
  RowMatX matrix;
  Index true_length = 0;
};

struct EmbedOptions {
  Index max_len = 30;
  Truncation truncation = Truncation::KeepHead;
};

EmbeddedSequence embed(const TokenSequence& tokens, const EmbeddingTable& table,
                       const EmbedOptions& options = {});

/// Tokens that survive truncation, aligned with the embedded rows.
TokenSequence embedded_tokens(const TokenSequence& tokens, const EmbedOptions& options);

}  // namespace botdetect
