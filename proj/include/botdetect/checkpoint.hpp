#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "botdetect/types.hpp"

namespace botdetect {

/// Versioned structured text shared by every saved model:
///
///     botdetect-model <version>
///     key = value            (any number, ordered)
///     tensor <name> <rows> <cols>
///     <cols values per line, rows lines, shortest round-trip decimals>
///     end
///
/// Reals are written with shortest round-trip formatting, so save/load is exact
/// and equal content always yields identical bytes.
class StructuredText {
 public:
  static constexpr int kVersion = 1;

  void set(std::string key, std::string value);
  std::optional<std::string> get(std::string_view key) const;
  /// Throws ParseError when the key is absent.
  const std::string& require(std::string_view key) const;

  void set_tensor(std::string name, MatX tensor);
  const MatX* tensor(std::string_view name) const;
  const MatX& require_tensor(std::string_view name) const;

  const std::vector<std::pair<std::string, std::string>>& attributes() const { return attributes_; }
  const std::vector<std::pair<std::string, MatX>>& tensors() const { return tensors_; }

  std::string to_string() const;
  static StructuredText parse(std::string_view content);

  void save(const std::filesystem::path& path) const;
  static StructuredText load(const std::filesystem::path& path);

 private:
  std::vector<std::pair<std::string, std::string>> attributes_;
  std::vector<std::pair<std::string, MatX>> tensors_;
};

}  // namespace botdetect
