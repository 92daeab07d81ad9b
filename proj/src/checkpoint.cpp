#include "botdetect/checkpoint.hpp"

#include <charconv>
#include <sstream>

#include "botdetect/error.hpp"
#include "botdetect/text_io.hpp"

namespace botdetect {

namespace {

constexpr std::string_view kMagic = "botdetect-model";

std::vector<std::string_view> split_ws(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t' || line[i] == '\r')) ++i;
    const std::size_t start = i;
    while (i < line.size() && line[i] != ' ' && line[i] != '\t' && line[i] != '\r') ++i;
    if (i > start) out.push_back(line.substr(start, i - start));
  }
  return out;
}

template <typename T>
T parse_number(std::string_view text, std::size_t line_no) {
  T value{};
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc{} || ptr != text.data() + text.size()) {
    throw Error(ErrorKind::ParseError,
                "model file line " + std::to_string(line_no) + ": bad number '" + std::string(text) + "'");
  }
  return value;
}

}  // namespace

void StructuredText::set(std::string key, std::string value) {
  for (auto& [k, v] : attributes_) {
    if (k == key) {
      v = std::move(value);
      return;
    }
  }
  attributes_.emplace_back(std::move(key), std::move(value));
}

std::optional<std::string> StructuredText::get(std::string_view key) const {
  for (const auto& [k, v] : attributes_) {
    if (k == key) return v;
  }
  return std::nullopt;
}

const std::string& StructuredText::require(std::string_view key) const {
  for (const auto& [k, v] : attributes_) {
    if (k == key) return v;
  }
  throw Error(ErrorKind::ParseError, "model file lacks key '" + std::string(key) + "'");
}

void StructuredText::set_tensor(std::string name, MatX tensor) {
  for (auto& [n, t] : tensors_) {
    if (n == name) {
      t = std::move(tensor);
      return;
    }
  }
  tensors_.emplace_back(std::move(name), std::move(tensor));
}

const MatX* StructuredText::tensor(std::string_view name) const {
  for (const auto& [n, t] : tensors_) {
    if (n == name) return &t;
  }
  return nullptr;
}

const MatX& StructuredText::require_tensor(std::string_view name) const {
  if (const MatX* t = tensor(name)) return *t;
  throw Error(ErrorKind::ParseError, "model file lacks tensor '" + std::string(name) + "'");
}

std::string StructuredText::to_string() const {
  std::string out;
  out += kMagic;
  out += ' ';
  out += std::to_string(kVersion);
  out += '\n';
  for (const auto& [k, v] : attributes_) {
    out += k;
    out += " = ";
    out += v;
    out += '\n';
  }
  for (const auto& [name, t] : tensors_) {
    out += "tensor " + name + ' ' + std::to_string(t.rows()) + ' ' + std::to_string(t.cols()) + '\n';
    for (Index r = 0; r < t.rows(); ++r) {
      for (Index c = 0; c < t.cols(); ++c) {
        if (c) out += ' ';
        out += format_real(t(r, c));
      }
      out += '\n';
    }
  }
  out += "end\n";
  return out;
}

StructuredText StructuredText::parse(std::string_view content) {
  std::vector<std::string_view> lines;
  std::size_t pos = 0;
  while (pos < content.size()) {
    std::size_t eol = content.find('\n', pos);
    if (eol == std::string_view::npos) eol = content.size();
    lines.push_back(content.substr(pos, eol - pos));
    pos = eol + 1;
  }
  if (lines.empty()) throw Error(ErrorKind::ParseError, "empty model file");
  const auto head = split_ws(lines[0]);
  if (head.size() != 2 || head[0] != kMagic) throw Error(ErrorKind::ParseError, "not a botdetect model file");
  const int version = parse_number<int>(head[1], 1);
  if (version != kVersion) {
    throw Error(ErrorKind::ParseError, "unsupported model file version " + std::to_string(version));
  }

  StructuredText st;
  std::size_t i = 1;
  bool ended = false;
  while (i < lines.size()) {
    const std::string_view line = lines[i];
    const std::size_t line_no = ++i;
    const auto fields = split_ws(line);
    if (fields.empty()) continue;
    if (fields[0] == "end" && fields.size() == 1) {
      ended = true;
      break;
    }
    if (fields[0] == "tensor") {
      if (fields.size() != 4) throw Error(ErrorKind::ParseError, "bad tensor header at line " + std::to_string(line_no));
      const auto rows = parse_number<Index>(fields[2], line_no);
      const auto cols = parse_number<Index>(fields[3], line_no);
      MatX t(rows, cols);
      for (Index r = 0; r < rows; ++r) {
        if (i >= lines.size()) throw Error(ErrorKind::ParseError, "truncated tensor '" + std::string(fields[1]) + "'");
        const auto values = split_ws(lines[i]);
        const std::size_t value_line = ++i;
        if (static_cast<Index>(values.size()) != cols) {
          throw Error(ErrorKind::DimensionMismatch, "tensor '" + std::string(fields[1]) + "' line " +
                                                        std::to_string(value_line) + " has wrong width");
        }
        for (Index c = 0; c < cols; ++c) t(r, c) = parse_number<double>(values[static_cast<std::size_t>(c)], value_line);
      }
      st.set_tensor(std::string(fields[1]), std::move(t));
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) throw Error(ErrorKind::ParseError, "unexpected line " + std::to_string(line_no));
    st.set(trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
  }
  if (!ended) throw Error(ErrorKind::ParseError, "model file is truncated (no 'end')");
  return st;
}

void StructuredText::save(const std::filesystem::path& path) const { write_file(path, to_string()); }

StructuredText StructuredText::load(const std::filesystem::path& path) { return parse(read_file(path)); }

}  // namespace botdetect
