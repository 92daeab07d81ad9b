#include "botdetect/tokenizer.hpp"

#include <algorithm>
#include <optional>

namespace botdetect {

namespace {

struct EmojiEntry {
  std::string_view bytes;
  std::string_view tag;
};

// UTF-8 encodings of the most common emoji, grouped by face class.
constexpr std::array<EmojiEntry, 31> kEmoji = {{
    {"\xF0\x9F\x98\x80", "<smile>"},        // grinning face
    {"\xF0\x9F\x98\x81", "<smile>"},        // beaming face
    {"\xF0\x9F\x98\x83", "<smile>"},        // big eyes
    {"\xF0\x9F\x98\x84", "<smile>"},        // smiling eyes
    {"\xF0\x9F\x98\x89", "<smile>"},        // wink
    {"\xF0\x9F\x98\x8A", "<smile>"},        // blush
    {"\xF0\x9F\x99\x82", "<smile>"},        // slight smile
    {"\xE2\x98\xBA", "<smile>"},            // white smiling face
    {"\xE2\x9D\xA4", "<heart>"},            // heavy black heart
    {"\xE2\x99\xA5", "<heart>"},            // heart suit
    {"\xF0\x9F\x92\x95", "<heart>"},        // two hearts
    {"\xF0\x9F\x92\x96", "<heart>"},        // sparkling heart
    {"\xF0\x9F\x92\x97", "<heart>"},        // growing heart
    {"\xF0\x9F\x98\x8D", "<heart>"},        // heart eyes
    {"\xF0\x9F\x98\x98", "<heart>"},        // blowing a kiss
    {"\xF0\x9F\x98\x82", "<lolface>"},      // tears of joy
    {"\xF0\x9F\xA4\xA3", "<lolface>"},      // rolling on the floor
    {"\xF0\x9F\x98\x86", "<lolface>"},      // squinting laugh
    {"\xF0\x9F\x98\x9B", "<lolface>"},      // tongue
    {"\xF0\x9F\x98\x9C", "<lolface>"},      // winking tongue
    {"\xF0\x9F\x98\x9D", "<lolface>"},      // squinting tongue
    {"\xF0\x9F\x98\x90", "<neutralface>"},  // neutral
    {"\xF0\x9F\x98\x91", "<neutralface>"},  // expressionless
    {"\xF0\x9F\x98\xB6", "<neutralface>"},  // no mouth
    {"\xF0\x9F\x98\x95", "<neutralface>"},  // confused
    {"\xF0\x9F\x98\xA0", "<angryface>"},    // angry
    {"\xF0\x9F\x98\xA1", "<angryface>"},    // pouting
    {"\xF0\x9F\x98\x9E", "<angryface>"},    // disappointed
    {"\xF0\x9F\x98\xA2", "<angryface>"},    // crying
    {"\xF0\x9F\x98\xAD", "<angryface>"},    // loudly crying
    {"\xE2\x98\xB9", "<angryface>"},        // white frowning face
}};

constexpr std::string_view kVariationSelector = "\xEF\xB8\x8F";

bool is_ascii_alpha(char c) { return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z'); }
bool is_ascii_digit(char c) { return c >= '0' && c <= '9'; }
bool is_ascii_alnum(char c) { return is_ascii_alpha(c) || is_ascii_digit(c); }
bool is_upper(char c) { return c >= 'A' && c <= 'Z'; }
bool is_high(char c) { return static_cast<unsigned char>(c) >= 0x80; }
bool is_space(char c) { return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v'; }
char to_lower(char c) { return is_upper(c) ? static_cast<char>(c - 'A' + 'a') : c; }

bool starts_with_ci(std::string_view s, std::size_t at, std::string_view prefix) {
  if (s.size() - at < prefix.size()) return false;
  for (std::size_t i = 0; i < prefix.size(); ++i) {
    if (to_lower(s[at + i]) != prefix[i]) return false;
  }
  return true;
}

std::optional<std::pair<std::size_t, std::string_view>> match_emoji(std::string_view s, std::size_t at) {
  for (const auto& e : kEmoji) {
    if (s.substr(at, e.bytes.size()) == e.bytes) {
      std::size_t len = e.bytes.size();
      if (s.substr(at + len, kVariationSelector.size()) == kVariationSelector) len += kVariationSelector.size();
      return std::pair{len, e.tag};
    }
  }
  return std::nullopt;
}

bool is_word_byte(std::string_view s, std::size_t at) {
  const char c = s[at];
  if (is_ascii_alnum(c) || c == '_') return true;
  return is_high(c) && !match_emoji(s, at);
}

bool is_eyes(char c) { return c == '8' || c == ':' || c == '=' || c == ';'; }
bool is_nose(char c) { return c == '\'' || c == '`' || c == '-'; }

// ASCII emoticons. Returns matched length and tag. An emoticon must not be
// followed by an alphanumeric character; the caller only lets the digit eye
// '8' match at a word boundary.
std::optional<std::pair<std::size_t, std::string_view>> match_emoticon(std::string_view s, std::size_t at) {
  auto closed = [&](std::size_t end) { return end >= s.size() || !is_ascii_alnum(s[end]); };
  auto run = [&](std::size_t from, auto pred) {
    std::size_t j = from;
    while (j < s.size() && pred(s[j])) ++j;
    return j;
  };

  if (s.substr(at, 2) == "<3") {
    if (at + 2 >= s.size() || !is_ascii_digit(s[at + 2])) return std::pair{std::size_t{2}, std::string_view("<heart>")};
  }

  // eyes [nose] mouth
  if (is_eyes(s[at])) {
    std::size_t j = at + 1;
    if (j < s.size() && is_nose(s[j])) ++j;
    if (j < s.size()) {
      const char m = s[j];
      std::size_t end = 0;
      std::string_view tag;
      if (m == ')' || m == 'd' || m == 'D') {
        end = run(j, [](char c) { return c == ')' || c == 'd' || c == 'D'; });
        tag = "<smile>";
      } else if (m == 'p' || m == 'P') {
        end = run(j, [](char c) { return c == 'p' || c == 'P'; });
        tag = "<lolface>";
      } else if (m == '(') {
        end = run(j, [](char c) { return c == '('; });
        tag = "<angryface>";
      } else if (m == '|' || m == '/' || m == 'l' || m == 'L' || m == '*') {
        end = j + 1;
        tag = "<neutralface>";
      }
      if (end > j && closed(end)) return std::pair{end - at, tag};
    }
  }

  // mirrored: mouth [nose] eyes, e.g. "(:" and "):". '8' is excluded as an
  // eye here so that "(8" stays a parenthesised number.
  if (s[at] == '(' || s[at] == ')') {
    const char m = s[at];
    std::size_t j = run(at, [m](char c) { return c == m; });
    if (j < s.size() && is_nose(s[j])) ++j;
    if (j < s.size() && (s[j] == ':' || s[j] == '=' || s[j] == ';') && closed(j + 1)) {
      return std::pair{j + 1 - at, std::string_view(m == '(' ? "<smile>" : "<angryface>")};
    }
  }
  return std::nullopt;
}

// Length of a standalone numeral starting at `at`, or 0.
std::size_t match_number(std::string_view s, std::size_t at) {
  std::size_t j = at;
  if (s[j] == '+' || s[j] == '-') ++j;
  const std::size_t body = j;
  while (j < s.size() && (is_ascii_digit(s[j]) || s[j] == '.' || s[j] == ',' || s[j] == ':')) ++j;
  // Trailing separators are punctuation, not part of the number.
  while (j > body && !is_ascii_digit(s[j - 1])) --j;
  const bool has_digit = std::any_of(s.begin() + static_cast<std::ptrdiff_t>(body),
                                     s.begin() + static_cast<std::ptrdiff_t>(j), is_ascii_digit);
  if (!has_digit) return 0;
  // Leading separators other than a single decimal point make this punctuation.
  if (!is_ascii_digit(s[body]) && !(s[body] == '.' && body + 1 < j && is_ascii_digit(s[body + 1]))) return 0;
  if (j < s.size() && is_word_byte(s, j)) return 0;
  return j - at;
}

std::size_t scan_word(std::string_view s, std::size_t at) {
  std::size_t j = at;
  while (j < s.size()) {
    if (is_word_byte(s, j)) {
      ++j;
    } else if (s[j] == '\'' && j > at && j + 1 < s.size() && is_word_byte(s, j + 1)) {
      ++j;
    } else {
      break;
    }
  }
  return j;
}

void emit_word(std::string_view word, TokenSequence& out) {
  std::size_t letters = 0;
  bool all_upper_alpha = true;
  for (char c : word) {
    if (is_ascii_alpha(c)) {
      ++letters;
      if (!is_upper(c)) all_upper_alpha = false;
    } else if (c != '\'') {
      all_upper_alpha = false;
    }
  }
  const bool allcaps = all_upper_alpha && letters >= 2;

  std::string lowered;
  lowered.reserve(word.size());
  bool elongated = false;
  for (char c : word) {
    const char lc = to_lower(c);
    const std::size_t n = lowered.size();
    if (is_ascii_alpha(lc) && n >= 2 && lowered[n - 1] == lc && lowered[n - 2] == lc) {
      elongated = true;
      continue;
    }
    lowered.push_back(lc);
  }
  out.push_back(std::move(lowered));
  if (allcaps) out.emplace_back("<allcaps>");
  if (elongated) out.emplace_back("<elong>");
}

void tokenize_chunk(std::string_view s, const TokenizerOptions& options, TokenSequence& out) {
  std::size_t i = 0;
  while (i < s.size()) {
    const bool boundary = i == 0 || !is_ascii_alnum(s[i - 1]);
    const char c = s[i];

    if (boundary && (starts_with_ci(s, i, "http://") || starts_with_ci(s, i, "https://") ||
                     starts_with_ci(s, i, "www."))) {
      std::size_t end = s.size();
      while (end > i && std::string_view(".,!?;:)\"'").find(s[end - 1]) != std::string_view::npos) --end;
      out.emplace_back("<url>");
      i = end;
      continue;
    }
    if (c == '@' && boundary && i + 1 < s.size() && (is_ascii_alnum(s[i + 1]) || s[i + 1] == '_')) {
      std::size_t j = i + 1;
      while (j < s.size() && (is_ascii_alnum(s[j]) || s[j] == '_')) ++j;
      out.emplace_back("<user>");
      i = j;
      continue;
    }
    if (c == '#' && boundary && i + 1 < s.size() && is_word_byte(s, i + 1)) {
      const std::size_t end = scan_word(s, i + 1);
      const std::string_view body = s.substr(i + 1, end - i - 1);
      out.emplace_back("<hashtag>");
      if (match_number(body, 0) == body.size()) {
        out.emplace_back("<number>");
      } else {
        emit_word(body, out);
      }
      i = end;
      continue;
    }
    if (boundary || c != '8') {
      if (auto emo = match_emoticon(s, i)) {
        out.emplace_back(emo->second);
        i += emo->first;
        continue;
      }
    }
    if (auto emoji = match_emoji(s, i)) {
      out.emplace_back(emoji->second);
      i += emoji->first;
      continue;
    }
    if (boundary) {
      if (std::size_t n = match_number(s, i)) {
        out.emplace_back("<number>");
        i += n;
        continue;
      }
    }
    if (is_word_byte(s, i)) {
      const std::size_t end = scan_word(s, i);
      emit_word(s.substr(i, end - i), out);
      i = end;
      continue;
    }
    if (c == '!' || c == '?' || c == '.') {
      std::size_t j = i;
      while (j < s.size() && (s[j] == '!' || s[j] == '?' || s[j] == '.')) ++j;
      if (j - i >= 2 && options.tag_repeats) {
        out.emplace_back(1, c);
        out.emplace_back("<repeat>");
      } else {
        out.emplace_back(s.substr(i, j - i));
      }
      i = j;
      continue;
    }
    out.emplace_back(1, c);
    ++i;
  }
}

}  // namespace

bool is_tag(std::string_view token) {
  return std::find(kTokenTags.begin(), kTokenTags.end(), token) != kTokenTags.end();
}

TokenSequence tokenize(std::string_view text, const TokenizerOptions& options) {
  TokenSequence out;
  std::size_t i = 0;
  while (i < text.size()) {
    while (i < text.size() && is_space(text[i])) ++i;
    const std::size_t start = i;
    while (i < text.size() && !is_space(text[i])) ++i;
    if (i > start) tokenize_chunk(text.substr(start, i - start), options, out);
  }
  return out;
}

std::string join_tokens(const TokenSequence& tokens, char separator) {
  std::string out;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (i) out.push_back(separator);
    out += tokens[i];
  }
  return out;
}

}  // namespace botdetect
