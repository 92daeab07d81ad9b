#pragma once

#include <array>
#include <string>
#include <string_view>
#include <vector>

namespace botdetect {

/// Lowercase word tokens interleaved with angle-bracket tags.
using TokenSequence = std::vector<std::string>;

inline constexpr std::array<std::string_view, 12> kTokenTags = {
    "<hashtag>", "<url>",        "<number>",    "<user>",   "<smile>", "<heart>",
    "<lolface>", "<neutralface>", "<angryface>", "<allcaps>", "<elong>", "<repeat>"};

bool is_tag(std::string_view token);

struct TokenizerOptions {
  /// Emit `<repeat>` after runs of repeated `!`, `?` or `.`; off by default,
  /// in which case a run is kept as a single punctuation token.
  bool tag_repeats = false;
};

/// Twitter-GloVe style preprocessing. Rules, applied per whitespace chunk:
///  - `http://`, `https://`, `www.` prefixes -> `<url>` (trailing punctuation split off)
///  - `@handle` -> `<user>`
///  - `#body` -> `<hashtag>` then the body as an ordinary word
///  - ASCII emoticons and a small table of Unicode emoji -> one of the five face tags
///  - standalone numerals (signed, decimal, `1,000`, `3:45`) -> `<number>`
///  - an all-uppercase alphabetic word of length >= 2 -> lowercase word + `<allcaps>`
///  - a letter repeated more than twice collapses to two, then `<elong>`
///  - everything is lowercased (ASCII case folding)
/// Never fails; unknown symbols pass through.
TokenSequence tokenize(std::string_view text, const TokenizerOptions& options = {});

std::string join_tokens(const TokenSequence& tokens, char separator = ' ');

}  // namespace botdetect
