#pragma once

#include <string>
#include <vector>

namespace botdetect::testing {

struct TokenizerCase {
  const char* input;
  std::vector<std::string> expected;
  bool tag_repeats = false;
};

// Hand-derived expectations, one rule (or one rule interaction) per case.
inline const std::vector<TokenizerCase>& tokenizer_cases() {
  static const std::vector<TokenizerCase> cases = {
      // allcaps
      {"HAPPY", {"happy", "<allcaps>"}},
      {"OK", {"ok", "<allcaps>"}},
      {"I am here", {"i", "am", "here"}},
      {"A", {"a"}},
      {"I LOVE IT", {"i", "love", "<allcaps>", "it", "<allcaps>"}},
      {"Mixed CASE words", {"mixed", "case", "<allcaps>", "words"}},
      {"I'M", {"i'm", "<allcaps>"}},
      {"Hello World", {"hello", "world"}},
      {"don't", {"don't"}},
      // empty and whitespace
      {"", {}},
      {"   \t\n ", {}},
      // combined example
      {"@bob check https://t.co/x #Wow soooo :) 42",
       {"<user>", "check", "<url>", "<hashtag>", "wow", "soo", "<elong>", "<smile>", "<number>"}},
      // urls
      {"http://example.com", {"<url>"}},
      {"https://t.co/abc123.", {"<url>", "."}},
      {"www.google.com", {"<url>"}},
      {"see HTTPS://X.CO/Y", {"see", "<url>"}},
      {"(https://t.co/x)", {"(", "<url>", ")"}},
      {"www.x.com/path,", {"<url>", ","}},
      // mentions
      {"@user_1 hi", {"<user>", "hi"}},
      {"email@domain.com", {"email", "@", "domain", ".", "com"}},
      {"@", {"@"}},
      {"RT @user: hello", {"rt", "<allcaps>", "<user>", ":", "hello"}},
      // hashtags
      {"#100DaysOfCode", {"<hashtag>", "100daysofcode"}},
      {"#2020", {"<hashtag>", "<number>"}},
      {"#NBA", {"<hashtag>", "nba", "<allcaps>"}},
      {"#yesss", {"<hashtag>", "yess", "<elong>"}},
      {"#Wow!", {"<hashtag>", "wow", "!"}},
      {"#", {"#"}},
      {"a#b", {"a", "#", "b"}},
      // ascii emoticons
      {":-)", {"<smile>"}},
      {":D", {"<smile>"}},
      {";)", {"<smile>"}},
      {"(:", {"<smile>"}},
      {"8)", {"<smile>"}},
      {"x:)", {"x", "<smile>"}},
      {"x8)", {"x8", ")"}},
      {":p", {"<lolface>"}},
      {":P", {"<lolface>"}},
      {":|", {"<neutralface>"}},
      {":(", {"<angryface>"}},
      {":-(", {"<angryface>"}},
      {"):", {"<angryface>"}},
      {"<3", {"<heart>"}},
      {"<3333", {"<", "<number>"}},
      // unicode emoji
      {"\xF0\x9F\x98\x82", {"<lolface>"}},
      {"\xE2\x9D\xA4\xEF\xB8\x8F", {"<heart>"}},
      {"hi\xF0\x9F\x98\x80", {"hi", "<smile>"}},
      {"\xF0\x9F\x9A\x80", {"\xF0\x9F\x9A\x80"}},
      {"caf\xC3\xA9", {"caf\xC3\xA9"}},
      // numbers
      {"42", {"<number>"}},
      {"-3.14", {"<number>"}},
      {"+7", {"<number>"}},
      {"1,000,000", {"<number>"}},
      {"3:45", {"<number>"}},
      {"100.", {"<number>", "."}},
      {"v2", {"v2"}},
      {"2nd", {"2nd"}},
      // elongation
      {"soooo", {"soo", "<elong>"}},
      {"aaa", {"aa", "<elong>"}},
      {"Coooool", {"cool", "<elong>"}},
      {"GOOOAL", {"gooal", "<allcaps>", "<elong>"}},
      {"bookkeeper", {"bookkeeper"}},
      // punctuation runs
      {"wow!!!", {"wow", "!!!"}},
      {"what?!", {"what", "?!"}},
      {"...", {"..."}},
      {"wow!!!", {"wow", "!", "<repeat>"}, true},
  };
  return cases;
}

}  // namespace botdetect::testing
