#pragma once

#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

namespace gifrank {

enum class EmojiMode { kConvertToMeaning, kStrip };

struct NormalizeConfig {
  std::string user_token = "<user>";
  std::string url_token = "<url>";
  std::string number_token = "<number>";
  EmojiMode emoji_mode = EmojiMode::kConvertToMeaning;

  // Throws ValidationError when the special tokens are empty, repeated or
  // contain whitespace.
  void validate() const;
};

/// Emoji sequence -> ":snake_case_meaning:" map with longest-match lookup.
class EmojiLexicon {
 public:
  EmojiLexicon() = default;

  // The bundled snapshot (same content as data/emoji_lexicon.tsv).
  static const EmojiLexicon& builtin();

  // Tab-separated file: emoji sequence, meaning. Lines starting with '#'
  // are comments.
  static EmojiLexicon load(const std::string& path);
  static EmojiLexicon parse(std::string_view tsv);

  void add(std::string emoji, std::string meaning);

  // Byte length of the longest entry starting at text[pos], 0 when none.
  // A trailing U+FE0F variation selector is absorbed into the match.
  std::size_t match(std::string_view text, std::size_t pos, const std::string** meaning = nullptr) const;

  std::size_t size() const { return map_.size(); }
  const std::unordered_map<std::string, std::string>& entries() const { return map_; }

 private:
  std::unordered_map<std::string, std::string> map_;
  std::size_t max_bytes_ = 0;
};

const std::vector<std::pair<std::string, std::string>>& builtin_emoji_entries();

struct TokenizedText {
  std::vector<std::string> tokens;

  std::size_t size() const { return tokens.size(); }
  bool operator==(const TokenizedText&) const = default;
};

std::string normalize(std::string_view raw, const NormalizeConfig& config = {},
                      const EmojiLexicon& lexicon = EmojiLexicon::builtin());

TokenizedText tokenize(std::string_view normalized);

std::string strip_emoji(std::string_view raw, const EmojiLexicon& lexicon = EmojiLexicon::builtin());

std::size_t count_emoji(std::string_view raw, const EmojiLexicon& lexicon = EmojiLexicon::builtin());

TokenizedText make_pair(const TokenizedText& text_tokens, const TokenizedText& reply_tokens,
                        std::string_view sep = "[SEP]");

// normalize + tokenize of both fields joined with the separator; the
// encoder's input.
TokenizedText preprocess_pair(std::string_view text, std::string_view reply,
                              const NormalizeConfig& config = {},
                              const EmojiLexicon& lexicon = EmojiLexicon::builtin());

// Collapse runs of ASCII whitespace to one space and trim both ends.
std::string collapse_whitespace(std::string_view s);

}  // namespace gifrank
