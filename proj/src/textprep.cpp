#include "gifrank/textprep.hpp"

#include <algorithm>
#include <cctype>
#include <set>

#include "gifrank/common.hpp"

namespace gifrank {

namespace {

bool is_space(char c) {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\v' || c == '\f';
}

bool is_ascii_punct(char c) {
  return static_cast<unsigned char>(c) < 0x80 && std::ispunct(static_cast<unsigned char>(c));
}

bool is_word_char(char c) {
  return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c == '_';
}

bool is_digit(char c) { return c >= '0' && c <= '9'; }

std::size_t utf8_length(unsigned char lead) {
  if (lead < 0x80) return 1;
  if ((lead >> 5) == 0x6) return 2;
  if ((lead >> 4) == 0xE) return 3;
  if ((lead >> 3) == 0x1E) return 4;
  return 1;
}

char32_t decode(std::string_view s, std::size_t pos, std::size_t len) {
  const auto b = [&](std::size_t i) { return static_cast<unsigned char>(s[pos + i]); };
  switch (len) {
    case 2: return ((b(0) & 0x1F) << 6) | (b(1) & 0x3F);
    case 3: return ((b(0) & 0x0F) << 12) | ((b(1) & 0x3F) << 6) | (b(2) & 0x3F);
    case 4: return ((b(0) & 0x07) << 18) | ((b(1) & 0x3F) << 12) | ((b(2) & 0x3F) << 6) | (b(3) & 0x3F);
    default: return b(0);
  }
}

void encode(char32_t cp, std::string& out) {
  if (cp < 0x80) {
    out.push_back(static_cast<char>(cp));
  } else if (cp < 0x800) {
    out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else if (cp < 0x10000) {
    out.push_back(static_cast<char>(0xE0 | (cp >> 12)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else {
    out.push_back(static_cast<char>(0xF0 | (cp >> 18)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  }
}

// Simple case mapping for the scripts that show up in tweets: ASCII,
// Latin-1, the regular part of Latin Extended-A, Greek and Cyrillic.
char32_t to_lower(char32_t cp) {
  if (cp >= 'A' && cp <= 'Z') return cp + 32;
  if (cp < 0x80) return cp;
  if (cp >= 0xC0 && cp <= 0xDE && cp != 0xD7) return cp + 32;
  if ((cp >= 0x100 && cp <= 0x137) || (cp >= 0x14A && cp <= 0x177)) return cp | 1;
  if (cp >= 0x391 && cp <= 0x3A9 && cp != 0x3A2) return cp + 32;
  if (cp >= 0x410 && cp <= 0x42F) return cp + 32;
  if (cp >= 0x400 && cp <= 0x40F) return cp + 80;
  return cp;
}

std::string lowercase(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  for (std::size_t i = 0; i < s.size();) {
    std::size_t len = std::min(utf8_length(static_cast<unsigned char>(s[i])), s.size() - i);
    if (len == 1) {
      out.push_back(static_cast<char>(to_lower(static_cast<unsigned char>(s[i]))));
    } else {
      encode(to_lower(decode(s, i, len)), out);
    }
    i += len;
  }
  return out;
}

std::vector<std::string_view> split_ws(std::string_view s) {
  std::vector<std::string_view> words;
  std::size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && is_space(s[i])) ++i;
    std::size_t j = i;
    while (j < s.size() && !is_space(s[j])) ++j;
    if (j > i) words.push_back(s.substr(i, j - i));
    i = j;
  }
  return words;
}

// Replace every lexicon emoji with `replacement(meaning)`.
template <typename Fn>
std::string replace_emoji(std::string_view raw, const EmojiLexicon& lexicon, Fn replacement) {
  std::string out;
  out.reserve(raw.size());
  for (std::size_t i = 0; i < raw.size();) {
    const std::string* meaning = nullptr;
    if (std::size_t n = lexicon.match(raw, i, &meaning); n > 0) {
      out += replacement(*meaning);
      i += n;
      continue;
    }
    std::size_t len = std::min(utf8_length(static_cast<unsigned char>(raw[i])), raw.size() - i);
    out.append(raw.substr(i, len));
    i += len;
  }
  return out;
}

bool is_number_core(std::string_view s) {
  std::size_t i = 0;
  while (i < s.size() && is_digit(s[i])) ++i;
  if (i == 0) return false;
  if (i == s.size()) return true;
  if (s[i] != '.' && s[i] != ',') return false;
  std::size_t j = i + 1;
  while (j < s.size() && is_digit(s[j])) ++j;
  return j > i + 1 && j == s.size();
}

// ":name:" with name drawn from the emoji-meaning alphabet.
std::size_t match_meaning(std::string_view w, std::size_t pos) {
  if (w[pos] != ':') return 0;
  std::size_t j = pos + 1;
  while (j < w.size() && (is_word_char(w[j]) || w[j] == '-' || w[j] == '+')) ++j;
  if (j == pos + 1 || j >= w.size() || w[j] != ':') return 0;
  return j - pos + 1;
}

// "<name>" special tokens and "[NAME]" separators.
std::size_t match_bracketed(std::string_view w, std::size_t pos) {
  char close;
  if (w[pos] == '<') {
    close = '>';
  } else if (w[pos] == '[') {
    close = ']';
  } else {
    return 0;
  }
  std::size_t j = pos + 1;
  while (j < w.size() && is_word_char(w[j])) ++j;
  if (j == pos + 1 || j >= w.size() || w[j] != close) return 0;
  return j - pos + 1;
}

bool is_meaning_token(std::string_view w) { return !w.empty() && match_meaning(w, 0) == w.size(); }

std::string normalize_word(std::string_view word, const NormalizeConfig& config) {
  if (word.starts_with("http://") || word.starts_with("https://") || word.starts_with("www.")) {
    return config.url_token;
  }
  std::string w;
  for (std::size_t i = 0; i < word.size();) {
    if (word[i] == '@' && i + 1 < word.size() && is_word_char(word[i + 1])) {
      std::size_t j = i + 1;
      while (j < word.size() && is_word_char(word[j])) ++j;
      w += config.user_token;
      i = j;
    } else {
      w.push_back(word[i++]);
    }
  }
  if (is_meaning_token(w)) return w;

  std::size_t lo = 0, hi = w.size();
  while (lo < hi && is_ascii_punct(w[lo])) ++lo;
  while (hi > lo && is_ascii_punct(w[hi - 1])) --hi;
  if (hi > lo && is_number_core(std::string_view(w).substr(lo, hi - lo))) {
    return w.substr(0, lo) + config.number_token + w.substr(hi);
  }
  return w;
}

void emit_segment(std::string_view seg, std::vector<std::string>& out) {
  std::size_t lo = 0, hi = seg.size();
  while (lo < hi && is_ascii_punct(seg[lo])) ++lo;
  while (hi > lo && is_ascii_punct(seg[hi - 1])) --hi;
  for (std::size_t i = 0; i < lo; ++i) out.emplace_back(1, seg[i]);
  if (hi > lo) out.emplace_back(seg.substr(lo, hi - lo));
  for (std::size_t i = hi; i < seg.size(); ++i) out.emplace_back(1, seg[i]);
}

}  // namespace

std::string collapse_whitespace(std::string_view s) {
  std::string out;
  for (auto w : split_ws(s)) {
    if (!out.empty()) out.push_back(' ');
    out.append(w);
  }
  return out;
}

void NormalizeConfig::validate() const {
  const std::vector<const std::string*> toks = {&user_token, &url_token, &number_token};
  std::set<std::string> seen;
  for (const auto* t : toks) {
    if (t->empty()) throw ValidationError("special tokens must be non-empty");
    if (std::any_of(t->begin(), t->end(), is_space)) {
      throw ValidationError("special token '" + *t + "' contains whitespace");
    }
    if (!seen.insert(*t).second) throw ValidationError("special token '" + *t + "' is repeated");
  }
}

const EmojiLexicon& EmojiLexicon::builtin() {
  static const EmojiLexicon lex = [] {
    EmojiLexicon l;
    for (const auto& [emoji, meaning] : builtin_emoji_entries()) l.add(emoji, meaning);
    return l;
  }();
  return lex;
}

EmojiLexicon EmojiLexicon::parse(std::string_view tsv) {
  EmojiLexicon lex;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos < tsv.size()) {
    std::size_t end = tsv.find('\n', pos);
    if (end == std::string_view::npos) end = tsv.size();
    std::string_view line = tsv.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.empty() || line.front() == '#') continue;
    const std::size_t tab = line.find('\t');
    if (tab == std::string_view::npos || tab == 0 || tab + 1 == line.size()) {
      throw ParseError("emoji lexicon line " + std::to_string(line_no) + ": expected two tab-separated columns");
    }
    lex.add(std::string(line.substr(0, tab)), std::string(line.substr(tab + 1)));
  }
  return lex;
}

EmojiLexicon EmojiLexicon::load(const std::string& path) { return parse(read_file(path)); }

void EmojiLexicon::add(std::string emoji, std::string meaning) {
  if (emoji.empty() || meaning.empty()) throw ValidationError("emoji lexicon entries must be non-empty");
  for (char c : meaning) {
    if (is_space(c) || (c >= 'A' && c <= 'Z')) {
      throw ValidationError("emoji meaning '" + meaning + "' must be lowercase without whitespace");
    }
  }
  max_bytes_ = std::max(max_bytes_, emoji.size());
  map_[std::move(emoji)] = std::move(meaning);
}

std::size_t EmojiLexicon::match(std::string_view text, std::size_t pos, const std::string** meaning) const {
  const std::size_t limit = std::min(max_bytes_, text.size() - pos);
  for (std::size_t n = limit; n > 0; --n) {
    // Only try lengths that end on a code point boundary.
    if (pos + n < text.size() && (static_cast<unsigned char>(text[pos + n]) & 0xC0) == 0x80) continue;
    auto it = map_.find(std::string(text.substr(pos, n)));
    if (it == map_.end()) continue;
    if (meaning) *meaning = &it->second;
    if (text.substr(pos + n).starts_with("\xEF\xB8\x8F")) n += 3;
    return n;
  }
  return 0;
}

std::string normalize(std::string_view raw, const NormalizeConfig& config, const EmojiLexicon& lexicon) {
  std::string s;
  if (config.emoji_mode == EmojiMode::kConvertToMeaning) {
    s = replace_emoji(raw, lexicon, [](const std::string& m) { return " " + m + " "; });
  } else {
    s = replace_emoji(raw, lexicon, [](const std::string&) { return std::string(" "); });
  }
  s = lowercase(s);
  std::string out;
  for (auto word : split_ws(s)) {
    if (!out.empty()) out.push_back(' ');
    out += normalize_word(word, config);
  }
  return out;
}

TokenizedText tokenize(std::string_view normalized) {
  TokenizedText out;
  for (auto word : split_ws(normalized)) {
    std::size_t seg_start = 0;
    for (std::size_t i = 0; i < word.size();) {
      std::size_t n = match_bracketed(word, i);
      if (n == 0 && (i == 0 || !is_word_char(word[i - 1]))) n = match_meaning(word, i);
      if (n == 0) {
        ++i;
        continue;
      }
      emit_segment(word.substr(seg_start, i - seg_start), out.tokens);
      out.tokens.emplace_back(word.substr(i, n));
      i += n;
      seg_start = i;
    }
    emit_segment(word.substr(seg_start), out.tokens);
  }
  return out;
}

std::string strip_emoji(std::string_view raw, const EmojiLexicon& lexicon) {
  return collapse_whitespace(replace_emoji(raw, lexicon, [](const std::string&) { return std::string(" "); }));
}

std::size_t count_emoji(std::string_view raw, const EmojiLexicon& lexicon) {
  std::size_t count = 0;
  replace_emoji(raw, lexicon, [&](const std::string&) {
    ++count;
    return std::string();
  });
  return count;
}

TokenizedText make_pair(const TokenizedText& text_tokens, const TokenizedText& reply_tokens, std::string_view sep) {
  if (sep.empty()) throw ValidationError("make_pair: separator must be non-empty");
  TokenizedText out;
  out.tokens.reserve(text_tokens.size() + reply_tokens.size() + 1);
  out.tokens = text_tokens.tokens;
  out.tokens.emplace_back(sep);
  out.tokens.insert(out.tokens.end(), reply_tokens.tokens.begin(), reply_tokens.tokens.end());
  return out;
}

TokenizedText preprocess_pair(std::string_view text, std::string_view reply, const NormalizeConfig& config,
                              const EmojiLexicon& lexicon) {
  return make_pair(tokenize(normalize(text, config, lexicon)), tokenize(normalize(reply, config, lexicon)));
}

}  // namespace gifrank
