#include "laykit/text.hpp"

#include <array>
#include <cstdint>

namespace laykit::text {

namespace {

struct Decoded {
  char32_t cp;
  std::size_t len;
};

// Minimal UTF-8 decoder. Malformed bytes are consumed one at a time as
// U+FFFD so that tokenization always terminates and spans stay contiguous.
Decoded decode_utf8(std::string_view s, std::size_t i) {
  const auto b0 = static_cast<unsigned char>(s[i]);
  if (b0 < 0x80) return {b0, 1};
  auto cont = [&](std::size_t k) {
    return i + k < s.size() && (static_cast<unsigned char>(s[i + k]) & 0xC0) == 0x80;
  };
  auto at = [&](std::size_t k) { return static_cast<char32_t>(static_cast<unsigned char>(s[i + k]) & 0x3F); };
  if ((b0 & 0xE0) == 0xC0 && cont(1)) {
    return {static_cast<char32_t>((b0 & 0x1F) << 6) | at(1), 2};
  }
  if ((b0 & 0xF0) == 0xE0 && cont(1) && cont(2)) {
    return {static_cast<char32_t>((b0 & 0x0F) << 12) | (at(1) << 6) | at(2), 3};
  }
  if ((b0 & 0xF8) == 0xF0 && cont(1) && cont(2) && cont(3)) {
    return {static_cast<char32_t>((b0 & 0x07) << 18) | (at(1) << 12) | (at(2) << 6) | at(3), 4};
  }
  return {0xFFFD, 1};
}

void append_utf8(std::string& out, char32_t cp) {
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

bool is_space_cp(char32_t c) {
  switch (c) {
    case 0x09: case 0x0A: case 0x0B: case 0x0C: case 0x0D: case 0x20:
    case 0x85: case 0xA0: case 0x1680: case 0x2028: case 0x2029:
    case 0x202F: case 0x205F: case 0x3000:
      return true;
    default:
      return c >= 0x2000 && c <= 0x200A;
  }
}

bool is_digit_cp(char32_t c) { return c >= '0' && c <= '9'; }

// Fixed letter ranges: ASCII, Latin-1 (minus the multiplication and division
// signs), Latin Extended, IPA, Greek, Cyrillic, Latin Extended Additional.
bool is_letter_cp(char32_t c) {
  if (c < 0x80) return (c >= 'A' && c <= 'Z') || (c >= 'a' && c <= 'z');
  if (c >= 0xC0 && c <= 0x24F) return c != 0xD7 && c != 0xF7;
  if (c >= 0x250 && c <= 0x2AF) return true;
  if (c >= 0x370 && c <= 0x3FF) return c != 0x37E && c != 0x387;  // Greek punctuation
  if (c >= 0x400 && c <= 0x4FF) return true;
  if (c >= 0x1E00 && c <= 0x1EFF) return true;
  return false;
}

bool is_upper_cp(char32_t c) {
  if (c >= 'A' && c <= 'Z') return true;
  if (c >= 0xC0 && c <= 0xDE) return c != 0xD7;
  if (c >= 0x391 && c <= 0x3A9) return true;   // Greek capitals
  if (c >= 0x400 && c <= 0x42F) return true;   // Cyrillic capitals
  return false;
}

// ASCII and Latin-1 case folding; everything else passes through unchanged.
char32_t to_lower_cp(char32_t c) {
  if (c >= 'A' && c <= 'Z') return c + 0x20;
  if (c >= 0xC0 && c <= 0xDE && c != 0xD7) return c + 0x20;
  return c;
}

std::string lowercase_utf8(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  std::size_t i = 0;
  while (i < s.size()) {
    const auto [cp, len] = decode_utf8(s, i);
    append_utf8(out, to_lower_cp(cp));
    i += len;
  }
  return out;
}

// Abbreviations whose trailing '.' never ends a sentence. Lowercase;
// matching is case-insensitive and requires a token boundary before the
// abbreviation, so "config." is not shadowed by "fig.".
constexpr std::array<std::string_view, 16> kAbbreviations = {
    "e.g.", "i.e.",  "et al.", "cf.",  "vs.",  "ca.",  "fig.",  "figs.",
    "eq.",  "eqs.",  "ref.",   "refs.", "no.",  "nos.", "dr.",   "prof.",
};

bool ascii_iequals(std::string_view a, std::string_view b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    char ca = a[i], cb = b[i];
    if (ca >= 'A' && ca <= 'Z') ca += 0x20;
    if (cb >= 'A' && cb <= 'Z') cb += 0x20;
    if (ca != cb) return false;
  }
  return true;
}

// True when the text ending at `end` (one past a '.') finishes with a guarded
// abbreviation preceded by a token boundary.
bool ends_with_abbreviation(std::string_view s, std::size_t end) {
  for (const auto abbr : kAbbreviations) {
    if (end < abbr.size()) continue;
    const std::size_t start = end - abbr.size();
    if (!ascii_iequals(s.substr(start, abbr.size()), abbr)) continue;
    if (start == 0) return true;
    const auto prev = static_cast<unsigned char>(s[start - 1]);
    if (prev < 0x80 && !is_letter_cp(prev) && !is_digit_cp(prev)) return true;
  }
  return false;
}

std::string_view trim(std::string_view s) {
  std::size_t b = 0;
  while (b < s.size()) {
    const auto [cp, len] = decode_utf8(s, b);
    if (!is_space_cp(cp)) break;
    b += len;
  }
  std::size_t e = s.size();
  while (e > b) {
    // Walk back one codepoint: find the previous non-continuation byte.
    std::size_t p = e - 1;
    while (p > b && (static_cast<unsigned char>(s[p]) & 0xC0) == 0x80) --p;
    const auto [cp, len] = decode_utf8(s, p);
    if (!is_space_cp(cp) || p + len != e) break;
    e = p;
  }
  return s.substr(b, e - b);
}

}  // namespace

std::vector<TokenSpan> tokenize_spans(std::string_view input) {
  std::vector<TokenSpan> spans;
  std::size_t i = 0;
  std::size_t word_begin = std::string_view::npos;
  auto close_word = [&](std::size_t end) {
    if (word_begin != std::string_view::npos) {
      spans.push_back({word_begin, end, true});
      word_begin = std::string_view::npos;
    }
  };
  while (i < input.size()) {
    const auto [cp, len] = decode_utf8(input, i);
    if (is_space_cp(cp)) {
      close_word(i);
    } else if (is_letter_cp(cp) || is_digit_cp(cp)) {
      if (word_begin == std::string_view::npos) word_begin = i;
    } else {
      close_word(i);
      spans.push_back({i, i + len, false});
    }
    i += len;
  }
  close_word(input.size());
  return spans;
}

std::vector<Token> tokenize(std::string_view input) {
  std::vector<Token> tokens;
  for (const auto& span : tokenize_spans(input)) {
    const auto piece = input.substr(span.begin, span.end - span.begin);
    tokens.push_back({span.is_word ? lowercase_utf8(piece) : std::string(piece), span.is_word});
  }
  return tokens;
}

std::vector<std::string> word_tokens(std::string_view input) {
  std::vector<std::string> words;
  for (const auto& span : tokenize_spans(input)) {
    if (span.is_word) {
      words.push_back(lowercase_utf8(input.substr(span.begin, span.end - span.begin)));
    }
  }
  return words;
}

std::vector<Sentence> split_sentences(std::string_view input) {
  std::vector<Sentence> sentences;
  auto emit = [&](std::size_t begin, std::size_t end) {
    const auto piece = trim(input.substr(begin, end - begin));
    if (piece.empty()) return;
    Sentence s;
    s.text = std::string(piece);
    s.tokens = tokenize(piece);
    s.index = sentences.size();
    sentences.push_back(std::move(s));
  };

  std::size_t start = 0;
  std::size_t i = 0;
  while (i < input.size()) {
    const auto [cp, len] = decode_utf8(input, i);
    if (cp == '.' || cp == '!' || cp == '?') {
      const std::size_t after = i + len;
      // Require at least one whitespace codepoint, then an uppercase letter
      // or digit.
      std::size_t j = after;
      bool saw_space = false;
      while (j < input.size()) {
        const auto [wcp, wlen] = decode_utf8(input, j);
        if (!is_space_cp(wcp)) break;
        saw_space = true;
        j += wlen;
      }
      if (saw_space && j < input.size()) {
        const auto [ncp, nlen] = decode_utf8(input, j);
        (void)nlen;
        const bool starts_sentence = is_upper_cp(ncp) || is_digit_cp(ncp);
        const bool guarded = cp == '.' && ends_with_abbreviation(input, after);
        if (starts_sentence && !guarded) {
          emit(start, after);
          start = j;
          i = j;
          continue;
        }
      }
    }
    i += len;
  }
  emit(start, input.size());
  return sentences;
}

TokenizedDocument text_counts(std::string_view input) {
  TokenizedDocument doc;
  doc.sentences = split_sentences(input);
  doc.sentence_count = doc.sentences.size();
  doc.word_count = count_words(input);
  doc.letter_count = count_letters(input);
  return doc;
}

std::size_t count_words(std::string_view input) {
  std::size_t n = 0;
  for (const auto& span : tokenize_spans(input)) {
    if (span.is_word) ++n;
  }
  return n;
}

std::size_t count_letters(std::string_view input) {
  std::size_t n = 0;
  std::size_t i = 0;
  while (i < input.size()) {
    const auto [cp, len] = decode_utf8(input, i);
    if (is_letter_cp(cp)) ++n;
    i += len;
  }
  return n;
}

}  // namespace laykit::text
