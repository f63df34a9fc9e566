#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace laykit::text {

// One token of a tokenized string. Word tokens (anything containing a letter
// or digit) are stored lowercased; punctuation tokens keep their original
// bytes and carry is_word = false.
struct Token {
  std::string text;
  bool is_word = false;
};

// Byte range [begin, end) of a token inside the original string, before any
// case folding. Used where the surrounding text must be preserved verbatim
// (in-place masking, term matching against original spans).
struct TokenSpan {
  std::size_t begin = 0;
  std::size_t end = 0;
  bool is_word = false;
};

struct Sentence {
  std::string text;
  std::vector<Token> tokens;  // == tokenize(text)
  std::size_t index = 0;      // zero-based position within the document
};

struct TokenizedDocument {
  std::vector<Sentence> sentences;
  std::size_t word_count = 0;    // tokens with is_word
  std::size_t letter_count = 0;  // alphabetic characters only, digits excluded
  std::size_t sentence_count = 0;
};

// Tokenization rules, applied to UTF-8 input:
//   - word tokens are maximal runs of letters/digits, lowercased;
//   - every other non-whitespace codepoint becomes its own non-word token;
//   - Unicode whitespace separates tokens and is never part of one.
// Letter classification covers ASCII, Latin-1 and the common European script
// blocks; case folding covers ASCII and Latin-1. Both are fixed tables, so the
// output never depends on locale.
std::vector<Token> tokenize(std::string_view input);

// Same segmentation as tokenize() but reported as byte spans into the input.
std::vector<TokenSpan> tokenize_spans(std::string_view input);

// Lowercased word tokens only, punctuation dropped.
std::vector<std::string> word_tokens(std::string_view input);

// Splits on '.', '!' or '?' followed by whitespace and then an uppercase
// letter or a digit. A '.' is not a boundary when the text up to it ends with
// a guarded abbreviation ("e.g.", "i.e.", "et al.", "Fig.", ...). Sentences
// are trimmed substrings of the input, indexed consecutively from 0; only
// whitespace falls between consecutive sentence spans.
std::vector<Sentence> split_sentences(std::string_view input);

TokenizedDocument text_counts(std::string_view input);

std::size_t count_words(std::string_view input);
std::size_t count_letters(std::string_view input);

}  // namespace laykit::text
