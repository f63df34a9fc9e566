#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "laykit/text.hpp"

namespace laykit::metrics {

struct PRF {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

// f1 = 2pr/(p+r), defined as 0 when p+r == 0.
double f_measure(double precision, double recall);

// Longest common subsequence length, O(|a|*|b|) two-row dynamic program.
std::size_t lcs_length(std::span<const std::string> a, std::span<const std::string> b);

// LCS-based precision/recall/F1: precision = lcs/|candidate|,
// recall = lcs/|reference|, each 0 when its denominator is 0.
PRF rouge_l(std::span<const std::string> candidate, std::span<const std::string> reference);
PRF rouge_l(const std::vector<text::Token>& candidate, const std::vector<text::Token>& reference);

// 0.0588*L - 0.296*S - 15.8 with L = 100*letters/words and
// S = 100*sentences/words. Throws std::invalid_argument("empty document")
// when word_count is 0.
double coleman_liau(const text::TokenizedDocument& doc);
double coleman_liau(std::string_view input);

// Immutable document-frequency table. File format: first line "N <doc_count>",
// then one "<token>\t<df>" line per token; the loader rejects df < 1, df > N
// and malformed lines, reporting the offending line number.
class FrequencyTable {
 public:
  FrequencyTable(std::uint64_t doc_count, std::unordered_map<std::string, std::uint64_t> df);

  static FrequencyTable load(const std::filesystem::path& path);
  void save(const std::filesystem::path& path) const;

  std::uint64_t doc_count() const { return doc_count_; }
  // Unseen tokens get df = 1 (maximally unfamiliar).
  std::uint64_t df(const std::string& token) const;
  double idf(const std::string& token) const;  // ln(doc_count / df)

 private:
  std::uint64_t doc_count_;
  std::unordered_map<std::string, std::uint64_t> df_;
};

// Mean idf over the word tokens (non-word tokens ignored). Throws
// std::invalid_argument("empty text") when there is no word token.
double word_familiarity(std::span<const text::Token> tokens, const FrequencyTable& table);

// Token vectors for one text, all of one dimension >= 1, finite components.
struct TokenEmbeddings {
  std::vector<std::vector<double>> vectors;
};

// Greedy-matching similarity: recall is the mean over reference vectors of the
// best cosine against any candidate vector, precision is symmetric, and the
// cosine of a zero vector is 0. Throws on empty inputs, dimension mismatch or
// non-finite components.
PRF bert_score(const TokenEmbeddings& candidate, const TokenEmbeddings& reference);

// kappa = (p_o - p_e) / (1 - p_e); 1.0 when p_e == 1 (which forces p_o == 1).
// Throws on empty or unequal-length inputs.
double cohens_kappa(std::span<const int> a, std::span<const int> b);

// Raters x items matrix of optional ordinal ratings.
struct RatingsMatrix {
  std::vector<std::vector<std::optional<int>>> values;  // values[rater][item]
  int scale_min = 1;
  int scale_max = 4;
};

// Krippendorff's alpha with the ordinal difference metric, computed from the
// coincidence matrix; missing ratings allowed. Items with fewer than two
// ratings contribute nothing. Throws "no pairable values" when no item has two
// ratings, and "no variance" when a single pairable item was rated with one
// value throughout (expected disagreement degenerates). When several pairable
// items all carry one identical value, observed and expected disagreement are
// both zero and the result is 1.0.
double krippendorff_alpha_ordinal(const RatingsMatrix& ratings);

struct TTestResult {
  double t = 0.0;
  double p_two_sided = 1.0;
};

// Paired two-sided t-test: d = a - b, t = mean(d) / (sd(d)/sqrt(n)) with the
// n-1 sample standard deviation; p from the Student-t CDF with n-1 degrees of
// freedom via the regularized incomplete beta function. Throws on n < 2,
// length mismatch, or all-identical differences ("degenerate").
TTestResult paired_t_test(std::span<const double> a, std::span<const double> b);

// I_x(a, b), continued-fraction evaluation (absolute error below 1e-10 over
// the parameter range used by the t-test). Exposed for tests.
double regularized_incomplete_beta(double a, double b, double x);

}  // namespace laykit::metrics
