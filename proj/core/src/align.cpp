#include "laykit/align.hpp"

#include <algorithm>
#include <stdexcept>

#include "laykit/metrics.hpp"

namespace laykit::align {

namespace {

// Argmax-then-recurse over half-open rectangles. Ties on the score go to the
// smallest source index, then the smallest target index, which the row-major
// scan with a strict '>' provides.
void select_pairs(const ScoreMatrix& matrix, std::size_t src_begin, std::size_t src_end,
                  std::size_t tgt_begin, std::size_t tgt_end, std::vector<AlignmentPair>& out) {
  if (src_begin >= src_end || tgt_begin >= tgt_end) return;
  std::size_t best_i = src_begin;
  std::size_t best_j = tgt_begin;
  double best = -1.0;
  for (std::size_t i = src_begin; i < src_end; ++i) {
    for (std::size_t j = tgt_begin; j < tgt_end; ++j) {
      if (matrix.at(i, j) > best) {
        best = matrix.at(i, j);
        best_i = i;
        best_j = j;
      }
    }
  }
  out.push_back({best_i, best_j, best});
  select_pairs(matrix, src_begin, best_i, tgt_begin, best_j, out);
  select_pairs(matrix, best_i + 1, src_end, best_j + 1, tgt_end, out);
}

}  // namespace

ScoreMatrix build_score_matrix(const std::vector<text::Sentence>& src,
                               const std::vector<text::Sentence>& tgt) {
  ScoreMatrix matrix;
  matrix.rows = src.size();
  matrix.cols = tgt.size();
  matrix.values.assign(matrix.rows * matrix.cols, 0.0);

  // Target sentence is the candidate, source sentence the reference.
  std::vector<std::vector<std::string>> src_tokens(src.size()), tgt_tokens(tgt.size());
  for (std::size_t i = 0; i < src.size(); ++i) {
    for (const auto& t : src[i].tokens) src_tokens[i].push_back(t.text);
  }
  for (std::size_t j = 0; j < tgt.size(); ++j) {
    for (const auto& t : tgt[j].tokens) tgt_tokens[j].push_back(t.text);
  }
  for (std::size_t i = 0; i < matrix.rows; ++i) {
    for (std::size_t j = 0; j < matrix.cols; ++j) {
      matrix.at(i, j) = metrics::rouge_l(std::span<const std::string>(tgt_tokens[j]),
                                         std::span<const std::string>(src_tokens[i]))
                            .f1;
    }
  }
  return matrix;
}

AlignmentResult gpss(const ScoreMatrix& matrix, double min_score) {
  if (min_score < 0.0 || min_score > 1.0) {
    throw std::invalid_argument("min_score must be in [0, 1]");
  }
  std::vector<AlignmentPair> pairs;
  select_pairs(matrix, 0, matrix.rows, 0, matrix.cols, pairs);
  std::erase_if(pairs, [min_score](const AlignmentPair& p) { return p.score < min_score; });
  std::sort(pairs.begin(), pairs.end(),
            [](const AlignmentPair& a, const AlignmentPair& b) { return a.src_index < b.src_index; });

  AlignmentResult result;
  result.pairs = std::move(pairs);
  result.src_labels.assign(matrix.rows, false);
  result.tgt_labels.assign(matrix.cols, false);
  for (const auto& pair : result.pairs) {
    result.src_labels[pair.src_index] = true;
    result.tgt_labels[pair.tgt_index] = true;
  }
  return result;
}

AlignmentResult align_documents(std::string_view src_text, std::string_view tgt_text,
                                double min_score) {
  const auto src = text::split_sentences(src_text);
  const auto tgt = text::split_sentences(tgt_text);
  return gpss(build_score_matrix(src, tgt), min_score);
}

}  // namespace laykit::align
