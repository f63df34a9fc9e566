#pragma once

#include <cstddef>
#include <string_view>
#include <vector>

#include "laykit/text.hpp"

namespace laykit::align {

// Dense rows x cols matrix of sentence-pair scores in [0, 1]; entry (i, j)
// scores target sentence j as candidate against source sentence i as
// reference.
struct ScoreMatrix {
  std::size_t rows = 0;  // source sentences
  std::size_t cols = 0;  // target sentences
  std::vector<double> values;  // row-major, rows * cols

  double at(std::size_t i, std::size_t j) const { return values[i * cols + j]; }
  double& at(std::size_t i, std::size_t j) { return values[i * cols + j]; }
};

struct AlignmentPair {
  std::size_t src_index = 0;
  std::size_t tgt_index = 0;
  double score = 0.0;
};

// Matched pairs sorted by src_index, strictly increasing in both coordinates,
// plus per-sentence matched flags (true = matched).
struct AlignmentResult {
  std::vector<AlignmentPair> pairs;
  std::vector<bool> src_labels;
  std::vector<bool> tgt_labels;
};

ScoreMatrix build_score_matrix(const std::vector<text::Sentence>& src,
                               const std::vector<text::Sentence>& tgt);

// Greedy paired sentence search. Over the current half-open rectangle
// [src_begin, src_end) x [tgt_begin, tgt_end), pick the argmax cell (ties:
// smallest source index, then smallest target index), keep it as a pair, and
// recurse on the upper-left rectangle [src_begin, src_max) x [tgt_begin,
// tgt_max) and the lower-right rectangle [src_max+1, src_end) x [tgt_max+1,
// tgt_end). Empty rectangles contribute nothing, so the kept pairs form a
// strictly monotone chain in both coordinates. After the recursion, pairs
// scoring below min_score are discarded and labels are derived from the
// survivors. Throws std::invalid_argument unless min_score is in [0, 1].
AlignmentResult gpss(const ScoreMatrix& matrix, double min_score = 0.0);

// split_sentences on both texts, build_score_matrix, gpss. Pair indexes refer
// to the split outputs.
AlignmentResult align_documents(std::string_view src_text, std::string_view tgt_text,
                                double min_score = 0.0);

}  // namespace laykit::align
