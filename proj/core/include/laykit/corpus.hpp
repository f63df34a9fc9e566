#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "laykit/metrics.hpp"

namespace laykit::corpus {

// One abstract / lay-summary pair. `raw` keeps the original JSON line so that
// passthrough outputs preserve unknown keys byte for byte; it is empty for
// records constructed in code.
struct ParallelRecord {
  std::string id;
  std::string journal;
  std::string source;  // abstract
  std::string target;  // lay summary
  std::string raw;
};

// Canonical JSONL line with keys id, journal, src, tgt; returns `raw`
// unchanged when present.
std::string serialize_record(const ParallelRecord& record);

// JSONL loader: one object per line with string keys id, journal, src, tgt
// (unknown keys tolerated and preserved in `raw`). Rejects malformed lines,
// missing or non-string keys, ids seen before, and src/tgt that are empty
// after trimming; errors name the path and line number.
std::vector<ParallelRecord> load_corpus(const std::filesystem::path& path);

void write_corpus(const std::vector<ParallelRecord>& records, const std::filesystem::path& path);

struct OutlierBounds {
  double sim_low = 0.05;
  double sim_high = 0.95;
  std::size_t len_low = 50;     // word tokens
  std::size_t len_high = 2000;  // word tokens
};

struct DroppedRecord {
  ParallelRecord record;
  std::string reason;  // the violated rule
};

struct FilterResult {
  std::vector<ParallelRecord> kept;
  std::vector<DroppedRecord> dropped;
};

// Lexical similarity is document-level rouge_l(target tokens, source
// tokens).f1. A record is dropped iff similarity falls outside
// [sim_low, sim_high] or either side's word count falls outside
// [len_low, len_high]; dropped records carry the first violated rule.
FilterResult filter_outliers(const std::vector<ParallelRecord>& records,
                             const OutlierBounds& bounds);

struct SplitSpec {
  double train_ratio = 0.8;
  double valid_ratio = 0.1;
  double test_ratio = 0.1;
  std::uint64_t seed = 0;
};

struct SplitResult {
  std::vector<ParallelRecord> train;
  std::vector<ParallelRecord> valid;
  std::vector<ParallelRecord> test;
};

// Deterministic split: Fisher-Yates permutation driven by SplitMix64(seed),
// then consecutive slices. Sizes are floor(n * ratio) per bucket with the
// remainder added to train. Ratios must be non-negative and sum to 1 within
// 1e-4.
SplitResult split_corpus(const std::vector<ParallelRecord>& records, const SplitSpec& spec);

enum class PairKind { kSimplification, kBackground };

std::string_view pair_kind_name(PairKind kind);

struct DerivedPair {
  std::string id;  // parent record id + suffix
  std::string source_text;
  std::string target_text;
  PairKind kind = PairKind::kSimplification;
};

// One pair per matched alignment pair whose source and target sentences both
// have word counts in [min_len, max_len].
std::vector<DerivedPair> derive_simplification_pairs(const ParallelRecord& record,
                                                     double min_score = 0.0,
                                                     std::size_t min_len = 10,
                                                     std::size_t max_len = 150);

// Let pair_n be the boundary_n-th matched pair in target order. The source
// side joins the source sentences strictly before pair_n's source index; the
// target side joins the target sentences before pair_n's target index, where
// "before" is inclusive of the matched sentence itself for boundary_n == 1 and
// strict otherwise. Nothing is returned when fewer than boundary_n matches
// exist or either side is empty. boundary_n must be 1, 2 or 3.
std::optional<DerivedPair> derive_background_pair(const ParallelRecord& record,
                                                  int boundary_n = 2);

struct LabeledSentence {
  std::string sentence;
  int label = 0;  // 0 = source sentence, 1 = target sentence
};

// For every matched pair passing the length filter on both sides, emits the
// source sentence labeled 0 and the target sentence labeled 1.
std::vector<LabeledSentence> derive_plainness_training(
    const std::vector<ParallelRecord>& records, std::size_t min_len = 10,
    std::size_t max_len = 150);

void write_derived_pairs(const std::vector<DerivedPair>& pairs, const std::filesystem::path& path);
void write_plainness_tsv(const std::vector<LabeledSentence>& rows, const std::filesystem::path& path);

struct CorruptionResult {
  std::string corrupted;
  std::string original;
};

// Denoising-pretraining corruption: sentences are permuted by a seeded
// Fisher-Yates shuffle and joined with single spaces, then each word token is
// independently replaced by the literal "<mask>" with probability
// substitution_rate (one next_double() draw per word token, in output order).
// Punctuation and the unmasked text keep their original bytes. Deterministic
// per (text, seed, rate).
CorruptionResult corrupt_for_pretraining(std::string_view input, std::uint64_t seed,
                                         double substitution_rate = 0.15);

struct GroupStats {
  std::size_t record_count = 0;
  double mean_source_words = 0.0;
  double mean_target_words = 0.0;
  // Means over the records whose side has at least one word; absent when no
  // record qualifies.
  std::optional<double> mean_source_coleman_liau;
  std::optional<double> mean_target_coleman_liau;
  std::optional<double> mean_source_familiarity;
  std::optional<double> mean_target_familiarity;
};

struct CorpusStats {
  std::map<std::string, GroupStats> per_journal;
  GroupStats overall;
  // Source vs target readability over per-record Coleman-Liau pairs; absent
  // when fewer than two records qualify or the differences are constant.
  std::optional<metrics::TTestResult> readability_t_test;
};

// Lengths are word-token counts. Familiarity columns are filled only when a
// frequency table is supplied. Throws on an empty corpus.
CorpusStats corpus_statistics(const std::vector<ParallelRecord>& records,
                              const metrics::FrequencyTable* familiarity = nullptr);

std::string stats_to_json(const CorpusStats& stats);
std::string stats_to_csv(const CorpusStats& stats);

}  // namespace laykit::corpus
