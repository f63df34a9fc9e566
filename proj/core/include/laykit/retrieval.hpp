#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace laykit::retrieval {

struct LexiconEntry {
  std::string entity;
  std::string definition;
};

// TSV loader: one "<entity>\t<definition>" per line, UTF-8, LF endings.
// Rejects empty fields and entities that collide after case folding.
std::vector<LexiconEntry> load_lexicon(const std::filesystem::path& path);

// Case-insensitive longest-match scan over the source's word tokens, left to
// right. An entity matches a run of consecutive word tokens with no
// punctuation token in between; after a match the scan resumes past it, so
// overlapping shorter matches are suppressed. Each entity is reported once, in
// first-occurrence order, with its definition.
std::vector<LexiconEntry> match_terms(std::string_view source,
                                      const std::vector<LexiconEntry>& lexicon);

// Supplies a vector for a whole document or for any candidate phrase.
// Returning std::nullopt signals failure for that input.
class EmbeddingProvider {
 public:
  virtual ~EmbeddingProvider() = default;
  virtual std::optional<std::vector<double>> embed(std::string_view input) const = 0;
};

// Deterministic stand-in for a neural encoder: each word token is hashed
// (FNV-1a 64) into a SplitMix64-generated vector with components in [-1, 1),
// token vectors are summed and the result normalized to unit length. Returns
// std::nullopt for inputs without word tokens. Useful wherever keyword
// extraction has to be reproducible without any model.
class HashingEmbeddingProvider : public EmbeddingProvider {
 public:
  explicit HashingEmbeddingProvider(std::size_t dimension = 16);
  std::optional<std::vector<double>> embed(std::string_view input) const override;
  std::size_t dimension() const { return dimension_; }

 private:
  std::size_t dimension_;
};

// Candidate phrases are the distinct word n-grams, n in [1, ngram_max], drawn
// from runs of consecutive word tokens and filtered so that neither boundary
// token is a stopword. Candidates are ranked by cosine similarity between
// their vector and the whole-document vector, ties broken by earlier first
// occurrence, then by fewer tokens; the top m phrases are returned. Throws
// when the provider fails, naming the phrase.
std::vector<std::string> extract_keywords(std::string_view source,
                                          const EmbeddingProvider& provider,
                                          std::size_t m = 3, std::size_t ngram_max = 3);

struct AugmentedSource {
  std::string original;
  std::vector<LexiconEntry> additions;  // the definitions actually rendered
  std::string rendered;
  std::size_t token_budget = 0;
};

// rendered = original + " | " + "entity: definition" segments joined by " ; ".
// Additions are appended in order while the total word-token count stays
// within token_budget; the first one that does not fit stops the rendering, so
// no definition is ever truncated mid-way. Throws std::invalid_argument unless
// token_budget exceeds the source's word count.
AugmentedSource augment_with_definitions(std::string_view source,
                                         const std::vector<LexiconEntry>& additions,
                                         std::size_t token_budget = 1024);

// Immutable store of fixed-dimension float vectors keyed by document id.
// Iteration order is insertion order.
//
// Binary format: magic "EMBF", u32 little-endian version (= 1), u32 dimension,
// u64 count, then count rows of dimension float32 little-endian. Document ids
// live in a sidecar UTF-8 text file, one id per line, same order.
class EmbeddingIndex {
 public:
  static EmbeddingIndex build(std::vector<std::pair<std::string, std::vector<float>>> entries);
  static EmbeddingIndex load(const std::filesystem::path& vectors_path,
                             const std::filesystem::path& ids_path);
  void save(const std::filesystem::path& vectors_path,
            const std::filesystem::path& ids_path) const;

  std::size_t size() const { return ids_.size(); }
  std::size_t dimension() const { return dimension_; }
  const std::string& doc_id(std::size_t i) const { return ids_[i]; }
  std::span<const float> vector(std::size_t i) const {
    return {values_.data() + i * dimension_, dimension_};
  }

 private:
  EmbeddingIndex(std::size_t dimension, std::vector<std::string> ids, std::vector<float> values)
      : dimension_(dimension), ids_(std::move(ids)), values_(std::move(values)) {}

  std::size_t dimension_ = 0;
  std::vector<std::string> ids_;
  std::vector<float> values_;  // row-major
};

struct RetrievalHit {
  std::string doc_id;
  double inner_product = 0.0;
  double prior = 0.0;  // softmax over the returned hits; sums to 1
};

// Exact exhaustive top-k by inner product, descending, ties by insertion
// order. At most size() hits are returned. Priors are the softmax of the
// returned inner products (normalized over the retrieved set only). Throws on
// an empty index, dimension mismatch, or k < 1.
std::vector<RetrievalHit> retrieve_top_k(const EmbeddingIndex& index,
                                         std::span<const float> query, std::size_t k = 5);

// log sum_z prior(z) * exp(log_likelihood(z)), evaluated with log-sum-exp.
// Terms are accumulated in a canonical (sorted) order, so any permutation of
// the aligned (hit, score) pairs produces the identical result. Throws on
// empty or length-mismatched inputs, non-finite likelihoods, or priors that do
// not sum to 1 within 1e-9.
double rag_sequence_marginalize(std::span<const RetrievalHit> hits,
                                std::span<const double> log_likelihoods);

}  // namespace laykit::retrieval
