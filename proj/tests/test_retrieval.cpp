#include "doctest.h"

#include <stdexcept>

#include <cmath>
#include <map>
#include <string>
#include <vector>

#include "laykit/retrieval.hpp"
#include "laykit/rng.hpp"
#include "laykit/text.hpp"
#include "oracles.hpp"
#include "support.hpp"

using namespace laykit;
using doctest::Approx;

namespace {

// Test provider with a fixed phrase -> vector mapping.
class MapProvider : public retrieval::EmbeddingProvider {
 public:
  explicit MapProvider(std::map<std::string, std::vector<double>> vectors)
      : vectors_(std::move(vectors)) {}
  std::optional<std::vector<double>> embed(std::string_view input) const override {
    const auto it = vectors_.find(std::string(input));
    if (it == vectors_.end()) return std::nullopt;
    return it->second;
  }

 private:
  std::map<std::string, std::vector<double>> vectors_;
};

retrieval::EmbeddingIndex make_index(const std::vector<std::vector<float>>& vectors) {
  std::vector<std::pair<std::string, std::vector<float>>> entries;
  for (std::size_t i = 0; i < vectors.size(); ++i) {
    entries.emplace_back("doc" + std::to_string(i), vectors[i]);
  }
  return retrieval::EmbeddingIndex::build(std::move(entries));
}

}  // namespace

TEST_SUITE("retrieval") {

TEST_CASE("load_lexicon") {
  testsupport::TempDir dir("lexicon");
  const auto path = dir / "lexicon.tsv";
  testsupport::write_file(path, "zika virus\tA mosquito-borne flavivirus.\nRNA\tRibonucleic acid.\n");
  const auto lexicon = retrieval::load_lexicon(path);
  REQUIRE(lexicon.size() == 2);
  CHECK(lexicon[0].entity == "zika virus");
  CHECK(lexicon[1].definition == "Ribonucleic acid.");

  testsupport::write_file(path, "RNA\tone\nrna\ttwo\n");
  CHECK_THROWS_WITH_AS(retrieval::load_lexicon(path), doctest::Contains("duplicate entity"),
                       std::runtime_error);

  testsupport::write_file(path, "no tab here\n");
  CHECK_THROWS_AS(retrieval::load_lexicon(path), std::runtime_error);
}

TEST_CASE("match_terms") {
  const std::vector<retrieval::LexiconEntry> lexicon = {
      {"zika virus", "def zv"}, {"rna", "def rna"}, {"virus", "def v"}};

  CHECK(retrieval::match_terms("zika virus rna", {}).empty());

  // Longest match beats "virus"; entities come out in first-occurrence order.
  auto matches = retrieval::match_terms("zika virus rna", lexicon);
  REQUIRE(matches.size() == 2);
  CHECK(matches[0].entity == "zika virus");
  CHECK(matches[1].entity == "rna");

  // Matching is case-insensitive and deduplicates repeats.
  matches = retrieval::match_terms("Zika Virus and ZIKA VIRUS again", lexicon);
  REQUIRE(matches.size() == 1);
  CHECK(matches[0].entity == "zika virus");

  // A punctuation token interrupts a multi-word match, but the standalone
  // entity still fires.
  matches = retrieval::match_terms("zika, virus rna", lexicon);
  REQUIRE(matches.size() == 2);
  CHECK(matches[0].entity == "virus");
  CHECK(matches[1].entity == "rna");

  // After consuming "zika virus", the scan resumes past it: "virus" never
  // overlaps a longer match.
  matches = retrieval::match_terms("zika virus virus", lexicon);
  REQUIRE(matches.size() == 2);
  CHECK(matches[0].entity == "zika virus");
  CHECK(matches[1].entity == "virus");
}

TEST_CASE("extract_keywords") {
  // Single candidate is returned regardless of similarity.
  MapProvider lonely({{"zika", {0.0, 1.0}}, {"zika zika", {0.0, 1.0}}});
  CHECK(retrieval::extract_keywords("zika zika", lonely, 3, 1) ==
        std::vector<std::string>{"zika"});

  // Hand cosine: doc -> (1,0); x -> (1,0); y -> (0,1).
  MapProvider simple({{"x y", {1.0, 0.0}}, {"x", {1.0, 0.0}}, {"y", {0.0, 1.0}}});
  CHECK(retrieval::extract_keywords("x y", simple, 1, 1) == std::vector<std::string>{"x"});

  // m larger than the candidate pool: everything, ranked.
  const auto all = retrieval::extract_keywords("x y", simple, 10, 1);
  CHECK(all == std::vector<std::string>{"x", "y"});

  // Provider failure carries the phrase.
  MapProvider partial({{"x y", {1.0, 0.0}}, {"x", {1.0, 0.0}}});
  CHECK_THROWS_WITH_AS(retrieval::extract_keywords("x y", partial, 2, 1),
                       doctest::Contains("failed for phrase: y"), std::runtime_error);

  // Stopword boundaries are filtered out of the candidate pool.
  MapProvider stoppy({{"the virus spread", {1.0, 0.0}},
                      {"virus", {1.0, 0.0}},
                      {"spread", {0.5, 0.5}},
                      {"virus spread", {0.9, 0.1}}});
  const auto kws = retrieval::extract_keywords("the virus spread", stoppy, 10, 2);
  CHECK(kws == std::vector<std::string>{"virus", "virus spread", "spread"});
}

TEST_CASE("extract_keywords is invariant under positive provider rescaling") {
  retrieval::HashingEmbeddingProvider provider(8);
  class Scaled : public retrieval::EmbeddingProvider {
   public:
    Scaled(const retrieval::EmbeddingProvider& inner, double factor)
        : inner_(inner), factor_(factor) {}
    std::optional<std::vector<double>> embed(std::string_view input) const override {
      auto v = inner_.embed(input);
      if (v.has_value()) {
        for (auto& x : *v) x *= factor_;
      }
      return v;
    }

   private:
    const retrieval::EmbeddingProvider& inner_;
    double factor_;
  };
  const std::string doc = "mosquito borne flavivirus infection spreads quickly in humans";
  const auto base = retrieval::extract_keywords(doc, provider);
  const Scaled scaled(provider, 17.0);
  CHECK(retrieval::extract_keywords(doc, scaled) == base);
}

TEST_CASE("augment_with_definitions") {
  const std::vector<retrieval::LexiconEntry> additions = {
      {"zika virus", "A mosquito-borne flavivirus."},
      {"rna", "Ribonucleic acid carrying genetic information."}};

  // No additions: rendered equals the original.
  const auto plain = retrieval::augment_with_definitions("Zika virus found.", {}, 100);
  CHECK(plain.rendered == "Zika virus found.");
  CHECK(plain.additions.empty());

  // Everything fits: both definitions appended verbatim.
  const auto full = retrieval::augment_with_definitions("Zika virus found.", additions, 100);
  CHECK(full.rendered ==
        "Zika virus found. | zika virus: A mosquito-borne flavivirus. ; "
        "rna: Ribonucleic acid carrying genetic information.");
  CHECK(full.additions.size() == 2);

  // Source words 3; each addition costs 6 words. Budget 9 fits only the
  // first.
  const auto truncated = retrieval::augment_with_definitions("Zika virus found.", additions, 9);
  CHECK(truncated.additions.size() == 1);
  CHECK(truncated.rendered == "Zika virus found. | zika virus: A mosquito-borne flavivirus.");
  CHECK(text::count_words(truncated.rendered) <= 9);

  // Budget 4 fits neither: rendered stays the original.
  const auto none = retrieval::augment_with_definitions("Zika virus found.", additions, 4);
  CHECK(none.rendered == "Zika virus found.");

  CHECK_THROWS_AS(retrieval::augment_with_definitions("Zika virus found.", additions, 3),
                  std::invalid_argument);

  // The original is always a byte prefix of the rendered text.
  CHECK(full.rendered.starts_with(full.original));
}

TEST_CASE("embedding index build validation") {
  CHECK(make_index({}).size() == 0);

  const auto index = make_index({{1, 0, 0, 0}, {0, 1, 0, 0}, {0, 0, 1, 0}});
  CHECK(index.size() == 3);
  CHECK(index.dimension() == 4);
  CHECK(index.doc_id(2) == "doc2");

  CHECK_THROWS_WITH_AS(
      retrieval::EmbeddingIndex::build({{"a", {1, 0}}, {"a", {0, 1}}}),
      doctest::Contains("duplicate doc id \"a\""), std::invalid_argument);
  CHECK_THROWS_AS(retrieval::EmbeddingIndex::build({{"a", {1, 0}}, {"b", {1}}}),
                  std::invalid_argument);
  CHECK_THROWS_AS(
      retrieval::EmbeddingIndex::build({{"a", {std::nanf(""), 0.0f}}}),
      std::invalid_argument);
}

TEST_CASE("embedding index binary round trip") {
  testsupport::TempDir dir("index");
  const auto vec_path = dir / "index.embf";
  const auto ids_path = dir / "index.ids";

  SplitMix64 rng(401);
  std::vector<std::pair<std::string, std::vector<float>>> entries;
  for (int i = 0; i < 17; ++i) {
    std::vector<float> v(5);
    for (auto& x : v) x = static_cast<float>(2.0 * rng.next_double() - 1.0);
    entries.emplace_back("doc-" + std::to_string(i), v);
  }
  const auto index = retrieval::EmbeddingIndex::build(entries);
  index.save(vec_path, ids_path);

  const auto loaded = retrieval::EmbeddingIndex::load(vec_path, ids_path);
  REQUIRE(loaded.size() == index.size());
  REQUIRE(loaded.dimension() == index.dimension());
  for (std::size_t i = 0; i < index.size(); ++i) {
    CHECK(loaded.doc_id(i) == index.doc_id(i));
    const auto a = index.vector(i);
    const auto b = loaded.vector(i);
    for (std::size_t d = 0; d < a.size(); ++d) CHECK(a[d] == b[d]);
  }

  // Header checks.
  auto bytes = testsupport::read_file(vec_path);
  CHECK(bytes.substr(0, 4) == "EMBF");
  bytes[0] = 'X';
  testsupport::write_file(vec_path, bytes);
  CHECK_THROWS_WITH_AS(retrieval::EmbeddingIndex::load(vec_path, ids_path),
                       doctest::Contains("bad magic"), std::runtime_error);
}

TEST_CASE("retrieve_top_k basics") {
  const auto orthonormal = make_index({{1, 0, 0}, {0, 1, 0}, {0, 0, 1}});
  const std::vector<float> e2 = {0, 1, 0};
  const auto hits = retrieval::retrieve_top_k(orthonormal, e2, 1);
  REQUIRE(hits.size() == 1);
  CHECK(hits[0].doc_id == "doc1");
  CHECK(hits[0].prior == Approx(1.0).epsilon(1e-12));

  const auto two = make_index({{2, 0}, {1, 1}});
  const std::vector<float> q = {1, 0};
  const auto pair_hits = retrieval::retrieve_top_k(two, q, 2);
  REQUIRE(pair_hits.size() == 2);
  CHECK(pair_hits[0].inner_product == Approx(2.0));
  CHECK(pair_hits[1].inner_product == Approx(1.0));
  CHECK(pair_hits[0].prior == Approx(std::exp(2.0) / (std::exp(2.0) + std::exp(1.0))).epsilon(1e-12));
  CHECK(pair_hits[1].prior == Approx(std::exp(1.0) / (std::exp(2.0) + std::exp(1.0))).epsilon(1e-12));
  CHECK(pair_hits[0].prior == Approx(0.7310585786).epsilon(1e-9));

  // Ties resolve by insertion order; k beyond size returns everything.
  const auto tied = make_index({{1, 0}, {1, 0}, {0, 1}});
  const auto tie_hits = retrieval::retrieve_top_k(tied, q, 10);
  REQUIRE(tie_hits.size() == 3);
  CHECK(tie_hits[0].doc_id == "doc0");
  CHECK(tie_hits[1].doc_id == "doc1");

  CHECK_THROWS_WITH_AS(retrieval::retrieve_top_k(make_index({}), q, 1),
                       doctest::Contains("empty index"), std::invalid_argument);
  CHECK_THROWS_AS(retrieval::retrieve_top_k(two, std::vector<float>{1, 0, 0}, 1),
                  std::invalid_argument);
  CHECK_THROWS_AS(retrieval::retrieve_top_k(two, q, 0), std::invalid_argument);
}

TEST_CASE("retrieve_top_k matches the argsort oracle") {
  SplitMix64 rng(402);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = 1 + rng.next_below(50);
    const std::size_t dim = 1 + rng.next_below(16);
    std::vector<std::vector<float>> vectors(n, std::vector<float>(dim));
    for (auto& v : vectors) {
      for (auto& x : v) x = static_cast<float>(2.0 * rng.next_double() - 1.0);
    }
    std::vector<float> query(dim);
    for (auto& x : query) x = static_cast<float>(2.0 * rng.next_double() - 1.0);
    const std::size_t k = 1 + rng.next_below(n);

    const auto index = make_index(vectors);
    const auto hits = retrieval::retrieve_top_k(index, query, k);
    const auto expected = oracles::mips_reference(vectors, query, k);
    REQUIRE(hits.size() == expected.size());
    double prior_sum = 0.0;
    for (std::size_t r = 0; r < hits.size(); ++r) {
      CHECK(hits[r].doc_id == "doc" + std::to_string(expected[r]));
      prior_sum += hits[r].prior;
    }
    CHECK(prior_sum == Approx(1.0).epsilon(1e-9));
  }
}

TEST_CASE("retrieve_top_k priors are shift invariant") {
  SplitMix64 rng(403);
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t n = 2 + rng.next_below(20);
    const std::size_t dim = 2 + rng.next_below(8);
    std::vector<std::vector<float>> vectors(n, std::vector<float>(dim));
    std::vector<std::vector<float>> shifted(n, std::vector<float>(dim + 1));
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t d = 0; d < dim; ++d) {
        vectors[i][d] = static_cast<float>(2.0 * rng.next_double() - 1.0);
        shifted[i][d] = vectors[i][d];
      }
      shifted[i][dim] = 10.0f;  // adds a constant 10 to every inner product
    }
    std::vector<float> query(dim), shifted_query(dim + 1);
    for (std::size_t d = 0; d < dim; ++d) {
      query[d] = static_cast<float>(2.0 * rng.next_double() - 1.0);
      shifted_query[d] = query[d];
    }
    shifted_query[dim] = 1.0f;

    const auto base_hits = retrieval::retrieve_top_k(make_index(vectors), query, 5);
    const auto shifted_hits = retrieval::retrieve_top_k(make_index(shifted), shifted_query, 5);
    REQUIRE(base_hits.size() == shifted_hits.size());
    for (std::size_t r = 0; r < base_hits.size(); ++r) {
      CHECK(shifted_hits[r].prior == Approx(base_hits[r].prior).epsilon(1e-12));
    }
  }
}

TEST_CASE("rag_sequence_marginalize") {
  using retrieval::RetrievalHit;
  const std::vector<RetrievalHit> one = {{"z", 3.0, 1.0}};
  const std::vector<double> loglik_one = {-2.5};
  CHECK(retrieval::rag_sequence_marginalize(one, loglik_one) == Approx(-2.5).epsilon(1e-15));

  const std::vector<RetrievalHit> half = {{"a", 1.0, 0.5}, {"b", 0.5, 0.5}};
  const std::vector<double> logliks = {std::log(0.2), std::log(0.4)};
  CHECK(retrieval::rag_sequence_marginalize(half, logliks) ==
        Approx(std::log(0.3)).epsilon(1e-13));

  // Exact permutation invariance.
  const std::vector<RetrievalHit> swapped = {{"b", 0.5, 0.5}, {"a", 1.0, 0.5}};
  const std::vector<double> swapped_logliks = {std::log(0.4), std::log(0.2)};
  CHECK(retrieval::rag_sequence_marginalize(half, logliks) ==
        retrieval::rag_sequence_marginalize(swapped, swapped_logliks));

  // Bounded by the extreme likelihoods.
  const double result = retrieval::rag_sequence_marginalize(half, logliks);
  CHECK(result >= std::log(0.2));
  CHECK(result <= std::log(0.4));

  CHECK_THROWS_AS(retrieval::rag_sequence_marginalize(half, loglik_one), std::invalid_argument);
  const std::vector<RetrievalHit> unnormalized = {{"a", 1.0, 0.4}, {"b", 0.5, 0.4}};
  CHECK_THROWS_WITH_AS(retrieval::rag_sequence_marginalize(unnormalized, logliks),
                       doctest::Contains("sum to 1"), std::invalid_argument);
  CHECK_THROWS_AS(retrieval::rag_sequence_marginalize({}, {}), std::invalid_argument);
}

TEST_CASE("hashing provider is deterministic and unit-norm") {
  retrieval::HashingEmbeddingProvider provider(12);
  const auto a = provider.embed("zika virus");
  const auto b = provider.embed("zika virus");
  REQUIRE(a.has_value());
  CHECK(*a == *b);
  double norm = 0.0;
  for (const double x : *a) norm += x * x;
  CHECK(norm == Approx(1.0).epsilon(1e-12));
  CHECK_FALSE(provider.embed(", . !").has_value());

  // Case folding happens before hashing.
  CHECK(*provider.embed("ZIKA Virus") == *a);
}

}  // TEST_SUITE
