#include "laykit/retrieval.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <functional>
#include <numeric>
#include <stdexcept>
#include <unordered_map>
#include <unordered_set>

#include "laykit/rng.hpp"
#include "laykit/text.hpp"

namespace laykit::retrieval {

namespace {

std::string ascii_lower(std::string_view s) {
  std::string out(s);
  for (char& c : out) {
    if (c >= 'A' && c <= 'Z') c += 0x20;
  }
  return out;
}

const std::unordered_set<std::string>& stopwords() {
  static const std::unordered_set<std::string> kStopwords = {
      "a",    "an",   "and",  "are",   "as",    "at",   "be",    "but",  "by",   "for",
      "from", "has",  "have", "in",    "into",  "is",   "it",    "its",  "of",   "on",
      "or",   "that", "the",  "their", "these", "this", "those", "to",   "was",  "were",
      "which", "with", "we",  "our",   "they",  "not",  "can",   "may",  "such", "than",
  };
  return kStopwords;
}

std::uint64_t fnv1a64(std::string_view s) {
  std::uint64_t hash = 0xcbf29ce484222325ULL;
  for (const char c : s) {
    hash ^= static_cast<unsigned char>(c);
    hash *= 0x100000001b3ULL;
  }
  return hash;
}

// Word tokens of the source, keeping only runs not interrupted by
// punctuation: run_id changes whenever a non-word token intervenes.
struct WordRun {
  std::vector<std::string> tokens;
  std::vector<std::size_t> run_ids;
};

WordRun word_runs(std::string_view source) {
  WordRun out;
  std::size_t run = 0;
  bool previous_was_word = false;
  for (const auto& token : text::tokenize(source)) {
    if (token.is_word) {
      if (!previous_was_word) ++run;
      out.tokens.push_back(token.text);
      out.run_ids.push_back(run);
      previous_was_word = true;
    } else {
      previous_was_word = false;
    }
  }
  return out;
}

void write_u32(std::ofstream& out, std::uint32_t v) {
  unsigned char buf[4];
  for (int i = 0; i < 4; ++i) buf[i] = static_cast<unsigned char>((v >> (8 * i)) & 0xFF);
  out.write(reinterpret_cast<const char*>(buf), 4);
}

void write_u64(std::ofstream& out, std::uint64_t v) {
  unsigned char buf[8];
  for (int i = 0; i < 8; ++i) buf[i] = static_cast<unsigned char>((v >> (8 * i)) & 0xFF);
  out.write(reinterpret_cast<const char*>(buf), 8);
}

std::uint32_t read_u32(std::ifstream& in, const std::filesystem::path& path) {
  unsigned char buf[4];
  if (!in.read(reinterpret_cast<char*>(buf), 4)) {
    throw std::runtime_error("truncated embedding file: " + path.string());
  }
  std::uint32_t v = 0;
  for (int i = 3; i >= 0; --i) v = (v << 8) | buf[i];
  return v;
}

std::uint64_t read_u64(std::ifstream& in, const std::filesystem::path& path) {
  unsigned char buf[8];
  if (!in.read(reinterpret_cast<char*>(buf), 8)) {
    throw std::runtime_error("truncated embedding file: " + path.string());
  }
  std::uint64_t v = 0;
  for (int i = 7; i >= 0; --i) v = (v << 8) | buf[i];
  return v;
}

}  // namespace

std::vector<LexiconEntry> load_lexicon(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open lexicon: " + path.string());
  std::vector<LexiconEntry> entries;
  std::unordered_set<std::string> seen;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto tab = line.find('\t');
    if (tab == std::string::npos || tab == 0 || tab + 1 == line.size()) {
      throw std::runtime_error(path.string() + ":" + std::to_string(lineno) +
                               ": expected \"<entity>\\t<definition>\"");
    }
    LexiconEntry entry{line.substr(0, tab), line.substr(tab + 1)};
    if (!seen.insert(ascii_lower(entry.entity)).second) {
      throw std::runtime_error(path.string() + ":" + std::to_string(lineno) +
                               ": duplicate entity \"" + entry.entity + "\"");
    }
    entries.push_back(std::move(entry));
  }
  return entries;
}

std::vector<LexiconEntry> match_terms(std::string_view source,
                                      const std::vector<LexiconEntry>& lexicon) {
  const auto source_words = word_runs(source);

  // Entities tokenized once; grouped by first token, longest sequences first.
  struct Candidate {
    std::vector<std::string> tokens;
    std::size_t lexicon_pos;
  };
  std::unordered_map<std::string, std::vector<Candidate>> by_first;
  for (std::size_t pos = 0; pos < lexicon.size(); ++pos) {
    auto tokens = text::word_tokens(lexicon[pos].entity);
    if (tokens.empty()) continue;
    by_first[tokens.front()].push_back({std::move(tokens), pos});
  }
  for (auto& [first, candidates] : by_first) {
    std::sort(candidates.begin(), candidates.end(), [](const Candidate& a, const Candidate& b) {
      if (a.tokens.size() != b.tokens.size()) return a.tokens.size() > b.tokens.size();
      return a.lexicon_pos < b.lexicon_pos;
    });
  }

  std::vector<LexiconEntry> matches;
  std::unordered_set<std::size_t> emitted;
  std::size_t i = 0;
  while (i < source_words.tokens.size()) {
    const auto it = by_first.find(source_words.tokens[i]);
    std::size_t advance = 1;
    if (it != by_first.end()) {
      for (const auto& candidate : it->second) {
        const std::size_t len = candidate.tokens.size();
        if (i + len > source_words.tokens.size()) continue;
        bool ok = true;
        for (std::size_t k = 0; k < len && ok; ++k) {
          ok = source_words.tokens[i + k] == candidate.tokens[k] &&
               source_words.run_ids[i + k] == source_words.run_ids[i];
        }
        if (!ok) continue;
        if (emitted.insert(candidate.lexicon_pos).second) {
          matches.push_back(lexicon[candidate.lexicon_pos]);
        }
        advance = len;
        break;  // longest match wins; shorter overlaps suppressed
      }
    }
    i += advance;
  }
  return matches;
}

HashingEmbeddingProvider::HashingEmbeddingProvider(std::size_t dimension)
    : dimension_(dimension) {
  if (dimension_ == 0) throw std::invalid_argument("dimension must be >= 1");
}

std::optional<std::vector<double>> HashingEmbeddingProvider::embed(std::string_view input) const {
  const auto words = text::word_tokens(input);
  if (words.empty()) return std::nullopt;
  std::vector<double> sum(dimension_, 0.0);
  for (const auto& word : words) {
    SplitMix64 rng(fnv1a64(word));
    for (auto& component : sum) component += 2.0 * rng.next_double() - 1.0;
  }
  double norm = 0.0;
  for (const double component : sum) norm += component * component;
  if (norm == 0.0) return std::nullopt;
  norm = std::sqrt(norm);
  for (auto& component : sum) component /= norm;
  return sum;
}

std::vector<std::string> extract_keywords(std::string_view source,
                                          const EmbeddingProvider& provider, std::size_t m,
                                          std::size_t ngram_max) {
  if (m == 0) throw std::invalid_argument("m must be >= 1");
  if (ngram_max == 0) throw std::invalid_argument("ngram_max must be >= 1");

  const auto source_words = word_runs(source);
  struct Candidate {
    std::string phrase;
    std::size_t first_pos;
    std::size_t token_count;
    double similarity = 0.0;
  };
  std::vector<Candidate> candidates;
  std::unordered_set<std::string> seen;
  for (std::size_t i = 0; i < source_words.tokens.size(); ++i) {
    for (std::size_t n = 1; n <= ngram_max && i + n <= source_words.tokens.size(); ++n) {
      if (source_words.run_ids[i + n - 1] != source_words.run_ids[i]) break;
      if (stopwords().contains(source_words.tokens[i]) ||
          stopwords().contains(source_words.tokens[i + n - 1])) {
        continue;
      }
      std::string phrase = source_words.tokens[i];
      for (std::size_t k = 1; k < n; ++k) phrase += " " + source_words.tokens[i + k];
      if (seen.insert(phrase).second) {
        candidates.push_back({std::move(phrase), i, n});
      }
    }
  }
  if (candidates.empty()) return {};

  const auto document_vector = provider.embed(source);
  if (!document_vector.has_value()) {
    throw std::runtime_error("embedding provider failed for document");
  }
  auto cosine = [](const std::vector<double>& a, const std::vector<double>& b) {
    double dot = 0.0, na = 0.0, nb = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
      dot += a[i] * b[i];
      na += a[i] * a[i];
      nb += b[i] * b[i];
    }
    if (na == 0.0 || nb == 0.0) return 0.0;
    return dot / (std::sqrt(na) * std::sqrt(nb));
  };
  for (auto& candidate : candidates) {
    const auto vec = provider.embed(candidate.phrase);
    if (!vec.has_value()) {
      throw std::runtime_error("embedding provider failed for phrase: " + candidate.phrase);
    }
    if (vec->size() != document_vector->size()) {
      throw std::runtime_error("embedding dimension mismatch for phrase: " + candidate.phrase);
    }
    candidate.similarity = cosine(*vec, *document_vector);
  }
  std::sort(candidates.begin(), candidates.end(), [](const Candidate& a, const Candidate& b) {
    if (a.similarity != b.similarity) return a.similarity > b.similarity;
    if (a.first_pos != b.first_pos) return a.first_pos < b.first_pos;
    if (a.token_count != b.token_count) return a.token_count < b.token_count;
    return a.phrase < b.phrase;
  });
  if (candidates.size() > m) candidates.resize(m);

  std::vector<std::string> keywords;
  keywords.reserve(candidates.size());
  for (auto& candidate : candidates) keywords.push_back(std::move(candidate.phrase));
  return keywords;
}

AugmentedSource augment_with_definitions(std::string_view source,
                                         const std::vector<LexiconEntry>& additions,
                                         std::size_t token_budget) {
  const std::size_t source_words = text::count_words(source);
  if (token_budget <= source_words) {
    throw std::invalid_argument("token_budget must exceed the source word count");
  }

  AugmentedSource out;
  out.original = std::string(source);
  out.rendered = out.original;
  out.token_budget = token_budget;

  std::size_t used = source_words;
  for (const auto& addition : additions) {
    const std::string segment = addition.entity + ": " + addition.definition;
    const std::size_t cost = text::count_words(segment);
    if (used + cost > token_budget) break;  // drop whole trailing definitions
    out.rendered += out.additions.empty() ? " | " : " ; ";
    out.rendered += segment;
    out.additions.push_back(addition);
    used += cost;
  }
  return out;
}

EmbeddingIndex EmbeddingIndex::build(
    std::vector<std::pair<std::string, std::vector<float>>> entries) {
  std::size_t dimension = 0;
  std::vector<std::string> ids;
  std::vector<float> values;
  std::unordered_set<std::string> seen;
  ids.reserve(entries.size());
  for (auto& [id, vector] : entries) {
    if (ids.empty()) {
      dimension = vector.size();
      if (dimension == 0) throw std::invalid_argument("vectors must have dimension >= 1");
      values.reserve(entries.size() * dimension);
    }
    if (vector.size() != dimension) {
      throw std::invalid_argument("dimension mismatch for doc \"" + id + "\"");
    }
    for (const float component : vector) {
      if (!std::isfinite(component)) {
        throw std::invalid_argument("non-finite component for doc \"" + id + "\"");
      }
    }
    if (!seen.insert(id).second) {
      throw std::invalid_argument("duplicate doc id \"" + id + "\"");
    }
    values.insert(values.end(), vector.begin(), vector.end());
    ids.push_back(std::move(id));
  }
  return EmbeddingIndex(dimension, std::move(ids), std::move(values));
}

EmbeddingIndex EmbeddingIndex::load(const std::filesystem::path& vectors_path,
                                    const std::filesystem::path& ids_path) {
  std::ifstream in(vectors_path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open embedding file: " + vectors_path.string());
  char magic[4];
  if (!in.read(magic, 4) || std::memcmp(magic, "EMBF", 4) != 0) {
    throw std::runtime_error("bad magic in " + vectors_path.string());
  }
  const auto version = read_u32(in, vectors_path);
  if (version != 1) {
    throw std::runtime_error("unsupported version " + std::to_string(version) + " in " +
                             vectors_path.string());
  }
  const auto dimension = read_u32(in, vectors_path);
  const auto count = read_u64(in, vectors_path);
  if (dimension == 0) throw std::runtime_error("zero dimension in " + vectors_path.string());

  std::ifstream ids_in(ids_path, std::ios::binary);
  if (!ids_in) throw std::runtime_error("cannot open ids file: " + ids_path.string());
  std::vector<std::pair<std::string, std::vector<float>>> entries;
  entries.reserve(count);
  std::string id;
  for (std::uint64_t row = 0; row < count; ++row) {
    if (!std::getline(ids_in, id)) {
      throw std::runtime_error("ids file has fewer lines than vectors: " + ids_path.string());
    }
    if (!id.empty() && id.back() == '\r') id.pop_back();
    std::vector<float> vector(dimension);
    if (!in.read(reinterpret_cast<char*>(vector.data()),
                 static_cast<std::streamsize>(sizeof(float) * dimension))) {
      throw std::runtime_error("truncated embedding file: " + vectors_path.string());
    }
    entries.emplace_back(id, std::move(vector));
  }
  if (std::getline(ids_in, id) && !id.empty()) {
    throw std::runtime_error("ids file has more lines than vectors: " + ids_path.string());
  }
  try {
    return build(std::move(entries));
  } catch (const std::invalid_argument& e) {
    throw std::runtime_error(vectors_path.string() + ": " + e.what());
  }
}

void EmbeddingIndex::save(const std::filesystem::path& vectors_path,
                          const std::filesystem::path& ids_path) const {
  std::ofstream out(vectors_path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write embedding file: " + vectors_path.string());
  out.write("EMBF", 4);
  write_u32(out, 1);
  write_u32(out, static_cast<std::uint32_t>(dimension_));
  write_u64(out, ids_.size());
  out.write(reinterpret_cast<const char*>(values_.data()),
            static_cast<std::streamsize>(sizeof(float) * values_.size()));

  std::ofstream ids_out(ids_path, std::ios::binary);
  if (!ids_out) throw std::runtime_error("cannot write ids file: " + ids_path.string());
  for (const auto& id : ids_) ids_out << id << "\n";
}

std::vector<RetrievalHit> retrieve_top_k(const EmbeddingIndex& index,
                                         std::span<const float> query, std::size_t k) {
  if (index.size() == 0) throw std::invalid_argument("empty index");
  if (query.size() != index.dimension()) throw std::invalid_argument("query dimension mismatch");
  if (k == 0) throw std::invalid_argument("k must be >= 1");

  std::vector<double> scores(index.size());
  for (std::size_t i = 0; i < index.size(); ++i) {
    const auto row = index.vector(i);
    double dot = 0.0;
    for (std::size_t d = 0; d < row.size(); ++d) {
      dot += static_cast<double>(row[d]) * static_cast<double>(query[d]);
    }
    scores[i] = dot;
  }

  std::vector<std::size_t> order(index.size());
  std::iota(order.begin(), order.end(), 0);
  // stable: equal scores keep insertion order
  std::stable_sort(order.begin(), order.end(),
                   [&scores](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
  const std::size_t take = std::min(k, index.size());

  double max_score = scores[order[0]];
  double normalizer = 0.0;
  for (std::size_t r = 0; r < take; ++r) normalizer += std::exp(scores[order[r]] - max_score);

  std::vector<RetrievalHit> hits;
  hits.reserve(take);
  for (std::size_t r = 0; r < take; ++r) {
    const std::size_t i = order[r];
    hits.push_back({index.doc_id(i), scores[i], std::exp(scores[i] - max_score) / normalizer});
  }
  return hits;
}

double rag_sequence_marginalize(std::span<const RetrievalHit> hits,
                                std::span<const double> log_likelihoods) {
  if (hits.empty()) throw std::invalid_argument("no hits");
  if (hits.size() != log_likelihoods.size()) {
    throw std::invalid_argument("hits and scores must be aligned");
  }
  double prior_sum = 0.0;
  std::vector<double> terms;
  terms.reserve(hits.size());
  for (std::size_t i = 0; i < hits.size(); ++i) {
    if (!std::isfinite(log_likelihoods[i])) {
      throw std::invalid_argument("non-finite log-likelihood");
    }
    const double prior = hits[i].prior;
    if (prior < 0.0 || prior > 1.0 + 1e-9) throw std::invalid_argument("prior outside [0, 1]");
    prior_sum += prior;
    if (prior > 0.0) terms.push_back(std::log(prior) + log_likelihoods[i]);
  }
  if (std::fabs(prior_sum - 1.0) > 1e-9) {
    throw std::invalid_argument("priors must sum to 1");
  }
  // Canonical descending order makes the result identical under any
  // permutation of the inputs.
  std::sort(terms.begin(), terms.end(), std::greater<>());
  const double pivot = terms.front();
  double sum = 0.0;
  for (const double term : terms) sum += std::exp(term - pivot);
  return pivot + std::log(sum);
}

}  // namespace laykit::retrieval
