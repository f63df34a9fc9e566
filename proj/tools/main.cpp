#include <chrono>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "laykit/align.hpp"
#include "laykit/corpus.hpp"
#include "laykit/metrics.hpp"
#include "laykit/retrieval.hpp"
#include "laykit/text.hpp"
#include "laykit/version.hpp"

namespace {

using laykit::align::AlignmentResult;
using ordered_json = nlohmann::ordered_json;
namespace fs = std::filesystem;

// Flag-value problems detected after parsing; mapped to exit code 1 like
// CLI11's own errors. Everything else that throws is a data error (exit 2).
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

class ManifestWriter {
 public:
  ManifestWriter(std::string subcommand, ordered_json parameters)
      : start_(std::chrono::steady_clock::now()),
        subcommand_(std::move(subcommand)),
        parameters_(std::move(parameters)) {}

  void add_input(const fs::path& path) { inputs_.push_back(path.string()); }
  void add_output(const fs::path& path) { outputs_.push_back(path.string()); }
  void set_seed(std::uint64_t seed) { seed_ = seed; }

  // Serialized next to the outputs; wall_time_ms is the only field allowed
  // to differ between identical runs.
  void write(const fs::path& path) const {
    const auto elapsed = std::chrono::duration_cast<std::chrono::milliseconds>(
        std::chrono::steady_clock::now() - start_);
    ordered_json manifest;
    manifest["subcommand"] = subcommand_;
    manifest["parameters"] = parameters_;
    manifest["inputs"] = inputs_;
    manifest["outputs"] = outputs_;
    if (seed_.has_value()) {
      manifest["seed"] = *seed_;
    } else {
      manifest["seed"] = nullptr;
    }
    manifest["version"] = laykit::kVersion;
    manifest["wall_time_ms"] = elapsed.count();
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write manifest: " + path.string());
    out << manifest.dump(2) << "\n";
  }

 private:
  std::chrono::steady_clock::time_point start_;
  std::string subcommand_;
  ordered_json parameters_;
  std::vector<std::string> inputs_;
  std::vector<std::string> outputs_;
  std::optional<std::uint64_t> seed_;
};

std::ofstream open_output(const fs::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write: " + path.string());
  return out;
}

ordered_json alignment_to_json(const std::string& id, const AlignmentResult& alignment) {
  ordered_json pairs = ordered_json::array();
  for (const auto& pair : alignment.pairs) {
    pairs.push_back({{"src", pair.src_index}, {"tgt", pair.tgt_index}, {"score", pair.score}});
  }
  ordered_json obj;
  obj["id"] = id;
  obj["pairs"] = pairs;
  obj["src_labels"] = alignment.src_labels;
  obj["tgt_labels"] = alignment.tgt_labels;
  return obj;
}

// ---------------------------------------------------------------------------
// align

struct AlignArgs {
  std::string corpus;
  std::string out;
  double min_score = 0.0;
};

void run_align(const AlignArgs& args) {
  ManifestWriter manifest("align", {{"min_score", args.min_score}});
  manifest.add_input(args.corpus);
  manifest.add_output(args.out);

  const auto records = laykit::corpus::load_corpus(args.corpus);
  auto out = open_output(args.out);
  for (const auto& record : records) {
    const auto alignment =
        laykit::align::align_documents(record.source, record.target, args.min_score);
    out << alignment_to_json(record.id, alignment).dump() << "\n";
  }
  manifest.write(args.out + ".manifest.json");
  std::cout << "aligned records: " << records.size() << "\n";
}

// ---------------------------------------------------------------------------
// derive

struct DeriveArgs {
  std::string corpus;
  std::string out_dir;
  std::string kind;
  int boundary = 2;
  std::size_t min_len = 10;
  std::size_t max_len = 150;
  double min_score = 0.0;
};

void run_derive(const DeriveArgs& args) {
  ManifestWriter manifest("derive", {{"kind", args.kind},
                                     {"boundary", args.boundary},
                                     {"min_len", args.min_len},
                                     {"max_len", args.max_len},
                                     {"min_score", args.min_score}});
  manifest.add_input(args.corpus);
  const auto records = laykit::corpus::load_corpus(args.corpus);
  fs::create_directories(args.out_dir);
  const fs::path out_dir(args.out_dir);

  if (args.kind == "simplification") {
    std::vector<laykit::corpus::DerivedPair> pairs;
    for (const auto& record : records) {
      auto derived = laykit::corpus::derive_simplification_pairs(record, args.min_score,
                                                                 args.min_len, args.max_len);
      pairs.insert(pairs.end(), std::make_move_iterator(derived.begin()),
                   std::make_move_iterator(derived.end()));
    }
    const auto out = out_dir / "simplification.jsonl";
    laykit::corpus::write_derived_pairs(pairs, out);
    manifest.add_output(out);
    manifest.write(out_dir / "simplification.manifest.json");
    std::cout << "simplification pairs: " << pairs.size() << "\n";
  } else if (args.kind == "background") {
    std::vector<laykit::corpus::DerivedPair> pairs;
    for (const auto& record : records) {
      auto derived = laykit::corpus::derive_background_pair(record, args.boundary);
      if (derived.has_value()) pairs.push_back(std::move(*derived));
    }
    const auto out = out_dir / "background.jsonl";
    laykit::corpus::write_derived_pairs(pairs, out);
    manifest.add_output(out);
    manifest.write(out_dir / "background.manifest.json");
    std::cout << "background pairs: " << pairs.size() << "\n";
  } else {
    const auto rows =
        laykit::corpus::derive_plainness_training(records, args.min_len, args.max_len);
    const auto out = out_dir / "plainness.tsv";
    laykit::corpus::write_plainness_tsv(rows, out);
    manifest.add_output(out);
    manifest.write(out_dir / "plainness.manifest.json");
    std::size_t zeros = 0;
    for (const auto& row : rows) {
      if (row.label == 0) ++zeros;
    }
    std::cout << "plainness sentences: " << rows.size() << " (label 0: " << zeros
              << ", label 1: " << rows.size() - zeros << ")\n";
  }
}

// ---------------------------------------------------------------------------
// metrics

struct MetricsArgs {
  std::string pairs;
  std::string out;
  std::string familiarity_table;
  std::string embeddings;
};

struct PairRow {
  std::string id;
  std::string src;
  std::string tgt;
};

std::vector<PairRow> load_pairs(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open pairs file: " + path.string());
  std::vector<PairRow> rows;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    ordered_json obj;
    try {
      obj = ordered_json::parse(line);
    } catch (const ordered_json::parse_error& e) {
      throw std::runtime_error(path.string() + ":" + std::to_string(lineno) +
                               ": malformed JSON: " + e.what());
    }
    if (!obj.contains("src") || !obj.contains("tgt") || !obj["src"].is_string() ||
        !obj["tgt"].is_string()) {
      throw std::runtime_error(path.string() + ":" + std::to_string(lineno) +
                               ": expected string keys \"src\" and \"tgt\"");
    }
    PairRow row;
    row.id = obj.contains("id") && obj["id"].is_string() ? obj["id"].get<std::string>()
                                                         : "pair-" + std::to_string(rows.size());
    row.src = obj["src"].get<std::string>();
    row.tgt = obj["tgt"].get<std::string>();
    rows.push_back(std::move(row));
  }
  return rows;
}

laykit::metrics::TokenEmbeddings parse_embeddings(const ordered_json& array,
                                                  const std::string& context) {
  if (!array.is_array() || array.empty()) {
    throw std::runtime_error(context + ": expected a non-empty array of vectors");
  }
  laykit::metrics::TokenEmbeddings out;
  for (const auto& vec : array) {
    if (!vec.is_array()) throw std::runtime_error(context + ": expected vector rows");
    out.vectors.push_back(vec.get<std::vector<double>>());
  }
  return out;
}

void run_metrics(const MetricsArgs& args) {
  ordered_json params;
  params["familiarity_table"] =
      args.familiarity_table.empty() ? ordered_json(nullptr) : ordered_json(args.familiarity_table);
  params["embeddings"] =
      args.embeddings.empty() ? ordered_json(nullptr) : ordered_json(args.embeddings);
  ManifestWriter manifest("metrics", params);
  manifest.add_input(args.pairs);
  manifest.add_output(args.out);

  const auto rows = load_pairs(args.pairs);

  std::optional<laykit::metrics::FrequencyTable> table;
  if (!args.familiarity_table.empty()) {
    table = laykit::metrics::FrequencyTable::load(args.familiarity_table);
    manifest.add_input(args.familiarity_table);
  }

  ordered_json embeddings_doc;
  if (!args.embeddings.empty()) {
    std::ifstream in(args.embeddings, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open embeddings sidecar: " + args.embeddings);
    in >> embeddings_doc;
    if (!embeddings_doc.is_array() || embeddings_doc.size() != rows.size()) {
      throw std::runtime_error("embeddings sidecar must hold one entry per pair");
    }
    manifest.add_input(args.embeddings);
  }

  ordered_json pair_reports = ordered_json::array();
  double rouge_p_sum = 0, rouge_r_sum = 0, rouge_f_sum = 0;
  double cl_src_sum = 0, cl_tgt_sum = 0;
  std::size_t cl_src_n = 0, cl_tgt_n = 0;
  double fam_src_sum = 0, fam_tgt_sum = 0;
  std::size_t fam_src_n = 0, fam_tgt_n = 0;
  double bert_f_sum = 0;
  std::size_t bert_n = 0;

  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto& row = rows[i];
    const auto src_tokens = laykit::text::tokenize(row.src);
    const auto tgt_tokens = laykit::text::tokenize(row.tgt);

    // Target side is the candidate throughout, source the reference.
    const auto rouge = laykit::metrics::rouge_l(tgt_tokens, src_tokens);
    rouge_p_sum += rouge.precision;
    rouge_r_sum += rouge.recall;
    rouge_f_sum += rouge.f1;

    ordered_json report;
    report["id"] = row.id;
    report["rouge_l"] = {
        {"precision", rouge.precision}, {"recall", rouge.recall}, {"f1", rouge.f1}};

    auto coleman = [](const std::string& side) -> std::optional<double> {
      const auto doc = laykit::text::text_counts(side);
      if (doc.word_count == 0) return std::nullopt;
      return laykit::metrics::coleman_liau(doc);
    };
    const auto cl_src = coleman(row.src);
    const auto cl_tgt = coleman(row.tgt);
    report["coleman_liau_src"] = cl_src.has_value() ? ordered_json(*cl_src) : ordered_json(nullptr);
    report["coleman_liau_tgt"] = cl_tgt.has_value() ? ordered_json(*cl_tgt) : ordered_json(nullptr);
    if (cl_src.has_value()) {
      cl_src_sum += *cl_src;
      ++cl_src_n;
    }
    if (cl_tgt.has_value()) {
      cl_tgt_sum += *cl_tgt;
      ++cl_tgt_n;
    }

    if (table.has_value()) {
      auto familiarity =
          [&](const std::vector<laykit::text::Token>& tokens) -> std::optional<double> {
        try {
          return laykit::metrics::word_familiarity(tokens, *table);
        } catch (const std::invalid_argument&) {
          return std::nullopt;
        }
      };
      const auto fam_src = familiarity(src_tokens);
      const auto fam_tgt = familiarity(tgt_tokens);
      report["familiarity_src"] =
          fam_src.has_value() ? ordered_json(*fam_src) : ordered_json(nullptr);
      report["familiarity_tgt"] =
          fam_tgt.has_value() ? ordered_json(*fam_tgt) : ordered_json(nullptr);
      if (fam_src.has_value()) {
        fam_src_sum += *fam_src;
        ++fam_src_n;
      }
      if (fam_tgt.has_value()) {
        fam_tgt_sum += *fam_tgt;
        ++fam_tgt_n;
      }
    }

    if (!args.embeddings.empty()) {
      const auto& entry = embeddings_doc[i];
      if (!entry.contains("src") || !entry.contains("tgt")) {
        throw std::runtime_error("embeddings sidecar entry " + std::to_string(i) +
                                 " must hold \"src\" and \"tgt\" vector arrays");
      }
      const auto cand = parse_embeddings(entry["tgt"], "embeddings entry " + std::to_string(i));
      const auto ref = parse_embeddings(entry["src"], "embeddings entry " + std::to_string(i));
      const auto bert = laykit::metrics::bert_score(cand, ref);
      report["bert_score"] = {
          {"precision", bert.precision}, {"recall", bert.recall}, {"f1", bert.f1}};
      bert_f_sum += bert.f1;
      ++bert_n;
    }

    pair_reports.push_back(std::move(report));
  }

  const auto n = static_cast<double>(rows.size());
  ordered_json mean = ordered_json::object();
  if (!rows.empty()) {
    mean["rouge_l_precision"] = rouge_p_sum / n;
    mean["rouge_l_recall"] = rouge_r_sum / n;
    mean["rouge_l_f1"] = rouge_f_sum / n;
    mean["coleman_liau_src"] =
        cl_src_n > 0 ? ordered_json(cl_src_sum / static_cast<double>(cl_src_n))
                     : ordered_json(nullptr);
    mean["coleman_liau_tgt"] =
        cl_tgt_n > 0 ? ordered_json(cl_tgt_sum / static_cast<double>(cl_tgt_n))
                     : ordered_json(nullptr);
    if (table.has_value()) {
      mean["familiarity_src"] =
          fam_src_n > 0 ? ordered_json(fam_src_sum / static_cast<double>(fam_src_n))
                        : ordered_json(nullptr);
      mean["familiarity_tgt"] =
          fam_tgt_n > 0 ? ordered_json(fam_tgt_sum / static_cast<double>(fam_tgt_n))
                        : ordered_json(nullptr);
    }
    if (bert_n > 0) mean["bert_score_f1"] = bert_f_sum / static_cast<double>(bert_n);
  }

  ordered_json doc;
  doc["pairs"] = pair_reports;
  doc["mean"] = mean;
  auto out = open_output(args.out);
  out << doc.dump(2) << "\n";
  manifest.write(args.out + ".manifest.json");
  std::cout << "scored pairs: " << rows.size() << "\n";
}

// ---------------------------------------------------------------------------
// stats

struct StatsArgs {
  std::string corpus;
  std::string out;
  std::string familiarity_table;
  bool csv = false;
};

void run_stats(const StatsArgs& args) {
  ordered_json params;
  params["csv"] = args.csv;
  params["familiarity_table"] =
      args.familiarity_table.empty() ? ordered_json(nullptr) : ordered_json(args.familiarity_table);
  ManifestWriter manifest("stats", params);
  manifest.add_input(args.corpus);
  manifest.add_output(args.out);

  const auto records = laykit::corpus::load_corpus(args.corpus);
  std::optional<laykit::metrics::FrequencyTable> table;
  if (!args.familiarity_table.empty()) {
    table = laykit::metrics::FrequencyTable::load(args.familiarity_table);
    manifest.add_input(args.familiarity_table);
  }
  const auto stats =
      laykit::corpus::corpus_statistics(records, table.has_value() ? &*table : nullptr);
  auto out = open_output(args.out);
  out << (args.csv ? laykit::corpus::stats_to_csv(stats) : laykit::corpus::stats_to_json(stats));
  manifest.write(args.out + ".manifest.json");
  std::cout << "records: " << records.size() << ", journals: " << stats.per_journal.size() << "\n";
}

// ---------------------------------------------------------------------------
// split

struct SplitArgs {
  std::string corpus;
  std::string out_dir;
  double train = 0.8;
  double valid = 0.1;
  double test = 0.1;
  std::uint64_t seed = 0;
};

void run_split(const SplitArgs& args) {
  if (std::fabs(args.train + args.valid + args.test - 1.0) > 1e-4) {
    throw UsageError("--train, --valid and --test must sum to 1");
  }
  ManifestWriter manifest(
      "split", {{"train", args.train}, {"valid", args.valid}, {"test", args.test}});
  manifest.set_seed(args.seed);
  manifest.add_input(args.corpus);

  const auto records = laykit::corpus::load_corpus(args.corpus);
  laykit::corpus::SplitSpec spec{args.train, args.valid, args.test, args.seed};
  const auto split = laykit::corpus::split_corpus(records, spec);

  fs::create_directories(args.out_dir);
  const fs::path out_dir(args.out_dir);
  laykit::corpus::write_corpus(split.train, out_dir / "train.jsonl");
  laykit::corpus::write_corpus(split.valid, out_dir / "valid.jsonl");
  laykit::corpus::write_corpus(split.test, out_dir / "test.jsonl");
  manifest.add_output(out_dir / "train.jsonl");
  manifest.add_output(out_dir / "valid.jsonl");
  manifest.add_output(out_dir / "test.jsonl");
  manifest.write(out_dir / "manifest.json");
  std::cout << "train: " << split.train.size() << ", valid: " << split.valid.size()
            << ", test: " << split.test.size() << "\n";
}

// ---------------------------------------------------------------------------
// corrupt

struct CorruptArgs {
  std::string input;
  std::string out;
  double rate = 0.15;
  std::uint64_t seed = 0;
};

void run_corrupt(const CorruptArgs& args) {
  ManifestWriter manifest("corrupt", {{"rate", args.rate}});
  manifest.set_seed(args.seed);
  manifest.add_input(args.input);
  manifest.add_output(args.out);

  std::ifstream in(args.input, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open input: " + args.input);
  auto out = open_output(args.out);
  std::string line;
  std::size_t index = 0;
  // Document k draws from seed + k so every line has its own stream.
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto result = laykit::corpus::corrupt_for_pretraining(line, args.seed + index, args.rate);
    ordered_json obj;
    obj["id"] = "doc-" + std::to_string(index);
    obj["kind"] = "corruption";
    obj["src"] = result.corrupted;
    obj["tgt"] = result.original;
    out << obj.dump() << "\n";
    ++index;
  }
  manifest.write(args.out + ".manifest.json");
  std::cout << "corrupted documents: " << index << "\n";
}

// ---------------------------------------------------------------------------
// augment

struct AugmentArgs {
  std::string corpus;
  std::string out;
  std::string lexicon;
  std::string mode = "match";
  std::size_t budget = 1024;
  std::size_t keywords = 3;
  std::size_t dim = 16;
};

void run_augment(const AugmentArgs& args) {
  ManifestWriter manifest("augment", {{"mode", args.mode},
                                      {"budget", args.budget},
                                      {"keywords", args.keywords},
                                      {"dim", args.dim}});
  manifest.add_input(args.corpus);
  manifest.add_input(args.lexicon);
  manifest.add_output(args.out);

  const auto records = laykit::corpus::load_corpus(args.corpus);
  const auto lexicon = laykit::retrieval::load_lexicon(args.lexicon);

  std::optional<laykit::retrieval::HashingEmbeddingProvider> provider;
  std::unordered_map<std::string, const laykit::retrieval::LexiconEntry*> by_entity;
  if (args.mode == "keywords") {
    provider.emplace(args.dim);
    for (const auto& entry : lexicon) {
      std::string key = entry.entity;
      for (char& c : key) {
        if (c >= 'A' && c <= 'Z') c += 0x20;
      }
      by_entity[key] = &entry;
    }
  }

  auto out = open_output(args.out);
  for (const auto& record : records) {
    std::vector<laykit::retrieval::LexiconEntry> additions;
    if (args.mode == "match") {
      additions = laykit::retrieval::match_terms(record.source, lexicon);
    } else {
      const auto keywords =
          laykit::retrieval::extract_keywords(record.source, *provider, args.keywords);
      for (const auto& keyword : keywords) {
        const auto it = by_entity.find(keyword);
        if (it != by_entity.end()) additions.push_back(*it->second);
      }
    }
    laykit::retrieval::AugmentedSource augmented;
    try {
      augmented =
          laykit::retrieval::augment_with_definitions(record.source, additions, args.budget);
    } catch (const std::invalid_argument& e) {
      throw std::runtime_error("record \"" + record.id + "\": " + e.what());
    }
    ordered_json obj;
    obj["id"] = record.id;
    obj["journal"] = record.journal;
    obj["src"] = augmented.rendered;
    obj["tgt"] = record.target;
    out << obj.dump() << "\n";
  }
  manifest.write(args.out + ".manifest.json");
  std::cout << "augmented records: " << records.size() << "\n";
}

// ---------------------------------------------------------------------------
// retrieve

struct RetrieveArgs {
  std::string index;
  std::string ids;
  std::string out;
  std::string query_file;
  std::string query_json;
  std::string loglik_json;
  std::size_t k = 5;
};

void run_retrieve(const RetrieveArgs& args) {
  if (args.query_file.empty() == args.query_json.empty()) {
    throw UsageError("exactly one of --query-file and --query-json is required");
  }
  ordered_json params;
  params["k"] = args.k;
  params["query_file"] =
      args.query_file.empty() ? ordered_json(nullptr) : ordered_json(args.query_file);
  ManifestWriter manifest("retrieve", params);
  manifest.add_input(args.index);
  manifest.add_input(args.ids);
  manifest.add_output(args.out);

  const auto index = laykit::retrieval::EmbeddingIndex::load(args.index, args.ids);

  std::vector<float> query;
  if (!args.query_file.empty()) {
    const auto query_index =
        laykit::retrieval::EmbeddingIndex::load(args.query_file, args.query_file + ".ids");
    if (query_index.size() != 1) {
      throw std::runtime_error("query file must hold exactly one vector");
    }
    const auto row = query_index.vector(0);
    query.assign(row.begin(), row.end());
    manifest.add_input(args.query_file);
  } else {
    const auto parsed = ordered_json::parse(args.query_json, nullptr, false);
    if (parsed.is_discarded() || !parsed.is_array() || parsed.empty()) {
      throw UsageError("--query-json must be a non-empty JSON array of numbers");
    }
    for (const auto& value : parsed) {
      if (!value.is_number()) throw UsageError("--query-json must contain numbers only");
      query.push_back(value.get<float>());
    }
  }

  const auto hits = laykit::retrieval::retrieve_top_k(index, query, args.k);

  ordered_json hits_json = ordered_json::array();
  for (const auto& hit : hits) {
    hits_json.push_back(
        {{"doc_id", hit.doc_id}, {"inner_product", hit.inner_product}, {"prior", hit.prior}});
  }
  ordered_json doc;
  doc["hits"] = hits_json;
  if (!args.loglik_json.empty()) {
    const auto parsed = ordered_json::parse(args.loglik_json, nullptr, false);
    if (parsed.is_discarded() || !parsed.is_array()) {
      throw UsageError("--loglik must be a JSON array of numbers");
    }
    const auto logliks = parsed.get<std::vector<double>>();
    doc["marginal_log_likelihood"] = laykit::retrieval::rag_sequence_marginalize(hits, logliks);
  }
  auto out = open_output(args.out);
  out << doc.dump(2) << "\n";
  manifest.write(args.out + ".manifest.json");
  std::cout << "hits: " << hits.size() << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Parallel-corpus alignment, derivation, metrics and retrieval toolkit"};
  app.set_version_flag("--version", std::string(laykit::kVersion));
  app.require_subcommand(1);

  AlignArgs align_args;
  auto* align_cmd = app.add_subcommand(
      "align", "Align source/target sentences per record and write alignment JSONL");
  align_cmd->add_option("corpus", align_args.corpus, "Corpus JSONL")->required();
  align_cmd->add_option("-o,--out", align_args.out, "Output alignment JSONL")->required();
  align_cmd->add_option("--min-score", align_args.min_score,
                        "Discard pairs scoring below this value")
      ->check(CLI::Range(0.0, 1.0))
      ->capture_default_str();
  align_cmd->callback([&] { run_align(align_args); });

  DeriveArgs derive_args;
  auto* derive_cmd =
      app.add_subcommand("derive", "Derive simplification/background/plainness datasets");
  derive_cmd->add_option("corpus", derive_args.corpus, "Corpus JSONL")->required();
  derive_cmd->add_option("-o,--out-dir", derive_args.out_dir, "Output directory")->required();
  derive_cmd->add_option("--kind", derive_args.kind, "Dataset kind")
      ->required()
      ->check(CLI::IsMember({"simplification", "background", "plainness"}));
  derive_cmd->add_option("--boundary", derive_args.boundary,
                         "Matched pair ending the background section (background kind)")
      ->check(CLI::Range(1, 3))
      ->capture_default_str();
  derive_cmd->add_option("--min-len", derive_args.min_len, "Minimum sentence words")
      ->capture_default_str();
  derive_cmd->add_option("--max-len", derive_args.max_len, "Maximum sentence words")
      ->capture_default_str();
  derive_cmd->add_option("--min-score", derive_args.min_score,
                         "Alignment score floor (simplification kind)")
      ->check(CLI::Range(0.0, 1.0))
      ->capture_default_str();
  derive_cmd->callback([&] { run_derive(derive_args); });

  MetricsArgs metrics_args;
  auto* metrics_cmd = app.add_subcommand(
      "metrics", "Score src/tgt pairs: ROUGE-L, readability, familiarity, BERTScore");
  metrics_cmd->add_option("pairs", metrics_args.pairs, "Pairs JSONL with src and tgt")->required();
  metrics_cmd->add_option("-o,--out", metrics_args.out, "Output report JSON")->required();
  metrics_cmd->add_option("--familiarity-table", metrics_args.familiarity_table,
                          "Document-frequency table file");
  metrics_cmd->add_option("--embeddings", metrics_args.embeddings,
                          "Per-pair token-embedding sidecar JSON");
  metrics_cmd->callback([&] { run_metrics(metrics_args); });

  StatsArgs stats_args;
  auto* stats_cmd = app.add_subcommand("stats", "Per-journal and overall corpus statistics");
  stats_cmd->add_option("corpus", stats_args.corpus, "Corpus JSONL")->required();
  stats_cmd->add_option("-o,--out", stats_args.out, "Output report")->required();
  stats_cmd->add_flag("--csv", stats_args.csv, "Emit one CSV row per journal instead of JSON");
  stats_cmd->add_option("--familiarity-table", stats_args.familiarity_table,
                        "Document-frequency table file");
  stats_cmd->callback([&] { run_stats(stats_args); });

  SplitArgs split_args;
  auto* split_cmd = app.add_subcommand("split", "Deterministic train/valid/test split");
  split_cmd->add_option("corpus", split_args.corpus, "Corpus JSONL")->required();
  split_cmd->add_option("-o,--out-dir", split_args.out_dir, "Output directory")->required();
  split_cmd->add_option("--train", split_args.train, "Train ratio")
      ->check(CLI::Range(0.0, 1.0))
      ->capture_default_str();
  split_cmd->add_option("--valid", split_args.valid, "Validation ratio")
      ->check(CLI::Range(0.0, 1.0))
      ->capture_default_str();
  split_cmd->add_option("--test", split_args.test, "Test ratio")
      ->check(CLI::Range(0.0, 1.0))
      ->capture_default_str();
  split_cmd->add_option("--seed", split_args.seed, "Shuffle seed")->capture_default_str();
  split_cmd->callback([&] { run_split(split_args); });

  CorruptArgs corrupt_args;
  auto* corrupt_cmd = app.add_subcommand(
      "corrupt", "Sentence-shuffle and mask documents for denoising pretraining");
  corrupt_cmd->add_option("input", corrupt_args.input, "Text file, one document per line")
      ->required();
  corrupt_cmd->add_option("-o,--out", corrupt_args.out, "Output JSONL")->required();
  corrupt_cmd->add_option("--rate", corrupt_args.rate, "Word masking probability")
      ->check(CLI::Range(0.0, 1.0))
      ->capture_default_str();
  corrupt_cmd->add_option("--seed", corrupt_args.seed, "Base seed; document k uses seed + k")
      ->capture_default_str();
  corrupt_cmd->callback([&] { run_corrupt(corrupt_args); });

  AugmentArgs augment_args;
  auto* augment_cmd =
      app.add_subcommand("augment", "Append lexicon definitions to each record's source");
  augment_cmd->add_option("corpus", augment_args.corpus, "Corpus JSONL")->required();
  augment_cmd->add_option("-o,--out", augment_args.out, "Output JSONL")->required();
  augment_cmd->add_option("--lexicon", augment_args.lexicon, "Entity/definition TSV")->required();
  augment_cmd->add_option("--mode", augment_args.mode,
                          "match: scan for lexicon terms; keywords: rank phrases with the "
                          "deterministic hashing embedder, then look them up")
      ->check(CLI::IsMember({"match", "keywords"}))
      ->capture_default_str();
  augment_cmd->add_option("--budget", augment_args.budget, "Word-token budget for the output")
      ->capture_default_str();
  augment_cmd->add_option("--keywords", augment_args.keywords, "Keywords per record")
      ->capture_default_str();
  augment_cmd->add_option("--dim", augment_args.dim, "Hashing embedder dimension")
      ->capture_default_str();
  augment_cmd->callback([&] { run_augment(augment_args); });

  RetrieveArgs retrieve_args;
  auto* retrieve_cmd =
      app.add_subcommand("retrieve", "Exact inner-product top-k over an embedding index");
  retrieve_cmd->add_option("--index", retrieve_args.index, "Embedding index binary")->required();
  retrieve_cmd->add_option("--ids", retrieve_args.ids, "Doc-id sidecar, one id per line")
      ->required();
  retrieve_cmd->add_option("-o,--out", retrieve_args.out, "Output report JSON")->required();
  retrieve_cmd->add_option("--query-file", retrieve_args.query_file,
                           "Query vector in the index binary format (count = 1, ids in "
                           "<file>.ids)");
  retrieve_cmd->add_option("--query-json", retrieve_args.query_json,
                           "Query vector as an inline JSON array");
  retrieve_cmd->add_option("-k", retrieve_args.k, "Number of documents to retrieve")
      ->check(CLI::Range(std::size_t{1}, std::size_t{1000000}))
      ->capture_default_str();
  retrieve_cmd->add_option("--loglik", retrieve_args.loglik_json,
                           "Per-hit sequence log-likelihoods (JSON array) to marginalize");
  retrieve_cmd->callback([&] { run_retrieve(retrieve_args); });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
