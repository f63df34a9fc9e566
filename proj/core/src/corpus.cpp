#include "laykit/corpus.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>
#include <stdexcept>
#include <unordered_set>

#include "json.hpp"
#include "laykit/align.hpp"
#include "laykit/rng.hpp"
#include "laykit/text.hpp"

namespace laykit::corpus {

namespace {

using ordered_json = nlohmann::ordered_json;

std::string trim_copy(const std::string& s) {
  const auto begin = s.find_first_not_of(" \t\r\n");
  if (begin == std::string::npos) return {};
  const auto end = s.find_last_not_of(" \t\r\n");
  return s.substr(begin, end - begin + 1);
}

std::string location(const std::filesystem::path& path, std::size_t lineno) {
  return path.string() + ":" + std::to_string(lineno);
}

std::string require_string(const ordered_json& obj, const char* key,
                           const std::filesystem::path& path, std::size_t lineno) {
  const auto it = obj.find(key);
  if (it == obj.end()) {
    throw std::runtime_error(location(path, lineno) + ": missing key \"" + key + "\"");
  }
  if (!it->is_string()) {
    throw std::runtime_error(location(path, lineno) + ": key \"" + key + "\" must be a string");
  }
  return it->get<std::string>();
}

// Word counts of each side's sentences, shared by the derivation filters.
std::vector<std::size_t> sentence_word_counts(const std::vector<text::Sentence>& sentences) {
  std::vector<std::size_t> counts(sentences.size(), 0);
  for (std::size_t i = 0; i < sentences.size(); ++i) {
    for (const auto& token : sentences[i].tokens) {
      if (token.is_word) ++counts[i];
    }
  }
  return counts;
}

std::string join_sentences(const std::vector<text::Sentence>& sentences, std::size_t begin,
                           std::size_t end) {
  std::string out;
  for (std::size_t i = begin; i < end; ++i) {
    if (!out.empty()) out += ' ';
    out += sentences[i].text;
  }
  return out;
}

struct SideAccumulator {
  double word_sum = 0.0;
  double cl_sum = 0.0;
  std::size_t cl_count = 0;
  double familiarity_sum = 0.0;
  std::size_t familiarity_count = 0;
};

struct GroupAccumulator {
  std::size_t records = 0;
  SideAccumulator source;
  SideAccumulator target;
};

void accumulate_side(SideAccumulator& acc, const std::string& side_text,
                     const metrics::FrequencyTable* familiarity) {
  const auto doc = text::text_counts(side_text);
  acc.word_sum += static_cast<double>(doc.word_count);
  if (doc.word_count > 0) {
    acc.cl_sum += metrics::coleman_liau(doc);
    ++acc.cl_count;
    if (familiarity != nullptr) {
      const auto tokens = text::tokenize(side_text);
      acc.familiarity_sum += metrics::word_familiarity(tokens, *familiarity);
      ++acc.familiarity_count;
    }
  }
}

GroupStats finish_group(const GroupAccumulator& acc) {
  GroupStats stats;
  stats.record_count = acc.records;
  const auto n = static_cast<double>(acc.records);
  stats.mean_source_words = acc.source.word_sum / n;
  stats.mean_target_words = acc.target.word_sum / n;
  auto mean_of = [](double sum, std::size_t count) -> std::optional<double> {
    if (count == 0) return std::nullopt;
    return sum / static_cast<double>(count);
  };
  stats.mean_source_coleman_liau = mean_of(acc.source.cl_sum, acc.source.cl_count);
  stats.mean_target_coleman_liau = mean_of(acc.target.cl_sum, acc.target.cl_count);
  stats.mean_source_familiarity = mean_of(acc.source.familiarity_sum, acc.source.familiarity_count);
  stats.mean_target_familiarity = mean_of(acc.target.familiarity_sum, acc.target.familiarity_count);
  return stats;
}

ordered_json group_to_json(const GroupStats& g) {
  ordered_json out;
  out["record_count"] = g.record_count;
  out["mean_source_words"] = g.mean_source_words;
  out["mean_target_words"] = g.mean_target_words;
  auto put = [&out](const char* key, const std::optional<double>& value) {
    if (value.has_value()) {
      out[key] = *value;
    } else {
      out[key] = nullptr;
    }
  };
  put("mean_source_coleman_liau", g.mean_source_coleman_liau);
  put("mean_target_coleman_liau", g.mean_target_coleman_liau);
  if (g.mean_source_familiarity.has_value() || g.mean_target_familiarity.has_value()) {
    put("mean_source_familiarity", g.mean_source_familiarity);
    put("mean_target_familiarity", g.mean_target_familiarity);
  }
  return out;
}

}  // namespace

std::string serialize_record(const ParallelRecord& record) {
  if (!record.raw.empty()) return record.raw;
  ordered_json obj;
  obj["id"] = record.id;
  obj["journal"] = record.journal;
  obj["src"] = record.source;
  obj["tgt"] = record.target;
  return obj.dump();
}

std::vector<ParallelRecord> load_corpus(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open corpus: " + path.string());
  std::vector<ParallelRecord> records;
  std::unordered_set<std::string> seen_ids;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (trim_copy(line).empty()) continue;
    ordered_json obj;
    try {
      obj = ordered_json::parse(line);
    } catch (const ordered_json::parse_error& e) {
      throw std::runtime_error(location(path, lineno) + ": malformed JSON: " + e.what());
    }
    if (!obj.is_object()) {
      throw std::runtime_error(location(path, lineno) + ": expected a JSON object");
    }
    ParallelRecord record;
    record.id = require_string(obj, "id", path, lineno);
    record.journal = require_string(obj, "journal", path, lineno);
    record.source = require_string(obj, "src", path, lineno);
    record.target = require_string(obj, "tgt", path, lineno);
    record.raw = line;
    if (trim_copy(record.source).empty() || trim_copy(record.target).empty()) {
      throw std::runtime_error(location(path, lineno) + ": empty src or tgt");
    }
    if (!seen_ids.insert(record.id).second) {
      throw std::runtime_error(location(path, lineno) + ": duplicate id \"" + record.id + "\"");
    }
    records.push_back(std::move(record));
  }
  return records;
}

void write_corpus(const std::vector<ParallelRecord>& records, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write corpus: " + path.string());
  for (const auto& record : records) {
    out << serialize_record(record) << "\n";
  }
}

FilterResult filter_outliers(const std::vector<ParallelRecord>& records,
                             const OutlierBounds& bounds) {
  if (bounds.sim_low > bounds.sim_high) throw std::invalid_argument("sim_low > sim_high");
  if (bounds.len_low == 0 || bounds.len_low > bounds.len_high) {
    throw std::invalid_argument("bad length bounds");
  }
  FilterResult result;
  for (const auto& record : records) {
    const auto src_tokens = text::tokenize(record.source);
    const auto tgt_tokens = text::tokenize(record.target);
    const double similarity = metrics::rouge_l(tgt_tokens, src_tokens).f1;
    const auto src_words = text::count_words(record.source);
    const auto tgt_words = text::count_words(record.target);

    std::string reason;
    if (similarity < bounds.sim_low) {
      reason = "similarity below " + std::to_string(bounds.sim_low);
    } else if (similarity > bounds.sim_high) {
      reason = "similarity above " + std::to_string(bounds.sim_high);
    } else if (src_words < bounds.len_low || src_words > bounds.len_high) {
      reason = "source length outside bounds";
    } else if (tgt_words < bounds.len_low || tgt_words > bounds.len_high) {
      reason = "target length outside bounds";
    }
    if (reason.empty()) {
      result.kept.push_back(record);
    } else {
      result.dropped.push_back({record, std::move(reason)});
    }
  }
  return result;
}

SplitResult split_corpus(const std::vector<ParallelRecord>& records, const SplitSpec& spec) {
  if (spec.train_ratio < 0.0 || spec.valid_ratio < 0.0 || spec.test_ratio < 0.0) {
    throw std::invalid_argument("split ratios must be non-negative");
  }
  const double sum = spec.train_ratio + spec.valid_ratio + spec.test_ratio;
  if (std::fabs(sum - 1.0) > 1e-4) {
    throw std::invalid_argument("split ratios must sum to 1");
  }

  const std::size_t n = records.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  SplitMix64 rng(spec.seed);
  fisher_yates_shuffle(order, rng);

  auto n_train = static_cast<std::size_t>(std::floor(static_cast<double>(n) * spec.train_ratio));
  const auto n_valid = static_cast<std::size_t>(std::floor(static_cast<double>(n) * spec.valid_ratio));
  const auto n_test = static_cast<std::size_t>(std::floor(static_cast<double>(n) * spec.test_ratio));
  n_train += n - std::min(n, n_train + n_valid + n_test);  // remainder to train

  SplitResult result;
  result.train.reserve(n_train);
  result.valid.reserve(n_valid);
  result.test.reserve(n_test);
  for (std::size_t pos = 0; pos < n; ++pos) {
    const auto& record = records[order[pos]];
    if (pos < n_train) {
      result.train.push_back(record);
    } else if (pos < n_train + n_valid) {
      result.valid.push_back(record);
    } else {
      result.test.push_back(record);
    }
  }
  return result;
}

std::string_view pair_kind_name(PairKind kind) {
  return kind == PairKind::kSimplification ? "simplification" : "background";
}

std::vector<DerivedPair> derive_simplification_pairs(const ParallelRecord& record,
                                                     double min_score, std::size_t min_len,
                                                     std::size_t max_len) {
  const auto src = text::split_sentences(record.source);
  const auto tgt = text::split_sentences(record.target);
  const auto alignment = align::gpss(align::build_score_matrix(src, tgt), min_score);
  const auto src_words = sentence_word_counts(src);
  const auto tgt_words = sentence_word_counts(tgt);

  std::vector<DerivedPair> pairs;
  for (const auto& pair : alignment.pairs) {
    const auto sw = src_words[pair.src_index];
    const auto tw = tgt_words[pair.tgt_index];
    if (sw < min_len || sw > max_len || tw < min_len || tw > max_len) continue;
    DerivedPair derived;
    derived.id = record.id + "-simp-" + std::to_string(pairs.size());
    derived.source_text = src[pair.src_index].text;
    derived.target_text = tgt[pair.tgt_index].text;
    derived.kind = PairKind::kSimplification;
    pairs.push_back(std::move(derived));
  }
  return pairs;
}

std::optional<DerivedPair> derive_background_pair(const ParallelRecord& record, int boundary_n) {
  if (boundary_n < 1 || boundary_n > 3) {
    throw std::invalid_argument("boundary_n must be 1, 2 or 3");
  }
  const auto src = text::split_sentences(record.source);
  const auto tgt = text::split_sentences(record.target);
  const auto alignment = align::gpss(align::build_score_matrix(src, tgt));
  if (alignment.pairs.size() < static_cast<std::size_t>(boundary_n)) return std::nullopt;

  // Pairs are a monotone chain, so source order equals target order.
  const auto& boundary = alignment.pairs[static_cast<std::size_t>(boundary_n - 1)];
  const std::size_t src_end = boundary.src_index;
  const std::size_t tgt_end = boundary_n == 1 ? boundary.tgt_index + 1 : boundary.tgt_index;
  if (src_end == 0 || tgt_end == 0) return std::nullopt;

  DerivedPair derived;
  derived.id = record.id + "-bg";
  derived.source_text = join_sentences(src, 0, src_end);
  derived.target_text = join_sentences(tgt, 0, tgt_end);
  derived.kind = PairKind::kBackground;
  if (derived.source_text.empty() || derived.target_text.empty()) return std::nullopt;
  return derived;
}

std::vector<LabeledSentence> derive_plainness_training(const std::vector<ParallelRecord>& records,
                                                       std::size_t min_len, std::size_t max_len) {
  std::vector<LabeledSentence> rows;
  for (const auto& record : records) {
    const auto src = text::split_sentences(record.source);
    const auto tgt = text::split_sentences(record.target);
    const auto alignment = align::gpss(align::build_score_matrix(src, tgt));
    const auto src_words = sentence_word_counts(src);
    const auto tgt_words = sentence_word_counts(tgt);
    for (const auto& pair : alignment.pairs) {
      const auto sw = src_words[pair.src_index];
      const auto tw = tgt_words[pair.tgt_index];
      if (sw < min_len || sw > max_len || tw < min_len || tw > max_len) continue;
      rows.push_back({src[pair.src_index].text, 0});
      rows.push_back({tgt[pair.tgt_index].text, 1});
    }
  }
  return rows;
}

void write_derived_pairs(const std::vector<DerivedPair>& pairs,
                         const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write derived pairs: " + path.string());
  for (const auto& pair : pairs) {
    ordered_json obj;
    obj["id"] = pair.id;
    obj["kind"] = std::string(pair_kind_name(pair.kind));
    obj["src"] = pair.source_text;
    obj["tgt"] = pair.target_text;
    out << obj.dump() << "\n";
  }
}

void write_plainness_tsv(const std::vector<LabeledSentence>& rows,
                         const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write plainness data: " + path.string());
  for (const auto& row : rows) {
    out << row.label << "\t" << row.sentence << "\n";
  }
}

CorruptionResult corrupt_for_pretraining(std::string_view input, std::uint64_t seed,
                                         double substitution_rate) {
  if (substitution_rate < 0.0 || substitution_rate > 1.0) {
    throw std::invalid_argument("substitution_rate must be in [0, 1]");
  }
  const auto sentences = text::split_sentences(input);

  SplitMix64 rng(seed);
  std::vector<std::size_t> order(sentences.size());
  std::iota(order.begin(), order.end(), 0);
  fisher_yates_shuffle(order, rng);

  // No split point and nothing to mask: keep the input byte for byte.
  if (sentences.size() <= 1 && substitution_rate == 0.0) {
    return {std::string(input), std::string(input)};
  }

  std::string corrupted;
  for (std::size_t pos = 0; pos < order.size(); ++pos) {
    const auto& sentence = sentences[order[pos]];
    std::string masked;
    std::size_t cursor = 0;
    for (const auto& span : text::tokenize_spans(sentence.text)) {
      if (!span.is_word) continue;
      if (rng.next_double() < substitution_rate) {
        masked += sentence.text.substr(cursor, span.begin - cursor);
        masked += "<mask>";
        cursor = span.end;
      }
    }
    masked += sentence.text.substr(cursor);
    if (pos > 0) corrupted += ' ';
    corrupted += masked;
  }
  return {std::move(corrupted), std::string(input)};
}

CorpusStats corpus_statistics(const std::vector<ParallelRecord>& records,
                              const metrics::FrequencyTable* familiarity) {
  if (records.empty()) throw std::invalid_argument("empty corpus");

  GroupAccumulator overall;
  std::map<std::string, GroupAccumulator> journals;
  std::vector<double> src_cl, tgt_cl;  // paired per record
  for (const auto& record : records) {
    auto& journal = journals[record.journal];
    for (GroupAccumulator* acc : {&overall, &journal}) {
      ++acc->records;
      accumulate_side(acc->source, record.source, familiarity);
      accumulate_side(acc->target, record.target, familiarity);
    }
    const auto src_doc = text::text_counts(record.source);
    const auto tgt_doc = text::text_counts(record.target);
    if (src_doc.word_count > 0 && tgt_doc.word_count > 0) {
      src_cl.push_back(metrics::coleman_liau(src_doc));
      tgt_cl.push_back(metrics::coleman_liau(tgt_doc));
    }
  }

  CorpusStats stats;
  stats.overall = finish_group(overall);
  for (const auto& [name, acc] : journals) {
    stats.per_journal[name] = finish_group(acc);
  }
  if (src_cl.size() >= 2) {
    try {
      stats.readability_t_test = metrics::paired_t_test(src_cl, tgt_cl);
    } catch (const std::invalid_argument&) {
      // constant differences: report no test rather than failing the run
    }
  }
  return stats;
}

std::string stats_to_json(const CorpusStats& stats) {
  ordered_json out;
  out["overall"] = group_to_json(stats.overall);
  ordered_json journals = ordered_json::object();
  for (const auto& [name, group] : stats.per_journal) {
    journals[name] = group_to_json(group);
  }
  out["per_journal"] = journals;
  if (stats.readability_t_test.has_value()) {
    out["readability_t_test"] = {{"t", stats.readability_t_test->t},
                                 {"p_two_sided", stats.readability_t_test->p_two_sided}};
  } else {
    out["readability_t_test"] = nullptr;
  }
  return out.dump(2) + "\n";
}

std::string stats_to_csv(const CorpusStats& stats) {
  std::ostringstream out;
  const bool familiarity = stats.overall.mean_source_familiarity.has_value() ||
                           stats.overall.mean_target_familiarity.has_value();
  out << "journal,record_count,mean_source_words,mean_target_words,"
         "mean_source_coleman_liau,mean_target_coleman_liau";
  if (familiarity) out << ",mean_source_familiarity,mean_target_familiarity";
  out << "\n";
  auto put = [&out](const std::optional<double>& value) {
    out << ",";
    if (value.has_value()) out << *value;
  };
  auto quote = [](const std::string& s) {
    std::string out = "\"";
    for (const char c : s) {
      if (c == '"') out += '"';
      out += c;
    }
    out += '"';
    return out;
  };
  for (const auto& [name, group] : stats.per_journal) {
    out << quote(name) << "," << group.record_count << "," << group.mean_source_words << ","
        << group.mean_target_words;
    put(group.mean_source_coleman_liau);
    put(group.mean_target_coleman_liau);
    if (familiarity) {
      put(group.mean_source_familiarity);
      put(group.mean_target_familiarity);
    }
    out << "\n";
  }
  return out.str();
}

}  // namespace laykit::corpus
