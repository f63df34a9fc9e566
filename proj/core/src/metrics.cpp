#include "laykit/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>

namespace laykit::metrics {

namespace {

bool all_finite(const std::vector<double>& v) {
  return std::all_of(v.begin(), v.end(), [](double x) { return std::isfinite(x); });
}

double cosine(const std::vector<double>& a, const std::vector<double>& b) {
  double dot = 0.0, na = 0.0, nb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    dot += a[i] * b[i];
    na += a[i] * a[i];
    nb += b[i] * b[i];
  }
  if (na == 0.0 || nb == 0.0) return 0.0;
  return dot / (std::sqrt(na) * std::sqrt(nb));
}

// Continued-fraction core of the regularized incomplete beta (Lentz's
// method).
double beta_continued_fraction(double a, double b, double x) {
  constexpr int kMaxIterations = 300;
  constexpr double kEps = 1e-15;
  constexpr double kTiny = 1e-300;

  const double qab = a + b;
  const double qap = a + 1.0;
  const double qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::fabs(d) < kTiny) d = kTiny;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= kMaxIterations; ++m) {
    const int m2 = 2 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::fabs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::fabs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    const double delta = d * c;
    h *= delta;
    if (std::fabs(delta - 1.0) < kEps) break;
  }
  return h;
}

}  // namespace

double f_measure(double precision, double recall) {
  const double sum = precision + recall;
  if (sum == 0.0) return 0.0;
  return 2.0 * precision * recall / sum;
}

std::size_t lcs_length(std::span<const std::string> a, std::span<const std::string> b) {
  if (a.empty() || b.empty()) return 0;
  std::vector<std::size_t> prev(b.size() + 1, 0);
  std::vector<std::size_t> curr(b.size() + 1, 0);
  for (std::size_t i = 1; i <= a.size(); ++i) {
    for (std::size_t j = 1; j <= b.size(); ++j) {
      if (a[i - 1] == b[j - 1]) {
        curr[j] = prev[j - 1] + 1;
      } else {
        curr[j] = std::max(prev[j], curr[j - 1]);
      }
    }
    std::swap(prev, curr);
  }
  return prev[b.size()];
}

PRF rouge_l(std::span<const std::string> candidate, std::span<const std::string> reference) {
  const auto lcs = static_cast<double>(lcs_length(candidate, reference));
  PRF out;
  out.precision = candidate.empty() ? 0.0 : lcs / static_cast<double>(candidate.size());
  out.recall = reference.empty() ? 0.0 : lcs / static_cast<double>(reference.size());
  out.f1 = f_measure(out.precision, out.recall);
  return out;
}

PRF rouge_l(const std::vector<text::Token>& candidate, const std::vector<text::Token>& reference) {
  std::vector<std::string> c, r;
  c.reserve(candidate.size());
  r.reserve(reference.size());
  for (const auto& t : candidate) c.push_back(t.text);
  for (const auto& t : reference) r.push_back(t.text);
  return rouge_l(std::span<const std::string>(c), std::span<const std::string>(r));
}

double coleman_liau(const text::TokenizedDocument& doc) {
  if (doc.word_count == 0) throw std::invalid_argument("empty document");
  const auto words = static_cast<double>(doc.word_count);
  const double letters_per_100 = 100.0 * static_cast<double>(doc.letter_count) / words;
  const double sentences_per_100 = 100.0 * static_cast<double>(doc.sentence_count) / words;
  return 0.0588 * letters_per_100 - 0.296 * sentences_per_100 - 15.8;
}

double coleman_liau(std::string_view input) { return coleman_liau(text::text_counts(input)); }

FrequencyTable::FrequencyTable(std::uint64_t doc_count,
                               std::unordered_map<std::string, std::uint64_t> df)
    : doc_count_(doc_count), df_(std::move(df)) {
  if (doc_count_ == 0) throw std::invalid_argument("doc_count must be positive");
  for (const auto& [token, count] : df_) {
    if (count < 1 || count > doc_count_) {
      throw std::invalid_argument("df out of range for token: " + token);
    }
  }
}

FrequencyTable FrequencyTable::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open frequency table: " + path.string());
  std::string line;
  std::size_t lineno = 1;
  if (!std::getline(in, line)) {
    throw std::runtime_error(path.string() + ":1: missing header line");
  }
  std::uint64_t n = 0;
  {
    std::istringstream header(line);
    std::string tag;
    if (!(header >> tag >> n) || tag != "N" || n == 0) {
      throw std::runtime_error(path.string() + ":1: expected header \"N <doc_count>\"");
    }
  }
  std::unordered_map<std::string, std::uint64_t> df;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    const auto tab = line.find('\t');
    if (tab == std::string::npos || tab == 0) {
      throw std::runtime_error(path.string() + ":" + std::to_string(lineno) +
                               ": expected \"<token>\\t<df>\"");
    }
    const std::string token = line.substr(0, tab);
    std::uint64_t count = 0;
    try {
      count = std::stoull(line.substr(tab + 1));
    } catch (const std::exception&) {
      throw std::runtime_error(path.string() + ":" + std::to_string(lineno) + ": bad df value");
    }
    if (count < 1 || count > n) {
      throw std::runtime_error(path.string() + ":" + std::to_string(lineno) +
                               ": df out of [1, N]");
    }
    df[token] = count;
  }
  return FrequencyTable(n, std::move(df));
}

void FrequencyTable::save(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write frequency table: " + path.string());
  out << "N " << doc_count_ << "\n";
  std::map<std::string, std::uint64_t> ordered(df_.begin(), df_.end());
  for (const auto& [token, count] : ordered) {
    out << token << "\t" << count << "\n";
  }
}

std::uint64_t FrequencyTable::df(const std::string& token) const {
  const auto it = df_.find(token);
  return it == df_.end() ? 1 : it->second;
}

double FrequencyTable::idf(const std::string& token) const {
  return std::log(static_cast<double>(doc_count_) / static_cast<double>(df(token)));
}

double word_familiarity(std::span<const text::Token> tokens, const FrequencyTable& table) {
  double sum = 0.0;
  std::size_t words = 0;
  for (const auto& token : tokens) {
    if (!token.is_word) continue;
    sum += table.idf(token.text);
    ++words;
  }
  if (words == 0) throw std::invalid_argument("empty text");
  return sum / static_cast<double>(words);
}

PRF bert_score(const TokenEmbeddings& candidate, const TokenEmbeddings& reference) {
  if (candidate.vectors.empty() || reference.vectors.empty()) {
    throw std::invalid_argument("bert_score requires non-empty embeddings");
  }
  const std::size_t dim = candidate.vectors.front().size();
  if (dim == 0) throw std::invalid_argument("bert_score requires dimension >= 1");
  auto check = [dim](const TokenEmbeddings& e) {
    for (const auto& v : e.vectors) {
      if (v.size() != dim) throw std::invalid_argument("embedding dimension mismatch");
      if (!all_finite(v)) throw std::invalid_argument("non-finite embedding component");
    }
  };
  check(candidate);
  check(reference);

  auto mean_best = [](const std::vector<std::vector<double>>& from,
                      const std::vector<std::vector<double>>& against) {
    double total = 0.0;
    for (const auto& v : from) {
      double best = -1.0;
      for (const auto& w : against) best = std::max(best, cosine(v, w));
      total += best;
    }
    return total / static_cast<double>(from.size());
  };

  PRF out;
  out.precision = mean_best(candidate.vectors, reference.vectors);
  out.recall = mean_best(reference.vectors, candidate.vectors);
  out.f1 = f_measure(out.precision, out.recall);
  return out;
}

double cohens_kappa(std::span<const int> a, std::span<const int> b) {
  if (a.empty() || a.size() != b.size()) {
    throw std::invalid_argument("cohens_kappa requires equal non-empty label lists");
  }
  const auto n = static_cast<double>(a.size());
  std::size_t agreements = 0;
  std::map<int, std::size_t> marginal_a, marginal_b;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i] == b[i]) ++agreements;
    ++marginal_a[a[i]];
    ++marginal_b[b[i]];
  }
  const double observed = static_cast<double>(agreements) / n;
  double expected = 0.0;
  for (const auto& [label, count_a] : marginal_a) {
    const auto it = marginal_b.find(label);
    if (it == marginal_b.end()) continue;
    expected += (static_cast<double>(count_a) / n) * (static_cast<double>(it->second) / n);
  }
  if (expected == 1.0) return 1.0;  // both raters constant on one label
  return (observed - expected) / (1.0 - expected);
}

double krippendorff_alpha_ordinal(const RatingsMatrix& ratings) {
  if (ratings.values.size() < 2) {
    throw std::invalid_argument("at least 2 raters required");
  }
  if (ratings.scale_min > ratings.scale_max) throw std::invalid_argument("bad rating scale");
  const std::size_t raters = ratings.values.size();
  const std::size_t items = ratings.values.front().size();
  if (items == 0) throw std::invalid_argument("at least 1 item required");
  for (const auto& row : ratings.values) {
    if (row.size() != items) throw std::invalid_argument("ragged ratings matrix");
  }
  const auto levels = static_cast<std::size_t>(ratings.scale_max - ratings.scale_min + 1);

  // Coincidence matrix: each ordered pair of ratings within an item
  // contributes 1/(m-1), m being the item's rating count.
  std::vector<double> coincidence(levels * levels, 0.0);
  std::size_t pairable_items = 0;
  for (std::size_t item = 0; item < items; ++item) {
    std::vector<std::size_t> values;
    for (std::size_t rater = 0; rater < raters; ++rater) {
      const auto& cell = ratings.values[rater][item];
      if (!cell.has_value()) continue;
      if (*cell < ratings.scale_min || *cell > ratings.scale_max) {
        throw std::invalid_argument("rating outside scale");
      }
      values.push_back(static_cast<std::size_t>(*cell - ratings.scale_min));
    }
    if (values.size() < 2) continue;
    ++pairable_items;
    const double weight = 1.0 / static_cast<double>(values.size() - 1);
    for (std::size_t p = 0; p < values.size(); ++p) {
      for (std::size_t q = 0; q < values.size(); ++q) {
        if (p == q) continue;
        coincidence[values[p] * levels + values[q]] += weight;
      }
    }
  }
  if (pairable_items == 0) throw std::invalid_argument("no pairable values");

  std::vector<double> marginal(levels, 0.0);
  double n = 0.0;
  for (std::size_t c = 0; c < levels; ++c) {
    for (std::size_t k = 0; k < levels; ++k) marginal[c] += coincidence[c * levels + k];
    n += marginal[c];
  }

  // Ordinal squared difference between values c < k: the coincidence mass
  // between them, endpoints half-weighted, squared.
  auto delta_sq = [&](std::size_t c, std::size_t k) {
    if (c == k) return 0.0;
    if (c > k) std::swap(c, k);
    double cum = 0.0;
    for (std::size_t g = c; g <= k; ++g) cum += marginal[g];
    cum -= (marginal[c] + marginal[k]) / 2.0;
    return cum * cum;
  };

  double observed = 0.0, expected = 0.0;
  for (std::size_t c = 0; c < levels; ++c) {
    for (std::size_t k = 0; k < levels; ++k) {
      const double d2 = delta_sq(c, k);
      observed += coincidence[c * levels + k] * d2;
      expected += marginal[c] * marginal[k] * d2;
    }
  }
  observed /= n;
  expected /= n * (n - 1.0);

  if (expected == 0.0) {
    // Every pairable rating is one and the same value.
    if (pairable_items > 1) return 1.0;
    throw std::invalid_argument("no variance");
  }
  return 1.0 - observed / expected;
}

TTestResult paired_t_test(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw std::invalid_argument("paired_t_test requires equal lengths");
  if (a.size() < 2) throw std::invalid_argument("paired_t_test requires n >= 2");
  const std::size_t n = a.size();
  std::vector<double> diff(n);
  for (std::size_t i = 0; i < n; ++i) diff[i] = a[i] - b[i];
  double mean = 0.0;
  for (const double d : diff) mean += d;
  mean /= static_cast<double>(n);
  double ss = 0.0;
  for (const double d : diff) ss += (d - mean) * (d - mean);
  if (ss == 0.0) throw std::invalid_argument("degenerate");
  const double sd = std::sqrt(ss / static_cast<double>(n - 1));
  const double t = mean / (sd / std::sqrt(static_cast<double>(n)));

  TTestResult out;
  out.t = t;
  const auto df = static_cast<double>(n - 1);
  if (t == 0.0) {
    out.p_two_sided = 1.0;
  } else {
    out.p_two_sided = regularized_incomplete_beta(df / 2.0, 0.5, df / (df + t * t));
  }
  return out;
}

double regularized_incomplete_beta(double a, double b, double x) {
  if (x <= 0.0) return 0.0;
  if (x >= 1.0) return 1.0;
  const double log_front = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) +
                           a * std::log(x) + b * std::log(1.0 - x);
  const double front = std::exp(log_front);
  if (x < (a + 1.0) / (a + b + 2.0)) {
    return front * beta_continued_fraction(a, b, x) / a;
  }
  return 1.0 - front * beta_continued_fraction(b, a, 1.0 - x) / b;
}

}  // namespace laykit::metrics
