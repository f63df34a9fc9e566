#include "doctest.h"

#include <string>
#include <vector>

#include "json.hpp"
#include "laykit/retrieval.hpp"
#include "support.hpp"

using nlohmann::ordered_json;
using testsupport::read_file;
using testsupport::run_cli;
using testsupport::TempDir;
using testsupport::write_file;

namespace {

std::string fixture_corpus() { return (testsupport::data_dir() / "fixture_corpus.jsonl").string(); }

}  // namespace

TEST_SUITE("cli") {

TEST_CASE("align matches the golden file and writes a manifest") {
  TempDir dir("cli_align");
  const auto out = dir / "alignments.jsonl";
  const auto result = run_cli({"align", fixture_corpus(), "-o", out.string()});
  REQUIRE(result.exit_code == 0);
  CHECK(read_file(out) == read_file(testsupport::data_dir() / "golden_alignment.jsonl"));

  const auto manifest = ordered_json::parse(read_file(out.string() + ".manifest.json"));
  CHECK(manifest["subcommand"] == "align");
  CHECK(manifest["parameters"]["min_score"] == 0.0);
  CHECK(manifest["seed"].is_null());
  CHECK(manifest.contains("wall_time_ms"));
}

TEST_CASE("align rejects an out-of-range min-score") {
  TempDir dir("cli_align_err");
  const auto result = run_cli(
      {"align", fixture_corpus(), "-o", (dir / "x.jsonl").string(), "--min-score", "1.1"});
  CHECK(result.exit_code == 1);
}

TEST_CASE("align reports data errors with file context") {
  TempDir dir("cli_align_data");
  const auto corpus = dir / "bad.jsonl";
  write_file(corpus, "{\"id\": \"a\"}\n");
  const auto result = run_cli({"align", corpus.string(), "-o", (dir / "x.jsonl").string()});
  CHECK(result.exit_code == 2);
  CHECK(result.output.find(":1:") != std::string::npos);

  const auto missing = run_cli({"align", (dir / "nope.jsonl").string(), "-o",
                                (dir / "y.jsonl").string()});
  CHECK(missing.exit_code == 2);
}

TEST_CASE("derive matches the golden files") {
  TempDir dir("cli_derive");
  auto result = run_cli({"derive", fixture_corpus(), "-o", dir.path().string(), "--kind",
                         "simplification"});
  REQUIRE(result.exit_code == 0);
  CHECK(result.output.find("simplification pairs: 114") != std::string::npos);
  CHECK(read_file(dir / "simplification.jsonl") ==
        read_file(testsupport::data_dir() / "golden_simplification.jsonl"));

  result = run_cli({"derive", fixture_corpus(), "-o", dir.path().string(), "--kind",
                    "background"});
  REQUIRE(result.exit_code == 0);
  CHECK(read_file(dir / "background.jsonl") ==
        read_file(testsupport::data_dir() / "golden_background.jsonl"));

  result = run_cli({"derive", fixture_corpus(), "-o", dir.path().string(), "--kind",
                    "plainness"});
  REQUIRE(result.exit_code == 0);
  CHECK(result.output.find("label 0: 114, label 1: 114") != std::string::npos);
  CHECK(read_file(dir / "plainness.tsv") ==
        read_file(testsupport::data_dir() / "golden_plainness.tsv"));
}

TEST_CASE("derive usage errors") {
  TempDir dir("cli_derive_err");
  CHECK(run_cli({"derive", fixture_corpus(), "-o", dir.path().string(), "--kind", "background",
                 "--boundary", "5"})
            .exit_code == 1);
  CHECK(run_cli({"derive", fixture_corpus(), "-o", dir.path().string(), "--kind", "nonsense"})
            .exit_code == 1);
}

TEST_CASE("metrics on identical pairs yields mean f1 = 1 and omits optional fields") {
  TempDir dir("cli_metrics");
  const auto pairs = dir / "pairs.jsonl";
  write_file(pairs,
             "{\"id\":\"p0\",\"src\":\"The cat sat on the mat.\",\"tgt\":\"The cat sat on the mat.\"}\n"
             "{\"id\":\"p1\",\"src\":\"Another identical sentence here.\",\"tgt\":\"Another identical sentence here.\"}\n");
  const auto out = dir / "report.json";
  const auto result = run_cli({"metrics", pairs.string(), "-o", out.string()});
  REQUIRE(result.exit_code == 0);

  const auto report = ordered_json::parse(read_file(out));
  CHECK(report["mean"]["rouge_l_f1"] == 1.0);
  CHECK(report["pairs"].size() == 2);
  CHECK(report["pairs"][0]["rouge_l"]["precision"] == 1.0);
  // No familiarity table and no embeddings: the keys are absent, not zero.
  CHECK_FALSE(report["mean"].contains("familiarity_src"));
  CHECK_FALSE(report["mean"].contains("bert_score_f1"));
  CHECK_FALSE(report["pairs"][0].contains("familiarity_src"));
  CHECK_FALSE(report["pairs"][0].contains("bert_score"));
}

TEST_CASE("metrics with familiarity table and embeddings sidecar") {
  TempDir dir("cli_metrics_full");
  const auto pairs = dir / "pairs.jsonl";
  write_file(pairs, "{\"src\":\"protein infection\",\"tgt\":\"people study\"}\n");

  const auto sidecar = dir / "embeddings.json";
  write_file(sidecar, "[{\"src\": [[1.0, 0.0]], \"tgt\": [[1.0, 0.0], [0.0, 1.0]]}]\n");

  const auto out = dir / "report.json";
  const auto table = (testsupport::data_dir() / "freq_table.tsv").string();
  const auto result = run_cli({"metrics", pairs.string(), "-o", out.string(),
                               "--familiarity-table", table, "--embeddings", sidecar.string()});
  REQUIRE(result.exit_code == 0);

  const auto report = ordered_json::parse(read_file(out));
  CHECK(report["pairs"][0].contains("familiarity_src"));
  CHECK(report["pairs"][0]["bert_score"]["f1"].get<double>() == doctest::Approx(2.0 / 3.0));
  CHECK(report["mean"].contains("familiarity_tgt"));

  // Sidecar must exist when requested.
  const auto missing = run_cli({"metrics", pairs.string(), "-o", out.string(), "--embeddings",
                                (dir / "absent.json").string()});
  CHECK(missing.exit_code == 2);
}

TEST_CASE("stats emits json and csv reports") {
  TempDir dir("cli_stats");
  const auto out = dir / "stats.json";
  auto result = run_cli({"stats", fixture_corpus(), "-o", out.string()});
  REQUIRE(result.exit_code == 0);
  const auto report = ordered_json::parse(read_file(out));
  CHECK(report["overall"]["record_count"] == 50);
  CHECK(report["per_journal"].size() == 5);
  CHECK(report.contains("readability_t_test"));

  const auto csv_out = dir / "stats.csv";
  result = run_cli({"stats", fixture_corpus(), "-o", csv_out.string(), "--csv"});
  REQUIRE(result.exit_code == 0);
  const auto csv = read_file(csv_out);
  CHECK(csv.rfind("journal,record_count", 0) == 0);
}

TEST_CASE("split is deterministic and ratio-checked") {
  TempDir dir("cli_split");
  const auto out1 = dir / "s1";
  const auto out2 = dir / "s2";
  auto result = run_cli({"split", fixture_corpus(), "-o", out1.string(), "--train", "0.6",
                         "--valid", "0.2", "--test", "0.2", "--seed", "9"});
  REQUIRE(result.exit_code == 0);
  result = run_cli({"split", fixture_corpus(), "-o", out2.string(), "--train", "0.6", "--valid",
                    "0.2", "--test", "0.2", "--seed", "9"});
  REQUIRE(result.exit_code == 0);
  for (const char* name : {"train.jsonl", "valid.jsonl", "test.jsonl"}) {
    CHECK(read_file(out1 / name) == read_file(out2 / name));
  }
  const auto manifest = ordered_json::parse(read_file(out1 / "manifest.json"));
  CHECK(manifest["seed"] == 9);

  CHECK(run_cli({"split", fixture_corpus(), "-o", (dir / "s3").string(), "--train", "0.5",
                 "--valid", "0.1", "--test", "0.1"})
            .exit_code == 1);
}

TEST_CASE("corrupt is deterministic and honors the rate bounds") {
  TempDir dir("cli_corrupt");
  const auto input = dir / "docs.txt";
  write_file(input,
             "Alpha beta gamma delta. Epsilon zeta eta. Theta iota kappa.\n"
             "One two three. Four five six.\n");
  const auto out1 = dir / "c1.jsonl";
  const auto out2 = dir / "c2.jsonl";
  REQUIRE(run_cli({"corrupt", input.string(), "-o", out1.string(), "--seed", "3"}).exit_code == 0);
  REQUIRE(run_cli({"corrupt", input.string(), "-o", out2.string(), "--seed", "3"}).exit_code == 0);
  CHECK(read_file(out1) == read_file(out2));

  const auto rows = read_file(out1);
  CHECK(rows.find("\"kind\":\"corruption\"") != std::string::npos);

  CHECK(run_cli({"corrupt", input.string(), "-o", (dir / "c3.jsonl").string(), "--rate", "1.5"})
            .exit_code == 1);
}

TEST_CASE("augment renders definitions behind the source") {
  TempDir dir("cli_augment");
  const auto corpus = dir / "corpus.jsonl";
  write_file(corpus,
             "{\"id\":\"a\",\"journal\":\"J\",\"src\":\"Severe infection alters the receptor "
             "pathway.\",\"tgt\":\"Germs change how cells talk.\"}\n");
  const auto out = dir / "augmented.jsonl";
  const auto lexicon = (testsupport::data_dir() / "lexicon.tsv").string();
  const auto result = run_cli({"augment", corpus.string(), "-o", out.string(), "--lexicon",
                               lexicon});
  REQUIRE(result.exit_code == 0);
  const auto row = ordered_json::parse(read_file(out));
  const auto rendered = row["src"].get<std::string>();
  CHECK(rendered.rfind("Severe infection alters the receptor pathway. | ", 0) == 0);
  CHECK(rendered.find("infection: When germs enter the body") != std::string::npos);
  CHECK(rendered.find("receptor pathway: A chain of signalling steps") != std::string::npos);

  // keywords mode runs end to end with the hashing embedder.
  const auto kw = run_cli({"augment", corpus.string(), "-o", (dir / "kw.jsonl").string(),
                           "--lexicon", lexicon, "--mode", "keywords"});
  CHECK(kw.exit_code == 0);

  // Budget smaller than the source word count is a data error.
  const auto tiny = run_cli({"augment", corpus.string(), "-o", (dir / "t.jsonl").string(),
                             "--lexicon", lexicon, "--budget", "3"});
  CHECK(tiny.exit_code == 2);
  CHECK(tiny.output.find("record \"a\"") != std::string::npos);
}

TEST_CASE("retrieve reads the binary index and defaults k to 5") {
  TempDir dir("cli_retrieve");
  std::vector<std::pair<std::string, std::vector<float>>> entries;
  for (int i = 0; i < 8; ++i) {
    std::vector<float> v(4, 0.0f);
    v[i % 4] = 1.0f + static_cast<float>(i);
    entries.emplace_back("wiki-" + std::to_string(i), v);
  }
  const auto index = laykit::retrieval::EmbeddingIndex::build(entries);
  const auto vectors = dir / "index.embf";
  const auto ids = dir / "index.ids";
  index.save(vectors, ids);

  const auto out = dir / "hits.json";
  const auto result = run_cli({"retrieve", "--index", vectors.string(), "--ids", ids.string(),
                               "-o", out.string(), "--query-json", "[1, 0, 0, 0]",
                               "--loglik", "[-1.0, -1.2, -0.5, -2.0, -1.1]"});
  REQUIRE(result.exit_code == 0);

  const auto report = ordered_json::parse(read_file(out));
  REQUIRE(report["hits"].size() == 5);
  CHECK(report["hits"][0]["doc_id"] == "wiki-4");  // score 5 on dimension 0
  CHECK(report.contains("marginal_log_likelihood"));
  double prior_sum = 0.0;
  for (const auto& hit : report["hits"]) prior_sum += hit["prior"].get<double>();
  CHECK(prior_sum == doctest::Approx(1.0).epsilon(1e-9));

  // The resolved default k lands in the manifest.
  const auto manifest = ordered_json::parse(read_file(out.string() + ".manifest.json"));
  CHECK(manifest["parameters"]["k"] == 5);

  // Query from a count=1 binary file.
  const auto query_index = laykit::retrieval::EmbeddingIndex::build(
      {{"q", {0.0f, 1.0f, 0.0f, 0.0f}}});
  const auto qvec = dir / "query.embf";
  query_index.save(qvec, qvec.string() + ".ids");
  const auto file_result = run_cli({"retrieve", "--index", vectors.string(), "--ids",
                                    ids.string(), "-o", (dir / "hits2.json").string(),
                                    "--query-file", qvec.string(), "-k", "2"});
  REQUIRE(file_result.exit_code == 0);
  const auto report2 = ordered_json::parse(read_file(dir / "hits2.json"));
  REQUIRE(report2["hits"].size() == 2);
  CHECK(report2["hits"][0]["doc_id"] == "wiki-5");

  // Usage and data errors.
  CHECK(run_cli({"retrieve", "--index", vectors.string(), "--ids", ids.string(), "-o",
                 (dir / "x.json").string()})
            .exit_code == 1);
  CHECK(run_cli({"retrieve", "--index", vectors.string(), "--ids", ids.string(), "-o",
                 (dir / "x.json").string(), "--query-json", "[1,0]"})
            .exit_code == 2);
  CHECK(run_cli({"retrieve", "--index", (dir / "absent.embf").string(), "--ids", ids.string(),
                 "-o", (dir / "x.json").string(), "--query-json", "[1,0,0,0]"})
            .exit_code == 2);
}

TEST_CASE("no subcommand is a usage error") {
  CHECK(run_cli({}).exit_code == 1);
  CHECK(run_cli({"frobnicate"}).exit_code == 1);
}

}  // TEST_SUITE
