#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <filesystem>
#include <string>

#include "grantprod.h"

namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& name) : path(fs::temp_directory_path() / name) {
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

gp_corpus* open_corpus(const fs::path& dir) {
  gp_corpus* corpus = nullptr;
  const gp_status status = gp_corpus_open(
      (dir / "grants.jsonl").c_str(), (dir / "researchers.jsonl").c_str(),
      (dir / "publications.jsonl").c_str(), (dir / "institutions.jsonl").c_str(),
      (dir / "taxonomy.jsonl").c_str(), &corpus);
  REQUIRE(status == GP_OK);
  REQUIRE(corpus != nullptr);
  return corpus;
}

const char* kSmallConfig = R"({
  "seed": 11, "researchers": 220, "institutions": 8, "abroad_institutions": 2,
  "subjects": 12, "grants_per_field": 40, "fields": ["MED"],
  "base_positive_rate": 0.3, "subject_effect": 0.4, "hot_subject_prevalence": 0.5,
  "history_grants_min": 1, "history_grants_max": 3
})";

}  // namespace

TEST_CASE("full pipeline through the C interface") {
  TempDir dir("gp_capi_pipeline");
  const std::string corpus_dir = (dir.path / "corpus").string();

  REQUIRE(gp_synth_generate(kSmallConfig, corpus_dir.c_str()) == GP_OK);
  gp_corpus* corpus = open_corpus(corpus_dir);

  char* summary = nullptr;
  REQUIRE(gp_corpus_summary(corpus, &summary) == GP_OK);
  CHECK(std::string(summary).find("researchers:  220") != std::string::npos);
  gp_string_free(summary);

  char* csv = nullptr;
  REQUIRE(gp_features_csv(corpus, "med", "pubFeat,subjFeatA", 0, &csv) == GP_OK);
  const std::string text = csv;
  gp_string_free(csv);
  CHECK(text.find("pubFeat.total_publications") != std::string::npos);
  CHECK(text.find("label,grant_id") != std::string::npos);
  CHECK(std::count(text.begin(), text.end(), '\n') == 41);  // header + 40 grants

  const std::string options = std::string("{\"fields\":[\"MED\"],\"families\":[\"subjFeatA\"],") +
                              "\"classifiers\":[\"bayes\"],\"repetitions\":2,\"folds\":5," +
                              "\"grid\":false,\"out\":\"" + (dir.path / "results").string() +
                              "\"}";
  char* out_dir = nullptr;
  REQUIRE(gp_experiment_run(corpus, "eval-single", options.c_str(), &out_dir) == GP_OK);
  CHECK(fs::exists(fs::path(out_dir) / "results.csv"));
  CHECK(fs::exists(fs::path(out_dir) / "plot.svg"));
  CHECK(fs::exists(fs::path(out_dir) / "plot_data.csv"));
  gp_string_free(out_dir);

  char* report = nullptr;
  REQUIRE(gp_report_render((dir.path / "results").c_str(), GP_REFERENCE_CSV, &report) == GP_OK);
  const std::string report_text = report;
  gp_string_free(report);
  CHECK(report_text.find("subjFeatA") != std::string::npos);
  CHECK(report_text.find("[ref") != std::string::npos);

  gp_corpus_close(corpus);
}

TEST_CASE("error paths set status and message") {
  gp_corpus* corpus = nullptr;
  CHECK(gp_corpus_open("/nonexistent/grants.jsonl", "/nonexistent/researchers.jsonl",
                       "/nonexistent/publications.jsonl", "/nonexistent/institutions.jsonl",
                       "/nonexistent/taxonomy.jsonl", &corpus) == GP_ERR_IO);
  CHECK(corpus == nullptr);
  CHECK(std::string(gp_last_error()).find("cannot open") != std::string::npos);

  TempDir dir("gp_capi_errors");
  char* report = nullptr;
  CHECK(gp_report_render(dir.path.c_str(), GP_REFERENCE_CSV, &report) == GP_ERR_NO_RESULTS);
  CHECK(std::string(gp_last_error()).find("no results found") != std::string::npos);

  CHECK(gp_synth_generate("{\"base_positive_rate\": 2.0}", (dir.path / "x").c_str()) ==
        GP_ERR_CONFIG);

  CHECK(gp_corpus_summary(nullptr, &report) == GP_ERR_CONFIG);
}
