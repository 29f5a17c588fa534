// Command-line front end. All functionality goes through the C API in
// grantprod.h; this file only does argument plumbing.
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "grantprod.h"

namespace {

using nlohmann::json;

int status_to_exit(gp_status status) {
  if (status == GP_OK) return 0;
  if (status == GP_ERR_CONFIG || status == GP_ERR_NO_RESULTS) return 2;
  return 1;
}

int report_failure(gp_status status) {
  std::cerr << "error: " << gp_last_error() << "\n";
  return status_to_exit(status);
}

struct CorpusArgs {
  std::string dir;

  void attach(CLI::App* cmd) {
    cmd->add_option("--corpus", dir,
                    "Directory holding grants.jsonl, researchers.jsonl, publications.jsonl, "
                    "institutions.jsonl, taxonomy.jsonl")
        ->required();
  }

  gp_status open(gp_corpus** out) const {
    return gp_corpus_open((dir + "/grants.jsonl").c_str(), (dir + "/researchers.jsonl").c_str(),
                          (dir + "/publications.jsonl").c_str(),
                          (dir + "/institutions.jsonl").c_str(),
                          (dir + "/taxonomy.jsonl").c_str(), out);
  }
};

struct ExperimentArgs {
  CorpusArgs corpus;
  std::vector<std::string> fields;
  std::vector<std::string> families;
  std::vector<std::string> classifiers;
  std::vector<int> k_values;
  std::uint64_t seed = 1;
  int repetitions = 10;
  int folds = 10;
  bool paper_mode = false;
  bool no_grid = false;
  int subset_trials = 0;
  std::vector<int> subset_sizes;
  std::string out_dir = "results";

  void attach(CLI::App* cmd) {
    corpus.attach(cmd);
    cmd->add_option("--field", fields, "Research field filter (med, dent, vet); repeatable")
        ->delimiter(',');
    cmd->add_option("--families", families, "Feature family subset; default all")->delimiter(',');
    cmd->add_option("--classifiers", classifiers, "Classifier subset; default all")
        ->delimiter(',');
    cmd->add_option("--k", k_values, "Top-k presets for feature selection")->delimiter(',');
    cmd->add_option("--seed", seed, "Base random seed");
    cmd->add_option("--repetitions", repetitions, "Cross-validation repetitions");
    cmd->add_option("--folds", folds, "Cross-validation folds");
    cmd->add_flag("--paper-mode", paper_mode,
                  "Whole-dataset success statistics instead of leakage-safe per-grant scope");
    cmd->add_flag("--no-grid", no_grid, "Skip inner-fold hyperparameter search");
    cmd->add_option("--trials", subset_trials, "Random subset draws per size (eval-combo)");
    cmd->add_option("--sizes", subset_sizes, "Subset sizes to draw (eval-combo)")->delimiter(',');
    cmd->add_option("--out", out_dir, "Output directory root");
  }

  std::string to_json() const {
    json j;
    if (!fields.empty()) j["fields"] = fields;
    if (!families.empty()) j["families"] = families;
    if (!classifiers.empty()) j["classifiers"] = classifiers;
    if (!k_values.empty()) j["k"] = k_values;
    j["seed"] = seed;
    j["repetitions"] = repetitions;
    j["folds"] = folds;
    j["paper_mode"] = paper_mode;
    j["grid"] = !no_grid;
    if (subset_trials > 0) j["subset_trials"] = subset_trials;
    if (!subset_sizes.empty()) j["subset_sizes"] = subset_sizes;
    j["out"] = out_dir;
    return j.dump();
  }
};

int run_experiment(const ExperimentArgs& args, const std::string& name) {
  gp_corpus* corpus = nullptr;
  gp_status status = args.corpus.open(&corpus);
  if (status != GP_OK) return report_failure(status);
  char* dir = nullptr;
  status = gp_experiment_run(corpus, name.c_str(), args.to_json().c_str(), &dir);
  gp_corpus_close(corpus);
  if (status != GP_OK) return report_failure(status);
  std::cout << "wrote " << dir << "\n";
  gp_string_free(dir);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Research grant productivity prediction experiments"};
  app.require_subcommand(1);

  CorpusArgs ingest_args;
  auto* ingest = app.add_subcommand("ingest", "Load a corpus and print the ingestion report");
  ingest_args.attach(ingest);

  CorpusArgs feat_corpus;
  std::string feat_field, feat_out;
  std::vector<std::string> feat_families;
  bool feat_paper_mode = false;
  auto* features = app.add_subcommand("features", "Write the feature matrix as CSV");
  feat_corpus.attach(features);
  features->add_option("--field", feat_field, "Research field (med, dent, vet)")->required();
  features->add_option("--families", feat_families, "Feature family subset; default all")
      ->delimiter(',');
  features->add_flag("--paper-mode", feat_paper_mode, "Whole-dataset success statistics");
  features->add_option("--out", feat_out, "Output file; default stdout");

  ExperimentArgs single_args, combo_args, select_args, vote_args;
  single_args.attach(app.add_subcommand(
      "eval-single", "Cross-validate each feature family individually"));
  combo_args.attach(app.add_subcommand(
      "eval-combo", "Random search over feature family combinations"));
  select_args.attach(app.add_subcommand(
      "select", "Rank features by bagged-tree relevance and evaluate top-k subsets"));
  vote_args.attach(app.add_subcommand("vote", "Evaluate voting ensembles (All and Best)"));

  std::string synth_config_path, synth_out = "synth";
  std::uint64_t synth_seed = 0;
  bool synth_seed_set = false;
  auto* synth = app.add_subcommand("synth", "Generate a synthetic corpus with known structure");
  synth->add_option("--config", synth_config_path, "Generator config JSON file");
  synth->add_option("--seed", synth_seed, "Override the generator seed")
      ->each([&](const std::string&) { synth_seed_set = true; });
  synth->add_option("--out", synth_out, "Output directory");

  std::string report_results = "results", report_reference = "data/paper_reference.csv";
  std::string report_out;
  auto* report = app.add_subcommand("report", "Render result tables beside reference values");
  report->add_option("--results", report_results, "Directory scanned for results.csv files");
  report->add_option("--reference", report_reference, "Reference values CSV");
  report->add_option("--out", report_out, "Output file; default stdout");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  if (ingest->parsed()) {
    gp_corpus* corpus = nullptr;
    gp_status status = ingest_args.open(&corpus);
    if (status != GP_OK) return report_failure(status);
    char* text = nullptr;
    status = gp_corpus_summary(corpus, &text);
    gp_corpus_close(corpus);
    if (status != GP_OK) return report_failure(status);
    std::cout << text;
    gp_string_free(text);
    return 0;
  }
  if (features->parsed()) {
    gp_corpus* corpus = nullptr;
    gp_status status = feat_corpus.open(&corpus);
    if (status != GP_OK) return report_failure(status);
    std::string families;
    for (const auto& f : feat_families) {
      if (!families.empty()) families += ',';
      families += f;
    }
    char* csv = nullptr;
    status = gp_features_csv(corpus, feat_field.c_str(), families.c_str(),
                             feat_paper_mode ? 1 : 0, &csv);
    gp_corpus_close(corpus);
    if (status != GP_OK) return report_failure(status);
    if (feat_out.empty()) {
      std::cout << csv;
    } else {
      std::ofstream out(feat_out, std::ios::binary);
      if (!out) {
        std::cerr << "error: cannot write '" << feat_out << "'\n";
        gp_string_free(csv);
        return 1;
      }
      out << csv;
    }
    gp_string_free(csv);
    return 0;
  }
  if (app.get_subcommand("eval-single")->parsed()) return run_experiment(single_args, "eval-single");
  if (app.get_subcommand("eval-combo")->parsed()) return run_experiment(combo_args, "eval-combo");
  if (app.get_subcommand("select")->parsed()) return run_experiment(select_args, "select");
  if (app.get_subcommand("vote")->parsed()) return run_experiment(vote_args, "vote");
  if (synth->parsed()) {
    std::string config_text;
    if (!synth_config_path.empty()) {
      std::ifstream in(synth_config_path, std::ios::binary);
      if (!in) {
        std::cerr << "error: cannot open '" << synth_config_path << "'\n";
        return 2;
      }
      std::stringstream buffer;
      buffer << in.rdbuf();
      config_text = buffer.str();
    }
    if (synth_seed_set) {
      json j = config_text.empty() ? json::object() : json::parse(config_text, nullptr, false);
      if (j.is_discarded()) {
        std::cerr << "error: config file is not valid JSON\n";
        return 2;
      }
      j["seed"] = synth_seed;
      config_text = j.dump();
    }
    gp_status status = gp_synth_generate(config_text.c_str(), synth_out.c_str());
    if (status != GP_OK) return report_failure(status);
    std::cout << "wrote " << synth_out << "\n";
    return 0;
  }
  if (report->parsed()) {
    char* text = nullptr;
    gp_status status =
        gp_report_render(report_results.c_str(), report_reference.c_str(), &text);
    if (status != GP_OK) return report_failure(status);
    if (report_out.empty()) {
      std::cout << text;
    } else {
      std::ofstream out(report_out, std::ios::binary);
      if (!out) {
        std::cerr << "error: cannot write '" << report_out << "'\n";
        gp_string_free(text);
        return 1;
      }
      out << text;
    }
    gp_string_free(text);
    return 0;
  }
  return 2;
}
