#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "grantprod/selection.hpp"

namespace grantprod {

// Shared configuration for the four experiment drivers. Empty family or
// classifier lists mean "all".
struct ExperimentOptions {
  std::vector<ResearchField> fields = {ResearchField::MED, ResearchField::DENT,
                                       ResearchField::VET};
  std::vector<Family> families;
  std::vector<ClassifierKind> classifiers;
  std::vector<int> k_values = {10, 20, 50, 100};
  std::uint64_t seed = 1;
  int repetitions = 10;
  int folds = 10;
  bool paper_mode = false;
  bool use_grid = true;
  std::vector<int> subset_sizes = {2, 3, 4};
  int subset_trials = 10;
  int productivity_threshold = 1;
  std::string out_dir = "results";

  std::vector<Family> effective_families() const;
  std::vector<ClassifierKind> effective_classifiers() const;
  // Canonical config string; hashed into the output directory name.
  std::string descriptor(const std::string& experiment) const;
};

// One line of the shared results-table schema.
struct ResultRow {
  std::string experiment;
  std::string field;
  std::string row_key;
  std::string classifier;
  double accuracy_mean = 0;
  double accuracy_std = 0;
  int repetitions = 0;
  double p_value = 1;
  bool significant = false;
  std::uint64_t seed = 0;
};

std::string results_header();
std::string format_result_row(const ResultRow& row);
std::vector<ResultRow> parse_results_csv(const std::string& text);

ResultRow to_result_row(const EvaluationReport& report, const std::string& experiment,
                        const std::string& field, const std::string& row_key,
                        const std::string& classifier, std::uint64_t seed);

// <out_dir>/<experiment>-<hash of canonical config>
std::string experiment_output_dir(const ExperimentOptions& options, const std::string& experiment);

// Keep only the columns whose family is in the subset.
FeatureMatrix select_families(const FeatureMatrix& m, const std::vector<Family>& subset);

// Each driver writes results.csv plus a plain-text summary into its output
// directory and returns that directory.
std::string run_eval_single(const GrantCorpus& corpus, const ExperimentOptions& options);
std::string run_eval_combo(const GrantCorpus& corpus, const ExperimentOptions& options);
std::string run_select(const GrantCorpus& corpus, const ExperimentOptions& options);
std::string run_vote(const GrantCorpus& corpus, const ExperimentOptions& options);

// Grouped bar chart (one bar per field and family, best classifier) plus
// the plotted numbers. Values are copied verbatim from the rows.
void emit_plot(const std::vector<ResultRow>& single_rows, const std::string& svg_path,
               const std::string& data_path);

// Renders the result tables with published reference values side by side.
// Scans results_root recursively for results.csv files; throws
// MissingResults when none contain any rows.
std::string render_report(const std::string& results_root, const std::string& reference_csv);

}  // namespace grantprod
