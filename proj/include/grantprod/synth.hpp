#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "grantprod/corpus.hpp"

namespace grantprod {

// Synthetic corpus generator with analytically known label structure.
// Effects shift the per-grant positive probability; all probabilities must
// stay inside (0, 1).
struct GeneratorConfig {
  std::uint64_t seed = 1;

  int researchers = 600;
  int institutions = 20;
  int abroad_institutions = 3;
  int subjects = 40;
  int grants_per_field = 100;
  std::vector<ResearchField> fields = {ResearchField::MED, ResearchField::DENT,
                                       ResearchField::VET};

  double base_positive_rate = 0.5;

  double subject_effect = 0.0;          // grants mentioning the hot subject
  double hot_subject_prevalence = 0.5;  // fraction of PIs specialized in it

  double institution_effect = 0.0;
  double strong_institution_fraction = 0.25;

  double publication_effect = 0.0;
  double prolific_fraction = 0.5;

  int history_grants_min = 1;
  int history_grants_max = 5;
  int subj_b_k = 10;
  int productivity_threshold = 1;

  void validate() const;  // throws InvalidConfig
  static GeneratorConfig from_json(const std::string& text);
  std::string to_json() const;
};

struct GrantTruth {
  std::string grant_id;
  ResearchField field = ResearchField::OTHER;
  double label_probability = 0;
  Label label = Label::Unproductive;
  bool hot_subject = false;
  bool strong_institution = false;
  bool prolific = false;
  // family name -> expected feature values, independent bookkeeping.
  std::map<std::string, std::vector<double>> features;
};

struct GroundTruth {
  double bayes_accuracy = 0.5;
  double expected_positive_rate = 0.5;
  GeneratorConfig config;
  std::map<std::string, GrantTruth> by_grant;

  const GrantTruth& at(const std::string& grant_id) const;
};

struct SynthPaths {
  CorpusPaths corpus;
  std::string ground_truth;

  static SynthPaths in_dir(const std::string& dir);
};

// Writes the five corpus files plus the ground-truth record file.
GroundTruth generate(const GeneratorConfig& config, const SynthPaths& paths);

GroundTruth load_ground_truth(const std::string& path);

// Closed-form accuracy of the Bayes-optimal predictor over the effect
// branches (class marginal is assumed near 0.5; exact on balanced draws).
double bayes_accuracy(const GeneratorConfig& config);
double expected_positive_rate(const GeneratorConfig& config);

}  // namespace grantprod
