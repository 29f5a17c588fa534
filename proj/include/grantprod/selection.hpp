#pragma once

#include <functional>
#include <string>
#include <vector>

#include "grantprod/evaluation.hpp"

namespace grantprod {

struct FeatureRanking {
  std::vector<std::pair<std::string, double>> entries;  // non-increasing scores, sum 1
  std::uint64_t seed = 0;
  std::string data_descriptor;
};

enum class VotingMode { All, Best };

struct VotingConfig {
  VotingMode mode = VotingMode::All;
  std::vector<ClassifierSpec> members;
};

VotingConfig make_voting_config(VotingMode mode);

// Gini relevance from a seeded bagged ensemble of decision trees. Rows are
// canonicalized by instance id before seeding the bagging sampler.
struct RankingOptions {
  int tree_count = 100;
  int max_depth = 8;
  int min_samples_leaf = 1;
};

FeatureRanking rank_features(const FeatureMatrix& matrix, std::uint64_t seed,
                             const RankingOptions& options = {});

std::vector<std::string> top_k(const FeatureRanking& ranking, int k);

FeatureMatrix select_columns(const FeatureMatrix& m, const std::vector<std::string>& names);

// One member's output on a single instance.
struct MemberOutput {
  int label = 0;
  std::vector<double> strengths;  // per class, sums to 1
};

// Majority vote; vote ties fall back to summed membership strength, then
// to the lexicographically smaller class name.
int vote_from_outputs(const std::vector<MemberOutput>& outputs,
                      const std::vector<std::string>& class_names);

int vote(const VotingConfig& config, const std::vector<const TrainedModel*>& members,
         std::span<const double> x, const std::vector<std::string>& class_names);

// Cross-validation where the per-fold predictor is a voting ensemble.
EvaluationReport cross_validate_voting(const VotingConfig& config, const FeatureMatrix& matrix,
                                       const CrossValidationOptions& options);

struct SubsetSearchResult {
  std::vector<std::string> best_subset;  // family names, sorted
  EvaluationReport report;
};

using SubsetEvaluator = std::function<EvaluationReport(const std::vector<std::string>& families)>;

SubsetSearchResult random_subset_search(const std::vector<std::string>& families,
                                        const std::vector<int>& sizes, int trials,
                                        const SubsetEvaluator& evaluator, std::uint64_t seed);

}  // namespace grantprod
