#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "grantprod/classifiers.hpp"
#include "grantprod/features.hpp"

namespace grantprod {

struct FoldPlan {
  int k = 10;
  std::vector<int> assignments;  // instance index -> fold id
  std::uint64_t seed = 0;
};

struct EvaluationReport {
  std::string config;
  double accuracy_mean = 0;  // percent
  double accuracy_std = 0;   // percent, over repetitions
  int repetitions = 0;
  int folds = 0;
  std::vector<double> fold_accuracies;  // k * repetitions entries
  long long pooled_correct = 0;
  long long pooled_total = 0;
  double baseline_rate = 0.5;
  double p_value = 1.0;
  bool significant = false;  // at alpha = 0.01
};

// Random undersampling of the majority class to the minority count.
FeatureMatrix balance(const FeatureMatrix& m, std::uint64_t seed);

struct StandardizeParams {
  std::vector<double> means;
  std::vector<double> stds;  // 0 marks a constant column, which maps to 0
};

StandardizeParams fit_standardize(const FeatureMatrix& train);
void apply_standardize(const StandardizeParams& params, FeatureMatrix& m);

FoldPlan make_folds(const std::vector<Label>& labels, int k, std::uint64_t seed);

// One-sided binomial tail P(X >= correct) under the baseline rate.
double binomial_p_value(long long correct, long long trials, double baseline_rate);

struct CrossValidationOptions {
  int k = 10;
  int repetitions = 10;
  std::uint64_t seed = 1;
  double baseline_rate = 0.5;
  int inner_k = 3;  // inner folds for grid search
  bool rebalance_per_repetition = true;
  std::vector<ClassifierSpec> grid;  // empty: use the fixed spec as-is
};

EvaluationReport cross_validate(const ClassifierSpec& spec, const FeatureMatrix& matrix,
                                const CrossValidationOptions& options);

// Returns the grid point maximizing mean inner-fold accuracy; ties keep
// the earlier grid entry.
ClassifierSpec grid_search(const std::vector<ClassifierSpec>& grid, const FeatureMatrix& train,
                           int inner_k, std::uint64_t seed);

// Default, documented hyperparameter grids per classifier.
std::vector<ClassifierSpec> default_grid(ClassifierKind kind);

// Shared CV driver: the trainer maps a training matrix to a predictor.
using TrainFn =
    std::function<std::function<int(std::span<const double>)>(const FeatureMatrix& train)>;

EvaluationReport cross_validate_with(const TrainFn& trainer, const FeatureMatrix& matrix,
                                     const CrossValidationOptions& options, std::string config);

// Helpers shared with the ensemble evaluation path.
FeatureMatrix select_rows(const FeatureMatrix& m, const std::vector<std::size_t>& rows);
TrainingData as_training_data(const FeatureMatrix& m, std::vector<int>& label_buffer);

}  // namespace grantprod
