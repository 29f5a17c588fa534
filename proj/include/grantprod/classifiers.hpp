#pragma once

#include <memory>
#include <span>
#include <string>
#include <vector>

#include "grantprod/error.hpp"

namespace grantprod {

enum class ClassifierKind { KNN, SVM, NaiveBayes, MLP, DecisionTree };

ClassifierKind parse_classifier_kind(const std::string& name);
std::string classifier_kind_name(ClassifierKind kind);

enum class SvmKernel { Linear, Rbf };

struct ClassifierSpec {
  ClassifierKind kind = ClassifierKind::DecisionTree;

  int knn_k = 5;

  SvmKernel svm_kernel = SvmKernel::Linear;
  double svm_c = 1.0;
  double svm_gamma = 0.1;
  double svm_tolerance = 1e-4;
  int svm_max_iterations = 20000;

  double nb_variance_floor_scale = 1e-9;

  std::vector<int> mlp_hidden = {16};
  double mlp_learning_rate = 0.05;
  int mlp_epochs = 200;
  std::uint64_t mlp_seed = 1;

  int tree_max_depth = 10;
  int tree_min_samples_leaf = 2;

  void validate() const;  // throws InvalidHyperparameter
  std::string describe() const;
};

// Training data view: row-major values with integer class labels.
struct TrainingData {
  const double* values = nullptr;
  std::size_t row_count = 0;
  std::size_t col_count = 0;
  const int* labels = nullptr;  // in [0, class_count)
  int class_count = 2;

  std::span<const double> row(std::size_t i) const { return {values + i * col_count, col_count}; }
};

class TrainedModel {
 public:
  virtual ~TrainedModel() = default;

  virtual ClassifierKind kind() const = 0;
  virtual int predict(std::span<const double> x) const = 0;
  // Per-class membership strength; sums to 1 and argmax agrees with predict.
  virtual std::vector<double> membership_strength(std::span<const double> x) const = 0;
  virtual std::string serialize() const = 0;  // self-describing JSON record

  std::size_t feature_count() const { return feature_count_; }
  int class_count() const { return class_count_; }

 protected:
  void check_dimension(std::span<const double> x) const {
    if (x.size() != feature_count_) {
      fail(ErrorCode::DimensionMismatch,
           "expected " + std::to_string(feature_count_) + " features, got " +
               std::to_string(x.size()));
    }
  }

  std::size_t feature_count_ = 0;
  int class_count_ = 2;
};

std::unique_ptr<TrainedModel> train(const ClassifierSpec& spec, const TrainingData& data);

// --- decision tree internals, exposed for importance ranking and oracles ---

struct TreeNode {
  int feature = -1;  // -1 marks a leaf
  double threshold = 0.0;
  int left = -1;
  int right = -1;
  std::vector<int> class_counts;
  double impurity = 0.0;
  int sample_count = 0;

  bool is_leaf() const { return feature < 0; }
};

class DecisionTreeModel : public TrainedModel {
 public:
  DecisionTreeModel(std::vector<TreeNode> nodes, std::size_t features, int classes);

  ClassifierKind kind() const override { return ClassifierKind::DecisionTree; }
  int predict(std::span<const double> x) const override;
  std::vector<double> membership_strength(std::span<const double> x) const override;
  std::string serialize() const override;

  const std::vector<TreeNode>& nodes() const { return nodes_; }

 private:
  std::vector<TreeNode> nodes_;
};

double gini_impurity(const std::vector<int>& class_counts);

// Normalized mean impurity decrease per feature; throws WrongModelKind for
// non-tree models.
std::vector<double> feature_importances(const TrainedModel& model);

// Mean of single-tree importances over a bagged ensemble (bootstrap rows,
// seeded); normalized to sum 1.
std::vector<double> bagged_importances(const TrainingData& data, int tree_count,
                                       std::uint64_t seed, int max_depth = 8,
                                       int min_samples_leaf = 1);

// --- MLP internals, exposed for the finite-difference gradient oracle ---

struct MlpNet {
  std::vector<int> layer_sizes;               // input, hidden..., output
  std::vector<std::vector<double>> weights;   // weights[l][out * in_size + in]
  std::vector<std::vector<double>> biases;
};

MlpNet mlp_init(const std::vector<int>& layer_sizes, std::uint64_t seed);
double mlp_loss(const MlpNet& net, const TrainingData& data);  // mean cross-entropy
void mlp_gradients(const MlpNet& net, const TrainingData& data, MlpNet& grads);

}  // namespace grantprod
