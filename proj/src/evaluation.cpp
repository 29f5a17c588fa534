#include "grantprod/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "grantprod/rng.hpp"

namespace grantprod {

FeatureMatrix select_rows(const FeatureMatrix& m, const std::vector<std::size_t>& rows) {
  FeatureMatrix out;
  out.column_names = m.column_names;
  out.column_families = m.column_families;
  out.values.reserve(rows.size() * m.cols());
  for (std::size_t r : rows) {
    out.values.insert(out.values.end(), m.row(r), m.row(r) + m.cols());
    out.labels.push_back(m.labels[r]);
    out.instance_ids.push_back(m.instance_ids[r]);
  }
  return out;
}

TrainingData as_training_data(const FeatureMatrix& m, std::vector<int>& label_buffer) {
  label_buffer.resize(m.rows());
  for (std::size_t i = 0; i < m.rows(); ++i) {
    label_buffer[i] = m.labels[i] == Label::Productive ? 1 : 0;
  }
  return TrainingData{m.values.data(), m.rows(), m.cols(), label_buffer.data(), 2};
}

namespace {

std::unique_ptr<TrainedModel> train_on_matrix(const ClassifierSpec& spec, const FeatureMatrix& m,
                                              std::vector<int>& label_buffer) {
  const TrainingData data = as_training_data(m, label_buffer);
  return train(spec, data);
}

}  // namespace

FeatureMatrix balance(const FeatureMatrix& m, std::uint64_t seed) {
  std::vector<std::size_t> positives, negatives;
  for (std::size_t i = 0; i < m.rows(); ++i) {
    (m.labels[i] == Label::Productive ? positives : negatives).push_back(i);
  }
  if (positives.empty() || negatives.empty()) {
    fail(ErrorCode::DegenerateData, "balance requires both classes present");
  }
  auto& majority = positives.size() >= negatives.size() ? positives : negatives;
  auto& minority = positives.size() >= negatives.size() ? negatives : positives;

  Rng rng(seed);
  rng.shuffle(majority);
  majority.resize(minority.size());

  std::vector<std::size_t> keep;
  keep.reserve(2 * minority.size());
  keep.insert(keep.end(), minority.begin(), minority.end());
  keep.insert(keep.end(), majority.begin(), majority.end());
  std::sort(keep.begin(), keep.end());
  return select_rows(m, keep);
}

StandardizeParams fit_standardize(const FeatureMatrix& train) {
  if (train.rows() == 0) fail(ErrorCode::DegenerateData, "cannot standardize an empty matrix");
  const std::size_t n = train.rows(), d = train.cols();
  StandardizeParams p;
  p.means.assign(d, 0.0);
  p.stds.assign(d, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < d; ++j) p.means[j] += train.row(i)[j];
  }
  for (double& m : p.means) m /= static_cast<double>(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < d; ++j) {
      const double dv = train.row(i)[j] - p.means[j];
      p.stds[j] += dv * dv;
    }
  }
  for (double& s : p.stds) s = std::sqrt(s / static_cast<double>(n));
  return p;
}

void apply_standardize(const StandardizeParams& params, FeatureMatrix& m) {
  const std::size_t d = m.cols();
  if (params.means.size() != d) fail(ErrorCode::DimensionMismatch, "standardize params mismatch");
  for (std::size_t i = 0; i < m.rows(); ++i) {
    double* row = m.values.data() + i * d;
    for (std::size_t j = 0; j < d; ++j) {
      row[j] = params.stds[j] > 0 ? (row[j] - params.means[j]) / params.stds[j] : 0.0;
    }
  }
}

FoldPlan make_folds(const std::vector<Label>& labels, int k, std::uint64_t seed) {
  if (k < 2) fail(ErrorCode::InvalidConfig, "need k >= 2 folds");
  std::vector<std::size_t> positives, negatives;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    (labels[i] == Label::Productive ? positives : negatives).push_back(i);
  }
  if (positives.size() < static_cast<std::size_t>(k) ||
      negatives.size() < static_cast<std::size_t>(k)) {
    fail(ErrorCode::InsufficientData, "each class must have at least k instances");
  }
  FoldPlan plan;
  plan.k = k;
  plan.seed = seed;
  plan.assignments.assign(labels.size(), -1);
  Rng rng(seed);
  std::size_t cursor = 0;
  for (auto* cls : {&negatives, &positives}) {
    rng.shuffle(*cls);
    for (std::size_t idx : *cls) {
      plan.assignments[idx] = static_cast<int>(cursor % k);
      ++cursor;
    }
  }

  // Plan invariants: coverage, size balance, stratification.
  std::vector<int> sizes(k, 0), pos(k, 0), neg(k, 0);
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const int f = plan.assignments[i];
    if (f < 0 || f >= k) fail(ErrorCode::InvalidConfig, "fold plan does not cover all instances");
    sizes[f] += 1;
    (labels[i] == Label::Productive ? pos : neg)[f] += 1;
  }
  const auto [mn, mx] = std::minmax_element(sizes.begin(), sizes.end());
  if (*mx - *mn > 1) fail(ErrorCode::InvalidConfig, "fold sizes differ by more than 1");
  for (int f = 0; f < k; ++f) {
    if (pos[f] < 1 || neg[f] < 1) fail(ErrorCode::InvalidConfig, "fold misses a class");
  }
  return plan;
}

double binomial_p_value(long long correct, long long trials, double baseline_rate) {
  if (trials <= 0) return 1.0;
  if (correct <= 0) return 1.0;
  if (baseline_rate <= 0.0) return correct > 0 ? 0.0 : 1.0;
  if (baseline_rate >= 1.0) return 1.0;
  const double log_p = std::log(baseline_rate);
  const double log_q = std::log1p(-baseline_rate);
  double tail = 0;
  for (long long i = correct; i <= trials; ++i) {
    const double log_term = std::lgamma(trials + 1.0) - std::lgamma(i + 1.0) -
                            std::lgamma(trials - i + 1.0) + i * log_p + (trials - i) * log_q;
    tail += std::exp(log_term);
  }
  return std::min(tail, 1.0);
}

EvaluationReport cross_validate_with(const TrainFn& trainer, const FeatureMatrix& matrix,
                                     const CrossValidationOptions& options, std::string config) {
  EvaluationReport report;
  report.config = std::move(config);
  report.repetitions = options.repetitions;
  report.folds = options.k;
  report.baseline_rate = options.baseline_rate;

  std::vector<double> rep_accuracies;
  FeatureMatrix balanced_once;
  if (!options.rebalance_per_repetition) balanced_once = balance(matrix, options.seed);

  for (int rep = 0; rep < options.repetitions; ++rep) {
    const std::uint64_t rep_seed = options.seed + 1000003ull * static_cast<std::uint64_t>(rep);
    const FeatureMatrix balanced =
        options.rebalance_per_repetition ? balance(matrix, rep_seed) : balanced_once;
    const FoldPlan plan = make_folds(balanced.labels, options.k, rep_seed ^ 0x5bd1e995ull);

    long long rep_correct = 0, rep_total = 0;
    for (int f = 0; f < options.k; ++f) {
      std::vector<std::size_t> train_rows, test_rows;
      for (std::size_t i = 0; i < balanced.rows(); ++i) {
        (plan.assignments[i] == f ? test_rows : train_rows).push_back(i);
      }
      const FeatureMatrix train_m = select_rows(balanced, train_rows);
      auto predictor = trainer(train_m);
      long long correct = 0;
      for (std::size_t r : test_rows) {
        const int truth = balanced.labels[r] == Label::Productive ? 1 : 0;
        if (predictor({balanced.row(r), balanced.cols()}) == truth) ++correct;
      }
      report.fold_accuracies.push_back(static_cast<double>(correct) /
                                       static_cast<double>(test_rows.size()));
      rep_correct += correct;
      rep_total += static_cast<long long>(test_rows.size());
    }
    report.pooled_correct += rep_correct;
    report.pooled_total += rep_total;
    rep_accuracies.push_back(static_cast<double>(rep_correct) / static_cast<double>(rep_total));
  }

  double mean = std::accumulate(rep_accuracies.begin(), rep_accuracies.end(), 0.0) /
                static_cast<double>(rep_accuracies.size());
  double var = 0;
  for (double a : rep_accuracies) var += (a - mean) * (a - mean);
  var /= static_cast<double>(rep_accuracies.size());
  report.accuracy_mean = 100.0 * mean;
  report.accuracy_std = 100.0 * std::sqrt(var);
  report.p_value = binomial_p_value(report.pooled_correct, report.pooled_total, options.baseline_rate);
  report.significant = report.p_value < 0.01;
  return report;
}

namespace {

double inner_fold_accuracy(const ClassifierSpec& spec, const FeatureMatrix& train, int inner_k,
                           std::uint64_t seed) {
  std::size_t pos = 0, neg = 0;
  for (Label l : train.labels) (l == Label::Productive ? pos : neg)++;
  const int k = std::min<int>(inner_k, static_cast<int>(std::min(pos, neg)));
  std::vector<int> label_buffer;
  if (k < 2) {
    // Too small to split: fall back to training accuracy.
    auto model = train_on_matrix(spec, train, label_buffer);
    long long correct = 0;
    for (std::size_t i = 0; i < train.rows(); ++i) {
      const int truth = train.labels[i] == Label::Productive ? 1 : 0;
      if (model->predict({train.row(i), train.cols()}) == truth) ++correct;
    }
    return static_cast<double>(correct) / static_cast<double>(train.rows());
  }
  const FoldPlan plan = make_folds(train.labels, k, seed);
  long long correct = 0, total = 0;
  for (int f = 0; f < k; ++f) {
    std::vector<std::size_t> fit_rows, val_rows;
    for (std::size_t i = 0; i < train.rows(); ++i) {
      (plan.assignments[i] == f ? val_rows : fit_rows).push_back(i);
    }
    FeatureMatrix fit_m = select_rows(train, fit_rows);
    const StandardizeParams params = fit_standardize(fit_m);
    apply_standardize(params, fit_m);
    auto model = train_on_matrix(spec, fit_m, label_buffer);
    for (std::size_t r : val_rows) {
      FeatureMatrix one = select_rows(train, {r});
      apply_standardize(params, one);
      const int truth = train.labels[r] == Label::Productive ? 1 : 0;
      if (model->predict({one.row(0), one.cols()}) == truth) ++correct;
      ++total;
    }
  }
  return static_cast<double>(correct) / static_cast<double>(total);
}

}  // namespace

ClassifierSpec grid_search(const std::vector<ClassifierSpec>& grid, const FeatureMatrix& train,
                           int inner_k, std::uint64_t seed) {
  if (grid.empty()) fail(ErrorCode::InvalidConfig, "empty hyperparameter grid");
  std::size_t best = 0;
  double best_acc = -1;
  for (std::size_t g = 0; g < grid.size(); ++g) {
    const double acc = inner_fold_accuracy(grid[g], train, inner_k, seed);
    if (acc > best_acc) {  // strict: ties keep the earlier grid entry
      best_acc = acc;
      best = g;
    }
  }
  return grid[best];
}

std::vector<ClassifierSpec> default_grid(ClassifierKind kind) {
  std::vector<ClassifierSpec> grid;
  switch (kind) {
    case ClassifierKind::KNN:
      for (int k : {1, 3, 5, 7, 11}) {
        ClassifierSpec s;
        s.kind = kind;
        s.knn_k = k;
        grid.push_back(s);
      }
      break;
    case ClassifierKind::SVM:
      for (double c : {0.1, 1.0, 10.0}) {
        ClassifierSpec s;
        s.kind = kind;
        s.svm_kernel = SvmKernel::Linear;
        s.svm_c = c;
        grid.push_back(s);
      }
      break;
    case ClassifierKind::NaiveBayes: {
      ClassifierSpec s;
      s.kind = kind;
      grid.push_back(s);
      break;
    }
    case ClassifierKind::MLP:
      for (int h : {8, 16}) {
        ClassifierSpec s;
        s.kind = kind;
        s.mlp_hidden = {h};
        s.mlp_epochs = 150;
        grid.push_back(s);
      }
      break;
    case ClassifierKind::DecisionTree:
      for (int d : {3, 5, 10}) {
        ClassifierSpec s;
        s.kind = kind;
        s.tree_max_depth = d;
        grid.push_back(s);
      }
      break;
  }
  return grid;
}

EvaluationReport cross_validate(const ClassifierSpec& spec, const FeatureMatrix& matrix,
                                const CrossValidationOptions& options) {
  std::uint64_t search_counter = 0;
  TrainFn trainer = [&](const FeatureMatrix& train_m) {
    const ClassifierSpec used =
        options.grid.empty()
            ? spec
            : grid_search(options.grid, train_m, options.inner_k,
                          options.seed ^ (0xabcdull + 7919ull * ++search_counter));
    StandardizeParams params = fit_standardize(train_m);
    FeatureMatrix scaled = train_m;
    apply_standardize(params, scaled);
    std::vector<int> label_buffer;
    std::shared_ptr<TrainedModel> model =
        train_on_matrix(used, scaled, label_buffer);
    return std::function<int(std::span<const double>)>(
        [model, params](std::span<const double> x) {
          std::vector<double> z(x.begin(), x.end());
          for (std::size_t j = 0; j < z.size(); ++j) {
            z[j] = params.stds[j] > 0 ? (z[j] - params.means[j]) / params.stds[j] : 0.0;
          }
          return model->predict(z);
        });
  };
  return cross_validate_with(trainer, matrix, options, spec.describe());
}

}  // namespace grantprod
