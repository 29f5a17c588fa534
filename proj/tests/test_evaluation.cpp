#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <set>

#include "grantprod/evaluation.hpp"
#include "grantprod/rng.hpp"

using namespace grantprod;

namespace {

FeatureMatrix matrix_with_labels(int positives, int negatives, std::uint64_t seed,
                                 double separation = 0.0, std::size_t cols = 3) {
  Rng rng(seed);
  FeatureMatrix m;
  for (std::size_t j = 0; j < cols; ++j) {
    m.column_names.push_back("f" + std::to_string(j));
    m.column_families.push_back(Family::PubFeat);
  }
  int serial = 0;
  auto add = [&](Label label, int count) {
    for (int i = 0; i < count; ++i) {
      for (std::size_t j = 0; j < cols; ++j) {
        const double base = label == Label::Productive ? separation : 0.0;
        m.values.push_back(base + rng.uniform(-1.0, 1.0));
      }
      m.labels.push_back(label);
      char id[16];
      std::snprintf(id, sizeof(id), "2015/%05d-%d", ++serial, serial % 10);
      m.instance_ids.push_back(id);
    }
  };
  add(Label::Productive, positives);
  add(Label::Unproductive, negatives);
  return m;
}

}  // namespace

TEST_CASE("balance undersamples the majority class") {
  const FeatureMatrix m = matrix_with_labels(100, 40, 1);
  const FeatureMatrix b = balance(m, 7);
  int pos = 0, neg = 0;
  for (Label l : b.labels) (l == Label::Productive ? pos : neg) += 1;
  CHECK(pos == 40);
  CHECK(neg == 40);
  CHECK(b.rows() == 80);
  CHECK(b.cols() == m.cols());

  // Deterministic for a fixed seed; different for another.
  CHECK(balance(m, 7).to_csv() == b.to_csv());
  CHECK(balance(m, 8).to_csv() != b.to_csv());

  // Every kept row is one of the original rows.
  std::set<std::string> original(m.instance_ids.begin(), m.instance_ids.end());
  for (const auto& id : b.instance_ids) CHECK(original.count(id) == 1);
}

TEST_CASE("standardization maps a two-point column to -1 and 1") {
  FeatureMatrix m;
  m.column_names = {"a", "b"};
  m.column_families = {Family::PubFeat, Family::PubFeat};
  m.values = {0.0, 5.0, 2.0, 5.0};  // column b is constant
  m.labels = {Label::Productive, Label::Unproductive};
  m.instance_ids = {"g1", "g2"};

  const StandardizeParams params = fit_standardize(m);
  FeatureMatrix scaled = m;
  apply_standardize(params, scaled);
  CHECK(scaled.values[0] == doctest::Approx(-1.0));
  CHECK(scaled.values[2] == doctest::Approx(1.0));
  CHECK(scaled.values[1] == 0.0);  // constant columns collapse to zero
  CHECK(scaled.values[3] == 0.0);
}

TEST_CASE("fold plans are disjoint, covering, balanced and stratified") {
  const FeatureMatrix m = matrix_with_labels(55, 40, 3);
  const FoldPlan plan = make_folds(m.labels, 10, 42);
  REQUIRE(plan.assignments.size() == 95);

  std::vector<int> sizes(10, 0);
  std::vector<std::vector<int>> per_class(10, std::vector<int>(2, 0));
  for (std::size_t i = 0; i < plan.assignments.size(); ++i) {
    const int f = plan.assignments[i];
    REQUIRE(f >= 0);
    REQUIRE(f < 10);
    sizes[f] += 1;
    per_class[f][m.labels[i] == Label::Productive ? 1 : 0] += 1;
  }
  const auto [lo, hi] = std::minmax_element(sizes.begin(), sizes.end());
  CHECK(*hi - *lo <= 1);
  for (int f = 0; f < 10; ++f) {
    CHECK(per_class[f][0] >= 1);
    CHECK(per_class[f][1] >= 1);
  }

  // Stratification: class counts per fold differ by at most one.
  for (int c = 0; c < 2; ++c) {
    int lo_c = per_class[0][c], hi_c = per_class[0][c];
    for (int f = 1; f < 10; ++f) {
      lo_c = std::min(lo_c, per_class[f][c]);
      hi_c = std::max(hi_c, per_class[f][c]);
    }
    CHECK(hi_c - lo_c <= 1);
  }
}

TEST_CASE("binomial tail p-values") {
  CHECK(binomial_p_value(600, 1000, 0.5) < 1e-9);
  CHECK(binomial_p_value(2, 2, 0.5) == doctest::Approx(0.25));
  CHECK(binomial_p_value(1, 2, 0.5) == doctest::Approx(0.75));
  CHECK(binomial_p_value(0, 10, 0.5) == doctest::Approx(1.0));
  CHECK(binomial_p_value(0, 0, 0.5) == 1.0);
}

TEST_CASE("cross-validation on separable data is accurate and significant") {
  const FeatureMatrix m = matrix_with_labels(60, 60, 5, 6.0);
  ClassifierSpec spec;
  spec.kind = ClassifierKind::DecisionTree;
  CrossValidationOptions options;
  options.repetitions = 3;
  options.seed = 9;
  const EvaluationReport report = cross_validate(spec, m, options);
  CHECK(report.accuracy_mean > 95.0);
  CHECK(report.significant);
  CHECK(report.repetitions == 3);
  CHECK(report.folds == 10);
  CHECK(report.fold_accuracies.size() == 30);
  CHECK(report.pooled_total == 3 * 120);

  // Same seed reproduces the exact report; another seed differs somewhere.
  const EvaluationReport again = cross_validate(spec, m, options);
  CHECK(again.accuracy_mean == report.accuracy_mean);
  CHECK(again.fold_accuracies == report.fold_accuracies);
}

TEST_CASE("cross-validation near chance is not significant") {
  const FeatureMatrix m = matrix_with_labels(60, 60, 6, 0.0);
  ClassifierSpec spec;
  spec.kind = ClassifierKind::NaiveBayes;
  CrossValidationOptions options;
  options.repetitions = 3;
  const EvaluationReport report = cross_validate(spec, m, options);
  CHECK(report.accuracy_mean < 62.0);
  CHECK(report.accuracy_mean > 38.0);
}

TEST_CASE("grid search ties keep the earlier entry") {
  const FeatureMatrix m = matrix_with_labels(40, 40, 8, 5.0);
  ClassifierSpec a;
  a.kind = ClassifierKind::KNN;
  a.knn_k = 3;
  ClassifierSpec b = a;
  b.knn_k = 3;  // identical performance by construction
  const ClassifierSpec winner = grid_search({a, b}, m, 3, 4);
  CHECK(winner.knn_k == 3);
  CHECK(winner.describe() == a.describe());

  CHECK_THROWS_AS(grid_search({}, m, 3, 4), Error);
}

TEST_CASE("default grids are non-empty for every classifier") {
  for (ClassifierKind kind : {ClassifierKind::DecisionTree, ClassifierKind::SVM,
                              ClassifierKind::KNN, ClassifierKind::NaiveBayes,
                              ClassifierKind::MLP}) {
    const auto grid = default_grid(kind);
    CHECK(!grid.empty());
    for (const auto& spec : grid) CHECK(spec.kind == kind);
  }
}
