#include "grantprod/selection.hpp"

#include <algorithm>
#include <numeric>

#include "grantprod/rng.hpp"

namespace grantprod {

VotingConfig make_voting_config(VotingMode mode) {
  VotingConfig config;
  config.mode = mode;
  auto add = [&](ClassifierKind kind) {
    ClassifierSpec spec;
    spec.kind = kind;
    config.members.push_back(spec);
  };
  if (mode == VotingMode::All) {
    add(ClassifierKind::DecisionTree);
    add(ClassifierKind::SVM);
    add(ClassifierKind::KNN);
    add(ClassifierKind::NaiveBayes);
    add(ClassifierKind::MLP);
  } else {
    add(ClassifierKind::SVM);
    add(ClassifierKind::MLP);
  }
  return config;
}

FeatureRanking rank_features(const FeatureMatrix& matrix, std::uint64_t seed,
                             const RankingOptions& options) {
  if (matrix.rows() == 0 || matrix.cols() == 0) {
    fail(ErrorCode::InsufficientData, "cannot rank features of an empty matrix");
  }
  // Canonical row order makes the ranking independent of input order.
  std::vector<std::size_t> order(matrix.rows());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return matrix.instance_ids[a] < matrix.instance_ids[b];
  });
  const FeatureMatrix canonical = select_rows(matrix, order);

  std::vector<int> label_buffer;
  const TrainingData data = as_training_data(canonical, label_buffer);
  const std::vector<double> scores = bagged_importances(
      data, options.tree_count, seed, options.max_depth, options.min_samples_leaf);

  FeatureRanking ranking;
  ranking.seed = seed;
  ranking.data_descriptor =
      std::to_string(matrix.rows()) + "x" + std::to_string(matrix.cols());
  for (std::size_t j = 0; j < matrix.cols(); ++j) {
    ranking.entries.emplace_back(matrix.column_names[j], scores[j]);
  }
  std::sort(ranking.entries.begin(), ranking.entries.end(), [](const auto& a, const auto& b) {
    if (a.second != b.second) return a.second > b.second;
    return a.first < b.first;
  });
  return ranking;
}

std::vector<std::string> top_k(const FeatureRanking& ranking, int k) {
  if (k < 1 || k > static_cast<int>(ranking.entries.size())) {
    fail(ErrorCode::KOutOfRange,
         "k=" + std::to_string(k) + " outside [1, " + std::to_string(ranking.entries.size()) + "]");
  }
  std::vector<std::string> names;
  names.reserve(k);
  for (int i = 0; i < k; ++i) names.push_back(ranking.entries[i].first);
  return names;
}

FeatureMatrix select_columns(const FeatureMatrix& m, const std::vector<std::string>& names) {
  std::vector<std::size_t> cols;
  for (const auto& name : names) {
    auto it = std::find(m.column_names.begin(), m.column_names.end(), name);
    if (it == m.column_names.end()) {
      fail(ErrorCode::UnknownFamily, "no such feature column: '" + name + "'");
    }
    cols.push_back(static_cast<std::size_t>(it - m.column_names.begin()));
  }
  FeatureMatrix out;
  for (std::size_t c : cols) {
    out.column_names.push_back(m.column_names[c]);
    out.column_families.push_back(m.column_families[c]);
  }
  out.labels = m.labels;
  out.instance_ids = m.instance_ids;
  out.values.reserve(m.rows() * cols.size());
  for (std::size_t i = 0; i < m.rows(); ++i) {
    for (std::size_t c : cols) out.values.push_back(m.row(i)[c]);
  }
  return out;
}

int vote_from_outputs(const std::vector<MemberOutput>& outputs,
                      const std::vector<std::string>& class_names) {
  if (outputs.empty()) fail(ErrorCode::EmptyEnsemble, "voting over an empty ensemble");
  const int classes = static_cast<int>(class_names.size());
  std::vector<int> votes(classes, 0);
  std::vector<double> strength(classes, 0.0);
  for (const auto& out : outputs) {
    if (out.label < 0 || out.label >= classes ||
        static_cast<int>(out.strengths.size()) != classes) {
      fail(ErrorCode::DimensionMismatch, "member output does not match class count");
    }
    votes[out.label] += 1;
    for (int c = 0; c < classes; ++c) strength[c] += out.strengths[c];
  }
  const int max_votes = *std::max_element(votes.begin(), votes.end());
  int winner = -1;
  for (int c = 0; c < classes; ++c) {
    if (votes[c] != max_votes) continue;
    if (winner < 0) {
      winner = c;
      continue;
    }
    if (strength[c] > strength[winner]) {
      winner = c;
    } else if (strength[c] == strength[winner] && class_names[c] < class_names[winner]) {
      winner = c;
    }
  }
  return winner;
}

int vote(const VotingConfig& config, const std::vector<const TrainedModel*>& members,
         std::span<const double> x, const std::vector<std::string>& class_names) {
  (void)config;
  if (members.empty()) fail(ErrorCode::EmptyEnsemble, "voting over an empty ensemble");
  std::vector<MemberOutput> outputs;
  outputs.reserve(members.size());
  for (const TrainedModel* m : members) {
    outputs.push_back({m->predict(x), m->membership_strength(x)});
  }
  return vote_from_outputs(outputs, class_names);
}

EvaluationReport cross_validate_voting(const VotingConfig& config, const FeatureMatrix& matrix,
                                       const CrossValidationOptions& options) {
  static const std::vector<std::string> kClassNames = {"Unproductive", "Productive"};
  TrainFn trainer = [&](const FeatureMatrix& train_m) {
    StandardizeParams params = fit_standardize(train_m);
    FeatureMatrix scaled = train_m;
    apply_standardize(params, scaled);
    std::vector<int> label_buffer;
    const TrainingData data = as_training_data(scaled, label_buffer);
    auto models = std::make_shared<std::vector<std::unique_ptr<TrainedModel>>>();
    for (const auto& spec : config.members) models->push_back(train(spec, data));
    return std::function<int(std::span<const double>)>(
        [models, params](std::span<const double> x) {
          std::vector<double> z(x.begin(), x.end());
          for (std::size_t j = 0; j < z.size(); ++j) {
            z[j] = params.stds[j] > 0 ? (z[j] - params.means[j]) / params.stds[j] : 0.0;
          }
          std::vector<MemberOutput> outputs;
          for (const auto& m : *models) {
            outputs.push_back({m->predict(z), m->membership_strength(z)});
          }
          return vote_from_outputs(outputs, kClassNames);
        });
  };
  const std::string mode = config.mode == VotingMode::All ? "All" : "Best";
  return cross_validate_with(trainer, matrix, options, "Voting(" + mode + ")");
}

SubsetSearchResult random_subset_search(const std::vector<std::string>& families,
                                        const std::vector<int>& sizes, int trials,
                                        const SubsetEvaluator& evaluator, std::uint64_t seed) {
  if (trials < 1) fail(ErrorCode::InvalidConfig, "subset search requires trials >= 1");
  for (int s : sizes) {
    if (s < 1 || s > static_cast<int>(families.size())) {
      fail(ErrorCode::InvalidConfig, "subset size out of range: " + std::to_string(s));
    }
  }
  Rng rng(seed);
  std::vector<std::vector<std::string>> candidates;
  for (int s : sizes) {
    for (int t = 0; t < trials; ++t) {
      std::vector<std::string> pool = families;
      rng.shuffle(pool);
      pool.resize(static_cast<std::size_t>(s));
      std::sort(pool.begin(), pool.end());
      candidates.push_back(std::move(pool));
    }
  }
  // De-duplicate; small family pools repeat subsets quickly.
  std::sort(candidates.begin(), candidates.end());
  candidates.erase(std::unique(candidates.begin(), candidates.end()), candidates.end());

  SubsetSearchResult best;
  bool have_best = false;
  for (const auto& subset : candidates) {
    EvaluationReport report = evaluator(subset);
    const bool better =
        !have_best || report.accuracy_mean > best.report.accuracy_mean ||
        (report.accuracy_mean == best.report.accuracy_mean &&
         (subset.size() < best.best_subset.size() ||
          (subset.size() == best.best_subset.size() && subset < best.best_subset)));
    if (better) {
      best.best_subset = subset;
      best.report = std::move(report);
      have_best = true;
    }
  }
  return best;
}

}  // namespace grantprod
