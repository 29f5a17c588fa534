#include "grantprod/classifiers.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <json.hpp>

#include "grantprod/rng.hpp"

namespace grantprod {

using nlohmann::json;

ClassifierKind parse_classifier_kind(const std::string& name) {
  if (name == "knn" || name == "kNN" || name == "KNN") return ClassifierKind::KNN;
  if (name == "svm" || name == "SVM") return ClassifierKind::SVM;
  if (name == "bayes" || name == "nb" || name == "NaiveBayes") return ClassifierKind::NaiveBayes;
  if (name == "mlp" || name == "MLP") return ClassifierKind::MLP;
  if (name == "dtree" || name == "tree" || name == "DecisionTree" || name == "DTrees") {
    return ClassifierKind::DecisionTree;
  }
  fail(ErrorCode::InvalidConfig, "unknown classifier: '" + name + "'");
}

std::string classifier_kind_name(ClassifierKind kind) {
  switch (kind) {
    case ClassifierKind::KNN: return "kNN";
    case ClassifierKind::SVM: return "SVM";
    case ClassifierKind::NaiveBayes: return "Bayes";
    case ClassifierKind::MLP: return "MLP";
    case ClassifierKind::DecisionTree: return "DTrees";
  }
  return "?";
}

void ClassifierSpec::validate() const {
  auto bad = [](const std::string& msg) { fail(ErrorCode::InvalidHyperparameter, msg); };
  switch (kind) {
    case ClassifierKind::KNN:
      if (knn_k < 1) bad("kNN requires k >= 1");
      break;
    case ClassifierKind::SVM:
      if (svm_c <= 0) bad("SVM requires C > 0");
      if (svm_kernel == SvmKernel::Rbf && svm_gamma <= 0) bad("SVM rbf requires gamma > 0");
      break;
    case ClassifierKind::NaiveBayes:
      if (nb_variance_floor_scale <= 0) bad("NaiveBayes requires variance floor > 0");
      break;
    case ClassifierKind::MLP:
      if (mlp_epochs < 1) bad("MLP requires epochs >= 1");
      if (mlp_learning_rate <= 0) bad("MLP requires learning rate > 0");
      for (int h : mlp_hidden) {
        if (h < 1) bad("MLP hidden layer sizes must be >= 1");
      }
      break;
    case ClassifierKind::DecisionTree:
      if (tree_max_depth < 1) bad("tree requires max depth >= 1");
      if (tree_min_samples_leaf < 1) bad("tree requires min samples per leaf >= 1");
      break;
  }
}

std::string ClassifierSpec::describe() const {
  switch (kind) {
    case ClassifierKind::KNN: return "kNN(k=" + std::to_string(knn_k) + ")";
    case ClassifierKind::SVM: {
      char buf[64];
      std::snprintf(buf, sizeof(buf), "SVM(%s,C=%g%s)",
                    svm_kernel == SvmKernel::Linear ? "linear" : "rbf", svm_c,
                    svm_kernel == SvmKernel::Rbf
                        ? (",gamma=" + std::to_string(svm_gamma)).c_str()
                        : "");
      return buf;
    }
    case ClassifierKind::NaiveBayes: return "Bayes";
    case ClassifierKind::MLP: {
      std::string h;
      for (int s : mlp_hidden) h += (h.empty() ? "" : "x") + std::to_string(s);
      return "MLP(hidden=" + h + ",lr=" + std::to_string(mlp_learning_rate) +
             ",epochs=" + std::to_string(mlp_epochs) + ")";
    }
    case ClassifierKind::DecisionTree:
      return "DTrees(depth=" + std::to_string(tree_max_depth) + ")";
  }
  return "?";
}

namespace {

double squared_distance(std::span<const double> a, std::span<const double> b) {
  double s = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    s += d * d;
  }
  return s;
}

int argmax_first(const std::vector<double>& v) {
  return static_cast<int>(std::max_element(v.begin(), v.end()) - v.begin());
}

// ---------------------------------------------------------------- kNN

class KnnModel : public TrainedModel {
 public:
  KnnModel(const TrainingData& data, int k) : k_(k) {
    feature_count_ = data.col_count;
    class_count_ = data.class_count;
    values_.assign(data.values, data.values + data.row_count * data.col_count);
    labels_.assign(data.labels, data.labels + data.row_count);
    class_frequency_.assign(class_count_, 0);
    for (int y : labels_) class_frequency_[y] += 1;
  }

  ClassifierKind kind() const override { return ClassifierKind::KNN; }

  std::vector<int> votes(std::span<const double> x) const {
    check_dimension(x);
    const std::size_t n = labels_.size();
    std::vector<std::pair<double, std::size_t>> order(n);
    for (std::size_t i = 0; i < n; ++i) {
      order[i] = {squared_distance({values_.data() + i * feature_count_, feature_count_}, x), i};
    }
    // distance ties break toward the lower row index
    std::partial_sort(order.begin(), order.begin() + k_, order.end());
    std::vector<int> counts(class_count_, 0);
    for (int i = 0; i < k_; ++i) counts[labels_[order[i].second]] += 1;
    return counts;
  }

  int predict(std::span<const double> x) const override {
    const auto counts = votes(x);
    int best = 0;
    for (int c = 1; c < class_count_; ++c) {
      if (counts[c] > counts[best] ||
          (counts[c] == counts[best] && class_frequency_[c] > class_frequency_[best])) {
        best = c;
      }
    }
    return best;
  }

  std::vector<double> membership_strength(std::span<const double> x) const override {
    const auto counts = votes(x);
    std::vector<double> out(class_count_);
    // Vote-tie ranking must match predict: nudge by prior frequency.
    const double total_freq = static_cast<double>(labels_.size());
    for (int c = 0; c < class_count_; ++c) {
      out[c] = counts[c] + 1e-9 * class_frequency_[c] / total_freq;
    }
    double sum = std::accumulate(out.begin(), out.end(), 0.0);
    for (double& v : out) v /= sum;
    return out;
  }

  std::string serialize() const override {
    json j{{"kind", "kNN"},
           {"k", k_},
           {"features", feature_count_},
           {"classes", class_count_},
           {"values", values_},
           {"labels", labels_}};
    return j.dump();
  }

 private:
  int k_;
  std::vector<double> values_;
  std::vector<int> labels_;
  std::vector<int> class_frequency_;
};

// ---------------------------------------------------------------- Naive Bayes

class NaiveBayesModel : public TrainedModel {
 public:
  NaiveBayesModel(const TrainingData& data, double floor_scale) {
    feature_count_ = data.col_count;
    class_count_ = data.class_count;
    const std::size_t n = data.row_count, d = data.col_count;

    // Variance floor from the largest overall feature variance.
    double max_var = 0;
    for (std::size_t j = 0; j < d; ++j) {
      double mean = 0;
      for (std::size_t i = 0; i < n; ++i) mean += data.values[i * d + j];
      mean /= static_cast<double>(n);
      double var = 0;
      for (std::size_t i = 0; i < n; ++i) {
        const double dv = data.values[i * d + j] - mean;
        var += dv * dv;
      }
      max_var = std::max(max_var, var / static_cast<double>(n));
    }
    variance_floor_ = max_var > 0 ? floor_scale * max_var : floor_scale;

    priors_.assign(class_count_, 0.0);
    means_.assign(class_count_, std::vector<double>(d, 0.0));
    variances_.assign(class_count_, std::vector<double>(d, 0.0));
    std::vector<int> counts(class_count_, 0);
    for (std::size_t i = 0; i < n; ++i) {
      counts[data.labels[i]] += 1;
      for (std::size_t j = 0; j < d; ++j) means_[data.labels[i]][j] += data.values[i * d + j];
    }
    for (int c = 0; c < class_count_; ++c) {
      priors_[c] = static_cast<double>(counts[c]) / static_cast<double>(n);
      if (counts[c] > 0) {
        for (std::size_t j = 0; j < d; ++j) means_[c][j] /= counts[c];
      }
    }
    for (std::size_t i = 0; i < n; ++i) {
      const int c = data.labels[i];
      for (std::size_t j = 0; j < d; ++j) {
        const double dv = data.values[i * d + j] - means_[c][j];
        variances_[c][j] += dv * dv;
      }
    }
    for (int c = 0; c < class_count_; ++c) {
      for (std::size_t j = 0; j < d; ++j) {
        variances_[c][j] = counts[c] > 0 ? variances_[c][j] / counts[c] : 0.0;
        variances_[c][j] = std::max(variances_[c][j], variance_floor_);
      }
    }
  }

  ClassifierKind kind() const override { return ClassifierKind::NaiveBayes; }

  std::vector<double> log_posteriors(std::span<const double> x) const {
    check_dimension(x);
    std::vector<double> lp(class_count_);
    for (int c = 0; c < class_count_; ++c) {
      double acc = priors_[c] > 0 ? std::log(priors_[c]) : -1e300;
      for (std::size_t j = 0; j < feature_count_; ++j) {
        const double var = variances_[c][j];
        const double dv = x[j] - means_[c][j];
        acc += -0.5 * std::log(2.0 * M_PI * var) - dv * dv / (2.0 * var);
      }
      lp[c] = acc;
    }
    return lp;
  }

  int predict(std::span<const double> x) const override {
    return argmax_first(log_posteriors(x));
  }

  std::vector<double> membership_strength(std::span<const double> x) const override {
    auto lp = log_posteriors(x);
    const double m = *std::max_element(lp.begin(), lp.end());
    double sum = 0;
    for (double& v : lp) {
      v = std::exp(v - m);
      sum += v;
    }
    for (double& v : lp) v /= sum;
    return lp;
  }

  std::string serialize() const override {
    json j{{"kind", "Bayes"},       {"features", feature_count_}, {"classes", class_count_},
           {"priors", priors_},     {"means", means_},            {"variances", variances_},
           {"variance_floor", variance_floor_}};
    return j.dump();
  }

  const std::vector<double>& priors() const { return priors_; }

 private:
  std::vector<double> priors_;
  std::vector<std::vector<double>> means_;
  std::vector<std::vector<double>> variances_;
  double variance_floor_ = 0;
};

// ---------------------------------------------------------------- SVM (SMO)

class SvmModel : public TrainedModel {
 public:
  SvmModel(const TrainingData& data, const ClassifierSpec& spec) : spec_(spec) {
    feature_count_ = data.col_count;
    class_count_ = data.class_count;
    if (class_count_ != 2) {
      fail(ErrorCode::DegenerateData, "SVM implementation is binary only");
    }
    const std::size_t n = data.row_count, d = data.col_count;
    x_.assign(data.values, data.values + n * d);
    y_.resize(n);
    for (std::size_t i = 0; i < n; ++i) y_[i] = data.labels[i] == 1 ? 1.0 : -1.0;
    alphas_.assign(n, 0.0);
    w_.assign(d, 0.0);
    b_ = 0.0;

    if (spec_.svm_kernel == SvmKernel::Rbf) {
      kernel_matrix_.assign(n * n, 0.0);
      for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i; j < n; ++j) {
          const double k = kernel_raw(row(i), row(j));
          kernel_matrix_[i * n + j] = k;
          kernel_matrix_[j * n + i] = k;
        }
      }
    }
    solve();
    // Retain support vectors only (linear decision uses w directly).
    if (spec_.svm_kernel == SvmKernel::Rbf) {
      for (std::size_t i = 0; i < n; ++i) {
        if (alphas_[i] > 1e-12) {
          support_coefficients_.push_back(alphas_[i] * y_[i]);
          support_vectors_.insert(support_vectors_.end(), x_.begin() + i * d,
                                  x_.begin() + (i + 1) * d);
        }
      }
    }
  }

  ClassifierKind kind() const override { return ClassifierKind::SVM; }

  double decision_value(std::span<const double> x) const {
    check_dimension(x);
    if (spec_.svm_kernel == SvmKernel::Linear) {
      double s = b_;
      for (std::size_t j = 0; j < feature_count_; ++j) s += w_[j] * x[j];
      return s;
    }
    double s = b_;
    const std::size_t m = support_coefficients_.size();
    for (std::size_t i = 0; i < m; ++i) {
      s += support_coefficients_[i] *
           kernel_raw({support_vectors_.data() + i * feature_count_, feature_count_}, x);
    }
    return s;
  }

  int predict(std::span<const double> x) const override { return decision_value(x) > 0 ? 1 : 0; }

  std::vector<double> membership_strength(std::span<const double> x) const override {
    const double d = decision_value(x);
    const double p = 1.0 / (1.0 + std::exp(-d));
    return {1.0 - p, p};
  }

  std::string serialize() const override {
    json j{{"kind", "SVM"},
           {"kernel", spec_.svm_kernel == SvmKernel::Linear ? "linear" : "rbf"},
           {"C", spec_.svm_c},
           {"gamma", spec_.svm_gamma},
           {"features", feature_count_},
           {"bias", b_}};
    if (spec_.svm_kernel == SvmKernel::Linear) {
      j["weights"] = w_;
    } else {
      j["support_coefficients"] = support_coefficients_;
      j["support_vectors"] = support_vectors_;
    }
    return j.dump();
  }

 private:
  std::span<const double> row(std::size_t i) const {
    return {x_.data() + i * feature_count_, feature_count_};
  }

  double kernel_raw(std::span<const double> a, std::span<const double> b) const {
    if (spec_.svm_kernel == SvmKernel::Linear) {
      double s = 0;
      for (std::size_t j = 0; j < a.size(); ++j) s += a[j] * b[j];
      return s;
    }
    return std::exp(-spec_.svm_gamma * squared_distance(a, b));
  }

  double kernel(std::size_t i, std::size_t j) const {
    if (spec_.svm_kernel == SvmKernel::Rbf) return kernel_matrix_[i * y_.size() + j];
    return kernel_raw(row(i), row(j));
  }

  double train_decision(std::size_t i) const {
    if (spec_.svm_kernel == SvmKernel::Linear) {
      double s = b_;
      const auto xi = row(i);
      for (std::size_t j = 0; j < feature_count_; ++j) s += w_[j] * xi[j];
      return s;
    }
    double s = b_;
    for (std::size_t j = 0; j < y_.size(); ++j) {
      if (alphas_[j] > 0) s += alphas_[j] * y_[j] * kernel(j, i);
    }
    return s;
  }

  double error(std::size_t i) const { return train_decision(i) - y_[i]; }

  bool take_step(std::size_t i1, std::size_t i2, double e2) {
    if (i1 == i2) return false;
    const double C = spec_.svm_c;
    const double a1 = alphas_[i1], a2 = alphas_[i2];
    const double y1 = y_[i1], y2 = y_[i2];
    const double e1 = error(i1);
    const double s = y1 * y2;
    double lo, hi;
    if (s < 0) {
      lo = std::max(0.0, a2 - a1);
      hi = std::min(C, C + a2 - a1);
    } else {
      lo = std::max(0.0, a1 + a2 - C);
      hi = std::min(C, a1 + a2);
    }
    if (lo >= hi) return false;
    const double k11 = kernel(i1, i1), k22 = kernel(i2, i2), k12 = kernel(i1, i2);
    const double eta = k11 + k22 - 2 * k12;
    if (eta <= 0) return false;
    double a2new = a2 + y2 * (e1 - e2) / eta;
    a2new = std::clamp(a2new, lo, hi);
    if (std::abs(a2new - a2) < 1e-12 * (a2new + a2 + 1e-12)) return false;
    const double a1new = a1 + s * (a2 - a2new);

    const double b1 = b_ - e1 - y1 * (a1new - a1) * k11 - y2 * (a2new - a2) * k12;
    const double b2 = b_ - e2 - y1 * (a1new - a1) * k12 - y2 * (a2new - a2) * k22;
    if (a1new > 0 && a1new < C) {
      b_ = b1;
    } else if (a2new > 0 && a2new < C) {
      b_ = b2;
    } else {
      b_ = 0.5 * (b1 + b2);
    }

    if (spec_.svm_kernel == SvmKernel::Linear) {
      const auto x1 = row(i1), x2 = row(i2);
      for (std::size_t j = 0; j < feature_count_; ++j) {
        w_[j] += y1 * (a1new - a1) * x1[j] + y2 * (a2new - a2) * x2[j];
      }
    }
    alphas_[i1] = a1new;
    alphas_[i2] = a2new;
    return true;
  }

  bool examine(std::size_t i2) {
    const double C = spec_.svm_c, tol = spec_.svm_tolerance;
    const double e2 = error(i2);
    const double r2 = e2 * y_[i2];
    if (!((r2 < -tol && alphas_[i2] < C) || (r2 > tol && alphas_[i2] > 0))) return false;

    // Second-choice heuristic: the partner maximizing |E1 - E2|.
    const std::size_t n = y_.size();
    std::size_t best = i2;
    double best_gap = -1;
    for (std::size_t i = 0; i < n; ++i) {
      if (i == i2) continue;
      const double gap = std::abs(error(i) - e2);
      if (gap > best_gap) {
        best_gap = gap;
        best = i;
      }
    }
    if (best != i2 && take_step(best, i2, e2)) return true;
    for (std::size_t i = 0; i < n; ++i) {
      if (take_step(i, i2, e2)) return true;
    }
    return false;
  }

  void solve() {
    const std::size_t n = y_.size();
    int steps = 0;
    bool examine_all = true;
    int changed = 0;
    while ((changed > 0 || examine_all) && steps < spec_.svm_max_iterations) {
      changed = 0;
      for (std::size_t i = 0; i < n && steps < spec_.svm_max_iterations; ++i) {
        if (!examine_all && (alphas_[i] <= 0 || alphas_[i] >= spec_.svm_c)) continue;
        if (examine(i)) {
          ++changed;
          ++steps;
        }
      }
      if (examine_all) {
        examine_all = false;
      } else if (changed == 0) {
        examine_all = true;
        // One final full pass; loop exits if it changes nothing.
        changed = 0;
        for (std::size_t i = 0; i < n && steps < spec_.svm_max_iterations; ++i) {
          if (examine(i)) {
            ++changed;
            ++steps;
          }
        }
        if (changed == 0) break;
      }
    }
  }

  ClassifierSpec spec_;
  std::vector<double> x_;
  std::vector<double> y_;
  std::vector<double> alphas_;
  std::vector<double> w_;
  double b_ = 0;
  std::vector<double> kernel_matrix_;
  std::vector<double> support_coefficients_;
  std::vector<double> support_vectors_;
};

}  // namespace

// ---------------------------------------------------------------- MLP

MlpNet mlp_init(const std::vector<int>& layer_sizes, std::uint64_t seed) {
  MlpNet net;
  net.layer_sizes = layer_sizes;
  Rng rng(seed);
  for (std::size_t l = 0; l + 1 < layer_sizes.size(); ++l) {
    const int in = layer_sizes[l], out = layer_sizes[l + 1];
    std::vector<double> w(static_cast<std::size_t>(in) * out);
    std::vector<double> b(out);
    for (double& v : w) v = rng.uniform(-0.5, 0.5);
    for (double& v : b) v = rng.uniform(-0.5, 0.5);
    net.weights.push_back(std::move(w));
    net.biases.push_back(std::move(b));
  }
  return net;
}

namespace {

// Forward pass through every layer; activations[0] is the input row.
void mlp_forward(const MlpNet& net, std::span<const double> x,
                 std::vector<std::vector<double>>& activations) {
  const std::size_t layers = net.weights.size();
  activations.resize(layers + 1);
  activations[0].assign(x.begin(), x.end());
  for (std::size_t l = 0; l < layers; ++l) {
    const int in = net.layer_sizes[l], out = net.layer_sizes[l + 1];
    auto& a = activations[l + 1];
    a.assign(out, 0.0);
    for (int o = 0; o < out; ++o) {
      double z = net.biases[l][o];
      for (int i = 0; i < in; ++i) z += net.weights[l][static_cast<std::size_t>(o) * in + i] * activations[l][i];
      a[o] = z;
    }
    if (l + 1 < layers) {
      for (double& v : a) v = std::tanh(v);
    } else {
      const double m = *std::max_element(a.begin(), a.end());
      double sum = 0;
      for (double& v : a) {
        v = std::exp(v - m);
        sum += v;
      }
      for (double& v : a) v /= sum;
    }
  }
}

}  // namespace

double mlp_loss(const MlpNet& net, const TrainingData& data) {
  std::vector<std::vector<double>> activations;
  double loss = 0;
  for (std::size_t i = 0; i < data.row_count; ++i) {
    mlp_forward(net, data.row(i), activations);
    const double p = std::max(activations.back()[data.labels[i]], 1e-300);
    loss -= std::log(p);
  }
  return loss / static_cast<double>(data.row_count);
}

void mlp_gradients(const MlpNet& net, const TrainingData& data, MlpNet& grads) {
  grads.layer_sizes = net.layer_sizes;
  grads.weights.resize(net.weights.size());
  grads.biases.resize(net.biases.size());
  for (std::size_t l = 0; l < net.weights.size(); ++l) {
    grads.weights[l].assign(net.weights[l].size(), 0.0);
    grads.biases[l].assign(net.biases[l].size(), 0.0);
  }

  const std::size_t layers = net.weights.size();
  std::vector<std::vector<double>> activations;
  std::vector<double> delta, next_delta;
  const double inv_n = 1.0 / static_cast<double>(data.row_count);

  for (std::size_t r = 0; r < data.row_count; ++r) {
    mlp_forward(net, data.row(r), activations);
    // Softmax + cross-entropy: output delta = p - onehot(y).
    delta = activations[layers];
    delta[data.labels[r]] -= 1.0;
    for (std::size_t l = layers; l-- > 0;) {
      const int in = net.layer_sizes[l], out = net.layer_sizes[l + 1];
      for (int o = 0; o < out; ++o) {
        grads.biases[l][o] += delta[o] * inv_n;
        for (int i = 0; i < in; ++i) {
          grads.weights[l][static_cast<std::size_t>(o) * in + i] +=
              delta[o] * activations[l][i] * inv_n;
        }
      }
      if (l == 0) break;
      next_delta.assign(in, 0.0);
      for (int i = 0; i < in; ++i) {
        double s = 0;
        for (int o = 0; o < out; ++o) s += net.weights[l][static_cast<std::size_t>(o) * in + i] * delta[o];
        const double a = activations[l][i];  // tanh activation
        next_delta[i] = s * (1.0 - a * a);
      }
      delta.swap(next_delta);
    }
  }
}

namespace {

class MlpModel : public TrainedModel {
 public:
  MlpModel(const TrainingData& data, const ClassifierSpec& spec) {
    feature_count_ = data.col_count;
    class_count_ = data.class_count;
    std::vector<int> sizes;
    sizes.push_back(static_cast<int>(data.col_count));
    for (int h : spec.mlp_hidden) sizes.push_back(h);
    sizes.push_back(class_count_);
    net_ = mlp_init(sizes, spec.mlp_seed);

    MlpNet grads;
    for (int epoch = 0; epoch < spec.mlp_epochs; ++epoch) {
      mlp_gradients(net_, data, grads);
      for (std::size_t l = 0; l < net_.weights.size(); ++l) {
        for (std::size_t i = 0; i < net_.weights[l].size(); ++i) {
          net_.weights[l][i] -= spec.mlp_learning_rate * grads.weights[l][i];
        }
        for (std::size_t i = 0; i < net_.biases[l].size(); ++i) {
          net_.biases[l][i] -= spec.mlp_learning_rate * grads.biases[l][i];
        }
      }
    }
  }

  ClassifierKind kind() const override { return ClassifierKind::MLP; }

  int predict(std::span<const double> x) const override {
    return argmax_first(membership_strength(x));
  }

  std::vector<double> membership_strength(std::span<const double> x) const override {
    check_dimension(x);
    std::vector<std::vector<double>> activations;
    mlp_forward(net_, x, activations);
    return activations.back();
  }

  std::string serialize() const override {
    json j{{"kind", "MLP"},
           {"layer_sizes", net_.layer_sizes},
           {"weights", net_.weights},
           {"biases", net_.biases}};
    return j.dump();
  }

 private:
  MlpNet net_;
};

// ---------------------------------------------------------------- decision tree

struct TreeBuilder {
  const TrainingData& data;
  int max_depth;
  int min_leaf;
  std::vector<TreeNode> nodes;

  int build(std::vector<std::size_t>& rows, int depth) {
    TreeNode node;
    node.class_counts.assign(data.class_count, 0);
    node.sample_count = static_cast<int>(rows.size());
    for (std::size_t r : rows) node.class_counts[data.labels[r]] += 1;
    node.impurity = gini_impurity(node.class_counts);
    const int index = static_cast<int>(nodes.size());
    nodes.push_back(node);

    if (depth >= max_depth || node.impurity <= 0.0 ||
        static_cast<int>(rows.size()) < 2 * min_leaf) {
      return index;
    }

    int best_feature = -1;
    double best_threshold = 0;
    double best_decrease = 0;
    const std::size_t n = rows.size();
    std::vector<std::size_t> order(rows);
    for (std::size_t f = 0; f < data.col_count; ++f) {
      std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return data.values[a * data.col_count + f] < data.values[b * data.col_count + f];
      });
      std::vector<int> left(data.class_count, 0);
      for (std::size_t i = 0; i + 1 < n; ++i) {
        left[data.labels[order[i]]] += 1;
        const double v0 = data.values[order[i] * data.col_count + f];
        const double v1 = data.values[order[i + 1] * data.col_count + f];
        if (v0 == v1) continue;
        const std::size_t nl = i + 1, nr = n - nl;
        if (nl < static_cast<std::size_t>(min_leaf) || nr < static_cast<std::size_t>(min_leaf)) {
          continue;
        }
        std::vector<int> right(data.class_count);
        for (int c = 0; c < data.class_count; ++c) right[c] = node.class_counts[c] - left[c];
        const double child =
            (nl * gini_impurity(left) + nr * gini_impurity(right)) / static_cast<double>(n);
        const double decrease = node.impurity - child;
        // Strict improvement keeps the lowest feature index, then the
        // lowest threshold, deterministic.
        if (decrease > best_decrease + 1e-12) {
          best_decrease = decrease;
          best_feature = static_cast<int>(f);
          // The midpoint can round onto v0 or v1 for adjacent floats; fall
          // back to v0 so the "x <= threshold" partition stays non-empty on
          // both sides.
          const double mid = 0.5 * (v0 + v1);
          best_threshold = (mid > v0 && mid < v1) ? mid : v0;
        }
      }
    }
    if (best_feature < 0) return index;

    std::vector<std::size_t> left_rows, right_rows;
    for (std::size_t r : rows) {
      if (data.values[r * data.col_count + best_feature] <= best_threshold) {
        left_rows.push_back(r);
      } else {
        right_rows.push_back(r);
      }
    }
    rows.clear();
    rows.shrink_to_fit();
    const int left = build(left_rows, depth + 1);
    const int right = build(right_rows, depth + 1);
    nodes[index].feature = best_feature;
    nodes[index].threshold = best_threshold;
    nodes[index].left = left;
    nodes[index].right = right;
    return index;
  }
};

std::unique_ptr<DecisionTreeModel> build_tree(const TrainingData& data, int max_depth,
                                              int min_leaf) {
  TreeBuilder builder{data, max_depth, min_leaf, {}};
  std::vector<std::size_t> rows(data.row_count);
  std::iota(rows.begin(), rows.end(), 0);
  builder.build(rows, 0);
  return std::make_unique<DecisionTreeModel>(std::move(builder.nodes), data.col_count,
                                             data.class_count);
}

}  // namespace

DecisionTreeModel::DecisionTreeModel(std::vector<TreeNode> nodes, std::size_t features,
                                     int classes)
    : nodes_(std::move(nodes)) {
  feature_count_ = features;
  class_count_ = classes;
}

int DecisionTreeModel::predict(std::span<const double> x) const {
  return argmax_first(membership_strength(x));
}

std::vector<double> DecisionTreeModel::membership_strength(std::span<const double> x) const {
  check_dimension(x);
  int i = 0;
  while (!nodes_[i].is_leaf()) {
    i = x[nodes_[i].feature] <= nodes_[i].threshold ? nodes_[i].left : nodes_[i].right;
  }
  const TreeNode& leaf = nodes_[i];
  std::vector<double> out(class_count_);
  for (int c = 0; c < class_count_; ++c) {
    out[c] = static_cast<double>(leaf.class_counts[c]) / leaf.sample_count;
  }
  return out;
}

std::string DecisionTreeModel::serialize() const {
  json arr = json::array();
  for (const auto& n : nodes_) {
    arr.push_back(json{{"feature", n.feature},
                       {"threshold", n.threshold},
                       {"left", n.left},
                       {"right", n.right},
                       {"class_counts", n.class_counts},
                       {"impurity", n.impurity},
                       {"n", n.sample_count}});
  }
  json j{{"kind", "DTrees"}, {"features", feature_count_}, {"classes", class_count_}, {"nodes", arr}};
  return j.dump();
}

double gini_impurity(const std::vector<int>& class_counts) {
  long long total = 0;
  for (int c : class_counts) total += c;
  if (total <= 0) fail(ErrorCode::EmptyNode, "gini impurity of an empty node");
  double sum = 0;
  for (int c : class_counts) {
    const double p = static_cast<double>(c) / static_cast<double>(total);
    sum += p * p;
  }
  return 1.0 - sum;
}

std::vector<double> feature_importances(const TrainedModel& model) {
  const auto* tree = dynamic_cast<const DecisionTreeModel*>(&model);
  if (!tree) fail(ErrorCode::WrongModelKind, "feature importances require a decision tree");
  const auto& nodes = tree->nodes();
  std::vector<double> importances(model.feature_count(), 0.0);
  if (nodes.empty()) return importances;
  const double total = nodes[0].sample_count;
  for (const auto& node : nodes) {
    if (node.is_leaf()) continue;
    const TreeNode& l = nodes[node.left];
    const TreeNode& r = nodes[node.right];
    const double child = (l.sample_count * l.impurity + r.sample_count * r.impurity) /
                         static_cast<double>(node.sample_count);
    importances[node.feature] += node.sample_count / total * (node.impurity - child);
  }
  double sum = std::accumulate(importances.begin(), importances.end(), 0.0);
  if (sum > 0) {
    for (double& v : importances) v /= sum;
  }
  return importances;
}

std::vector<double> bagged_importances(const TrainingData& data, int tree_count,
                                       std::uint64_t seed, int max_depth, int min_samples_leaf) {
  Rng rng(seed);
  const std::size_t n = data.row_count, d = data.col_count;
  std::vector<double> mean(d, 0.0);
  std::vector<double> sample_values(n * d);
  std::vector<int> sample_labels(n);
  int trees_with_splits = 0;
  for (int t = 0; t < tree_count; ++t) {
    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t src = rng.uniform_index(n);
      std::copy(data.values + src * d, data.values + (src + 1) * d, sample_values.begin() + i * d);
      sample_labels[i] = data.labels[src];
    }
    TrainingData boot{sample_values.data(), n, d, sample_labels.data(), data.class_count};
    auto tree = build_tree(boot, max_depth, min_samples_leaf);
    auto imp = feature_importances(*tree);
    double sum = std::accumulate(imp.begin(), imp.end(), 0.0);
    if (sum <= 0) continue;
    ++trees_with_splits;
    for (std::size_t j = 0; j < d; ++j) mean[j] += imp[j];
  }
  double total = std::accumulate(mean.begin(), mean.end(), 0.0);
  if (total > 0) {
    for (double& v : mean) v /= total;
  }
  (void)trees_with_splits;
  return mean;
}

// ---------------------------------------------------------------- dispatcher

std::unique_ptr<TrainedModel> train(const ClassifierSpec& spec, const TrainingData& data) {
  spec.validate();
  if (data.row_count < 2) fail(ErrorCode::DegenerateData, "need at least 2 training rows");
  std::vector<int> counts(data.class_count, 0);
  for (std::size_t i = 0; i < data.row_count; ++i) {
    const int y = data.labels[i];
    if (y < 0 || y >= data.class_count) fail(ErrorCode::DegenerateData, "label out of range");
    counts[y] += 1;
  }
  int present = 0;
  for (int c : counts) present += c > 0 ? 1 : 0;
  if (present < 2) fail(ErrorCode::DegenerateData, "training data has a single class");
  for (std::size_t i = 0; i < data.row_count * data.col_count; ++i) {
    if (!std::isfinite(data.values[i])) fail(ErrorCode::DegenerateData, "non-finite feature value");
  }

  switch (spec.kind) {
    case ClassifierKind::KNN:
      if (data.row_count < static_cast<std::size_t>(spec.knn_k)) {
        fail(ErrorCode::InvalidHyperparameter, "kNN requires rows >= k");
      }
      return std::make_unique<KnnModel>(data, spec.knn_k);
    case ClassifierKind::SVM:
      return std::make_unique<SvmModel>(data, spec);
    case ClassifierKind::NaiveBayes:
      return std::make_unique<NaiveBayesModel>(data, spec.nb_variance_floor_scale);
    case ClassifierKind::MLP:
      return std::make_unique<MlpModel>(data, spec);
    case ClassifierKind::DecisionTree:
      return build_tree(data, spec.tree_max_depth, spec.tree_min_samples_leaf);
  }
  fail(ErrorCode::InvalidConfig, "unhandled classifier kind");
}

}  // namespace grantprod
