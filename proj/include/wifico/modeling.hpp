#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "wifico/config.hpp"
#include "wifico/stats.hpp"

namespace wifico {

using Matrix = Eigen::MatrixXd;  // NaN marks a missing cell
using Vector = Eigen::VectorXd;
using Indices = std::vector<std::size_t>;

// ---- preprocessing ----

struct InstructorScaler {
  struct Moments {
    double mean = 0.0;
    double std = 1.0;
  };
  std::map<std::string, Moments> per_instructor;
  Moments global;
  std::vector<std::string> warnings;

  double apply(double score, const std::string& instructor) const;
};

// Per-instructor z-scores from train rows (population std; std 0 becomes 1).
// Instructors with fewer than 2 train rows use the global transform.
InstructorScaler fit_instructor_scaler(const Vector& scores,
                                       const std::vector<std::string>& instructors,
                                       const Indices& train);

Vector scale_targets_by_instructor(const Vector& scores,
                                   const std::vector<std::string>& instructors,
                                   const Indices& train, InstructorScaler* fitted = nullptr);

// Replaces every NaN with its column's train mean (0 for all-missing
// columns). Returns the means.
Vector impute_mean(Matrix& m, const Indices& train, std::vector<std::string>* warnings = nullptr);

// Column z-scores from train statistics; zero-variance columns become 0.
void standardize(Matrix& m, const Indices& train);

Matrix take_rows(const Matrix& m, const Indices& rows);
Vector take_rows(const Vector& v, const Indices& rows);
Matrix take_columns(const Matrix& m, const Indices& cols);

// ---- feature selection ----

// Bin index per value: equal-frequency bins over ranks, ties share the bin
// of their first rank.
std::vector<int> equal_frequency_bins(const Vector& x, int bins);

// Plug-in mutual information (nats) between binned x and binned y.
double mutual_information(const Vector& x, const Vector& y, int bins = 8);

// Columns by decreasing MI; ties keep the lower index first.
Indices mi_ranking(const Matrix& x, const Vector& y, int bins = 8);

// Top-k columns by MI, returned in ranking order. Throws Error unless
// 1 <= k <= columns.
Indices mi_select(const Matrix& x, const Vector& y, std::size_t k, int bins = 8);

// ---- estimators ----

enum class EstimatorKind { LinearRegression, DecisionTree, GradientBoost };
std::string_view to_string(EstimatorKind k);

struct TreeParams {
  int max_depth = 3;
  std::size_t min_leaf = 5;
};

struct BoostParams {
  int rounds = 100;
  double learning_rate = 0.1;
  TreeParams tree;
};

class Regressor {
 public:
  virtual ~Regressor() = default;
  // Throws Error when the train set has fewer than 2 rows.
  virtual void fit(const Matrix& x, const Vector& y) = 0;
  virtual Vector predict(const Matrix& x) const = 0;
};

class LinearRegression final : public Regressor {
 public:
  static constexpr double kRidge = 1e-8;
  void fit(const Matrix& x, const Vector& y) override;
  Vector predict(const Matrix& x) const override;
  const Vector& coefficients() const { return coef_; }
  double intercept() const { return intercept_; }

 private:
  Vector coef_;
  double intercept_ = 0.0;
};

// Presorted row orders per column, shared across trees on one matrix.
struct SortedColumns {
  explicit SortedColumns(const Matrix& x);
  std::vector<std::vector<std::uint32_t>> order;
  std::vector<std::vector<double>> values;  // x(order[c][i], c)
};

class RegressionTree {
 public:
  // Level-wise CART on squared error. `gains` accumulates per-feature
  // SSE reduction and must have x.cols() entries.
  void fit(const Matrix& x, const Vector& y, const SortedColumns& sorted, const TreeParams& params,
           Vector* gains = nullptr);
  // Leaf value of each training row from the last fit.
  const std::vector<double>& fitted() const { return fitted_; }
  double predict_row(const Matrix& x, Eigen::Index row) const;
  std::size_t node_count() const { return nodes_.size(); }

 private:
  struct Node {
    int feature = -1;  // -1 = leaf
    double threshold = 0.0;
    int left = -1, right = -1;
    double value = 0.0;
  };
  std::vector<Node> nodes_;
  std::vector<double> fitted_;
};

class DecisionTree final : public Regressor {
 public:
  explicit DecisionTree(TreeParams params = {}) : params_(params) {}
  void fit(const Matrix& x, const Vector& y) override;
  Vector predict(const Matrix& x) const override;

 private:
  TreeParams params_;
  RegressionTree tree_;
};

class GradientBoost final : public Regressor {
 public:
  explicit GradientBoost(BoostParams params = {}) : params_(params) {}
  void fit(const Matrix& x, const Vector& y) override;
  Vector predict(const Matrix& x) const override;

  // Train RMSE after 0..rounds trees.
  const std::vector<double>& train_rmse() const { return train_rmse_; }
  // Per-feature share of the total variance reduction; sums to 1 unless no
  // split was made.
  const Vector& feature_importance() const { return importance_; }

 private:
  BoostParams params_;
  double base_ = 0.0;
  std::vector<RegressionTree> trees_;
  std::vector<double> train_rmse_;
  Vector importance_;
};

std::unique_ptr<Regressor> make_regressor(EstimatorKind kind, const BoostParams& boost,
                                          const TreeParams& tree);

// ---- cross-validation ----

// Fold per sample. Groups are placed largest first into the currently
// smallest fold; the seed orders equal-sized groups. Throws Error without
// groups or when folds exceed the number of groups.
std::vector<int> group_kfold(const std::vector<std::string>& groups, int folds, std::uint64_t seed);

double rmse(const Vector& a, const Vector& b);

// ---- study ----

struct ModelDefinition {
  std::string name;
  Indices columns;  // into StudyData::features; empty for the median baseline
};

struct StudyData {
  std::vector<std::string> users;
  std::vector<std::string> groups;
  std::vector<std::string> instructors;
  Matrix features;  // all candidate columns
  std::vector<std::string> feature_names;
  Vector scores;
  std::vector<ModelDefinition> models;
};

struct StudyConfig {
  int folds = 5;
  int inner_folds = 3;
  std::size_t k_max = 30;
  std::optional<std::size_t> fixed_k;  // nullopt = auto
  int mi_bins = 8;
  std::vector<EstimatorKind> estimators{EstimatorKind::LinearRegression,
                                        EstimatorKind::DecisionTree,
                                        EstimatorKind::GradientBoost};
  BoostParams boost;
  TreeParams tree;
  double zou_confidence = 0.90;
  std::string reference_model = "M_gWF";
  std::uint64_t seed = 1;
};

struct EstimatorResult {
  EstimatorKind estimator = EstimatorKind::LinearRegression;
  Correlation correlation;
  double rmse = 0.0;
  std::vector<std::size_t> selected_k;  // per outer fold
  Vector predictions;                   // out of fold, scaled target space
};

struct ModelResult {
  std::string name;
  std::optional<EstimatorKind> estimator;  // nullopt for the median baseline
  Correlation correlation;
  double rmse = 0.0;
  std::vector<std::size_t> selected_k;
  Vector predictions;
  std::vector<EstimatorResult> candidates;
  std::vector<std::pair<std::string, double>> importances;  // descending
};

struct ZouComparison {
  std::string reference;
  std::string other;
  double r_kh = 0.0;
  ZouInterval interval;
};

struct EvaluationResult {
  std::vector<int> folds;
  Vector actual;  // scaled out-of-fold targets
  std::vector<ModelResult> models;
  std::vector<ZouComparison> comparisons;
  std::vector<std::string> warnings;

  const ModelResult& model(const std::string& name) const;
};

// Keys: seed, folds, inner_folds, k (auto or a count), k_max, mi_bins,
// estimators (comma list of linear, tree, boost), boost_rounds,
// learning_rate, max_depth, min_leaf, zou_confidence, reference_model.
void apply(KeyValueConfig& kv, StudyConfig& config);

EvaluationResult run_study(const StudyData& data, const StudyConfig& config);

void write_results_json(const std::string& path, const EvaluationResult& result,
                        const StudyData& data);
std::string markdown_summary(const EvaluationResult& result);

}  // namespace wifico
