#include <doctest.h>

#include <cmath>
#include <random>
#include <set>

#include "fixtures.hpp"
#include "oracles.hpp"
#include "wifico/error.hpp"
#include "wifico/modeling.hpp"
#include "wifico/stats.hpp"

using namespace wifico;

namespace {

Matrix random_matrix(Eigen::Index rows, Eigen::Index cols, std::mt19937_64& rng) {
  std::normal_distribution<double> normal;
  Matrix m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i)
    for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = normal(rng);
  return m;
}

}  // namespace

TEST_CASE("instructor scaling uses train rows only") {
  Vector s(6);
  s << 10, 20, 30, 1, 2, 100;
  std::vector<std::string> inst{"a", "a", "a", "b", "b", "b"};
  Indices train{0, 1, 2, 3, 4};
  InstructorScaler fitted;
  auto z = scale_targets_by_instructor(s, inst, train, &fitted);
  CHECK(fitted.per_instructor.at("a").mean == 20);
  CHECK(fitted.per_instructor.at("b").mean == 1.5);
  CHECK(z(1) == 0.0);
  CHECK(z(3) == doctest::Approx(-1.0));
  CHECK(z(5) == doctest::Approx((100 - 1.5) / 0.5));

  Indices sparse{0, 1, 3};
  auto g = fit_instructor_scaler(s, inst, sparse);
  CHECK_FALSE(g.per_instructor.contains("b"));
  CHECK_FALSE(g.warnings.empty());
}

TEST_CASE("mean imputation and standardization") {
  const double nan = std::numeric_limits<double>::quiet_NaN();
  Matrix m(4, 3);
  m << 1, nan, 5, 3, nan, 5, nan, nan, 5, 100, 7, 5;
  Indices train{0, 1, 2};
  auto means = impute_mean(m, train);
  CHECK(means(0) == 2.0);
  CHECK(means(1) == 0.0);
  CHECK(m(2, 0) == 2.0);
  CHECK(m(0, 1) == 0.0);
  CHECK(m(3, 1) == 7.0);
  standardize(m, train);
  CHECK(m(0, 0) == doctest::Approx(-1.0 / std::sqrt(2.0 / 3.0)));
  CHECK(m(3, 2) == 0.0);
  CHECK(m.allFinite());
}

TEST_CASE("row and column selection") {
  Matrix m(3, 2);
  m << 1, 2, 3, 4, 5, 6;
  CHECK(take_rows(m, {2, 0})(0, 1) == 6);
  CHECK(take_columns(m, {1})(1, 0) == 4);
  Vector v(3);
  v << 7, 8, 9;
  CHECK(take_rows(v, {1})(0) == 8);
}

TEST_CASE("equal-frequency bins keep ties together") {
  Vector x(8);
  x << 5, 1, 2, 2, 2, 7, 8, 3;
  auto b = equal_frequency_bins(x, 4);
  CHECK(b[1] == 0);
  CHECK(b[2] == b[3]);
  CHECK(b[3] == b[4]);
  CHECK(b[6] == 3);
  std::set<int> distinct(b.begin(), b.end());
  CHECK(distinct.size() <= 4);
}

TEST_CASE("mutual information matches a contingency count") {
  std::mt19937_64 rng(31);
  for (int k = 0; k < 10; ++k) {
    Matrix m = random_matrix(120, 2, rng);
    Vector x = m.col(0);
    Vector y = (x.array() * 0.7).matrix() + m.col(1);
    auto bx = equal_frequency_bins(x, 8), by = equal_frequency_bins(y, 8);
    CHECK(mutual_information(x, y, 8) == doctest::Approx(oracle::mutual_information_counts(bx, by)).epsilon(1e-12));
  }
  Vector c = Vector::Constant(50, 1.0), r = Vector::LinSpaced(50, 0, 1);
  CHECK(mutual_information(c, r, 8) == doctest::Approx(0.0));
}

TEST_CASE("MI selection ranks informative columns first") {
  std::mt19937_64 rng(32);
  Matrix x = random_matrix(2000, 5, rng);
  Vector y = 2.0 * x.col(3) + x.col(1);
  auto ranking = mi_ranking(x, y);
  CHECK(ranking.front() == 3);
  auto top = mi_select(x, y, 2);
  CHECK(top == Indices{3, 1});
  CHECK_THROWS_AS(mi_select(x, y, 0), Error);
  CHECK_THROWS_AS(mi_select(x, y, 6), Error);
}

TEST_CASE("linear regression recovers exact coefficients") {
  std::mt19937_64 rng(33);
  Matrix x = random_matrix(100, 3, rng);
  Vector beta(3);
  beta << 0.5, -1.0, 2.0;
  Vector y = (x * beta).array() - 3.0;
  LinearRegression lr;
  lr.fit(x, y);
  CHECK((lr.coefficients() - beta).cwiseAbs().maxCoeff() < 1e-8);
  CHECK(std::abs(lr.intercept() + 3.0) < 1e-8);
  CHECK((lr.predict(x) - y).cwiseAbs().maxCoeff() < 1e-8);
  Matrix one(1, 3);
  one << 1, 2, 3;
  CHECK_THROWS_AS(lr.fit(one, Vector::Ones(1)), Error);
}

TEST_CASE("regression tree splits a step function") {
  Matrix x(20, 1);
  Vector y(20);
  for (int i = 0; i < 20; ++i) {
    x(i, 0) = i;
    y(i) = i < 10 ? 1.0 : 5.0;
  }
  DecisionTree tree(TreeParams{1, 2});
  tree.fit(x, y);
  auto p = tree.predict(x);
  CHECK(p(0) == 1.0);
  CHECK(p(19) == 5.0);
  Matrix probe(1, 1);
  probe << 9.8;
  CHECK(tree.predict(probe)(0) == 5.0);
}

TEST_CASE("tree leaves respect the minimum size") {
  std::mt19937_64 rng(34);
  Matrix x = random_matrix(60, 3, rng);
  Vector y = x.col(0) + 0.1 * x.col(1);
  SortedColumns sorted(x);
  RegressionTree tree;
  Vector gains = Vector::Zero(3);
  tree.fit(x, y, sorted, TreeParams{4, 7}, &gains);
  std::map<double, int> leaf_sizes;
  for (double v : tree.fitted()) ++leaf_sizes[v];
  for (const auto& [v, count] : leaf_sizes) CHECK(count >= 7);
  CHECK(gains(0) > gains(2));
}

TEST_CASE("boosting reduces training error and reports importances") {
  std::mt19937_64 rng(35);
  Matrix x = random_matrix(200, 4, rng);
  Vector y = (x.col(2).array() * 3.0).sin().matrix() + 0.5 * x.col(0);
  GradientBoost gb(BoostParams{50, 0.1, TreeParams{3, 5}});
  gb.fit(x, y);
  const auto& curve = gb.train_rmse();
  REQUIRE(curve.size() == 51);
  for (std::size_t i = 1; i < curve.size(); ++i) CHECK(curve[i] <= curve[i - 1]);
  CHECK(curve.back() < 0.5 * curve.front());
  CHECK(gb.feature_importance().sum() == doctest::Approx(1.0));
  CHECK(gb.feature_importance()(2) > gb.feature_importance()(3));
  CHECK(rmse(gb.predict(x), y) == doctest::Approx(curve.back()));
}

TEST_CASE("group folds") {
  std::vector<std::string> g{"a", "a", "a", "b", "c", "c", "d", "e", "e", "e", "e"};
  auto f = group_kfold(g, 3, 1);
  CHECK(f[0] == f[1]);
  CHECK(f[7] == f[10]);
  CHECK(group_kfold(g, 3, 1) == f);
  CHECK_THROWS_AS(group_kfold(g, 6, 1), Error);
  CHECK_THROWS_AS(group_kfold({}, 2, 1), Error);
}

TEST_CASE("pearson correlation and its p value") {
  std::vector<double> x{1, 2, 3, 4, 5, 6, 7, 8, 9, 10};
  std::vector<double> y{2, 1, 4, 3, 7, 5, 6, 10, 8, 9};
  auto c = pearson_r(x, y);
  CHECK(c.r == doctest::Approx(oracle::pearson_textbook(x, y)).epsilon(1e-14));
  CHECK(c.p == doctest::Approx(0.000344).epsilon(0.02));
  std::vector<double> flat(10, 1.0);
  CHECK(pearson_r(x, flat).r == 0.0);
  CHECK(pearson_r(x, flat).p == 1.0);
  CHECK_THROWS_AS(pearson_r(std::vector<double>{1, 2}, std::vector<double>{1, 2}), Error);
  CHECK_THROWS_AS(pearson_r(x, std::vector<double>{1, 2, 3}), Error);
}

TEST_CASE("Zou interval bounds") {
  auto z = zou_compare(0.6, 0.2, 0.3, 200, 0.90);
  CHECK(z.difference == doctest::Approx(0.4));
  CHECK(z.lower < 0.4);
  CHECK(z.upper > 0.4);
  CHECK(z.significant);
  CHECK(z.p < 0.10);
  auto wider = zou_compare(0.6, 0.2, 0.3, 200, 0.99);
  CHECK(wider.lower < z.lower);
  auto same = zou_compare(0.3, 0.3, 0.5, 80);
  CHECK_FALSE(same.significant);
  CHECK(same.p == 1.0);
  CHECK_THROWS_AS(zou_compare(1.0, 0.2, 0.3, 100), Error);
  CHECK_THROWS_AS(zou_compare(0.9, -0.9, 0.9, 100), Error);
  CHECK_THROWS_AS(zou_compare(0.5, 0.2, 0.3, 3), Error);
  CHECK(std::string(significance_marker(0.001)) == "**");
  CHECK(std::string(significance_marker(0.2)) == "-");
}

TEST_CASE("study configuration keys") {
  auto kv = KeyValueConfig::parse("folds = 4\nk = 7\nestimators = linear, boost\nboost_rounds = 20\nmin_leaf = 3\n");
  StudyConfig c;
  apply(kv, c);
  CHECK(c.folds == 4);
  CHECK(c.fixed_k == 7u);
  CHECK(c.estimators == std::vector<EstimatorKind>{EstimatorKind::LinearRegression, EstimatorKind::GradientBoost});
  CHECK(c.boost.rounds == 20);
  CHECK(c.boost.tree.min_leaf == 3);
  CHECK(kv.unconsumed().empty());
  auto bad = KeyValueConfig::parse("folds = 1\n");
  CHECK_THROWS_AS(apply(bad, c), ConfigError);
  auto unknown = KeyValueConfig::parse("estimators = forest\n");
  CHECK_THROWS_AS(apply(unknown, c), ConfigError);
  auto k = KeyValueConfig::parse("k = none\n");
  CHECK_THROWS_AS(apply(k, c), ConfigError);
}

TEST_CASE("a small study end to end") {
  std::mt19937_64 rng(36);
  std::normal_distribution<double> normal;
  StudyData d;
  const int n = 80;
  d.features = random_matrix(n, 6, rng);
  d.scores.resize(n);
  for (int i = 0; i < n; ++i) {
    d.users.push_back("u" + std::to_string(i));
    d.groups.push_back("g" + std::to_string(i / 4));
    d.instructors.push_back(i % 2 ? "i1" : "i2");
    d.scores(i) = 1.5 * d.features(i, 0) + 0.5 * normal(rng);
  }
  for (int j = 0; j < 6; ++j) d.feature_names.push_back("f" + std::to_string(j));
  d.models = {{"M_0", {}}, {"M_gWF", {0, 1, 2}}, {"M_iWF", {3, 4, 5}}};
  StudyConfig cfg;
  cfg.folds = 4;
  cfg.inner_folds = 2;
  cfg.k_max = 3;
  cfg.boost.rounds = 20;
  cfg.reference_model = "M_gWF";
  auto r = run_study(d, cfg);
  REQUIRE(r.models.size() == 3);
  CHECK_FALSE(r.model("M_0").estimator.has_value());
  CHECK(r.model("M_gWF").correlation.r > 0.7);
  CHECK(r.model("M_gWF").correlation.r > r.model("M_iWF").correlation.r);
  CHECK(r.model("M_gWF").selected_k.size() == 4);
  CHECK(r.model("M_gWF").candidates.size() == 3);
  CHECK(r.actual.size() == n);
  CHECK_FALSE(r.comparisons.empty());
  CHECK_THROWS_AS(r.model("M_missing"), Error);
  std::set<int> seen_folds(r.folds.begin(), r.folds.end());
  CHECK(seen_folds.size() == 4);

  auto again = run_study(d, cfg);
  CHECK(again.model("M_gWF").predictions == r.model("M_gWF").predictions);

  fixture::TempDir dir("study");
  write_results_json(dir.file("results.json"), r, d);
  CHECK(std::filesystem::file_size(dir.file("results.json")) > 0);
  CHECK(markdown_summary(r).find("M_gWF") != std::string::npos);
}
