#include "wifico/modeling.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <json.hpp>
#include <limits>
#include <numeric>
#include <random>
#include <set>
#include <sstream>
#include <type_traits>

#include "wifico/csv.hpp"
#include "wifico/error.hpp"

namespace wifico {

// ---- preprocessing ----

double InstructorScaler::apply(double score, const std::string& instructor) const {
  auto it = per_instructor.find(instructor);
  const auto& m = it == per_instructor.end() ? global : it->second;
  return (score - m.mean) / m.std;
}

namespace {

InstructorScaler::Moments moments_of(const std::vector<double>& v) {
  InstructorScaler::Moments m;
  if (v.empty()) return m;
  m.mean = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
  double ss = 0.0;
  for (double x : v) ss += (x - m.mean) * (x - m.mean);
  m.std = std::sqrt(ss / static_cast<double>(v.size()));
  if (m.std == 0.0) m.std = 1.0;
  return m;
}

}  // namespace

InstructorScaler fit_instructor_scaler(const Vector& scores,
                                       const std::vector<std::string>& instructors,
                                       const Indices& train) {
  InstructorScaler s;
  std::map<std::string, std::vector<double>> by;
  std::vector<double> all;
  for (auto i : train) {
    by[instructors.at(i)].push_back(scores(static_cast<Eigen::Index>(i)));
    all.push_back(scores(static_cast<Eigen::Index>(i)));
  }
  s.global = moments_of(all);
  for (const auto& [inst, v] : by) {
    if (v.size() < 2) {
      s.warnings.push_back("instructor '" + inst + "' has fewer than 2 train samples; using global scaling");
      continue;
    }
    s.per_instructor[inst] = moments_of(v);
  }
  return s;
}

Vector scale_targets_by_instructor(const Vector& scores,
                                   const std::vector<std::string>& instructors,
                                   const Indices& train, InstructorScaler* fitted) {
  auto s = fit_instructor_scaler(scores, instructors, train);
  Vector out(scores.size());
  for (Eigen::Index i = 0; i < scores.size(); ++i) {
    out(i) = s.apply(scores(i), instructors.at(static_cast<std::size_t>(i)));
  }
  if (fitted) *fitted = std::move(s);
  return out;
}

Vector impute_mean(Matrix& m, const Indices& train, std::vector<std::string>* warnings) {
  Vector means(m.cols());
  for (Eigen::Index c = 0; c < m.cols(); ++c) {
    double sum = 0.0;
    std::size_t count = 0;
    for (auto r : train) {
      double v = m(static_cast<Eigen::Index>(r), c);
      if (!std::isnan(v)) {
        sum += v;
        ++count;
      }
    }
    if (count == 0 && warnings) {
      warnings->push_back("column " + std::to_string(c) + " has no observed train values; imputed 0");
    }
    means(c) = count ? sum / static_cast<double>(count) : 0.0;
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
      if (std::isnan(m(r, c))) m(r, c) = means(c);
    }
  }
  return means;
}

void standardize(Matrix& m, const Indices& train) {
  if (train.empty()) {
    m.setZero();
    return;
  }
  const auto n = static_cast<double>(train.size());
  for (Eigen::Index c = 0; c < m.cols(); ++c) {
    double mean = 0.0;
    for (auto r : train) mean += m(static_cast<Eigen::Index>(r), c);
    mean /= n;
    double ss = 0.0;
    for (auto r : train) {
      double d = m(static_cast<Eigen::Index>(r), c) - mean;
      ss += d * d;
    }
    double sd = std::sqrt(ss / n);
    if (sd == 0.0) {
      m.col(c).setZero();
    } else {
      m.col(c) = (m.col(c).array() - mean) / sd;
    }
  }
}

Matrix take_rows(const Matrix& m, const Indices& rows) {
  Matrix out(static_cast<Eigen::Index>(rows.size()), m.cols());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    out.row(static_cast<Eigen::Index>(i)) = m.row(static_cast<Eigen::Index>(rows[i]));
  }
  return out;
}

Vector take_rows(const Vector& v, const Indices& rows) {
  Vector out(static_cast<Eigen::Index>(rows.size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    out(static_cast<Eigen::Index>(i)) = v(static_cast<Eigen::Index>(rows[i]));
  }
  return out;
}

Matrix take_columns(const Matrix& m, const Indices& cols) {
  Matrix out(m.rows(), static_cast<Eigen::Index>(cols.size()));
  for (std::size_t i = 0; i < cols.size(); ++i) {
    out.col(static_cast<Eigen::Index>(i)) = m.col(static_cast<Eigen::Index>(cols[i]));
  }
  return out;
}

// ---- feature selection ----

std::vector<int> equal_frequency_bins(const Vector& x, int bins) {
  const auto n = static_cast<std::size_t>(x.size());
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) {
    return x(static_cast<Eigen::Index>(a)) < x(static_cast<Eigen::Index>(b));
  });
  std::vector<int> out(n, 0);
  std::size_t first = 0;
  for (std::size_t pos = 0; pos < n; ++pos) {
    if (pos > 0 && x(static_cast<Eigen::Index>(order[pos])) != x(static_cast<Eigen::Index>(order[pos - 1]))) {
      first = pos;
    }
    auto b = static_cast<int>(first * static_cast<std::size_t>(bins) / n);
    out[order[pos]] = std::min(b, bins - 1);
  }
  return out;
}

namespace {

double mi_from_bins(const std::vector<int>& bx, const std::vector<int>& by, int bins) {
  const auto n = bx.size();
  if (n == 0) return 0.0;
  std::vector<double> joint(static_cast<std::size_t>(bins * bins), 0.0), px(bins, 0.0), py(bins, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    joint[static_cast<std::size_t>(bx[i] * bins + by[i])] += 1.0;
    px[bx[i]] += 1.0;
    py[by[i]] += 1.0;
  }
  const double dn = static_cast<double>(n);
  double mi = 0.0;
  for (int a = 0; a < bins; ++a) {
    for (int b = 0; b < bins; ++b) {
      double c = joint[static_cast<std::size_t>(a * bins + b)];
      if (c > 0.0) mi += c / dn * std::log(c * dn / (px[a] * py[b]));
    }
  }
  return mi;
}

}  // namespace

double mutual_information(const Vector& x, const Vector& y, int bins) {
  if (x.size() != y.size()) throw Error("mutual_information: size mismatch");
  return mi_from_bins(equal_frequency_bins(x, bins), equal_frequency_bins(y, bins), bins);
}

Indices mi_ranking(const Matrix& x, const Vector& y, int bins) {
  auto by = equal_frequency_bins(y, bins);
  std::vector<double> mi(static_cast<std::size_t>(x.cols()));
  for (Eigen::Index c = 0; c < x.cols(); ++c) {
    mi[static_cast<std::size_t>(c)] = mi_from_bins(equal_frequency_bins(x.col(c), bins), by, bins);
  }
  Indices order(mi.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return mi[a] > mi[b]; });
  return order;
}

Indices mi_select(const Matrix& x, const Vector& y, std::size_t k, int bins) {
  if (k < 1 || k > static_cast<std::size_t>(x.cols())) {
    throw Error("mi_select: k must be in [1, " + std::to_string(x.cols()) + "], got " + std::to_string(k));
  }
  auto order = mi_ranking(x, y, bins);
  order.resize(k);
  return order;
}

// ---- estimators ----

std::string_view to_string(EstimatorKind k) {
  switch (k) {
    case EstimatorKind::LinearRegression: return "LinearRegression";
    case EstimatorKind::DecisionTree: return "DecisionTree";
    case EstimatorKind::GradientBoost: return "GradientBoost";
  }
  return "LinearRegression";
}

namespace {

void require_trainable(const Matrix& x, const Vector& y) {
  if (x.rows() != y.size()) throw Error("fit: row count mismatch");
  if (x.rows() < 2) throw Error("fit: need at least 2 training rows, got " + std::to_string(x.rows()));
}

}  // namespace

void LinearRegression::fit(const Matrix& x, const Vector& y) {
  require_trainable(x, y);
  const auto p = x.cols();
  Matrix d(x.rows(), p + 1);
  d.col(0).setOnes();
  d.rightCols(p) = x;
  Matrix a = d.transpose() * d;
  for (Eigen::Index i = 1; i <= p; ++i) a(i, i) += kRidge;
  Vector beta = a.ldlt().solve(d.transpose() * y);
  intercept_ = beta(0);
  coef_ = beta.tail(p);
}

Vector LinearRegression::predict(const Matrix& x) const {
  return (x * coef_).array() + intercept_;
}

SortedColumns::SortedColumns(const Matrix& x) {
  order.resize(static_cast<std::size_t>(x.cols()));
  values.resize(order.size());
  for (Eigen::Index c = 0; c < x.cols(); ++c) {
    auto& o = order[static_cast<std::size_t>(c)];
    o.resize(static_cast<std::size_t>(x.rows()));
    std::iota(o.begin(), o.end(), 0u);
    std::stable_sort(o.begin(), o.end(), [&](auto a, auto b) { return x(a, c) < x(b, c); });
    auto& v = values[static_cast<std::size_t>(c)];
    v.reserve(o.size());
    for (auto i : o) v.push_back(x(i, c));
  }
}

namespace {

// score[k] = L^2/k + R^2/(count-k) for a cut before position k, or -1
// where the value does not change.
__attribute__((target_clones("avx2", "default"))) void split_scores(
    const double* cum, const double* v, const double* inv, const double* inv_rest, double total,
    std::size_t lo, std::size_t hi, double* score) {
  for (std::size_t k = lo; k <= hi; ++k) {
    const double l = cum[k];
    const double r = total - l;
    const double keep = static_cast<double>(v[k] > v[k - 1]);
    score[k] = (l * l * inv[k] + r * r * inv_rest[k]) * keep + (keep - 1.0);
  }
}

}  // namespace

void RegressionTree::fit(const Matrix& x, const Vector& y, const SortedColumns& sorted,
                         const TreeParams& params, Vector* gains) {
  const auto n = static_cast<std::size_t>(x.rows());
  const auto p = sorted.order.size();
  const double* yv = y.data();
  const std::size_t min_leaf = params.min_leaf;
  std::vector<double> inv(n + 1, 0.0);
  for (std::size_t c = 1; c <= n; ++c) inv[c] = 1.0 / static_cast<double>(c);

  // Per feature, rows of every open node are kept contiguous and sorted.
  thread_local std::vector<std::uint32_t> rows;
  thread_local std::vector<double> vals;
  rows.resize(n * p);
  vals.resize(n * p);
  for (std::size_t f = 0; f < p; ++f) {
    std::copy(sorted.order[f].begin(), sorted.order[f].end(), rows.begin() + static_cast<std::ptrdiff_t>(f * n));
    std::copy(sorted.values[f].begin(), sorted.values[f].end(), vals.begin() + static_cast<std::ptrdiff_t>(f * n));
  }
  std::vector<double> cum(n), score(n), inv_rest(n);
  std::vector<std::uint32_t> tmp_rows(n);
  std::vector<double> tmp_vals(n);

  struct Open {
    int id;
    std::size_t begin, end;
    double sum, sumsq;
  };
  nodes_.assign(1, Node{});
  std::vector<double> value(1, 0.0);
  std::vector<int> leaf_of(n, 0);
  Open root{0, 0, n, 0.0, 0.0};
  for (std::size_t i = 0; i < n; ++i) {
    root.sum += yv[i];
    root.sumsq += yv[i] * yv[i];
  }
  value[0] = n ? root.sum / static_cast<double>(n) : 0.0;
  std::vector<Open> open{root};
  std::vector<char> goes_left(n, 0);

  for (int depth = 0; depth < params.max_depth && !open.empty(); ++depth) {
    std::vector<Open> next;
    std::vector<Open> splitting;
    for (const auto& node : open) {
      const std::size_t count = node.end - node.begin;
      if (count < 2 * std::max<std::size_t>(min_leaf, 1)) continue;
      double best = 0.0;
      int feature = -1;
      for (std::size_t k = 0; k < count; ++k) inv_rest[k] = inv[count - k];
      std::size_t cut = 0;
      const std::size_t lo = std::max<std::size_t>(min_leaf, 1);
      const std::size_t hi = count - std::max<std::size_t>(min_leaf, 1);
      for (std::size_t f = 0; f < p; ++f) {
        const auto* r = rows.data() + f * n + node.begin;
        const auto* v = vals.data() + f * n + node.begin;
        double left = 0.0;
        for (std::size_t k = 0; k < count; ++k) {
          cum[k] = left;
          left += yv[r[k]];
        }
        split_scores(cum.data(), v, inv.data(), inv_rest.data(), node.sum, lo, hi, score.data());
        for (std::size_t k = lo; k <= hi; ++k) {
          if (score[k] > best) {
            best = score[k];
            feature = static_cast<int>(f);
            cut = k;
          }
        }
      }
      if (feature < 0) continue;
      const double gain = best - node.sum * node.sum * inv[count];
      if (gain <= 1e-12 * node.sumsq) continue;
      const auto fv = static_cast<std::size_t>(feature);
      const double a = vals[fv * n + node.begin + cut - 1], b = vals[fv * n + node.begin + cut];
      double thr = a + (b - a) / 2.0;
      if (!(thr < b)) thr = a;
      const int left_id = static_cast<int>(nodes_.size());
      nodes_.push_back(Node{});
      nodes_.push_back(Node{});
      auto& nd = nodes_[static_cast<std::size_t>(node.id)];
      nd.feature = feature;
      nd.threshold = thr;
      nd.left = left_id;
      nd.right = left_id + 1;
      if (gains) (*gains)(feature) += gain;
      Open l{left_id, node.begin, node.begin + cut, 0.0, 0.0};
      Open rt{left_id + 1, node.begin + cut, node.end, 0.0, 0.0};
      for (std::size_t k = node.begin; k < node.end; ++k) {
        const auto i = rows[fv * n + k];
        const bool is_left = k < l.end;
        goes_left[i] = is_left;
        auto& o = is_left ? l : rt;
        o.sum += yv[i];
        o.sumsq += yv[i] * yv[i];
        leaf_of[i] = is_left ? l.id : rt.id;
      }
      value.push_back(l.sum * inv[cut]);
      value.push_back(rt.sum * inv[count - cut]);
      splitting.push_back(node);
      next.push_back(l);
      next.push_back(rt);
    }
    if (next.empty()) break;
    if (depth + 1 < params.max_depth) {
      for (std::size_t f = 0; f < p; ++f) {
        auto* r = rows.data() + f * n;
        auto* v = vals.data() + f * n;
        for (const auto& node : splitting) {
          std::size_t w = node.begin, spill = 0;
          for (std::size_t k = node.begin; k < node.end; ++k) {
            const auto row = r[k];
            const double val = v[k];
            const std::size_t g = goes_left[row];
            r[w] = row;
            v[w] = val;
            tmp_rows[spill] = row;
            tmp_vals[spill] = val;
            w += g;
            spill += 1 - g;
          }
          std::copy_n(tmp_rows.begin(), spill, r + w);
          std::copy_n(tmp_vals.begin(), spill, v + w);
        }
      }
    }
    open = std::move(next);
  }
  for (std::size_t id = 0; id < nodes_.size(); ++id) nodes_[id].value = value[id];
  fitted_.resize(n);
  for (std::size_t i = 0; i < n; ++i) fitted_[i] = value[static_cast<std::size_t>(leaf_of[i])];
}

double RegressionTree::predict_row(const Matrix& x, Eigen::Index row) const {
  std::size_t id = 0;
  while (nodes_[id].feature >= 0) {
    const auto& node = nodes_[id];
    id = static_cast<std::size_t>(x(row, node.feature) <= node.threshold ? node.left : node.right);
  }
  return nodes_[id].value;
}

void DecisionTree::fit(const Matrix& x, const Vector& y) {
  require_trainable(x, y);
  SortedColumns sorted(x);
  tree_.fit(x, y, sorted, params_);
}

Vector DecisionTree::predict(const Matrix& x) const {
  Vector out(x.rows());
  for (Eigen::Index r = 0; r < x.rows(); ++r) out(r) = tree_.predict_row(x, r);
  return out;
}

void GradientBoost::fit(const Matrix& x, const Vector& y) {
  require_trainable(x, y);
  SortedColumns sorted(x);
  base_ = y.mean();
  Vector pred = Vector::Constant(y.size(), base_);
  Vector gains = Vector::Zero(x.cols());
  trees_.clear();
  train_rmse_.assign(1, rmse(pred, y));
  for (int round = 0; round < params_.rounds; ++round) {
    Vector residual = y - pred;
    RegressionTree tree;
    tree.fit(x, residual, sorted, params_.tree, &gains);
    const auto& leaf = tree.fitted();
    for (Eigen::Index r = 0; r < x.rows(); ++r) pred(r) += params_.learning_rate * leaf[static_cast<std::size_t>(r)];
    trees_.push_back(std::move(tree));
    train_rmse_.push_back(rmse(pred, y));
  }
  double total = gains.sum();
  importance_ = total > 0.0 ? Vector(gains / total) : Vector(Vector::Zero(x.cols()));
}

Vector GradientBoost::predict(const Matrix& x) const {
  Vector out = Vector::Constant(x.rows(), base_);
  for (const auto& t : trees_) {
    for (Eigen::Index r = 0; r < x.rows(); ++r) out(r) += params_.learning_rate * t.predict_row(x, r);
  }
  return out;
}

std::unique_ptr<Regressor> make_regressor(EstimatorKind kind, const BoostParams& boost,
                                          const TreeParams& tree) {
  switch (kind) {
    case EstimatorKind::LinearRegression: return std::make_unique<LinearRegression>();
    case EstimatorKind::DecisionTree: return std::make_unique<DecisionTree>(tree);
    case EstimatorKind::GradientBoost: return std::make_unique<GradientBoost>(boost);
  }
  throw Error("unknown estimator");
}

// ---- cross-validation ----

std::vector<int> group_kfold(const std::vector<std::string>& groups, int folds, std::uint64_t seed) {
  if (groups.empty()) throw Error("group_kfold: no samples");
  if (folds < 2) throw Error("group_kfold: need at least 2 folds");
  std::map<std::string, Indices> members;
  for (std::size_t i = 0; i < groups.size(); ++i) members[groups[i]].push_back(i);
  if (static_cast<std::size_t>(folds) > members.size()) {
    throw Error("group_kfold: " + std::to_string(folds) + " folds exceed " +
                std::to_string(members.size()) + " groups");
  }
  std::vector<const Indices*> order;
  for (const auto& [g, idx] : members) order.push_back(&idx);
  std::mt19937_64 rng(seed);
  std::shuffle(order.begin(), order.end(), rng);
  std::stable_sort(order.begin(), order.end(), [](auto* a, auto* b) { return a->size() > b->size(); });
  std::vector<std::size_t> sizes(static_cast<std::size_t>(folds), 0);
  std::vector<int> out(groups.size(), -1);
  for (const auto* idx : order) {
    auto f = static_cast<std::size_t>(std::min_element(sizes.begin(), sizes.end()) - sizes.begin());
    sizes[f] += idx->size();
    for (auto i : *idx) out[i] = static_cast<int>(f);
  }
  return out;
}

double rmse(const Vector& a, const Vector& b) {
  if (a.size() != b.size()) throw Error("rmse: size mismatch");
  if (a.size() == 0) return 0.0;
  return std::sqrt((a - b).squaredNorm() / static_cast<double>(a.size()));
}

// ---- study ----

const ModelResult& EvaluationResult::model(const std::string& name) const {
  for (const auto& m : models) {
    if (m.name == name) return m;
  }
  throw Error("no model named '" + name + "' in evaluation result");
}

namespace {

struct Split {
  Indices train, test;
};

std::vector<Split> splits_from(const std::vector<int>& folds, int count) {
  std::vector<Split> out(static_cast<std::size_t>(count));
  for (std::size_t i = 0; i < folds.size(); ++i) {
    for (int f = 0; f < count; ++f) {
      (f == folds[i] ? out[static_cast<std::size_t>(f)].test : out[static_cast<std::size_t>(f)].train).push_back(i);
    }
  }
  return out;
}

double median_value(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  auto n = v.size();
  if (n == 0) return 0.0;
  return n % 2 ? v[n / 2] : (v[n / 2 - 1] + v[n / 2]) / 2.0;
}

// Rows `train` then `test` of `x`, imputed and standardized on the train part.
Matrix prepared(const Matrix& x, const Indices& train, const Indices& test) {
  Matrix m(static_cast<Eigen::Index>(train.size() + test.size()), x.cols());
  for (std::size_t i = 0; i < train.size(); ++i) m.row(static_cast<Eigen::Index>(i)) = x.row(static_cast<Eigen::Index>(train[i]));
  for (std::size_t i = 0; i < test.size(); ++i) {
    m.row(static_cast<Eigen::Index>(train.size() + i)) = x.row(static_cast<Eigen::Index>(test[i]));
  }
  Indices tr(train.size());
  std::iota(tr.begin(), tr.end(), 0);
  impute_mean(m, tr);
  standardize(m, tr);
  return m;
}

Indices prefix(const Indices& ranking, std::size_t k) {
  return Indices(ranking.begin(), ranking.begin() + static_cast<std::ptrdiff_t>(k));
}

Vector fit_predict(EstimatorKind kind, const StudyConfig& cfg, const Matrix& train_x,
                   const Vector& train_y, const Matrix& test_x) {
  auto model = make_regressor(kind, cfg.boost, cfg.tree);
  model->fit(train_x, train_y);
  return model->predict(test_x);
}

}  // namespace

void apply(KeyValueConfig& kv, StudyConfig& c) {
  auto number = [&](const char* key, auto& field) {
    auto v = kv.take(key);
    if (!v) return;
    try {
      std::size_t used = 0;
      double x = std::stod(*v, &used);
      if (used != v->size()) throw std::invalid_argument(*v);
      field = static_cast<std::remove_reference_t<decltype(field)>>(x);
    } catch (const std::exception&) {
      throw ConfigError(std::string(key) + ": not a number: '" + *v + "'");
    }
  };
  if (auto v = kv.take("seed")) {
    try {
      c.seed = std::stoull(*v);
    } catch (const std::exception&) {
      throw ConfigError("seed: not an integer: '" + *v + "'");
    }
  }
  number("folds", c.folds);
  number("inner_folds", c.inner_folds);
  number("k_max", c.k_max);
  number("mi_bins", c.mi_bins);
  number("boost_rounds", c.boost.rounds);
  number("learning_rate", c.boost.learning_rate);
  number("max_depth", c.tree.max_depth);
  number("min_leaf", c.tree.min_leaf);
  number("zou_confidence", c.zou_confidence);
  c.boost.tree = c.tree;
  if (auto v = kv.take("k")) {
    if (*v == "auto") {
      c.fixed_k.reset();
    } else {
      std::size_t k = 0;
      auto [ptr, ec] = std::from_chars(v->data(), v->data() + v->size(), k);
      if (ec != std::errc{} || ptr != v->data() + v->size() || k == 0) {
        throw ConfigError("k must be 'auto' or a positive integer, got '" + *v + "'");
      }
      c.fixed_k = k;
    }
  }
  if (auto v = kv.take("estimators")) {
    c.estimators.clear();
    for (const auto& name : split_fields(*v, ',')) {
      if (name == "linear") c.estimators.push_back(EstimatorKind::LinearRegression);
      else if (name == "tree") c.estimators.push_back(EstimatorKind::DecisionTree);
      else if (name == "boost") c.estimators.push_back(EstimatorKind::GradientBoost);
      else throw ConfigError("unknown estimator '" + name + "' (expected linear, tree or boost)");
    }
    if (c.estimators.empty()) throw ConfigError("estimators must not be empty");
  }
  if (auto v = kv.take("reference_model")) c.reference_model = *v;
  if (c.folds < 2) throw ConfigError("folds must be >= 2");
  if (c.inner_folds < 2) throw ConfigError("inner_folds must be >= 2");
  if (c.k_max < 1) throw ConfigError("k_max must be >= 1");
  if (c.mi_bins < 2) throw ConfigError("mi_bins must be >= 2");
  if (c.boost.rounds < 1) throw ConfigError("boost_rounds must be >= 1");
  if (!(c.boost.learning_rate > 0.0)) throw ConfigError("learning_rate must be > 0");
  if (c.tree.max_depth < 1) throw ConfigError("max_depth must be >= 1");
  if (c.tree.min_leaf < 1) throw ConfigError("min_leaf must be >= 1");
  if (!(c.zou_confidence > 0.0 && c.zou_confidence < 1.0)) throw ConfigError("zou_confidence must be in (0, 1)");
}

EvaluationResult run_study(const StudyData& data, const StudyConfig& cfg) {
  const auto n = static_cast<std::size_t>(data.scores.size());
  if (data.groups.size() != n || data.instructors.size() != n ||
      static_cast<std::size_t>(data.features.rows()) != n) {
    throw Error("run_study: inconsistent sample counts");
  }
  EvaluationResult result;
  result.folds = group_kfold(data.groups, cfg.folds, cfg.seed);
  auto outer = splits_from(result.folds, cfg.folds);

  result.actual = Vector(static_cast<Eigen::Index>(n));
  std::vector<Vector> scaled(outer.size());
  for (std::size_t f = 0; f < outer.size(); ++f) {
    InstructorScaler scaler;
    scaled[f] = scale_targets_by_instructor(data.scores, data.instructors, outer[f].train, &scaler);
    for (const auto& w : scaler.warnings) result.warnings.push_back("fold " + std::to_string(f) + ": " + w);
    for (auto i : outer[f].test) {
      if (!scaler.per_instructor.contains(data.instructors[i])) {
        result.warnings.push_back("fold " + std::to_string(f) + ": instructor '" + data.instructors[i] +
                                  "' scaled with the global transform");
      }
      result.actual(static_cast<Eigen::Index>(i)) = scaled[f](static_cast<Eigen::Index>(i));
    }
  }

  for (const auto& def : data.models) {
    ModelResult mr;
    mr.name = def.name;
    if (def.columns.empty()) {
      mr.predictions = Vector(static_cast<Eigen::Index>(n));
      for (std::size_t f = 0; f < outer.size(); ++f) {
        std::vector<double> ys;
        for (auto i : outer[f].train) ys.push_back(scaled[f](static_cast<Eigen::Index>(i)));
        double med = median_value(ys);
        for (auto i : outer[f].test) mr.predictions(static_cast<Eigen::Index>(i)) = med;
      }
      mr.rmse = rmse(mr.predictions, result.actual);
      result.models.push_back(std::move(mr));
      continue;
    }

    Matrix x = take_columns(data.features, def.columns);
    const std::size_t k_cap = std::min<std::size_t>(cfg.k_max, def.columns.size());
    const auto n_est = cfg.estimators.size();
    std::vector<EstimatorResult> est(n_est);
    for (std::size_t e = 0; e < n_est; ++e) {
      est[e].estimator = cfg.estimators[e];
      est[e].predictions = Vector(static_cast<Eigen::Index>(n));
    }

    for (std::size_t f = 0; f < outer.size(); ++f) {
      const auto& split = outer[f];
      Vector y_train = take_rows(scaled[f], split.train);

      std::vector<std::size_t> chosen_k(n_est, cfg.fixed_k.value_or(k_cap));
      if (!cfg.fixed_k) {
        std::vector<std::string> inner_groups;
        for (auto i : split.train) inner_groups.push_back(data.groups[i]);
        std::set<std::string> distinct(inner_groups.begin(), inner_groups.end());
        int inner_count = std::min<int>(cfg.inner_folds, static_cast<int>(distinct.size()));
        std::vector<std::vector<double>> sse(n_est, std::vector<double>(k_cap + 1, 0.0));
        if (inner_count >= 2) {
          auto inner_folds = group_kfold(inner_groups, inner_count, cfg.seed + 1 + f);
          auto inner = splits_from(inner_folds, inner_count);
          Matrix x_train = take_rows(x, split.train);
          for (const auto& is : inner) {
            Matrix m = prepared(x_train, is.train, is.test);
            auto ntr = static_cast<Eigen::Index>(is.train.size());
            auto nte = static_cast<Eigen::Index>(is.test.size());
            Vector yi = take_rows(y_train, is.train);
            Vector yv = take_rows(y_train, is.test);
            auto ranking = mi_ranking(m.topRows(ntr), yi, cfg.mi_bins);
            for (std::size_t k = 1; k <= k_cap; ++k) {
              Matrix cols = take_columns(m, prefix(ranking, k));
              Matrix tr = cols.topRows(ntr), te = cols.bottomRows(nte);
              for (std::size_t e = 0; e < n_est; ++e) {
                Vector pred = fit_predict(cfg.estimators[e], cfg, tr, yi, te);
                sse[e][k] += (pred - yv).squaredNorm();
              }
            }
          }
          for (std::size_t e = 0; e < n_est; ++e) {
            std::size_t best = 1;
            for (std::size_t k = 2; k <= k_cap; ++k) {
              if (sse[e][k] < sse[e][best]) best = k;
            }
            chosen_k[e] = best;
          }
        }
      }

      Matrix m = prepared(x, split.train, split.test);
      auto ntr = static_cast<Eigen::Index>(split.train.size());
      auto nte = static_cast<Eigen::Index>(split.test.size());
      auto ranking = mi_ranking(m.topRows(ntr), y_train, cfg.mi_bins);
      for (std::size_t e = 0; e < n_est; ++e) {
        auto k = std::min(chosen_k[e], k_cap);
        Matrix cols = take_columns(m, prefix(ranking, k));
        Vector pred = fit_predict(cfg.estimators[e], cfg, cols.topRows(ntr), y_train, cols.bottomRows(nte));
        for (std::size_t t = 0; t < split.test.size(); ++t) {
          est[e].predictions(static_cast<Eigen::Index>(split.test[t])) = pred(static_cast<Eigen::Index>(t));
        }
        est[e].selected_k.push_back(k);
      }
    }

    std::size_t best = 0;
    for (std::size_t e = 0; e < n_est; ++e) {
      est[e].rmse = rmse(est[e].predictions, result.actual);
      std::vector<double> p(est[e].predictions.data(), est[e].predictions.data() + n);
      std::vector<double> a(result.actual.data(), result.actual.data() + n);
      est[e].correlation = pearson_r(p, a);
      if (est[e].rmse < est[best].rmse) best = e;
    }
    mr.estimator = est[best].estimator;
    mr.correlation = est[best].correlation;
    mr.rmse = est[best].rmse;
    mr.selected_k = est[best].selected_k;
    mr.predictions = est[best].predictions;

    // Importances from a boosted fit on every sample.
    {
      Indices all(n);
      std::iota(all.begin(), all.end(), 0);
      Vector y_all = scale_targets_by_instructor(data.scores, data.instructors, all);
      Matrix m = prepared(x, all, {});
      auto ks = mr.selected_k;
      std::sort(ks.begin(), ks.end());
      std::size_t k = ks.empty() ? k_cap : ks[ks.size() / 2];
      auto cols = mi_select(m, y_all, std::max<std::size_t>(1, std::min(k, k_cap)), cfg.mi_bins);
      GradientBoost gb(cfg.boost);
      gb.fit(take_columns(m, cols), y_all);
      for (std::size_t c = 0; c < cols.size(); ++c) {
        mr.importances.emplace_back(data.feature_names.at(def.columns[cols[c]]),
                                    gb.feature_importance()(static_cast<Eigen::Index>(c)));
      }
      std::stable_sort(mr.importances.begin(), mr.importances.end(),
                       [](const auto& a, const auto& b) { return a.second > b.second; });
    }
    mr.candidates = std::move(est);
    result.models.push_back(std::move(mr));
  }

  const ModelResult* ref = nullptr;
  for (const auto& m : result.models) {
    if (m.name == cfg.reference_model) ref = &m;
  }
  if (ref) {
    std::vector<double> rp(ref->predictions.data(), ref->predictions.data() + n);
    for (const auto& m : result.models) {
      if (&m == ref || !m.estimator) continue;
      std::vector<double> op(m.predictions.data(), m.predictions.data() + n);
      ZouComparison cmp;
      cmp.reference = ref->name;
      cmp.other = m.name;
      cmp.r_kh = pearson_r(rp, op).r;
      try {
        cmp.interval = zou_compare(ref->correlation.r, m.correlation.r, cmp.r_kh, n, cfg.zou_confidence);
      } catch (const Error& e) {
        result.warnings.push_back("comparison " + ref->name + " vs " + m.name + " skipped: " + e.what());
        continue;
      }
      result.comparisons.push_back(cmp);
    }
  }
  return result;
}

void write_results_json(const std::string& path, const EvaluationResult& result,
                        const StudyData& data) {
  nlohmann::ordered_json j;
  j["samples"] = data.users.size();
  j["models"] = nlohmann::ordered_json::array();
  for (const auto& m : result.models) {
    nlohmann::ordered_json jm;
    jm["name"] = m.name;
    jm["estimator"] = m.estimator ? std::string(to_string(*m.estimator)) : std::string("Median");
    jm["r"] = m.correlation.r;
    jm["p"] = m.correlation.p;
    jm["significance"] = m.estimator ? significance_marker(m.correlation.p) : "-";
    jm["rmse"] = m.rmse;
    jm["selected_k"] = m.selected_k;
    auto& imp = jm["importances"] = nlohmann::ordered_json::array();
    for (const auto& [name, v] : m.importances) imp.push_back({{"feature", name}, {"importance", v}});
    auto& cand = jm["candidates"] = nlohmann::ordered_json::array();
    for (const auto& c : m.candidates) {
      cand.push_back({{"estimator", std::string(to_string(c.estimator))},
                      {"r", c.correlation.r},
                      {"p", c.correlation.p},
                      {"rmse", c.rmse},
                      {"selected_k", c.selected_k}});
    }
    j["models"].push_back(std::move(jm));
  }
  auto& cmp = j["comparisons"] = nlohmann::ordered_json::array();
  for (const auto& c : result.comparisons) {
    cmp.push_back({{"reference", c.reference},
                   {"other", c.other},
                   {"r_kh", c.r_kh},
                   {"difference", c.interval.difference},
                   {"lower", c.interval.lower},
                   {"upper", c.interval.upper},
                   {"p", c.interval.p},
                   {"significant", c.interval.significant}});
  }
  j["warnings"] = result.warnings;
  open_output(path) << j.dump(2) << '\n';
}

std::string markdown_summary(const EvaluationResult& result) {
  std::ostringstream out;
  out << "| Model | Estimator | r | p | sig | RMSE |\n|---|---|---|---|---|---|\n";
  char buf[160];
  for (const auto& m : result.models) {
    if (!m.estimator) {
      std::snprintf(buf, sizeof buf, "| %s | Median | - | - | - | %.3f |\n", m.name.c_str(), m.rmse);
    } else {
      std::snprintf(buf, sizeof buf, "| %s | %s | %.3f | %.3f | %s | %.3f |\n", m.name.c_str(),
                    std::string(to_string(*m.estimator)).c_str(), m.correlation.r, m.correlation.p,
                    significance_marker(m.correlation.p), m.rmse);
    }
    out << buf;
  }
  if (!result.comparisons.empty()) {
    out << "\n| Comparison | r_kh | difference | CI | p |\n|---|---|---|---|---|\n";
    for (const auto& c : result.comparisons) {
      std::snprintf(buf, sizeof buf, "| %s vs %s | %.3f | %.3f | [%.3f, %.3f] | %.3f |\n",
                    c.reference.c_str(), c.other.c_str(), c.r_kh, c.interval.difference,
                    c.interval.lower, c.interval.upper, c.interval.p);
      out << buf;
    }
  }
  return out.str();
}

}  // namespace wifico
