#include "exsim/classify.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <Eigen/Dense>

#include "exsim/errors.hpp"

namespace exsim {

void LogisticModel::fit(const std::vector<std::vector<double>>& x,
                        const std::vector<int>& y, double ridge,
                        int max_iter) {
  const std::size_t n = x.size();
  if (n == 0 || y.size() != n) throw DataError("LogisticModel: bad input");
  const std::size_t d = x.front().size();

  // Standardize features with training statistics.
  mean_.assign(d, 0.0);
  scale_.assign(d, 1.0);
  for (const auto& row : x)
    for (std::size_t j = 0; j < d; ++j) mean_[j] += row[j];
  for (std::size_t j = 0; j < d; ++j) mean_[j] /= static_cast<double>(n);
  for (std::size_t j = 0; j < d; ++j) {
    double s = 0.0;
    for (const auto& row : x) s += (row[j] - mean_[j]) * (row[j] - mean_[j]);
    s = std::sqrt(s / static_cast<double>(n));
    scale_[j] = s > 1e-12 ? s : 1.0;
  }

  Eigen::MatrixXd X(n, d + 1);
  Eigen::VectorXd yy(n);
  for (std::size_t i = 0; i < n; ++i) {
    X(i, 0) = 1.0;
    for (std::size_t j = 0; j < d; ++j)
      X(i, j + 1) = (x[i][j] - mean_[j]) / scale_[j];
    yy(i) = y[i];
  }

  Eigen::VectorXd beta = Eigen::VectorXd::Zero(d + 1);
  for (int it = 0; it < max_iter; ++it) {
    Eigen::VectorXd eta = X * beta;
    Eigen::VectorXd mu(n), w(n);
    for (std::size_t i = 0; i < n; ++i) {
      double e = std::clamp(eta(i), -30.0, 30.0);
      double p = 1.0 / (1.0 + std::exp(-e));
      mu(i) = p;
      w(i) = std::max(p * (1.0 - p), 1e-10);
    }
    Eigen::MatrixXd XtWX = X.transpose() * w.asDiagonal() * X;
    XtWX.diagonal().array() += ridge;
    Eigen::VectorXd g = X.transpose() * (yy - mu) - ridge * beta;
    Eigen::VectorXd step = XtWX.ldlt().solve(g);
    beta += step;
    if (step.norm() < 1e-10 * (1.0 + beta.norm())) break;
  }
  coef_.assign(beta.data(), beta.data() + beta.size());
}

int LogisticModel::predict(const std::vector<double>& row) const {
  double eta = coef_[0];
  for (std::size_t j = 0; j < row.size(); ++j)
    eta += coef_[j + 1] * (row[j] - mean_[j]) / scale_[j];
  return eta > 0.0 ? 1 : 0;
}

namespace {

double gini(int c0, int c1) {
  int n = c0 + c1;
  if (n == 0) return 0.0;
  double p = static_cast<double>(c1) / n;
  return 2.0 * p * (1.0 - p);
}

}  // namespace

int RandomForest::grow(Tree& tree, const std::vector<std::vector<double>>& x,
                       const std::vector<int>& y, std::vector<int>& samples,
                       int lo, int hi, int mtry, Rng& rng) {
  int c1 = 0;
  for (int i = lo; i < hi; ++i) c1 += y[samples[i]];
  int c0 = hi - lo - c1;

  int node_id = static_cast<int>(tree.nodes.size());
  tree.nodes.push_back(Node{});
  tree.nodes[node_id].label = c1 > c0 ? 1 : 0;
  if (c0 == 0 || c1 == 0 || hi - lo < 2) return node_id;

  const int d = static_cast<int>(x.front().size());
  double best_gain = 1e-12;
  int best_feature = -1;
  double best_threshold = 0.0;
  double parent = gini(c0, c1) * (hi - lo);

  // Sample mtry distinct features.
  std::vector<int> feats(d);
  std::iota(feats.begin(), feats.end(), 0);
  for (int k = 0; k < mtry && k < d; ++k) {
    int pick = k + static_cast<int>(rng.index(d - k));
    std::swap(feats[k], feats[pick]);
  }

  std::vector<std::pair<double, int>> vals;
  vals.reserve(hi - lo);
  for (int k = 0; k < mtry && k < d; ++k) {
    int f = feats[k];
    vals.clear();
    for (int i = lo; i < hi; ++i)
      vals.emplace_back(x[samples[i]][f], y[samples[i]]);
    std::sort(vals.begin(), vals.end());
    int l1 = 0;
    for (std::size_t i = 0; i + 1 < vals.size(); ++i) {
      l1 += vals[i].second;
      if (vals[i].first == vals[i + 1].first) continue;
      int nl = static_cast<int>(i) + 1;
      int nr = static_cast<int>(vals.size()) - nl;
      int l0 = nl - l1;
      int r1 = c1 - l1, r0 = c0 - l0;
      double child = gini(l0, l1) * nl + gini(r0, r1) * nr;
      double gain = parent - child;
      if (gain > best_gain) {
        best_gain = gain;
        best_feature = f;
        best_threshold = 0.5 * (vals[i].first + vals[i + 1].first);
      }
    }
  }
  if (best_feature < 0) return node_id;

  int mid = lo;
  for (int i = lo; i < hi; ++i)
    if (x[samples[i]][best_feature] <= best_threshold)
      std::swap(samples[i], samples[mid++]);
  if (mid == lo || mid == hi) return node_id;

  tree.nodes[node_id].feature = best_feature;
  tree.nodes[node_id].threshold = best_threshold;
  int left = grow(tree, x, y, samples, lo, mid, mtry, rng);
  int right = grow(tree, x, y, samples, mid, hi, mtry, rng);
  tree.nodes[node_id].left = left;
  tree.nodes[node_id].right = right;
  return node_id;
}

void RandomForest::fit(const std::vector<std::vector<double>>& x,
                       const std::vector<int>& y, Rng& rng) {
  const std::size_t n = x.size();
  if (n == 0 || y.size() != n) throw DataError("RandomForest: bad input");
  const int d = static_cast<int>(x.front().size());
  const int mtry =
      std::max(1, static_cast<int>(std::round(std::sqrt(static_cast<double>(d)))));
  trees_.assign(n_trees_, Tree{});
  for (auto& tree : trees_) {
    std::vector<int> samples(n);
    for (std::size_t i = 0; i < n; ++i)
      samples[i] = static_cast<int>(rng.index(n));
    grow(tree, x, y, samples, 0, static_cast<int>(n), mtry, rng);
  }
}

int RandomForest::predict(const std::vector<double>& row) const {
  int votes = 0;
  for (const auto& tree : trees_) {
    int node = 0;
    while (tree.nodes[node].feature >= 0) {
      node = row[tree.nodes[node].feature] <= tree.nodes[node].threshold
                 ? tree.nodes[node].left
                 : tree.nodes[node].right;
    }
    votes += tree.nodes[node].label;
  }
  return 2 * votes >= static_cast<int>(trees_.size()) ? 1 : 0;
}

}  // namespace exsim
