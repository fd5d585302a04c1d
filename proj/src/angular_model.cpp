#include "exsim/angular_model.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "exsim/errors.hpp"
#include "exsim/polar.hpp"

namespace exsim {

double AngularPCA::explained(int j) const {
  double total = std::accumulate(eigenvalues.begin(), eigenvalues.end(), 0.0);
  if (total <= 0.0) return 1.0;
  double s = 0.0;
  for (int i = 0; i < j && i < static_cast<int>(eigenvalues.size()); ++i)
    s += eigenvalues[i];
  return s / total;
}

AngularPCA fit_pca(const std::vector<std::vector<double>>& angles) {
  const std::size_t n = angles.size();
  if (n < 2) throw DataError("fit_pca: need at least 2 angles");
  const int T = static_cast<int>(angles.front().size());
  for (const auto& a : angles)
    if (static_cast<int>(a.size()) != T)
      throw DataError("fit_pca: ragged input");

  AngularPCA pca;
  pca.mean.assign(T, 0.0);
  for (const auto& a : angles)
    for (int t = 0; t < T; ++t) pca.mean[t] += a[t];
  for (int t = 0; t < T; ++t) pca.mean[t] /= static_cast<double>(n);

  Eigen::MatrixXd centered(n, T);
  for (std::size_t i = 0; i < n; ++i)
    for (int t = 0; t < T; ++t) centered(i, t) = angles[i][t] - pca.mean[t];
  Eigen::MatrixXd cov =
      centered.transpose() * centered / static_cast<double>(n - 1);

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(cov);
  if (solver.info() != Eigen::Success)
    throw NumericalError("fit_pca: eigendecomposition failed");

  // Eigen returns ascending order; flip to descending and fix signs so the
  // largest-magnitude component of each eigenvector is positive.
  std::vector<int> order(T);
  std::iota(order.begin(), order.end(), 0);
  std::reverse(order.begin(), order.end());

  pca.eigenvalues.resize(T);
  pca.eigenvectors.assign(T, std::vector<double>(T));
  for (int j = 0; j < T; ++j) {
    int src = order[j];
    pca.eigenvalues[j] = std::max(0.0, solver.eigenvalues()(src));
    Eigen::VectorXd v = solver.eigenvectors().col(src);
    int argmax = 0;
    for (int t = 1; t < T; ++t)
      if (std::fabs(v(t)) > std::fabs(v(argmax))) argmax = t;
    if (v(argmax) < 0.0) v = -v;
    for (int t = 0; t < T; ++t) pca.eigenvectors[j][t] = v(t);
  }

  pca.scores.assign(n, std::vector<double>(T, 0.0));
  for (std::size_t i = 0; i < n; ++i) {
    for (int j = 0; j < T; ++j) {
      double s = 0.0;
      for (int t = 0; t < T; ++t)
        s += centered(i, t) * pca.eigenvectors[j][t];
      pca.scores[i][j] = s;
    }
  }
  pca.retained = T;
  return pca;
}

int select_J(const AngularPCA& pca, double rel_drop, int max_j) {
  const int T = static_cast<int>(pca.eigenvalues.size());
  const int cap = std::max(1, std::min(max_j, T));
  const double lam1 = pca.eigenvalues.empty() ? 0.0 : pca.eigenvalues[0];
  if (lam1 <= 0.0) return 1;
  for (int j = 1; j < cap; ++j) {
    double cur = pca.eigenvalues[j - 1];
    double nxt = j < T ? pca.eigenvalues[j] : 0.0;
    if (nxt <= 1e-12 * lam1) return j;       // nothing left to add
    if (nxt / cur < rel_drop) return j;      // spectrum drops off after j
  }
  return cap;
}

double ScoreMarginals::cdf(int dim, double x) const {
  return ecdf_interp(sorted_scores.at(dim), x);
}

double ScoreMarginals::quantile(int dim, double q) const {
  return quantile_interp(sorted_scores.at(dim), q);
}

ScoreMarginals fit_score_marginals(const AngularPCA& pca, int J) {
  if (J < 1 || J > static_cast<int>(pca.eigenvalues.size()))
    throw DataError("fit_score_marginals: J out of range");
  ScoreMarginals m;
  m.sorted_scores.assign(J, {});
  for (int j = 0; j < J; ++j) {
    auto& col = m.sorted_scores[j];
    col.reserve(pca.scores.size());
    for (const auto& row : pca.scores) col.push_back(row[j]);
    std::sort(col.begin(), col.end());
  }
  return m;
}

std::vector<double> reconstruct_theta(const AngularPCA& pca,
                                      const ScoreMarginals& marginals,
                                      std::span<const double> uniform_row) {
  const int J = static_cast<int>(marginals.sorted_scores.size());
  if (static_cast<int>(uniform_row.size()) != J)
    throw DataError("reconstruct_theta: uniform row length mismatch");
  const int T = static_cast<int>(pca.mean.size());
  std::vector<double> theta = pca.mean;
  for (int j = 0; j < J; ++j) {
    double score = marginals.quantile(j, uniform_row[j]);
    for (int t = 0; t < T; ++t) theta[t] += score * pca.eigenvectors[j][t];
  }
  double c = cost(theta);
  if (!(c > 1e-12))
    throw NumericalError("reconstruct_theta: degenerate zero angle");
  for (double& v : theta) v /= c;
  return theta;
}

AngularModel fit_angular_model(const std::vector<std::vector<double>>& angles,
                               const AngularModelOptions& options) {
  AngularModel model;
  model.pca = fit_pca(angles);
  int J = options.components > 0
              ? std::min<int>(options.components, model.pca.eigenvalues.size())
              : select_J(model.pca, options.rel_drop, options.max_components);
  model.pca.retained = J;
  model.marginals = fit_score_marginals(model.pca, J);
  if (J >= 2) {
    // Probability integral transform of the scores through their own
    // empirical CDFs.
    std::vector<std::vector<double>> pit(model.pca.scores.size(),
                                         std::vector<double>(J));
    for (std::size_t i = 0; i < model.pca.scores.size(); ++i)
      for (int j = 0; j < J; ++j)
        pit[i][j] = model.marginals.cdf(j, model.pca.scores[i][j]);
    model.vine = fit_vine(pit, options.vine);
  } else {
    model.vine.dim = 1;
  }
  return model;
}

std::vector<double> sample_angle(const AngularModel& model, Rng& rng) {
  std::vector<double> u = sample_vine_row(model.vine, rng);
  return reconstruct_theta(model.pca, model.marginals, u);
}

nlohmann::json angular_to_json(const AngularModel& m) {
  return nlohmann::json{
      {"pca",
       {{"mean", m.pca.mean},
        {"eigenvalues", m.pca.eigenvalues},
        {"eigenvectors", m.pca.eigenvectors},
        {"retained", m.pca.retained}}},
      {"score_samples", m.marginals.sorted_scores},
      {"vine", vine_to_json(m.vine)}};
}

AngularModel angular_from_json(const nlohmann::json& j) {
  AngularModel m;
  const auto& jp = j.at("pca");
  m.pca.mean = jp.at("mean").get<std::vector<double>>();
  m.pca.eigenvalues = jp.at("eigenvalues").get<std::vector<double>>();
  m.pca.eigenvectors =
      jp.at("eigenvectors").get<std::vector<std::vector<double>>>();
  m.pca.retained = jp.at("retained").get<int>();
  m.marginals.sorted_scores =
      j.at("score_samples").get<std::vector<std::vector<double>>>();
  m.vine = vine_from_json(j.at("vine"));
  return m;
}

}  // namespace exsim
