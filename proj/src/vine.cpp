#include "exsim/vine.hpp"

#include <algorithm>

#include <nlohmann/json.hpp>

#include "exsim/errors.hpp"

namespace exsim {

double VineModel::total_loglik() const {
  double s = 0.0;
  for (const auto& level : trees)
    for (const auto& e : level) s += e.loglik;
  return s;
}

std::vector<const VineEdge*> VineModel::edges() const {
  std::vector<const VineEdge*> out;
  for (const auto& level : trees)
    for (const auto& e : level) out.push_back(&e);
  return out;
}

VineModel fit_vine(const std::vector<std::vector<double>>& rows,
                   const VineFitOptions& options) {
  const std::size_t n = rows.size();
  if (n < 50) throw DataError("fit_vine: need at least 50 observations");
  const int d = static_cast<int>(rows.front().size());
  for (const auto& r : rows)
    if (static_cast<int>(r.size()) != d)
      throw DataError("fit_vine: ragged input matrix");
  for (const auto& r : rows)
    for (double x : r)
      if (!(x > 0.0 && x < 1.0))
        throw DataError("fit_vine: pseudo-observations must lie in (0,1)");

  VineModel model;
  model.dim = d;
  if (d < 2) return model;

  // fbwd[i] = F(x_i | x_{i+1}..x_{i+l}), ffwd[i] = F(x_{i+l} | x_i..x_{i+l-1})
  // for the current level l, stored per observation.
  std::vector<std::vector<double>> fbwd(d, std::vector<double>(n)),
      ffwd(d, std::vector<double>(n));
  for (int i = 0; i < d; ++i)
    for (std::size_t k = 0; k < n; ++k) fbwd[i][k] = ffwd[i][k] = rows[k][i];

  model.trees.resize(d - 1);
  for (int level = 1; level <= d - 1; ++level) {
    const int n_edges = d - level;
    auto& tree = model.trees[level - 1];
    tree.resize(n_edges);
    std::vector<std::vector<double>> new_fbwd(n_edges, std::vector<double>(n)),
        new_ffwd(n_edges, std::vector<double>(n));
    for (int i = 0; i < n_edges; ++i) {
      const std::vector<double>& a = fbwd[i];      // var i side
      const std::vector<double>& b = ffwd[i + 1];  // var i+level side
      CopulaSelection sel =
          select_copula(a, b, options.families, options.independence_level);
      VineEdge& e = tree[i];
      e.tree = level;
      e.var1 = i + 1;
      e.var2 = i + level + 1;
      e.conditioning.clear();
      for (int c = i + 2; c <= i + level; ++c) e.conditioning.push_back(c);
      e.copula = sel.copula;
      e.loglik = sel.loglik;
      e.aic = sel.aic;
      e.fallback_independence = sel.fallback_independence;
      e.independence_by_test = sel.independence_by_test;
      e.tau = copula_tau(sel.copula);
      TailDependence td = copula_tail_dependence(sel.copula);
      e.lambda_upper = td.upper;
      e.lambda_lower = td.lower;
      for (std::size_t k = 0; k < n; ++k) {
        new_ffwd[i][k] = h_given_first(e.copula, b[k], a[k]);
        new_fbwd[i][k] = h_given_second(e.copula, a[k], b[k]);
      }
    }
    fbwd = std::move(new_fbwd);
    ffwd = std::move(new_ffwd);
  }
  return model;
}

std::vector<double> sample_vine_row(const VineModel& model, Rng& rng) {
  const int d = model.dim;
  std::vector<double> u(d);
  if (d == 1) {
    u[0] = rng.uniform();
    return u;
  }
  // Scalar conditional tables over the already-sampled prefix.
  std::vector<std::vector<double>> fbwd(d, std::vector<double>(d, 0.0)),
      ffwd(d, std::vector<double>(d, 0.0));
  u[0] = rng.uniform();
  fbwd[0][0] = ffwd[0][0] = u[0];
  for (int i = 1; i < d; ++i) {
    std::vector<double> z(i + 1);
    z[i] = rng.uniform();
    for (int level = i; level >= 1; --level) {
      const VineEdge& e = model.edge(level, i - level);
      double a = fbwd[level - 1][i - level];
      z[level - 1] = hinv_given_first(e.copula, z[level], a);
    }
    u[i] = z[0];
    for (int level = 0; level <= i; ++level) ffwd[level][i - level] = z[level];
    fbwd[0][i] = u[i];
    for (int level = 1; level <= i; ++level) {
      const VineEdge& e = model.edge(level, i - level);
      fbwd[level][i - level] = h_given_second(
          e.copula, fbwd[level - 1][i - level], ffwd[level - 1][i - level + 1]);
    }
  }
  return u;
}

std::vector<std::vector<double>> sample_vine(const VineModel& model,
                                             std::size_t n, Rng& rng) {
  std::vector<std::vector<double>> out;
  out.reserve(n);
  for (std::size_t k = 0; k < n; ++k) out.push_back(sample_vine_row(model, rng));
  return out;
}

nlohmann::json vine_to_json(const VineModel& m) {
  nlohmann::json edges = nlohmann::json::array();
  for (const auto& level : m.trees) {
    for (const auto& e : level) {
      nlohmann::json je{{"tree", e.tree},
                        {"pair", {e.var1, e.var2}},
                        {"conditioning", e.conditioning},
                        {"family", family_name(e.copula.family)},
                        {"rotation", e.copula.rotation},
                        {"par", e.copula.par},
                        {"par2", e.copula.par2},
                        {"tau", e.tau},
                        {"lambda_upper", e.lambda_upper},
                        {"lambda_lower", e.lambda_lower},
                        {"loglik", e.loglik},
                        {"aic", e.aic},
                        {"fallback_independence", e.fallback_independence},
                        {"independence_by_test", e.independence_by_test}};
      edges.push_back(je);
    }
  }
  return nlohmann::json{{"dim", m.dim}, {"edges", edges}};
}

VineModel vine_from_json(const nlohmann::json& j) {
  VineModel m;
  m.dim = j.at("dim").get<int>();
  if (m.dim >= 2) m.trees.resize(m.dim - 1);
  for (int level = 1; level <= m.dim - 1; ++level)
    m.trees[level - 1].resize(m.dim - level);
  for (const auto& je : j.at("edges")) {
    VineEdge e;
    e.tree = je.at("tree").get<int>();
    auto pair = je.at("pair").get<std::vector<int>>();
    e.var1 = pair.at(0);
    e.var2 = pair.at(1);
    e.conditioning = je.at("conditioning").get<std::vector<int>>();
    e.copula.family = family_from_name(je.at("family").get<std::string>());
    e.copula.rotation = je.value("rotation", 0);
    e.copula.par = je.value("par", 0.0);
    e.copula.par2 = je.value("par2", 0.0);
    e.tau = je.value("tau", 0.0);
    e.lambda_upper = je.value("lambda_upper", 0.0);
    e.lambda_lower = je.value("lambda_lower", 0.0);
    e.loglik = je.value("loglik", 0.0);
    e.aic = je.value("aic", 0.0);
    e.fallback_independence = je.value("fallback_independence", false);
    e.independence_by_test = je.value("independence_by_test", false);
    if (e.tree < 1 || e.tree > m.dim - 1 || e.var1 < 1 ||
        e.var1 > m.dim - e.tree)
      throw DataError("vine_from_json: edge indices out of range");
    m.trees[e.tree - 1][e.var1 - 1] = e;
  }
  return m;
}

}  // namespace exsim
