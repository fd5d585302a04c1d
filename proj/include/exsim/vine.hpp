#pragma once

#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "exsim/copula.hpp"
#include "exsim/math.hpp"

namespace exsim {

struct VineEdge {
  int tree = 1;                   // 1-based level
  int var1 = 1, var2 = 2;         // 1-based variable labels
  std::vector<int> conditioning;  // variables between var1 and var2
  BivariateCopula copula;
  double loglik = 0.0;
  double aic = 0.0;
  double tau = 0.0;
  double lambda_upper = 0.0;
  double lambda_lower = 0.0;
  bool fallback_independence = false;
  bool independence_by_test = false;
};

// D-vine in natural variable order 1..dim.
struct VineModel {
  int dim = 1;
  std::vector<std::vector<VineEdge>> trees;  // trees[l][i]: edge (i+1, i+1+l+1)

  const VineEdge& edge(int level, int index) const {
    return trees[level - 1][index];
  }
  double total_loglik() const;
  std::vector<const VineEdge*> edges() const;
};

struct VineFitOptions {
  std::vector<CopulaFamily> families{
      CopulaFamily::independence, CopulaFamily::gaussian,
      CopulaFamily::student_t,    CopulaFamily::clayton,
      CopulaFamily::gumbel,       CopulaFamily::frank};
  double independence_level = 0.01;  // Kendall-tau pretest level; 0 disables
};

// rows: n x dim matrix of pseudo-observations in (0,1).
VineModel fit_vine(const std::vector<std::vector<double>>& rows,
                   const VineFitOptions& options = {});

// Inverse-Rosenblatt sampling; returns n rows of dim uniforms.
std::vector<std::vector<double>> sample_vine(const VineModel& model,
                                             std::size_t n, Rng& rng);
std::vector<double> sample_vine_row(const VineModel& model, Rng& rng);

nlohmann::json vine_to_json(const VineModel& m);
VineModel vine_from_json(const nlohmann::json& j);

}  // namespace exsim
