#pragma once

#include <span>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "exsim/math.hpp"
#include "exsim/vine.hpp"

namespace exsim {

struct AngularPCA {
  std::vector<double> mean;                       // length T
  std::vector<std::vector<double>> eigenvectors;  // T vectors of length T
  std::vector<double> eigenvalues;                // descending
  int retained = 0;                               // J
  std::vector<std::vector<double>> scores;        // n x T, all components

  // Fraction of variance explained by the first j components.
  double explained(int j) const;
};

AngularPCA fit_pca(const std::vector<std::vector<double>>& angles);

// Smallest J whose next eigenvalue drops below `rel_drop` of the current one
// (the scree criterion); falls back to max_j when the spectrum stays flat.
int select_J(const AngularPCA& pca, double rel_drop = 0.2, int max_j = 5);

// Interpolated empirical CDFs of the retained score columns.
struct ScoreMarginals {
  std::vector<std::vector<double>> sorted_scores;  // J columns, each sorted

  double cdf(int dim, double x) const;
  double quantile(int dim, double q) const;
};

ScoreMarginals fit_score_marginals(const AngularPCA& pca, int J);

// Scores via marginal quantiles, truncated basis expansion, then unit-cost
// renormalization.
std::vector<double> reconstruct_theta(const AngularPCA& pca,
                                      const ScoreMarginals& marginals,
                                      std::span<const double> uniform_row);

struct AngularModelOptions {
  int components = 0;  // 0 = automatic via select_J
  double rel_drop = 0.2;
  int max_components = 5;
  VineFitOptions vine;
};

struct AngularModel {
  AngularPCA pca;
  ScoreMarginals marginals;
  VineModel vine;

  int J() const { return pca.retained; }
};

AngularModel fit_angular_model(const std::vector<std::vector<double>>& angles,
                               const AngularModelOptions& options = {});

std::vector<double> sample_angle(const AngularModel& model, Rng& rng);

nlohmann::json angular_to_json(const AngularModel& m);
AngularModel angular_from_json(const nlohmann::json& j);

}  // namespace exsim
