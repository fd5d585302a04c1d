#pragma once

#include <optional>
#include <set>

#include "exsim/bundle.hpp"
#include "exsim/dataset.hpp"

namespace exsim {

using SeriesSet = std::vector<std::vector<double>>;

struct FitOptions {
  std::optional<std::set<int>> season_months;  // engaged only when set
  int delta = 1;
  int ar_order = 1;
  double p_u = 0.1;
  double u_ell_quantile = 0.95;            // used when u_ell_absolute is unset
  std::optional<double> u_ell_absolute;
  int pca_components = 0;                  // 0 = automatic
  double pca_rel_drop = 0.2;
  int pca_max_components = 5;
  VineFitOptions vine;
  int threads = 1;
};

// Forward pipeline: seasonal filter, trend, delta spacing, AR residuals,
// per-t mixture margins, Frechet transform, polar extremes, angular model,
// initial-series history.
ModelBundle fit_bundle(const FunctionalDataset& raw, const FitOptions& options);

// Deterministic forward recomputation of the derived sets for an already
// fitted bundle; used by the validation command.
struct ForwardData {
  FunctionalDataset detrended;   // after season filter, detrend, subsample
  FunctionalDataset residuals;   // AR residuals
  FunctionalDataset frechet;     // transformed residuals
  std::vector<double> costs;     // cost of each frechet series
  std::vector<bool> is_extreme;  // cost > u_ell per residual cycle
  SeriesSet observed_extremes;   // detrended series of the extreme cycles
};

ForwardData forward_data(const FunctionalDataset& raw, const ModelBundle& bundle,
                         const std::optional<std::set<int>>& season_months);

}  // namespace exsim
