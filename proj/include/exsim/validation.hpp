#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "exsim/math.hpp"

namespace exsim {

using SeriesSet = std::vector<std::vector<double>>;  // n x T

// ---- percentile bands ---------------------------------------------------------

struct BandCell {
  int t = 0;
  double level = 0.0;  // percentile in (0, 100)
  double observed = 0.0;
  double lo = 0.0, hi = 0.0;
  double simulated = 0.0;
  bool inside = false;
};

struct PercentileBandsResult {
  std::vector<BandCell> cells;
  double fraction_inside = 0.0;
};

PercentileBandsResult percentile_bands(const SeriesSet& observed,
                                       const SeriesSet& simulated,
                                       std::span<const double> levels,
                                       int n_bootstrap, Rng& rng,
                                       double band_confidence = 0.95);

// ---- two-sample KS on PCA coordinates ------------------------------------------

struct KsTest {
  int dimension = 1;
  double statistic = 0.0;
  double p_value = 1.0;
};

double ks_two_sample_p(double statistic, std::size_t n, std::size_t m);

// Projects both groups (angles standardized by the observations' per-t mean
// and sd) onto the observations' PCA basis; KS per retained dimension.
std::vector<KsTest> pca_two_sample(const SeriesSet& observed,
                                   const SeriesSet& simulated, int dimensions);

// ---- extremogram ----------------------------------------------------------------

std::vector<double> extremogram(const SeriesSet& series, double q, int max_lag);

struct ExtremogramResult {
  std::vector<int> lags;
  std::vector<double> observed;
  std::vector<double> lo, hi;
  std::vector<double> simulated;
  bool all_inside = false;
};

ExtremogramResult extremogram_compare(const SeriesSet& observed,
                                      const SeriesSet& simulated, double q,
                                      int max_lag, int n_bootstrap, Rng& rng,
                                      double band_confidence = 0.95);

// ---- chi dependence measures -----------------------------------------------------

struct ChiCurve {
  std::vector<double> u_grid;
  std::vector<double> chi;
  std::vector<double> lo, hi;
  double chi_bar = 0.0;  // NaN when undefined at the top of the grid
};

// Raw pair sample; rank-transformed internally (per bootstrap resample too).
ChiCurve chi_measures(std::span<const double> x, std::span<const double> y,
                      std::span<const double> u_grid, int n_bootstrap, Rng& rng,
                      double band_confidence = 0.95);

// ---- return levels ----------------------------------------------------------------

double return_period(double p, double events_per_year);

struct ReturnLevelRow {
  double level = 0.0;
  double p = 0.0;
  double period = 0.0;
  double period_lo = 0.0, period_hi = 0.0;
};

struct ReturnLevelResult {
  int t = 0;
  double threshold = 0.0;
  std::vector<ReturnLevelRow> rows;
};

// obs_values: all observed values at time t (one per cycle with a residual);
// obs_extreme: whether the cycle belongs to the extreme set;
// sim_values: simulated values at time t.
ReturnLevelResult return_levels(std::span<const double> obs_values,
                                const std::vector<bool>& obs_extreme,
                                std::span<const double> sim_values,
                                double threshold, double events_per_year,
                                int t_index, int n_bootstrap, Rng& rng);

// ---- classification two-sample test -------------------------------------------------

enum class Feature { raw, cost, angle };
enum class Classifier { logistic, random_forest };

std::string feature_name(Feature f);
std::string classifier_name(Classifier c);

struct ClassificationResult {
  Feature feature = Feature::raw;
  Classifier classifier = Classifier::logistic;
  std::vector<double> accuracies;
  double ci_lo = 0.0, ci_hi = 0.0;  // empirical 5-95% over repetitions
  bool contains_half = false;
};

ClassificationResult classification_test(const SeriesSet& observed,
                                         const SeriesSet& simulated_pool,
                                         Feature feature, Classifier classifier,
                                         int repetitions, Rng& rng,
                                         int n_trees = 500,
                                         double train_fraction = 0.7);

// ---- cost distribution ---------------------------------------------------------------

struct CostCompareResult {
  std::vector<double> bin_edges;
  std::vector<double> observed_density;
  std::vector<double> simulated_density;
  double observed_max = 0.0;
  double simulated_max = 0.0;
  bool simulated_exceeds_observed_max = false;
};

CostCompareResult cost_distribution_compare(const SeriesSet& observed,
                                            const SeriesSet& simulated,
                                            int bins = 30);

}  // namespace exsim
