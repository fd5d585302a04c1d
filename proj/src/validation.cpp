#include "exsim/validation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include <nlohmann/json.hpp>

#include "exsim/angular_model.hpp"
#include "exsim/classify.hpp"
#include "exsim/errors.hpp"
#include "exsim/polar.hpp"

namespace exsim {

namespace {

std::vector<double> sorted_column(const SeriesSet& set, int t) {
  std::vector<double> col;
  col.reserve(set.size());
  for (const auto& s : set) col.push_back(s[t]);
  std::sort(col.begin(), col.end());
  return col;
}

SeriesSet resample_rows(const SeriesSet& set, Rng& rng) {
  SeriesSet out;
  out.reserve(set.size());
  for (std::size_t i = 0; i < set.size(); ++i)
    out.push_back(set[rng.index(set.size())]);
  return out;
}

void check_nonempty(const SeriesSet& observed, const SeriesSet& simulated) {
  if (observed.empty() || simulated.empty())
    throw DataError("validation: empty series set");
  if (observed.front().size() != simulated.front().size())
    throw DataError("validation: observed/simulated length mismatch");
}

}  // namespace

// ---- percentile bands ---------------------------------------------------------

PercentileBandsResult percentile_bands(const SeriesSet& observed,
                                       const SeriesSet& simulated,
                                       std::span<const double> levels,
                                       int n_bootstrap, Rng& rng,
                                       double band_confidence) {
  check_nonempty(observed, simulated);
  if (n_bootstrap < 100)
    throw DataError("percentile_bands: need at least 100 bootstrap resamples");
  for (double lv : levels)
    if (!(lv > 0.0 && lv < 100.0))
      throw DataError("percentile_bands: level outside (0, 100)");
  const int T = static_cast<int>(observed.front().size());
  const double alpha = 1.0 - band_confidence;

  // Bootstrap percentiles per (t, level).
  std::vector<std::vector<std::vector<double>>> boot(
      T, std::vector<std::vector<double>>(levels.size()));
  for (int b = 0; b < n_bootstrap; ++b) {
    SeriesSet res = resample_rows(observed, rng);
    for (int t = 0; t < T; ++t) {
      auto col = sorted_column(res, t);
      for (std::size_t li = 0; li < levels.size(); ++li)
        boot[t][li].push_back(quantile_interp(col, levels[li] / 100.0));
    }
  }

  PercentileBandsResult out;
  std::size_t inside = 0;
  for (int t = 0; t < T; ++t) {
    auto obs_col = sorted_column(observed, t);
    auto sim_col = sorted_column(simulated, t);
    for (std::size_t li = 0; li < levels.size(); ++li) {
      auto& bs = boot[t][li];
      std::sort(bs.begin(), bs.end());
      BandCell cell;
      cell.t = t + 1;
      cell.level = levels[li];
      cell.observed = quantile_interp(obs_col, levels[li] / 100.0);
      cell.lo = quantile_interp(bs, alpha / 2.0);
      cell.hi = quantile_interp(bs, 1.0 - alpha / 2.0);
      cell.simulated = quantile_interp(sim_col, levels[li] / 100.0);
      cell.inside = cell.simulated >= cell.lo && cell.simulated <= cell.hi;
      if (cell.inside) ++inside;
      out.cells.push_back(cell);
    }
  }
  out.fraction_inside =
      static_cast<double>(inside) / static_cast<double>(out.cells.size());
  return out;
}

// ---- two-sample KS on PCA coordinates ------------------------------------------

double ks_two_sample_p(double statistic, std::size_t n, std::size_t m) {
  double ne = static_cast<double>(n) * static_cast<double>(m) /
              static_cast<double>(n + m);
  double sn = std::sqrt(ne);
  double lambda = (sn + 0.12 + 0.11 / sn) * statistic;
  double sum = 0.0;
  for (int k = 1; k <= 100; ++k) {
    double term = 2.0 * std::pow(-1.0, k - 1) *
                  std::exp(-2.0 * k * k * lambda * lambda);
    sum += term;
    if (std::fabs(term) < 1e-12) break;
  }
  return std::clamp(sum, 0.0, 1.0);
}

namespace {

double ks_statistic(std::vector<double> a, std::vector<double> b) {
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  double d = 0.0;
  std::size_t i = 0, j = 0;
  while (i < a.size() && j < b.size()) {
    double x = std::min(a[i], b[j]);
    while (i < a.size() && a[i] <= x) ++i;
    while (j < b.size() && b[j] <= x) ++j;
    double fa = static_cast<double>(i) / a.size();
    double fb = static_cast<double>(j) / b.size();
    d = std::max(d, std::fabs(fa - fb));
  }
  return d;
}

}  // namespace

std::vector<KsTest> pca_two_sample(const SeriesSet& observed,
                                   const SeriesSet& simulated, int dimensions) {
  check_nonempty(observed, simulated);
  const int T = static_cast<int>(observed.front().size());

  auto to_angles = [&](const SeriesSet& set) {
    SeriesSet out;
    out.reserve(set.size());
    for (const auto& s : set) {
      double c = cost(s);
      if (!(c > 0.0)) throw NumericalError("pca_two_sample: zero-cost series");
      std::vector<double> a(s.size());
      for (std::size_t t = 0; t < s.size(); ++t) a[t] = s[t] / c;
      out.push_back(std::move(a));
    }
    return out;
  };
  SeriesSet obs_angles = to_angles(observed);
  SeriesSet sim_angles = to_angles(simulated);

  // Standardize both groups by the observations' per-t mean and sd.
  std::vector<double> mu(T, 0.0), sig(T, 0.0);
  for (const auto& a : obs_angles)
    for (int t = 0; t < T; ++t) mu[t] += a[t];
  for (int t = 0; t < T; ++t) mu[t] /= static_cast<double>(obs_angles.size());
  for (const auto& a : obs_angles)
    for (int t = 0; t < T; ++t) sig[t] += (a[t] - mu[t]) * (a[t] - mu[t]);
  for (int t = 0; t < T; ++t) {
    sig[t] = std::sqrt(sig[t] / static_cast<double>(obs_angles.size() - 1));
    if (!(sig[t] > 1e-14))
      throw NumericalError("pca_two_sample: degenerate dimension t=" +
                           std::to_string(t + 1));
  }
  auto standardize = [&](SeriesSet& set) {
    for (auto& a : set)
      for (int t = 0; t < T; ++t) a[t] = (a[t] - mu[t]) / sig[t];
  };
  standardize(obs_angles);
  standardize(sim_angles);

  AngularPCA pca = fit_pca(obs_angles);
  const int J = std::min<int>(dimensions, pca.eigenvalues.size());

  std::vector<KsTest> out;
  for (int j = 0; j < J; ++j) {
    if (pca.eigenvalues[j] <= 1e-14)
      throw NumericalError("pca_two_sample: zero-variance dimension " +
                           std::to_string(j + 1));
    std::vector<double> proj_obs, proj_sim;
    proj_obs.reserve(obs_angles.size());
    proj_sim.reserve(sim_angles.size());
    for (const auto& a : obs_angles) {
      double s = 0.0;
      for (int t = 0; t < T; ++t)
        s += (a[t] - pca.mean[t]) * pca.eigenvectors[j][t];
      proj_obs.push_back(s);
    }
    for (const auto& a : sim_angles) {
      double s = 0.0;
      for (int t = 0; t < T; ++t)
        s += (a[t] - pca.mean[t]) * pca.eigenvectors[j][t];
      proj_sim.push_back(s);
    }
    KsTest test;
    test.dimension = j + 1;
    test.statistic = ks_statistic(proj_obs, proj_sim);
    test.p_value =
        ks_two_sample_p(test.statistic, proj_obs.size(), proj_sim.size());
    out.push_back(test);
  }
  return out;
}

// ---- extremogram ----------------------------------------------------------------

std::vector<double> extremogram(const SeriesSet& series, double q, int max_lag) {
  if (series.empty()) throw DataError("extremogram: empty series set");
  if (!(q > 0.0 && q < 1.0)) throw DataError("extremogram: q outside (0,1)");
  const int T = static_cast<int>(series.front().size());
  if (max_lag < 0 || max_lag >= T)
    throw DataError("extremogram: max_lag outside [0, T)");
  const std::size_t n = series.size();

  // Per-t thresholds and exceedance indicators.
  std::vector<std::vector<bool>> exceed(n, std::vector<bool>(T));
  for (int t = 0; t < T; ++t) {
    auto col = sorted_column(series, t);
    double u = quantile_interp(col, q);
    std::size_t cnt = 0;
    for (std::size_t i = 0; i < n; ++i) {
      exceed[i][t] = series[i][t] > u;
      if (exceed[i][t]) ++cnt;
    }
    if (cnt == 0)
      throw DataError("extremogram: no exceedances at t=" + std::to_string(t + 1));
  }

  std::vector<double> pi(max_lag + 1, 0.0);
  pi[0] = 1.0;
  for (int h = 1; h <= max_lag; ++h) {
    double sum = 0.0;
    int terms = 0;
    for (int s = 0; s + h < T; ++s) {
      int joint = 0, base = 0;
      for (std::size_t i = 0; i < n; ++i) {
        if (exceed[i][s]) {
          ++base;
          if (exceed[i][s + h]) ++joint;
        }
      }
      if (base > 0) {
        sum += static_cast<double>(joint) / base;
        ++terms;
      }
    }
    pi[h] = terms > 0 ? sum / terms : std::numeric_limits<double>::quiet_NaN();
  }
  return pi;
}

ExtremogramResult extremogram_compare(const SeriesSet& observed,
                                      const SeriesSet& simulated, double q,
                                      int max_lag, int n_bootstrap, Rng& rng,
                                      double band_confidence) {
  check_nonempty(observed, simulated);
  ExtremogramResult out;
  out.observed = extremogram(observed, q, max_lag);
  out.simulated = extremogram(simulated, q, max_lag);
  for (int h = 0; h <= max_lag; ++h) out.lags.push_back(h);

  std::vector<std::vector<double>> boot(max_lag + 1);
  for (int b = 0; b < n_bootstrap; ++b) {
    SeriesSet res = resample_rows(observed, rng);
    std::vector<double> pi = extremogram(res, q, max_lag);
    for (int h = 0; h <= max_lag; ++h) boot[h].push_back(pi[h]);
  }
  const double alpha = 1.0 - band_confidence;
  out.lo.resize(max_lag + 1);
  out.hi.resize(max_lag + 1);
  out.all_inside = true;
  for (int h = 0; h <= max_lag; ++h) {
    std::sort(boot[h].begin(), boot[h].end());
    out.lo[h] = quantile_interp(boot[h], alpha / 2.0);
    out.hi[h] = quantile_interp(boot[h], 1.0 - alpha / 2.0);
    if (out.simulated[h] < out.lo[h] || out.simulated[h] > out.hi[h])
      out.all_inside = false;
  }
  return out;
}

// ---- chi dependence measures -----------------------------------------------------

namespace {

std::vector<double> rank_uniform(std::span<const double> x) {
  const std::size_t n = x.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return x[a] < x[b]; });
  std::vector<double> u(n);
  for (std::size_t r = 0; r < n; ++r)
    u[order[r]] = static_cast<double>(r + 1) / static_cast<double>(n + 1);
  return u;
}

std::vector<double> chi_point(const std::vector<double>& u,
                              const std::vector<double>& v,
                              std::span<const double> grid) {
  const std::size_t n = u.size();
  std::vector<double> chi(grid.size());
  for (std::size_t g = 0; g < grid.size(); ++g) {
    double thr = grid[g];
    int joint = 0, base = 0;
    for (std::size_t i = 0; i < n; ++i) {
      if (u[i] > thr) {
        ++base;
        if (v[i] > thr) ++joint;
      }
    }
    chi[g] = base > 0 ? static_cast<double>(joint) / base
                      : std::numeric_limits<double>::quiet_NaN();
  }
  return chi;
}

}  // namespace

ChiCurve chi_measures(std::span<const double> x, std::span<const double> y,
                      std::span<const double> u_grid, int n_bootstrap, Rng& rng,
                      double band_confidence) {
  const std::size_t n = x.size();
  if (n != y.size() || n < 20) throw DataError("chi_measures: bad pair sample");
  for (std::size_t g = 1; g < u_grid.size(); ++g)
    if (u_grid[g] <= u_grid[g - 1])
      throw DataError("chi_measures: grid must be strictly increasing");

  ChiCurve out;
  out.u_grid.assign(u_grid.begin(), u_grid.end());
  std::vector<double> u = rank_uniform(x), v = rank_uniform(y);
  out.chi = chi_point(u, v, u_grid);

  // chi-bar at the top of the grid.
  {
    double thr = u_grid.back();
    int joint = 0, base = 0;
    for (std::size_t i = 0; i < n; ++i) {
      if (u[i] > thr) ++base;
      if (u[i] > thr && v[i] > thr) ++joint;
    }
    if (joint > 0 && base > 0) {
      double pu = static_cast<double>(base) / n;
      double puv = static_cast<double>(joint) / n;
      out.chi_bar = 2.0 * std::log(pu) / std::log(puv) - 1.0;
    } else {
      out.chi_bar = std::numeric_limits<double>::quiet_NaN();
    }
  }

  std::vector<std::vector<double>> boot(u_grid.size());
  std::vector<double> xb(n), yb(n);
  for (int b = 0; b < n_bootstrap; ++b) {
    for (std::size_t i = 0; i < n; ++i) {
      std::size_t k = rng.index(n);
      xb[i] = x[k];
      yb[i] = y[k];
    }
    auto ub = rank_uniform(xb), vb = rank_uniform(yb);
    auto chib = chi_point(ub, vb, u_grid);
    for (std::size_t g = 0; g < u_grid.size(); ++g)
      if (std::isfinite(chib[g])) boot[g].push_back(chib[g]);
  }
  const double alpha = 1.0 - band_confidence;
  out.lo.resize(u_grid.size());
  out.hi.resize(u_grid.size());
  for (std::size_t g = 0; g < u_grid.size(); ++g) {
    if (boot[g].empty()) {
      out.lo[g] = out.hi[g] = std::numeric_limits<double>::quiet_NaN();
      continue;
    }
    std::sort(boot[g].begin(), boot[g].end());
    out.lo[g] = quantile_interp(boot[g], alpha / 2.0);
    out.hi[g] = quantile_interp(boot[g], 1.0 - alpha / 2.0);
  }
  return out;
}

// ---- return levels ----------------------------------------------------------------

double return_period(double p, double events_per_year) {
  if (!(events_per_year > 0.0))
    throw DataError("return_period: events_per_year must be positive");
  if (!(p >= 0.0 && p < 1.0)) throw DataError("return_period: p outside [0,1)");
  return 1.0 / (events_per_year * (1.0 - p));
}

ReturnLevelResult return_levels(std::span<const double> obs_values,
                                const std::vector<bool>& obs_extreme,
                                std::span<const double> sim_values,
                                double threshold, double events_per_year,
                                int t_index, int n_bootstrap, Rng& rng) {
  const std::size_t n = obs_values.size();
  if (n != obs_extreme.size())
    throw DataError("return_levels: flag length mismatch");
  if (sim_values.empty()) throw DataError("return_levels: empty simulations");

  // Observation side: the conditioning event is obs > threshold.
  std::vector<double> b_values;
  std::vector<bool> b_extreme;
  for (std::size_t i = 0; i < n; ++i) {
    if (obs_values[i] > threshold) {
      b_values.push_back(obs_values[i]);
      b_extreme.push_back(obs_extreme[i]);
    }
  }
  if (b_values.empty())
    throw DataError("return_levels: no observations above the threshold");

  // Simulation side conditioned the same way.
  std::vector<double> sim_b;
  for (double v : sim_values)
    if (v > threshold) sim_b.push_back(v);
  if (sim_b.empty())
    throw DataError("return_levels: no simulated values above the threshold");
  std::sort(sim_b.begin(), sim_b.end());

  auto estimate_p = [&](const std::vector<double>& bv,
                        const std::vector<bool>& be, double x) {
    std::size_t nb = bv.size(), nc = 0, n_le_not_c = 0;
    for (std::size_t i = 0; i < nb; ++i) {
      if (be[i]) ++nc;
      if (!be[i] && bv[i] <= x) ++n_le_not_c;
    }
    double p_c = static_cast<double>(nc) / nb;
    double p_sim = ecdf_interp(sim_b, x);
    double p_not_c_le = static_cast<double>(n_le_not_c) / nb;
    return p_c * p_sim + p_not_c_le;
  };

  // Levels from the simulated quantiles.
  const std::vector<double> p_grid{0.5,  0.6,  0.7,  0.8,   0.9,  0.95,
                                   0.98, 0.99, 0.995, 0.998, 0.999};
  ReturnLevelResult out;
  out.t = t_index;
  out.threshold = threshold;
  for (double pg : p_grid) {
    ReturnLevelRow row;
    row.level = quantile_interp(sim_b, pg);
    row.p = estimate_p(b_values, b_extreme, row.level);
    row.period = return_period(std::min(row.p, 1.0 - 1e-12), events_per_year);
    out.rows.push_back(row);
  }

  // Bootstrap the observation side only.
  std::vector<std::vector<double>> boot(out.rows.size());
  std::vector<double> bv(b_values.size());
  std::vector<bool> be(b_values.size());
  for (int b = 0; b < n_bootstrap; ++b) {
    for (std::size_t i = 0; i < b_values.size(); ++i) {
      std::size_t k = rng.index(b_values.size());
      bv[i] = b_values[k];
      be[i] = b_extreme[k];
    }
    for (std::size_t r = 0; r < out.rows.size(); ++r) {
      double p = estimate_p(bv, be, out.rows[r].level);
      boot[r].push_back(return_period(std::min(p, 1.0 - 1e-12),
                                      events_per_year));
    }
  }
  for (std::size_t r = 0; r < out.rows.size(); ++r) {
    std::sort(boot[r].begin(), boot[r].end());
    out.rows[r].period_lo = quantile_interp(boot[r], 0.025);
    out.rows[r].period_hi = quantile_interp(boot[r], 0.975);
  }
  return out;
}

// ---- classification two-sample test -------------------------------------------------

std::string feature_name(Feature f) {
  switch (f) {
    case Feature::raw:
      return "raw";
    case Feature::cost:
      return "cost";
    case Feature::angle:
      return "angle";
  }
  return "unknown";
}

std::string classifier_name(Classifier c) {
  switch (c) {
    case Classifier::logistic:
      return "logistic";
    case Classifier::random_forest:
      return "random_forest";
  }
  return "unknown";
}

namespace {

std::vector<double> extract_features(const std::vector<double>& series,
                                     Feature feature) {
  switch (feature) {
    case Feature::raw:
      return series;
    case Feature::cost:
      return {cost(series)};
    case Feature::angle: {
      double c = cost(series);
      if (!(c > 0.0))
        throw NumericalError("classification: zero-cost series");
      std::vector<double> a(series.size());
      for (std::size_t t = 0; t < series.size(); ++t) a[t] = series[t] / c;
      return a;
    }
  }
  throw DataError("classification: unknown feature");
}

}  // namespace

ClassificationResult classification_test(const SeriesSet& observed,
                                         const SeriesSet& simulated_pool,
                                         Feature feature, Classifier classifier,
                                         int repetitions, Rng& rng,
                                         int n_trees, double train_fraction) {
  check_nonempty(observed, simulated_pool);
  const std::size_t n = observed.size();
  if (simulated_pool.size() < n)
    throw DataError("classification_test: simulated pool smaller than observations");

  ClassificationResult out;
  out.feature = feature;
  out.classifier = classifier;

  for (int rep = 0; rep < repetitions; ++rep) {
    Rng rep_rng(rng.next(), static_cast<std::uint64_t>(rep) + 1);

    // Draw n simulations without replacement.
    std::vector<std::size_t> pool(simulated_pool.size());
    std::iota(pool.begin(), pool.end(), 0);
    for (std::size_t i = 0; i < n; ++i) {
      std::size_t j = i + rep_rng.index(pool.size() - i);
      std::swap(pool[i], pool[j]);
    }

    std::vector<std::vector<double>> x;
    std::vector<int> y;
    x.reserve(2 * n);
    for (const auto& s : observed) {
      x.push_back(extract_features(s, feature));
      y.push_back(0);
    }
    for (std::size_t i = 0; i < n; ++i) {
      x.push_back(extract_features(simulated_pool[pool[i]], feature));
      y.push_back(1);
    }

    // Stratified split: shuffle within each class, first fraction trains.
    std::vector<int> train_idx, test_idx;
    for (int label = 0; label < 2; ++label) {
      std::vector<int> ids;
      for (std::size_t i = 0; i < x.size(); ++i)
        if (y[i] == label) ids.push_back(static_cast<int>(i));
      for (std::size_t i = 0; i + 1 < ids.size(); ++i) {
        std::size_t j = i + rep_rng.index(ids.size() - i);
        std::swap(ids[i], ids[j]);
      }
      std::size_t n_train =
          static_cast<std::size_t>(std::round(train_fraction * ids.size()));
      n_train = std::clamp<std::size_t>(n_train, 1, ids.size() - 1);
      for (std::size_t i = 0; i < ids.size(); ++i)
        (i < n_train ? train_idx : test_idx).push_back(ids[i]);
    }

    std::vector<std::vector<double>> x_train;
    std::vector<int> y_train;
    for (int i : train_idx) {
      x_train.push_back(x[i]);
      y_train.push_back(y[i]);
    }

    int correct = 0;
    if (classifier == Classifier::logistic) {
      LogisticModel model;
      model.fit(x_train, y_train);
      for (int i : test_idx)
        if (model.predict(x[i]) == y[i]) ++correct;
    } else {
      RandomForest model(n_trees);
      model.fit(x_train, y_train, rep_rng);
      for (int i : test_idx)
        if (model.predict(x[i]) == y[i]) ++correct;
    }
    out.accuracies.push_back(static_cast<double>(correct) /
                             static_cast<double>(test_idx.size()));
  }

  std::vector<double> sorted = out.accuracies;
  std::sort(sorted.begin(), sorted.end());
  out.ci_lo = quantile_interp(sorted, 0.05);
  out.ci_hi = quantile_interp(sorted, 0.95);
  out.contains_half = out.ci_lo <= 0.5 && 0.5 <= out.ci_hi;
  return out;
}

// ---- cost distribution ---------------------------------------------------------------

CostCompareResult cost_distribution_compare(const SeriesSet& observed,
                                            const SeriesSet& simulated,
                                            int bins) {
  check_nonempty(observed, simulated);
  if (bins < 2) throw DataError("cost_distribution_compare: too few bins");
  std::vector<double> obs_cost, sim_cost;
  for (const auto& s : observed) obs_cost.push_back(cost(s));
  for (const auto& s : simulated) sim_cost.push_back(cost(s));
  double lo = std::min(*std::min_element(obs_cost.begin(), obs_cost.end()),
                       *std::min_element(sim_cost.begin(), sim_cost.end()));
  double hi = std::max(*std::max_element(obs_cost.begin(), obs_cost.end()),
                       *std::max_element(sim_cost.begin(), sim_cost.end()));
  if (hi <= lo) hi = lo + 1.0;

  CostCompareResult out;
  out.bin_edges.resize(bins + 1);
  for (int b = 0; b <= bins; ++b)
    out.bin_edges[b] = lo + (hi - lo) * static_cast<double>(b) / bins;
  auto density = [&](const std::vector<double>& xs) {
    std::vector<double> d(bins, 0.0);
    double width = (hi - lo) / bins;
    for (double x : xs) {
      int b = std::min(bins - 1,
                       static_cast<int>(std::floor((x - lo) / width)));
      d[std::max(0, b)] += 1.0;
    }
    for (double& v : d) v /= static_cast<double>(xs.size()) * width;
    return d;
  };
  out.observed_density = density(obs_cost);
  out.simulated_density = density(sim_cost);
  out.observed_max = *std::max_element(obs_cost.begin(), obs_cost.end());
  out.simulated_max = *std::max_element(sim_cost.begin(), sim_cost.end());
  out.simulated_exceeds_observed_max = out.simulated_max > out.observed_max;
  return out;
}

}  // namespace exsim
