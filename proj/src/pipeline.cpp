#include "exsim/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_map>

#include "exsim/errors.hpp"
#include "exsim/math.hpp"
#include "exsim/polar.hpp"
#include "exsim/whitening.hpp"

namespace exsim {

namespace {

// Transform residuals to Frechet scale with the per-t mixture models.
FunctionalDataset transform_residuals(
    const FunctionalDataset& residuals,
    const std::vector<MarginalMixtureModel>& margins, int threads) {
  FunctionalDataset z = residuals;
  parallel_for(
      static_cast<std::size_t>(residuals.length), threads, [&](std::size_t t) {
        for (std::size_t i = 0; i < residuals.size(); ++i)
          z.series[i].values[t] =
              to_frechet(margins[t], residuals.series[i].values[t]);
      });
  return z;
}

}  // namespace

ModelBundle fit_bundle(const FunctionalDataset& raw, const FitOptions& options) {
  ModelBundle bundle;
  bundle.length = raw.length;
  bundle.p_u = options.p_u;

  FunctionalDataset working = raw;
  if (options.season_months) {
    working = filter_season(working, *options.season_months);
  }

  // Trend is fit on the full seasonal dataset before delta spacing.
  bundle.trend = fit_trend(working);
  FunctionalDataset detrended = detrend(working, bundle.trend);
  detrended = subsample(detrended, options.delta);
  bundle.delta = detrended.delta;

  ARFit ar = fit_ar(detrended, options.ar_order);
  bundle.ar = ar.model;
  const FunctionalDataset& residuals = ar.residuals.residuals;

  bundle.margins.resize(raw.length);
  parallel_for(static_cast<std::size_t>(raw.length), options.threads,
               [&](std::size_t t) {
                 bundle.margins[t] = fit_marginal_mixture(
                     residuals.column(static_cast<int>(t)), options.p_u);
               });

  FunctionalDataset z =
      transform_residuals(residuals, bundle.margins, options.threads);

  double u_ell;
  if (options.u_ell_absolute) {
    u_ell = *options.u_ell_absolute;
  } else {
    std::vector<double> costs;
    costs.reserve(z.size());
    for (const auto& s : z.series) costs.push_back(cost(s.values));
    std::sort(costs.begin(), costs.end());
    u_ell = quantile_interp(costs, options.u_ell_quantile);
  }
  bundle.u_ell = u_ell;
  bundle.polar = extract_extremes(z, u_ell);

  AngularModelOptions amo;
  amo.components = options.pca_components;
  amo.rel_drop = options.pca_rel_drop;
  amo.max_components = options.pca_max_components;
  amo.vine = options.vine;
  bundle.angular = fit_angular_model(bundle.polar.angles, amo);

  // Initial-series history: predecessors of each extreme cycle in the
  // delta-spaced detrended data.
  std::unordered_map<std::int64_t, std::size_t> position;
  for (std::size_t i = 0; i < detrended.size(); ++i)
    position[detrended.series[i].cycle_index] = i;
  const int p = bundle.ar.order;
  for (std::size_t e = 0; e < bundle.polar.source_ids.size(); ++e) {
    std::int64_t id = bundle.polar.source_ids[e];
    auto it = position.find(id);
    if (it == position.end() || it->second < static_cast<std::size_t>(p))
      throw NumericalError("fit_bundle: extreme cycle without full lag history");
    std::size_t pos = it->second;
    HistoryEntry h;
    h.ell_x_prev = cost(detrended.series[pos - 1].values);
    // Residual of this extreme cycle, in residual scale.
    std::size_t rpos = pos - static_cast<std::size_t>(p);
    h.ell_eps = cost(residuals.series[rpos].values);
    for (int lag = 1; lag <= p; ++lag)
      h.lagged.push_back(detrended.series[pos - lag].values);
    h.predecessor_index = detrended.series[pos - 1].cycle_index;
    bundle.history.push_back(std::move(h));
  }
  return bundle;
}

ForwardData forward_data(const FunctionalDataset& raw, const ModelBundle& bundle,
                         const std::optional<std::set<int>>& season_months) {
  ForwardData fwd;
  FunctionalDataset working = raw;
  if (season_months) working = filter_season(working, *season_months);
  FunctionalDataset detrended = detrend(working, bundle.trend);
  int step = bundle.delta / std::max(1, working.delta);
  fwd.detrended = subsample(detrended, std::max(1, step));

  // Residuals from the stored AR coefficients.
  const int p = bundle.ar.order;
  if (fwd.detrended.size() <= static_cast<std::size_t>(p))
    throw DataError("forward_data: not enough cycles for the AR order");
  fwd.residuals.length = fwd.detrended.length;
  fwd.residuals.delta = fwd.detrended.delta;
  for (std::size_t i = p; i < fwd.detrended.size(); ++i) {
    CycleSeries r;
    r.cycle_index = fwd.detrended.series[i].cycle_index;
    r.timestamp = fwd.detrended.series[i].timestamp;
    r.values.resize(fwd.detrended.length);
    for (int t = 0; t < fwd.detrended.length; ++t) {
      double pred = bundle.ar.beta0[t];
      for (int lag = 1; lag <= p; ++lag)
        pred += bundle.ar.beta[t][lag - 1] *
                fwd.detrended.series[i - lag].values[t];
      r.values[t] = fwd.detrended.series[i].values[t] - pred;
    }
    fwd.residuals.series.push_back(std::move(r));
  }

  fwd.frechet = fwd.residuals;
  for (int t = 0; t < fwd.residuals.length; ++t)
    for (std::size_t i = 0; i < fwd.residuals.size(); ++i)
      fwd.frechet.series[i].values[t] =
          to_frechet(bundle.margins[t], fwd.residuals.series[i].values[t]);

  fwd.costs.reserve(fwd.frechet.size());
  fwd.is_extreme.reserve(fwd.frechet.size());
  std::unordered_map<std::int64_t, std::size_t> position;
  for (std::size_t i = 0; i < fwd.detrended.size(); ++i)
    position[fwd.detrended.series[i].cycle_index] = i;
  for (std::size_t i = 0; i < fwd.frechet.size(); ++i) {
    double c = cost(fwd.frechet.series[i].values);
    fwd.costs.push_back(c);
    bool extreme = c > bundle.u_ell;
    fwd.is_extreme.push_back(extreme);
    if (extreme) {
      std::size_t pos = position.at(fwd.frechet.series[i].cycle_index);
      fwd.observed_extremes.push_back(fwd.detrended.series[pos].values);
    }
  }
  return fwd;
}

}  // namespace exsim
