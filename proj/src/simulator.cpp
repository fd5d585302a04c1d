#include "exsim/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "exsim/csv.hpp"
#include "exsim/errors.hpp"
#include "exsim/polar.hpp"

namespace exsim {

std::vector<double> sample_radius(std::size_t n, double u_ell, double alpha,
                                  Rng& rng) {
  if (!(alpha > 0.0)) throw DataError("sample_radius: alpha must be positive");
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i)
    out[i] = u_ell * std::pow(rng.uniform(), -1.0 / alpha);
  return out;
}

FrechetDraw simulate_frechet_series(const PolarRepresentation& polar,
                                    const AngularModel& angular, double alpha,
                                    int max_rejections, Rng& rng) {
  if (!(alpha > 0.0))
    throw DataError("simulate_frechet_series: alpha must be positive");
  FrechetDraw draw;
  for (int attempt = 0; attempt <= max_rejections; ++attempt) {
    std::vector<double> theta = sample_angle(angular, rng);
    double radius = polar.u_ell * std::pow(rng.uniform(), -1.0 / alpha);
    bool positive = true;
    std::vector<double> z(theta.size());
    for (std::size_t t = 0; t < theta.size(); ++t) {
      z[t] = radius * theta[t];
      if (z[t] <= 0.0) positive = false;
    }
    if (positive) {
      draw.z = std::move(z);
      draw.radius = radius;
      draw.rejections = attempt;
      return draw;
    }
  }
  throw NumericalError(
      "simulate_frechet_series: exceeded max rejections; the angular model "
      "places mass far from the positive orthant");
}

std::vector<double> inverse_margins(
    std::span<const double> z,
    const std::vector<MarginalMixtureModel>& margins) {
  if (z.size() != margins.size())
    throw DataError("inverse_margins: length mismatch");
  std::vector<double> eps(z.size());
  for (std::size_t t = 0; t < z.size(); ++t)
    eps[t] = from_frechet(margins[t], z[t]);
  return eps;
}

namespace {

// Rank positions of the history sorted by ell_eps, built once per batch.
struct HistoryIndex {
  std::vector<std::size_t> order;   // history indices sorted by ell_eps
  std::vector<double> sorted_ell;   // ell_eps in ascending order
};

HistoryIndex index_history(const std::vector<HistoryEntry>& history) {
  HistoryIndex idx;
  idx.order.resize(history.size());
  std::iota(idx.order.begin(), idx.order.end(), 0);
  std::sort(idx.order.begin(), idx.order.end(),
            [&](std::size_t a, std::size_t b) {
              return history[a].ell_eps < history[b].ell_eps;
            });
  idx.sorted_ell.reserve(history.size());
  for (std::size_t i : idx.order)
    idx.sorted_ell.push_back(history[i].ell_eps);
  return idx;
}

const HistoryEntry& sample_initial_indexed(
    SamplingMode mode, double ell_eps_sim,
    const std::vector<HistoryEntry>& history, const HistoryIndex& idx,
    int neighbor_window, Rng& rng) {
  const std::size_t n = history.size();
  if (n == 0) throw DataError("sample_initial: empty history");
  if (mode == SamplingMode::unconditional) {
    return history[rng.index(n)];
  }
  const std::size_t k =
      std::min<std::size_t>(std::max(neighbor_window, 1), n);
  // Rank-symmetric window around the insertion position, truncated one-sided
  // at the boundaries.
  auto it = std::lower_bound(idx.sorted_ell.begin(), idx.sorted_ell.end(),
                             ell_eps_sim);
  std::size_t pos = static_cast<std::size_t>(it - idx.sorted_ell.begin());
  std::size_t lo = pos > k / 2 ? pos - k / 2 : 0;
  lo = std::min(lo, n - k);
  std::size_t pick = lo + rng.index(k);
  return history[idx.order[pick]];
}

}  // namespace

const HistoryEntry& sample_initial(SamplingMode mode, double ell_eps_sim,
                                   const std::vector<HistoryEntry>& history,
                                   int neighbor_window, Rng& rng) {
  HistoryIndex idx = index_history(history);
  return sample_initial_indexed(mode, ell_eps_sim, history, idx,
                                neighbor_window, rng);
}

SimulationBatch simulate_batch(const ModelBundle& bundle,
                               const SimulationConfig& config) {
  if (config.n_sim < 1) throw DataError("simulate_batch: n_sim must be >= 1");
  if (bundle.margins.size() != static_cast<std::size_t>(bundle.length))
    throw DataError("simulate_batch: bundle margins length mismatch");
  if (bundle.history.empty())
    throw DataError("simulate_batch: bundle has no initial-series history");

  HistoryIndex idx = index_history(bundle.history);
  SimulationBatch batch;
  batch.draws.resize(config.n_sim);
  std::vector<int> rejections(config.n_sim, 0);

  parallel_for(
      static_cast<std::size_t>(config.n_sim), config.threads,
      [&](std::size_t d) {
        // Per-draw substream: results do not depend on the thread schedule.
        Rng rng(config.seed, d + 1);
        FrechetDraw fd = simulate_frechet_series(bundle.polar, bundle.angular,
                                                 config.radius_tail_index,
                                                 config.max_rejections_per_draw,
                                                 rng);
        std::vector<double> eps = inverse_margins(fd.z, bundle.margins);
        double ell_eps = cost(eps);
        const HistoryEntry& init = sample_initial_indexed(
            config.sampling_mode, ell_eps, bundle.history, idx,
            config.neighbor_window, rng);
        DrawRecord& rec = batch.draws[d];
        rec.series = invert_ar(bundle.ar, eps, init.lagged);
        rec.radius = fd.radius;
        rec.rejections = fd.rejections;
        rec.initial_cycle_index = init.predecessor_index;
        rec.ell_eps_sim = ell_eps;
        if (config.retrend_output) {
          std::int64_t m = init.predecessor_index + bundle.delta;
          rec.retrended = retrend_series(rec.series, bundle.trend, m);
        }
        rejections[d] = fd.rejections;
      });

  long long attempts = 0;
  for (int r : rejections) attempts += r + 1;
  batch.acceptance_rate =
      static_cast<double>(config.n_sim) / static_cast<double>(attempts);
  return batch;
}

std::string batch_to_csv(const SimulationBatch& batch, int length,
                         bool retrended) {
  std::vector<std::string> header{"draw", "radius", "initial_cycle_index"};
  for (int t = 1; t <= length; ++t) header.push_back("t" + std::to_string(t));
  CsvWriter w(std::move(header));
  for (std::size_t d = 0; d < batch.draws.size(); ++d) {
    const DrawRecord& rec = batch.draws[d];
    const std::vector<double>& vals = retrended ? rec.retrended : rec.series;
    if (static_cast<int>(vals.size()) != length)
      throw DataError("batch_to_csv: series length mismatch");
    std::vector<std::string> row{std::to_string(d),
                                 format_double(rec.radius),
                                 std::to_string(rec.initial_cycle_index)};
    for (double v : vals) row.push_back(format_double(v));
    w.add_row(row);
  }
  return w.str();
}

}  // namespace exsim
