#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "exsim/bundle.hpp"
#include "exsim/math.hpp"

namespace exsim {

enum class SamplingMode { conditional, unconditional };

struct SimulationConfig {
  int n_sim = 1;
  double radius_tail_index = 1.0;  // alpha of the Pareto radius
  SamplingMode sampling_mode = SamplingMode::conditional;
  int neighbor_window = 20;  // k_nn
  std::uint64_t seed = 1;
  int max_rejections_per_draw = 10000;
  bool retrend_output = false;
  int threads = 1;
};

struct DrawRecord {
  std::vector<double> series;     // detrended simulated series
  std::vector<double> retrended;  // filled when requested
  double radius = 0.0;
  int rejections = 0;
  std::int64_t initial_cycle_index = 0;  // cycle index of the sampled initial series
  double ell_eps_sim = 0.0;
};

struct SimulationBatch {
  std::vector<DrawRecord> draws;
  double acceptance_rate = 1.0;
};

// R = u_ell * U^{-1/alpha}: Pareto radius above the threshold.
std::vector<double> sample_radius(std::size_t n, double u_ell, double alpha,
                                  Rng& rng);

// Rejection sampling of Frechet-scale series: radius times reconstructed
// angle, accepted when every coordinate is positive. Both the angle and the
// radius are redrawn on rejection.
struct FrechetDraw {
  std::vector<double> z;
  double radius = 0.0;
  int rejections = 0;
};
FrechetDraw simulate_frechet_series(const PolarRepresentation& polar,
                                    const AngularModel& angular,
                                    double alpha, int max_rejections, Rng& rng);

// Coordinate-wise inverse marginal transform.
std::vector<double> inverse_margins(
    std::span<const double> z, const std::vector<MarginalMixtureModel>& margins);

// Conditional mode: the neighbor_window entries nearest in ell_eps rank,
// one drawn uniformly; unconditional mode: uniform over the whole history.
const HistoryEntry& sample_initial(SamplingMode mode, double ell_eps_sim,
                                   const std::vector<HistoryEntry>& history,
                                   int neighbor_window, Rng& rng);

SimulationBatch simulate_batch(const ModelBundle& bundle,
                               const SimulationConfig& config);

std::string batch_to_csv(const SimulationBatch& batch, int length,
                         bool retrended = false);

}  // namespace exsim
