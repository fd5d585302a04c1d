#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "exsim/dataset.hpp"

namespace exsim {

// Euclidean norm of the series (the cost functional).
double cost(std::span<const double> series);

// Radius/angle pairs of the series whose cost exceeds u_ell.
struct PolarRepresentation {
  double u_ell = 0.0;
  std::vector<double> radii;
  std::vector<std::vector<double>> angles;  // unit cost each
  std::vector<std::int64_t> source_ids;
};

PolarRepresentation extract_extremes(const FunctionalDataset& z, double u_ell,
                                     int min_exceedances = 20);

// Mean absolute projections of the top-k angles onto sine harmonics
// h_j(t) = sin(2*pi*j*t/T), t = 1..T, for each k in the grid.
struct ConvergenceScan {
  std::vector<int> k_grid;
  int j_max = 8;
  std::vector<std::vector<double>> mean_abs_projection;  // [k][j-1]
};

ConvergenceScan angular_convergence_scan(const FunctionalDataset& z, int j_max,
                                         const std::vector<int>& k_grid);

nlohmann::json polar_to_json(const PolarRepresentation& p);
PolarRepresentation polar_from_json(const nlohmann::json& j);

}  // namespace exsim
