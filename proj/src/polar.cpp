#include "exsim/polar.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <nlohmann/json.hpp>

#include "exsim/errors.hpp"

namespace exsim {

double cost(std::span<const double> series) {
  double s = 0.0;
  for (double v : series) s += v * v;
  return std::sqrt(s);
}

PolarRepresentation extract_extremes(const FunctionalDataset& z, double u_ell,
                                     int min_exceedances) {
  PolarRepresentation out;
  out.u_ell = u_ell;
  for (const auto& s : z.series) {
    double r = cost(s.values);
    if (r > u_ell) {
      out.radii.push_back(r);
      std::vector<double> angle(s.values.size());
      for (std::size_t t = 0; t < s.values.size(); ++t)
        angle[t] = s.values[t] / r;
      out.angles.push_back(std::move(angle));
      out.source_ids.push_back(s.cycle_index);
    }
  }
  if (static_cast<int>(out.radii.size()) < min_exceedances)
    throw DataError("extract_extremes: only " +
                    std::to_string(out.radii.size()) +
                    " series exceed the threshold, need " +
                    std::to_string(min_exceedances));
  return out;
}

ConvergenceScan angular_convergence_scan(const FunctionalDataset& z, int j_max,
                                         const std::vector<int>& k_grid) {
  if (j_max < 1) throw DataError("angular_convergence_scan: j_max must be >= 1");
  const std::size_t n = z.size();
  for (int k : k_grid)
    if (k < 1 || static_cast<std::size_t>(k) > n)
      throw DataError("angular_convergence_scan: k = " + std::to_string(k) +
                      " outside [1, " + std::to_string(n) + "]");

  const int T = z.length;
  // Harmonics on the unit-period grid t/T, t = 1..T.
  std::vector<std::vector<double>> h(j_max, std::vector<double>(T));
  for (int j = 1; j <= j_max; ++j)
    for (int t = 1; t <= T; ++t)
      h[j - 1][t - 1] = std::sin(2.0 * M_PI * j * static_cast<double>(t) / T);

  // Order by decreasing cost; top-k sets nest, so prefix sums suffice.
  std::vector<double> costs(n);
  for (std::size_t i = 0; i < n; ++i) costs[i] = cost(z.series[i].values);
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (costs[a] != costs[b]) return costs[a] > costs[b];
    return z.series[a].cycle_index < z.series[b].cycle_index;
  });

  int k_max = *std::max_element(k_grid.begin(), k_grid.end());
  std::vector<std::vector<double>> prefix(j_max,
                                          std::vector<double>(k_max + 1, 0.0));
  for (int rank = 0; rank < k_max; ++rank) {
    const auto& s = z.series[order[rank]];
    double r = costs[order[rank]];
    if (r <= 0.0)
      throw NumericalError("angular_convergence_scan: zero-cost series in top-k");
    for (int j = 0; j < j_max; ++j) {
      double dot = 0.0;
      for (int t = 0; t < T; ++t) dot += s.values[t] / r * h[j][t];
      prefix[j][rank + 1] = prefix[j][rank] + std::fabs(dot);
    }
  }

  ConvergenceScan scan;
  scan.j_max = j_max;
  scan.k_grid = k_grid;
  scan.mean_abs_projection.resize(k_grid.size());
  for (std::size_t ki = 0; ki < k_grid.size(); ++ki) {
    int k = k_grid[ki];
    scan.mean_abs_projection[ki].resize(j_max);
    for (int j = 0; j < j_max; ++j)
      scan.mean_abs_projection[ki][j] = prefix[j][k] / static_cast<double>(k);
  }
  return scan;
}

nlohmann::json polar_to_json(const PolarRepresentation& p) {
  return nlohmann::json{{"u_ell", p.u_ell},
                        {"radii", p.radii},
                        {"angles", p.angles},
                        {"source_ids", p.source_ids}};
}

PolarRepresentation polar_from_json(const nlohmann::json& j) {
  PolarRepresentation p;
  p.u_ell = j.at("u_ell").get<double>();
  p.radii = j.at("radii").get<std::vector<double>>();
  p.angles = j.at("angles").get<std::vector<std::vector<double>>>();
  p.source_ids = j.at("source_ids").get<std::vector<std::int64_t>>();
  return p;
}

}  // namespace exsim
