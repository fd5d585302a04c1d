#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "exsim/angular_model.hpp"
#include "exsim/dataset.hpp"
#include "exsim/margins.hpp"
#include "exsim/polar.hpp"
#include "exsim/whitening.hpp"

namespace exsim {

// Predecessor record of one extreme cycle; drives the conditional sampling of
// the initial series when inverting the AR model.
struct HistoryEntry {
  double ell_x_prev = 0.0;  // cost of the lag-1 predecessor series
  double ell_eps = 0.0;     // cost of the extreme cycle's residual
  std::vector<std::vector<double>> lagged;  // p series, lag 1..p
  std::int64_t predecessor_index = 0;       // cycle index of the lag-1 series
};

inline constexpr int kBundleSchemaVersion = 1;

// Everything needed to simulate and validate: the full fitted model set.
struct ModelBundle {
  int schema_version = kBundleSchemaVersion;
  int length = 37;  // T
  int delta = 1;
  double p_u = 0.1;
  double u_ell = 0.0;
  TrendModel trend;
  ARModel ar;
  std::vector<MarginalMixtureModel> margins;  // one per time step
  PolarRepresentation polar;
  AngularModel angular;
  std::vector<HistoryEntry> history;
};

nlohmann::json bundle_to_json(const ModelBundle& b);
ModelBundle bundle_from_json(const nlohmann::json& j);

void save_bundle(const ModelBundle& b, const std::filesystem::path& path);
ModelBundle load_bundle(const std::filesystem::path& path);

}  // namespace exsim
