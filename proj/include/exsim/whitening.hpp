#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "exsim/dataset.hpp"

namespace exsim {

// Per-time-step autoregression across cycles: lag i means i*delta cycle
// indices back (one position in the delta-spaced list).
struct ARModel {
  int order = 1;
  int delta = 1;
  std::vector<double> beta0;              // length T
  std::vector<std::vector<double>> beta;  // T x order
  std::int64_t residual_index_offset = 0; // first cycle with a residual
};

struct ResidualSet {
  FunctionalDataset residuals;  // aligned to the cycles where all lags exist
};

struct ARFit {
  ARModel model;
  ResidualSet residuals;
};

ARFit fit_ar(const FunctionalDataset& detrended, int order);

// X_sim[t] = beta0[t] + sum_i beta[t][i] * init[i][t] + eps[t].
// init[0] is the lag-delta series, init[1] the lag-2*delta series, ...
std::vector<double> invert_ar(const ARModel& model,
                              std::span<const double> eps,
                              const std::vector<std::vector<double>>& init);

struct AcfPacf {
  std::vector<double> acf;   // index h = 0..max_lag, acf[0] = 1
  std::vector<double> pacf;  // pacf[0] = 1 by convention
};

AcfPacf acf_pacf(std::span<const double> series, int max_lag);

nlohmann::json ar_to_json(const ARModel& m);
ARModel ar_from_json(const nlohmann::json& j);

}  // namespace exsim
