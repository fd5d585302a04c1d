#pragma once

// Shared synthetic-data builders for the test suites. Everything here is
// test-side machinery, independent of the library's fitting paths.

#include <cmath>
#include <vector>

#include "exsim/dataset.hpp"
#include "exsim/math.hpp"

namespace exsim::test {

// AR(1) panel: per time step t, X_i = coef * X_{i-1} + noise_sd * N(0,1),
// with cycle indices 1..n.
inline FunctionalDataset ar1_panel(std::size_t n, int length, double coef,
                                   double noise_sd, std::uint64_t seed,
                                   double intercept = 0.0) {
  Rng rng(seed);
  FunctionalDataset ds;
  ds.length = length;
  ds.delta = 1;
  std::vector<double> state(length, 0.0);
  for (int burn = 0; burn < 200; ++burn)
    for (int t = 0; t < length; ++t)
      state[t] = intercept + coef * state[t] + noise_sd * rng.normal();
  for (std::size_t i = 0; i < n; ++i) {
    CycleSeries s;
    s.cycle_index = static_cast<std::int64_t>(i) + 1;
    s.values.resize(length);
    for (int t = 0; t < length; ++t) {
      state[t] = intercept + coef * state[t] + noise_sd * rng.normal();
      s.values[t] = state[t];
    }
    ds.series.push_back(std::move(s));
  }
  return ds;
}

// GPD sample through the quantile function (the independent sampling oracle).
inline std::vector<double> gpd_sample(std::size_t n, double scale, double shape,
                                      std::uint64_t seed, double threshold = 0.0) {
  Rng rng(seed);
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    double q = rng.uniform();
    if (std::fabs(shape) < 1e-12) {
      out[i] = threshold - scale * std::log1p(-q);
    } else {
      out[i] = threshold + scale / shape * (std::pow(1.0 - q, -shape) - 1.0);
    }
  }
  return out;
}

// Closed-form simple linear regression of y on x.
struct OlsLine {
  double slope = 0.0, intercept = 0.0;
};

inline OlsLine ols_oracle(const std::vector<double>& x,
                          const std::vector<double>& y) {
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= x.size();
  my /= y.size();
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  OlsLine line;
  line.slope = sxy / sxx;
  line.intercept = my - line.slope * mx;
  return line;
}

inline double pearson(const std::vector<double>& x,
                      const std::vector<double>& y) {
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= x.size();
  my /= y.size();
  double sxx = 0.0, syy = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  return sxy / std::sqrt(sxx * syy);
}

}  // namespace exsim::test
