#include "exsim/whitening.hpp"

#include <cmath>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "exsim/errors.hpp"

namespace exsim {

ARFit fit_ar(const FunctionalDataset& ds, int order) {
  const int p = order;
  const std::size_t n = ds.size();
  if (p < 1) throw DataError("fit_ar: order must be >= 1");
  if (n <= static_cast<std::size_t>(p + 1))
    throw DataError("fit_ar: need more than order+1 cycles");

  const std::size_t rows = n - static_cast<std::size_t>(p);
  ARFit fit;
  fit.model.order = p;
  fit.model.delta = ds.delta;
  fit.model.beta0.assign(ds.length, 0.0);
  fit.model.beta.assign(ds.length, std::vector<double>(p, 0.0));
  fit.model.residual_index_offset = ds.series[p].cycle_index;

  fit.residuals.residuals.length = ds.length;
  fit.residuals.residuals.delta = ds.delta;
  fit.residuals.residuals.series.resize(rows);
  for (std::size_t i = 0; i < rows; ++i) {
    auto& r = fit.residuals.residuals.series[i];
    r.cycle_index = ds.series[i + p].cycle_index;
    r.timestamp = ds.series[i + p].timestamp;
    r.values.assign(ds.length, 0.0);
  }

  for (int t = 0; t < ds.length; ++t) {
    Eigen::MatrixXd X(rows, p + 1);
    Eigen::VectorXd y(rows);
    for (std::size_t i = 0; i < rows; ++i) {
      X(i, 0) = 1.0;
      for (int j = 1; j <= p; ++j) X(i, j) = ds.series[i + p - j].values[t];
      y(i) = ds.series[i + p].values[t];
    }
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(X);
    if (qr.rank() < p + 1)
      throw NumericalError("fit_ar: singular design at time step " +
                           std::to_string(t + 1));
    Eigen::VectorXd coef = qr.solve(y);
    fit.model.beta0[t] = coef(0);
    for (int j = 0; j < p; ++j) fit.model.beta[t][j] = coef(j + 1);
    Eigen::VectorXd resid = y - X * coef;
    for (std::size_t i = 0; i < rows; ++i)
      fit.residuals.residuals.series[i].values[t] = resid(i);
  }
  return fit;
}

std::vector<double> invert_ar(const ARModel& model,
                              std::span<const double> eps,
                              const std::vector<std::vector<double>>& init) {
  const std::size_t T = model.beta0.size();
  if (eps.size() != T) throw DataError("invert_ar: eps length mismatch");
  if (static_cast<int>(init.size()) != model.order)
    throw DataError("invert_ar: expected " + std::to_string(model.order) +
                    " initial series, got " + std::to_string(init.size()));
  for (const auto& lag : init)
    if (lag.size() != T) throw DataError("invert_ar: initial series length mismatch");

  std::vector<double> out(T);
  for (std::size_t t = 0; t < T; ++t) {
    double v = model.beta0[t] + eps[t];
    for (int i = 0; i < model.order; ++i) v += model.beta[t][i] * init[i][t];
    out[t] = v;
  }
  return out;
}

AcfPacf acf_pacf(std::span<const double> series, int max_lag) {
  const std::size_t n = series.size();
  if (max_lag < 1) throw DataError("acf_pacf: max_lag must be >= 1");
  if (n <= static_cast<std::size_t>(max_lag) + 1)
    throw DataError("acf_pacf: series too short for requested max_lag");

  double m = 0.0;
  for (double x : series) m += x;
  m /= static_cast<double>(n);
  double denom = 0.0;
  for (double x : series) denom += (x - m) * (x - m);
  if (denom <= 0.0) throw NumericalError("acf_pacf: zero-variance series");

  AcfPacf out;
  out.acf.assign(max_lag + 1, 0.0);
  out.acf[0] = 1.0;
  for (int h = 1; h <= max_lag; ++h) {
    double s = 0.0;
    for (std::size_t i = 0; i + h < n; ++i)
      s += (series[i] - m) * (series[i + h] - m);
    out.acf[h] = s / denom;
  }

  // Durbin-Levinson recursion.
  out.pacf.assign(max_lag + 1, 0.0);
  out.pacf[0] = 1.0;
  std::vector<double> phi(max_lag + 1, 0.0), prev(max_lag + 1, 0.0);
  double v = 1.0;
  for (int k = 1; k <= max_lag; ++k) {
    double num = out.acf[k];
    for (int j = 1; j < k; ++j) num -= prev[j] * out.acf[k - j];
    double a = num / v;
    phi[k] = a;
    for (int j = 1; j < k; ++j) phi[j] = prev[j] - a * prev[k - j];
    v *= (1.0 - a * a);
    out.pacf[k] = a;
    prev = phi;
    if (v <= 0.0) v = 1e-15;
  }
  return out;
}

nlohmann::json ar_to_json(const ARModel& m) {
  return nlohmann::json{{"order", m.order},
                        {"delta", m.delta},
                        {"beta0", m.beta0},
                        {"beta", m.beta},
                        {"residual_index_offset", m.residual_index_offset}};
}

ARModel ar_from_json(const nlohmann::json& j) {
  ARModel m;
  m.order = j.at("order").get<int>();
  m.delta = j.at("delta").get<int>();
  m.beta0 = j.at("beta0").get<std::vector<double>>();
  m.beta = j.at("beta").get<std::vector<std::vector<double>>>();
  m.residual_index_offset = j.value("residual_index_offset", 0);
  return m;
}

}  // namespace exsim
