#include <cmath>

#include "doctest.h"
#include "exsim/errors.hpp"
#include "exsim/whitening.hpp"
#include "support.hpp"

using namespace exsim;

TEST_CASE("fit_ar recovers an AR(1) coefficient and matches the OLS oracle") {
  FunctionalDataset ds = test::ar1_panel(2000, 3, 0.7, 1.0, 101);
  ARFit fit = fit_ar(ds, 1);
  for (int t = 0; t < 3; ++t) {
    CHECK(std::fabs(fit.model.beta[t][0] - 0.7) < 0.05);
    // Independent closed-form check: regress column on its lag directly.
    std::vector<double> x, y;
    for (std::size_t i = 1; i < ds.size(); ++i) {
      x.push_back(ds.series[i - 1].values[t]);
      y.push_back(ds.series[i].values[t]);
    }
    auto oracle = test::ols_oracle(x, y);
    CHECK(fit.model.beta[t][0] == doctest::Approx(oracle.slope).epsilon(1e-10));
    CHECK(fit.model.beta0[t] == doctest::Approx(oracle.intercept).epsilon(1e-8));
  }
  CHECK(fit.residuals.residuals.size() == ds.size() - 1);
  CHECK(fit.model.residual_index_offset == ds.series[1].cycle_index);

  // Residual means vanish (intercept included in the regression).
  for (int t = 0; t < 3; ++t) {
    double m = 0.0;
    for (const auto& r : fit.residuals.residuals.series) m += r.values[t];
    m /= static_cast<double>(fit.residuals.residuals.size());
    CHECK(std::fabs(m) < 1e-10);
  }
}

TEST_CASE("fit_ar on iid noise estimates beta near zero") {
  FunctionalDataset ds = test::ar1_panel(4000, 2, 0.0, 1.0, 55);
  ARFit fit = fit_ar(ds, 1);
  double bound = 3.0 / std::sqrt(static_cast<double>(ds.size()));
  for (int t = 0; t < 2; ++t) CHECK(std::fabs(fit.model.beta[t][0]) < bound);
}

TEST_CASE("fit_ar input validation") {
  FunctionalDataset tiny = test::ar1_panel(3, 2, 0.0, 1.0, 1);
  CHECK_THROWS_AS(fit_ar(tiny, 2), DataError);

  FunctionalDataset flat;
  flat.length = 1;
  for (int i = 0; i < 30; ++i) {
    CycleSeries s;
    s.cycle_index = i + 1;
    s.values = {1.0};
    flat.series.push_back(s);
  }
  CHECK_THROWS_AS(fit_ar(flat, 1), NumericalError);
}

TEST_CASE("invert_ar degenerate and fixed-point examples") {
  ARModel m;
  m.order = 1;
  m.delta = 1;
  m.beta0 = {0.0, 0.0};
  m.beta = {{0.0}, {0.0}};
  std::vector<double> eps{1.5, -2.5};
  auto out = invert_ar(m, eps, {{9.0, 9.0}});
  CHECK(out[0] == doctest::Approx(1.5));
  CHECK(out[1] == doctest::Approx(-2.5));

  ARModel fp;
  fp.order = 1;
  fp.delta = 1;
  fp.beta0 = {1.0, 1.0};
  fp.beta = {{0.5}, {0.5}};
  auto fixed = invert_ar(fp, std::vector<double>{0.0, 0.0}, {{2.0, 2.0}});
  CHECK(fixed[0] == doctest::Approx(2.0));
  CHECK(fixed[1] == doctest::Approx(2.0));

  CHECK_THROWS_AS(invert_ar(fp, std::vector<double>{0.0, 0.0}, {}), DataError);
  CHECK_THROWS_AS(invert_ar(fp, std::vector<double>{0.0}, {{2.0, 2.0}}),
                  DataError);
}

TEST_CASE("invert_ar reconstructs training data from fitted residuals") {
  FunctionalDataset ds = test::ar1_panel(300, 4, 0.6, 0.8, 7);
  ARFit fit = fit_ar(ds, 1);
  for (std::size_t i = 1; i < ds.size(); ++i) {
    auto rebuilt = invert_ar(fit.model, fit.residuals.residuals.series[i - 1].values,
                             {ds.series[i - 1].values});
    for (int t = 0; t < 4; ++t)
      CHECK(std::fabs(rebuilt[t] - ds.series[i].values[t]) < 1e-10);
  }
}

TEST_CASE("acf of white noise stays within the sampling band") {
  Rng rng(42);
  std::vector<double> x(5000);
  for (double& v : x) v = rng.normal();
  AcfPacf r = acf_pacf(x, 20);
  CHECK(r.acf[0] == doctest::Approx(1.0));
  double bound = 3.0 / std::sqrt(5000.0);
  for (int h = 1; h <= 20; ++h) CHECK(std::fabs(r.acf[h]) < bound);

  // Direct covariance-sum oracle at a few lags.
  double m = 0.0;
  for (double v : x) m += v;
  m /= x.size();
  double denom = 0.0;
  for (double v : x) denom += (v - m) * (v - m);
  for (int h : {1, 5, 20}) {
    double num = 0.0;
    for (std::size_t i = 0; i + h < x.size(); ++i)
      num += (x[i] - m) * (x[i + h] - m);
    CHECK(r.acf[h] == doctest::Approx(num / denom).epsilon(1e-12));
  }
}

TEST_CASE("acf of an AR(1) decays geometrically; pacf cuts off after lag 1") {
  FunctionalDataset ds = test::ar1_panel(8000, 1, 0.7, 1.0, 9);
  std::vector<double> x = ds.column(0);
  AcfPacf r = acf_pacf(x, 10);
  for (int h = 1; h <= 5; ++h) {
    double expected = std::pow(0.7, h);
    CHECK(std::fabs(r.acf[h] - expected) < 0.05);
  }
  CHECK(std::fabs(r.pacf[1] - 0.7) < 0.05);
  double bound = 3.0 / std::sqrt(8000.0);
  for (int h = 2; h <= 10; ++h) CHECK(std::fabs(r.pacf[h]) < bound);
}

TEST_CASE("acf_pacf rejects degenerate input") {
  std::vector<double> flat(100, 3.0);
  CHECK_THROWS_AS(acf_pacf(flat, 5), NumericalError);
  flat[50] = 4.0;  // single spike: variance exists, value defined
  AcfPacf r = acf_pacf(flat, 5);
  CHECK(std::isfinite(r.acf[1]));
}

TEST_CASE("whitening leaves residuals uncorrelated at lag 1") {
  FunctionalDataset ds = test::ar1_panel(3000, 8, 0.65, 1.0, 31);
  ARFit fit = fit_ar(ds, 1);
  const auto& res = fit.residuals.residuals;
  double bound = 3.0 / std::sqrt(static_cast<double>(res.size()));
  int ok = 0;
  for (int t = 0; t < 8; ++t) {
    AcfPacf r = acf_pacf(res.column(t), 1);
    if (std::fabs(r.acf[1]) < bound) ++ok;
  }
  CHECK(ok >= 7);  // at least 95% of the time steps
}

TEST_CASE("AR model JSON round trip") {
  FunctionalDataset ds = test::ar1_panel(100, 2, 0.4, 1.0, 13);
  ARFit fit = fit_ar(ds, 2);
  ARModel back = ar_from_json(ar_to_json(fit.model));
  CHECK(back.order == fit.model.order);
  CHECK(back.delta == fit.model.delta);
  CHECK(back.beta0 == fit.model.beta0);
  CHECK(back.beta == fit.model.beta);
}
