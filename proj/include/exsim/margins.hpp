#pragma once

#include <span>
#include <vector>

#include <nlohmann/json_fwd.hpp>

namespace exsim {

struct GPDParams {
  double threshold = 0.0;  // u
  double scale = 1.0;      // sigma > 0
  double shape = 0.0;      // gamma
};

// Exceedance CDF: P(U <= x | U > u). Requires x >= u and, for shape < 0,
// x inside the bounded support.
double gpd_cdf(const GPDParams& p, double x);
double gpd_pdf(const GPDParams& p, double x);
double gpd_quantile(const GPDParams& p, double q);  // 0 <= q < 1

enum class GpdFitMethod { mle, moments };

// Fits exceedances of `sample` over `threshold`. MLE profiles the likelihood
// over psi = shape/scale (closed-form (shape, scale) per psi) on a
// deterministic grid with golden-section refinement, shape restricted to
// [-0.9, 2]. Moments matches mean/variance of the exceedances.
GPDParams fit_gpd(std::span<const double> sample, double threshold,
                  GpdFitMethod method, int min_exceedances = 30);

// Mean of log(X_(n-i+1) / X_(n-k)) for i = 1..k over descending order
// statistics; the k+1 largest values must be positive.
double hill_estimator(std::span<const double> sample, int k);

struct ThresholdGrid {
  double lo_quantile = 0.5;
  double hi_quantile = 0.98;
  int count = 30;
};

struct ThresholdDiagnostics {
  std::vector<double> thresholds;
  std::vector<double> sigma_prime;  // sigma_w - gamma_w * w
  std::vector<double> gamma_prime;  // gamma_w
  std::vector<double> mrl;          // mean(eps - w | eps > w)
  std::vector<double> dispersion;   // variance/mean of block exceedance counts
  std::vector<int> n_exceed;
};

// block_ids, when given, group the (chronologically ordered) sample for the
// dispersion index; otherwise 10 equal index blocks are used.
ThresholdDiagnostics threshold_diagnostics(
    std::span<const double> sample, const ThresholdGrid& grid = {},
    const std::vector<int>& block_ids = {});

// Semi-parametric marginal law: interpolated empirical CDF below u, GPD tail
// above, spliced at the (1 - p_u) quantile.
struct MarginalMixtureModel {
  std::vector<double> sample;  // sorted
  double p_u = 0.1;
  GPDParams gpd;  // gpd.threshold is the splice point u
};

MarginalMixtureModel fit_marginal_mixture(std::span<const double> sample,
                                          double p_u);

double mixture_cdf(const MarginalMixtureModel& m, double x);
double mixture_quantile(const MarginalMixtureModel& m, double q);

// T(x) = -1/log F(x) with F clamped into [1/(2n), 1 - 1/(2n)];
// T^{-1}(z) = F^{-1}(exp(-1/z)).
double to_frechet(const MarginalMixtureModel& m, double x);
double from_frechet(const MarginalMixtureModel& m, double z);

nlohmann::json mixture_to_json(const MarginalMixtureModel& m);
MarginalMixtureModel mixture_from_json(const nlohmann::json& j);

}  // namespace exsim
