#include "exsim/margins.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <nlohmann/json.hpp>

#include "exsim/errors.hpp"
#include "exsim/math.hpp"

namespace exsim {

namespace {
constexpr double kShapeZeroTol = 1e-9;  // |gamma| below this takes the exponential branch
constexpr double kShapeLo = -0.9;
constexpr double kShapeHi = 2.0;
}  // namespace

double gpd_cdf(const GPDParams& p, double x) {
  if (p.scale <= 0.0) throw NumericalError("gpd_cdf: scale <= 0");
  if (x < p.threshold) throw NumericalError("gpd_cdf: x below threshold");
  double z = (x - p.threshold) / p.scale;
  if (std::fabs(p.shape) < kShapeZeroTol) return 1.0 - std::exp(-z);
  double arg = 1.0 + p.shape * z;
  if (arg <= 0.0) {
    if (p.shape < 0.0)
      throw NumericalError("gpd_cdf: x outside bounded support");
    return 0.0;  // unreachable for shape > 0 with z >= 0
  }
  return 1.0 - std::pow(arg, -1.0 / p.shape);
}

double gpd_pdf(const GPDParams& p, double x) {
  if (p.scale <= 0.0) throw NumericalError("gpd_pdf: scale <= 0");
  if (x < p.threshold) return 0.0;
  double z = (x - p.threshold) / p.scale;
  if (std::fabs(p.shape) < kShapeZeroTol) return std::exp(-z) / p.scale;
  double arg = 1.0 + p.shape * z;
  if (arg <= 0.0) return 0.0;
  return std::pow(arg, -1.0 / p.shape - 1.0) / p.scale;
}

double gpd_quantile(const GPDParams& p, double q) {
  if (p.scale <= 0.0) throw NumericalError("gpd_quantile: scale <= 0");
  if (!(q >= 0.0 && q < 1.0))
    throw NumericalError("gpd_quantile: q outside [0, 1)");
  if (std::fabs(p.shape) < kShapeZeroTol)
    return p.threshold - p.scale * std::log1p(-q);
  return p.threshold +
         p.scale / p.shape * (std::pow(1.0 - q, -p.shape) - 1.0);
}

namespace {

std::vector<double> exceedances(std::span<const double> sample, double u) {
  std::vector<double> y;
  for (double x : sample)
    if (x > u) y.push_back(x - u);
  return y;
}

// Profile log-likelihood over psi = shape/scale: for fixed psi != 0,
// shape = mean(log1p(psi*y)) and scale = shape/psi maximize the likelihood;
// psi = 0 is the exponential model with scale = mean(y).
struct ProfilePoint {
  double shape, scale, loglik;
};

ProfilePoint profile_at(std::span<const double> y, double psi) {
  const double k = static_cast<double>(y.size());
  if (psi == 0.0) {
    double s = mean(y);
    return {0.0, s, -k * (std::log(s) + 1.0)};
  }
  double g = 0.0;
  for (double v : y) {
    double arg = psi * v;
    if (arg <= -1.0) return {0.0, 0.0, -std::numeric_limits<double>::infinity()};
    g += std::log1p(arg);
  }
  g /= k;
  if (g == 0.0) return {0.0, 0.0, -std::numeric_limits<double>::infinity()};
  double scale = g / psi;
  if (scale <= 0.0) return {0.0, 0.0, -std::numeric_limits<double>::infinity()};
  double ll = -k * (std::log(scale) + g + 1.0);
  return {g, scale, ll};
}

GPDParams fit_gpd_mle(std::span<const double> y, double u) {
  const double ymax = *std::max_element(y.begin(), y.end());
  const double ymean = mean(y);
  if (!(ymax > 0.0)) throw NumericalError("fit_gpd: degenerate exceedances");

  auto objective = [&](double psi) { return profile_at(y, psi).loglik; };

  // Candidate psi values: negative branch bounded by -1/ymax, positive branch
  // log-spaced relative to the mean exceedance, plus the exponential model.
  double best_psi = 0.0;
  double best_ll = objective(0.0);
  auto consider = [&](double psi) {
    ProfilePoint p = profile_at(y, psi);
    if (std::isfinite(p.loglik) && p.shape >= kShapeLo && p.shape <= kShapeHi &&
        p.loglik > best_ll) {
      best_ll = p.loglik;
      best_psi = psi;
    }
  };
  const int neg_grid = 120, pos_grid = 120;
  for (int i = 1; i <= neg_grid; ++i) {
    double f = static_cast<double>(i) / (neg_grid + 1);
    consider(-f * 0.999999 / ymax);
  }
  double lo_log = std::log(1e-8 / ymean), hi_log = std::log(1e4 / ymean);
  for (int i = 0; i <= pos_grid; ++i) {
    double lg = lo_log + (hi_log - lo_log) * static_cast<double>(i) / pos_grid;
    consider(std::exp(lg));
  }

  // Golden-section refinement around the best candidate.
  double span = std::max(std::fabs(best_psi) * 0.5, 0.05 / ymean);
  double lo = best_psi - span, hi = best_psi + span;
  lo = std::max(lo, -0.999999 / ymax);
  double refined = maximize_scalar(objective, lo, hi, 64, 1e-12);
  ProfilePoint pr = profile_at(y, refined);
  if (std::isfinite(pr.loglik) && pr.loglik >= best_ll &&
      pr.shape >= kShapeLo && pr.shape <= kShapeHi) {
    best_psi = refined;
    best_ll = pr.loglik;
  }
  if (!std::isfinite(best_ll))
    throw NumericalError("fit_gpd: likelihood optimization failed");
  ProfilePoint best = profile_at(y, best_psi);
  if (!(best.scale > 0.0) || !std::isfinite(best.shape))
    throw NumericalError("fit_gpd: likelihood optimization failed");
  return {u, best.scale, best.shape};
}

GPDParams fit_gpd_moments(std::span<const double> y, double u) {
  double m = mean(y);
  double v = variance(y);
  if (!(v > 0.0)) throw NumericalError("fit_gpd: zero-variance exceedances");
  double r = m * m / v;
  double shape = 0.5 * (1.0 - r);
  double scale = 0.5 * m * (1.0 + r);
  if (!(scale > 0.0))
    throw NumericalError("fit_gpd: moments estimator gave nonpositive scale");
  return {u, scale, shape};
}

}  // namespace

GPDParams fit_gpd(std::span<const double> sample, double threshold,
                  GpdFitMethod method, int min_exceedances) {
  std::vector<double> y = exceedances(sample, threshold);
  if (static_cast<int>(y.size()) < min_exceedances)
    throw DataError("fit_gpd: only " + std::to_string(y.size()) +
                    " exceedances above threshold, need " +
                    std::to_string(min_exceedances));
  switch (method) {
    case GpdFitMethod::mle:
      return fit_gpd_mle(y, threshold);
    case GpdFitMethod::moments:
      return fit_gpd_moments(y, threshold);
  }
  throw NumericalError("fit_gpd: unknown method");
}

double hill_estimator(std::span<const double> sample, int k) {
  const int n = static_cast<int>(sample.size());
  if (k < 2 || k >= n) throw DataError("hill_estimator: need 2 <= k < n");
  std::vector<double> sorted(sample.begin(), sample.end());
  std::sort(sorted.begin(), sorted.end());
  double xk = sorted[n - k - 1];  // X_(n-k) ascending, 1-based
  if (xk <= 0.0)
    throw NumericalError("hill_estimator: nonpositive order statistic in window");
  double s = 0.0;
  for (int i = 1; i <= k; ++i) {
    double xi = sorted[n - i];
    if (xi <= 0.0)
      throw NumericalError("hill_estimator: nonpositive order statistic in window");
    s += std::log(xi / xk);
  }
  return s / static_cast<double>(k);
}

ThresholdDiagnostics threshold_diagnostics(std::span<const double> sample,
                                           const ThresholdGrid& grid,
                                           const std::vector<int>& block_ids) {
  if (sample.size() < 20)
    throw DataError("threshold_diagnostics: sample too small");
  if (grid.count < 2) throw DataError("threshold_diagnostics: grid too small");
  std::vector<double> sorted(sample.begin(), sample.end());
  std::sort(sorted.begin(), sorted.end());

  // Resolve block labels for the dispersion index.
  std::vector<int> blocks;
  if (!block_ids.empty()) {
    if (block_ids.size() != sample.size())
      throw DataError("threshold_diagnostics: block_ids length mismatch");
    blocks = block_ids;
  } else {
    blocks.resize(sample.size());
    const std::size_t nb = 10;
    for (std::size_t i = 0; i < sample.size(); ++i)
      blocks[i] = static_cast<int>(i * nb / sample.size());
  }
  std::vector<int> labels(blocks.begin(), blocks.end());
  std::sort(labels.begin(), labels.end());
  labels.erase(std::unique(labels.begin(), labels.end()), labels.end());

  ThresholdDiagnostics out;
  const double qlo = grid.lo_quantile, qhi = grid.hi_quantile;
  for (int i = 0; i < grid.count; ++i) {
    double q = qlo + (qhi - qlo) * static_cast<double>(i) / (grid.count - 1);
    double w = quantile_interp(sorted, q);
    std::vector<double> y;
    for (double x : sample)
      if (x > w) y.push_back(x - w);
    if (y.empty() && i == grid.count - 1)
      throw DataError("threshold_diagnostics: no exceedances at top of grid");
    out.thresholds.push_back(w);
    out.n_exceed.push_back(static_cast<int>(y.size()));
    out.mrl.push_back(y.empty() ? std::numeric_limits<double>::quiet_NaN()
                                : mean(y));
    if (static_cast<int>(y.size()) >= 10) {
      try {
        GPDParams p = fit_gpd(sample, w, GpdFitMethod::mle, 10);
        out.gamma_prime.push_back(p.shape);
        out.sigma_prime.push_back(p.scale - p.shape * w);
      } catch (const std::exception&) {
        out.gamma_prime.push_back(std::numeric_limits<double>::quiet_NaN());
        out.sigma_prime.push_back(std::numeric_limits<double>::quiet_NaN());
      }
    } else {
      out.gamma_prime.push_back(std::numeric_limits<double>::quiet_NaN());
      out.sigma_prime.push_back(std::numeric_limits<double>::quiet_NaN());
    }
    // Dispersion index of exceedance counts over blocks.
    std::vector<double> counts(labels.size(), 0.0);
    for (std::size_t j = 0; j < sample.size(); ++j) {
      if (sample[j] > w) {
        auto it = std::lower_bound(labels.begin(), labels.end(), blocks[j]);
        counts[static_cast<std::size_t>(it - labels.begin())] += 1.0;
      }
    }
    double cm = mean(counts);
    out.dispersion.push_back(
        cm > 0.0 && counts.size() > 1
            ? variance(counts) / cm
            : std::numeric_limits<double>::quiet_NaN());
  }
  return out;
}

MarginalMixtureModel fit_marginal_mixture(std::span<const double> sample,
                                          double p_u) {
  if (!(p_u > 0.0 && p_u < 0.5))
    throw DataError("fit_marginal_mixture: p_u must be in (0, 0.5)");
  MarginalMixtureModel m;
  m.sample.assign(sample.begin(), sample.end());
  std::sort(m.sample.begin(), m.sample.end());
  m.p_u = p_u;
  double u = quantile_interp(m.sample, 1.0 - p_u);
  m.gpd = fit_gpd(m.sample, u, GpdFitMethod::mle);
  return m;
}

namespace {

// GPD CDF evaluated leniently: clamps to the support instead of throwing,
// so the mixture stays defined on the whole real line.
double gpd_cdf_clamped(const GPDParams& p, double x) {
  if (x <= p.threshold) return 0.0;
  if (p.shape < -kShapeZeroTol) {
    double endpoint = p.threshold - p.scale / p.shape;
    if (x >= endpoint) return 1.0;
  }
  return gpd_cdf(p, x);
}

}  // namespace

double mixture_cdf(const MarginalMixtureModel& m, double x) {
  if (m.sample.empty()) throw NumericalError("mixture_cdf: empty model");
  if (x < m.gpd.threshold) {
    const double n = static_cast<double>(m.sample.size());
    double f = ecdf_interp(m.sample, x);
    return std::clamp(f, 0.5 / n, 1.0 - 0.5 / n);
  }
  return (1.0 - m.p_u) + m.p_u * gpd_cdf_clamped(m.gpd, x);
}

double mixture_quantile(const MarginalMixtureModel& m, double q) {
  if (!(q > 0.0 && q < 1.0))
    throw NumericalError("mixture_quantile: q outside (0, 1)");
  if (q < 1.0 - m.p_u) return quantile_interp(m.sample, q);
  double qq = (q - (1.0 - m.p_u)) / m.p_u;
  return gpd_quantile(m.gpd, qq);
}

double to_frechet(const MarginalMixtureModel& m, double x) {
  const double n = static_cast<double>(m.sample.size());
  double f = std::clamp(mixture_cdf(m, x), 0.5 / n, 1.0 - 0.5 / n);
  return -1.0 / std::log(f);
}

double from_frechet(const MarginalMixtureModel& m, double z) {
  if (!(z > 0.0)) throw NumericalError("from_frechet: z must be positive");
  return mixture_quantile(m, std::exp(-1.0 / z));
}

nlohmann::json mixture_to_json(const MarginalMixtureModel& m) {
  return nlohmann::json{{"sample", m.sample},
                        {"p_u", m.p_u},
                        {"u", m.gpd.threshold},
                        {"sigma", m.gpd.scale},
                        {"gamma", m.gpd.shape}};
}

MarginalMixtureModel mixture_from_json(const nlohmann::json& j) {
  MarginalMixtureModel m;
  m.sample = j.at("sample").get<std::vector<double>>();
  m.p_u = j.at("p_u").get<double>();
  m.gpd.threshold = j.at("u").get<double>();
  m.gpd.scale = j.at("sigma").get<double>();
  m.gpd.shape = j.at("gamma").get<double>();
  return m;
}

}  // namespace exsim
