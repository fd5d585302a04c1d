#include "exsim/copula.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <nlohmann/json.hpp>

#include "exsim/errors.hpp"
#include "exsim/math.hpp"

namespace exsim {

namespace {

constexpr double kUEps = 1e-12;

double clamp_u(double u) { return std::clamp(u, kUEps, 1.0 - kUEps); }

// ---- base (unrotated) families; all are exchangeable in (u, v) -------------

struct GaussianCopula {
  double rho;
  double log_pdf(double u, double v) const {
    double x = norm_quantile(u), y = norm_quantile(v);
    double r2 = 1.0 - rho * rho;
    return -0.5 * std::log(r2) -
           (rho * rho * (x * x + y * y) - 2.0 * rho * x * y) / (2.0 * r2);
  }
  double h(double v, double u) const {  // P(V <= v | U = u)
    double x = norm_quantile(u), y = norm_quantile(v);
    return norm_cdf((y - rho * x) / std::sqrt(1.0 - rho * rho));
  }
  double hinv(double p, double u) const {
    double x = norm_quantile(u);
    double y = norm_quantile(p) * std::sqrt(1.0 - rho * rho) + rho * x;
    return norm_cdf(y);
  }
};

struct StudentTCopula {
  double rho, nu;
  double log_pdf(double u, double v) const {
    double x = student_t_quantile(u, nu), y = student_t_quantile(v, nu);
    double r2 = 1.0 - rho * rho;
    double quad = (x * x - 2.0 * rho * x * y + y * y) / (nu * r2);
    double log_f2 = std::lgamma(0.5 * nu + 1.0) - std::lgamma(0.5 * nu) -
                    std::log(nu * M_PI) - 0.5 * std::log(r2) -
                    (0.5 * nu + 1.0) * std::log1p(quad);
    return log_f2 - student_t_log_pdf(x, nu) - student_t_log_pdf(y, nu);
  }
  double h(double v, double u) const {
    double x = student_t_quantile(u, nu), y = student_t_quantile(v, nu);
    double denom = std::sqrt((nu + x * x) * (1.0 - rho * rho) / (nu + 1.0));
    return student_t_cdf((y - rho * x) / denom, nu + 1.0);
  }
  double hinv(double p, double u) const {
    double x = student_t_quantile(u, nu);
    double denom = std::sqrt((nu + x * x) * (1.0 - rho * rho) / (nu + 1.0));
    double y = student_t_quantile(p, nu + 1.0) * denom + rho * x;
    return student_t_cdf(y, nu);
  }
};

struct ClaytonCopula {
  double theta;  // > 0
  double cdf(double u, double v) const {
    return std::pow(std::pow(u, -theta) + std::pow(v, -theta) - 1.0,
                    -1.0 / theta);
  }
  double log_pdf(double u, double v) const {
    double lu = std::log(u), lv = std::log(v);
    double s = std::exp(-theta * lu) + std::exp(-theta * lv) - 1.0;
    if (s <= 0.0) return -std::numeric_limits<double>::infinity();
    return std::log1p(theta) - (theta + 1.0) * (lu + lv) -
           (2.0 + 1.0 / theta) * std::log(s);
  }
  double h(double v, double u) const {
    double s = std::pow(u, -theta) + std::pow(v, -theta) - 1.0;
    return std::pow(u, -theta - 1.0) * std::pow(s, -1.0 / theta - 1.0);
  }
  double hinv(double p, double u) const {
    double t = std::pow(p, -theta / (theta + 1.0)) - 1.0;
    double s = t * std::pow(u, -theta) + 1.0;
    return std::pow(s, -1.0 / theta);
  }
};

struct GumbelCopula {
  double theta;  // >= 1
  double cdf(double u, double v) const {
    double a = std::pow(-std::log(u), theta), b = std::pow(-std::log(v), theta);
    return std::exp(-std::pow(a + b, 1.0 / theta));
  }
  double log_pdf(double u, double v) const {
    double lu = -std::log(u), lv = -std::log(v);
    double a = std::pow(lu, theta), b = std::pow(lv, theta);
    double s = a + b;
    double s1t = std::pow(s, 1.0 / theta);
    // c = C(u,v) (uv)^{-1} (lu*lv)^{theta-1} s^{1/theta - 2} (s^{1/theta} + theta - 1)
    return -s1t - std::log(u) - std::log(v) +
           (theta - 1.0) * (std::log(lu) + std::log(lv)) +
           (1.0 / theta - 2.0) * std::log(s) + std::log(s1t + theta - 1.0);
  }
  double h(double v, double u) const {
    double lu = -std::log(u), lv = -std::log(v);
    double a = std::pow(lu, theta), b = std::pow(lv, theta);
    double s = a + b;
    return cdf(u, v) * std::pow(lu, theta - 1.0) *
           std::pow(s, 1.0 / theta - 1.0) / u;
  }
  double hinv(double p, double u) const {
    auto f = [&](double v) { return h(clamp_u(v), u); };
    return invert_monotone(f, p, kUEps, 1.0 - kUEps, 1e-12);
  }
};

struct FrankCopula {
  double theta;  // != 0
  double cdf(double u, double v) const {
    double em1 = std::expm1(-theta);
    double gu = std::expm1(-theta * u), gv = std::expm1(-theta * v);
    return -std::log1p(gu * gv / em1) / theta;
  }
  double log_pdf(double u, double v) const {
    double em1 = std::expm1(-theta);
    double gu = std::expm1(-theta * u), gv = std::expm1(-theta * v);
    double denom = em1 + gu * gv;
    double val = theta * em1 * std::exp(-theta * (u + v)) / (denom * denom);
    if (!(val > 0.0)) return -std::numeric_limits<double>::infinity();
    return std::log(val);
  }
  double h(double v, double u) const {
    double em1 = std::expm1(-theta);
    double gu = std::expm1(-theta * u), gv = std::expm1(-theta * v);
    return std::exp(-theta * u) * gv / (em1 + gu * gv);
  }
  double hinv(double p, double u) const {
    double em1 = std::expm1(-theta);
    double eu = std::exp(-theta * u);
    // Solve p = eu*gv / (em1 + (eu-1)*gv) for gv.
    double gv = p * em1 / (eu - p * (eu - 1.0));
    double v = -std::log1p(gv) / theta;
    return clamp_u(v);
  }
};

// Dispatch helpers on the unrotated family.
double base_log_pdf(const BivariateCopula& c, double u, double v) {
  switch (c.family) {
    case CopulaFamily::independence:
      return 0.0;
    case CopulaFamily::gaussian:
      return GaussianCopula{c.par}.log_pdf(u, v);
    case CopulaFamily::student_t:
      return StudentTCopula{c.par, c.par2}.log_pdf(u, v);
    case CopulaFamily::clayton:
      return ClaytonCopula{c.par}.log_pdf(u, v);
    case CopulaFamily::gumbel:
      return GumbelCopula{c.par}.log_pdf(u, v);
    case CopulaFamily::frank:
      return FrankCopula{c.par}.log_pdf(u, v);
  }
  throw NumericalError("unknown copula family");
}

double base_cdf(const BivariateCopula& c, double u, double v) {
  switch (c.family) {
    case CopulaFamily::independence:
      return u * v;
    case CopulaFamily::gaussian: {
      // Numerical integration of h over the first argument (only used by
      // diagnostics/oracles, not on hot paths).
      GaussianCopula g{c.par};
      const auto n = 64;
      double s = 0.0;
      for (int i = 0; i < n; ++i) {
        double x = u * (i + 0.5) / n;
        s += g.h(v, clamp_u(x));
      }
      return s * u / n;
    }
    case CopulaFamily::student_t: {
      StudentTCopula g{c.par, c.par2};
      const auto n = 64;
      double s = 0.0;
      for (int i = 0; i < n; ++i) {
        double x = u * (i + 0.5) / n;
        s += g.h(v, clamp_u(x));
      }
      return s * u / n;
    }
    case CopulaFamily::clayton:
      return ClaytonCopula{c.par}.cdf(u, v);
    case CopulaFamily::gumbel:
      return GumbelCopula{c.par}.cdf(u, v);
    case CopulaFamily::frank:
      return FrankCopula{c.par}.cdf(u, v);
  }
  throw NumericalError("unknown copula family");
}

double base_h(const BivariateCopula& c, double v, double u) {
  switch (c.family) {
    case CopulaFamily::independence:
      return v;
    case CopulaFamily::gaussian:
      return GaussianCopula{c.par}.h(v, u);
    case CopulaFamily::student_t:
      return StudentTCopula{c.par, c.par2}.h(v, u);
    case CopulaFamily::clayton:
      return ClaytonCopula{c.par}.h(v, u);
    case CopulaFamily::gumbel:
      return GumbelCopula{c.par}.h(v, u);
    case CopulaFamily::frank:
      return FrankCopula{c.par}.h(v, u);
  }
  throw NumericalError("unknown copula family");
}

double base_hinv(const BivariateCopula& c, double p, double u) {
  switch (c.family) {
    case CopulaFamily::independence:
      return p;
    case CopulaFamily::gaussian:
      return GaussianCopula{c.par}.hinv(p, u);
    case CopulaFamily::student_t:
      return StudentTCopula{c.par, c.par2}.hinv(p, u);
    case CopulaFamily::clayton:
      return ClaytonCopula{c.par}.hinv(p, u);
    case CopulaFamily::gumbel:
      return GumbelCopula{c.par}.hinv(p, u);
    case CopulaFamily::frank:
      return FrankCopula{c.par}.hinv(p, u);
  }
  throw NumericalError("unknown copula family");
}

void check_rotation(const BivariateCopula& c) {
  if (c.rotation != 0 && c.rotation != 90 && c.rotation != 180 &&
      c.rotation != 270)
    throw NumericalError("copula rotation must be 0/90/180/270");
  if (c.rotation != 0 && c.family != CopulaFamily::clayton &&
      c.family != CopulaFamily::gumbel)
    throw NumericalError("rotations only supported for clayton/gumbel");
}

}  // namespace

std::string family_name(CopulaFamily f) {
  switch (f) {
    case CopulaFamily::independence:
      return "independence";
    case CopulaFamily::gaussian:
      return "gaussian";
    case CopulaFamily::student_t:
      return "student_t";
    case CopulaFamily::clayton:
      return "clayton";
    case CopulaFamily::gumbel:
      return "gumbel";
    case CopulaFamily::frank:
      return "frank";
  }
  return "unknown";
}

CopulaFamily family_from_name(const std::string& name) {
  if (name == "independence") return CopulaFamily::independence;
  if (name == "gaussian") return CopulaFamily::gaussian;
  if (name == "student_t") return CopulaFamily::student_t;
  if (name == "clayton") return CopulaFamily::clayton;
  if (name == "gumbel") return CopulaFamily::gumbel;
  if (name == "frank") return CopulaFamily::frank;
  throw DataError("unknown copula family '" + name + "'");
}

int BivariateCopula::n_parameters() const {
  switch (family) {
    case CopulaFamily::independence:
      return 0;
    case CopulaFamily::student_t:
      return 2;
    default:
      return 1;
  }
}

double copula_pdf(const BivariateCopula& c, double u, double v) {
  check_rotation(c);
  u = clamp_u(u);
  v = clamp_u(v);
  switch (c.rotation) {
    case 0:
      return std::exp(base_log_pdf(c, u, v));
    case 90:
      return std::exp(base_log_pdf(c, 1.0 - u, v));
    case 180:
      return std::exp(base_log_pdf(c, 1.0 - u, 1.0 - v));
    case 270:
      return std::exp(base_log_pdf(c, u, 1.0 - v));
  }
  return 0.0;
}

double copula_cdf(const BivariateCopula& c, double u, double v) {
  check_rotation(c);
  u = clamp_u(u);
  v = clamp_u(v);
  switch (c.rotation) {
    case 0:
      return base_cdf(c, u, v);
    case 90:
      return v - base_cdf(c, 1.0 - u, v);
    case 180:
      return u + v - 1.0 + base_cdf(c, 1.0 - u, 1.0 - v);
    case 270:
      return u - base_cdf(c, u, 1.0 - v);
  }
  return 0.0;
}

double h_given_first(const BivariateCopula& c, double v, double u) {
  check_rotation(c);
  u = clamp_u(u);
  v = clamp_u(v);
  double out;
  switch (c.rotation) {
    case 0:
      out = base_h(c, v, u);
      break;
    case 90:
      out = base_h(c, v, 1.0 - u);
      break;
    case 180:
      out = 1.0 - base_h(c, 1.0 - v, 1.0 - u);
      break;
    case 270:
      out = 1.0 - base_h(c, 1.0 - v, u);
      break;
    default:
      out = v;
  }
  return clamp_u(out);
}

double h_given_second(const BivariateCopula& c, double u, double v) {
  check_rotation(c);
  u = clamp_u(u);
  v = clamp_u(v);
  double out;
  switch (c.rotation) {
    case 0:
      out = base_h(c, u, v);  // exchangeable base
      break;
    case 90:
      out = 1.0 - base_h(c, 1.0 - u, v);
      break;
    case 180:
      out = 1.0 - base_h(c, 1.0 - u, 1.0 - v);
      break;
    case 270:
      out = base_h(c, u, 1.0 - v);
      break;
    default:
      out = u;
  }
  return clamp_u(out);
}

double hinv_given_first(const BivariateCopula& c, double p, double u) {
  check_rotation(c);
  p = clamp_u(p);
  u = clamp_u(u);
  double out;
  switch (c.rotation) {
    case 0:
      out = base_hinv(c, p, u);
      break;
    case 90:
      out = base_hinv(c, p, 1.0 - u);
      break;
    case 180:
      out = 1.0 - base_hinv(c, 1.0 - p, 1.0 - u);
      break;
    case 270:
      out = 1.0 - base_hinv(c, 1.0 - p, u);
      break;
    default:
      out = p;
  }
  return clamp_u(out);
}

double hinv_given_second(const BivariateCopula& c, double p, double v) {
  check_rotation(c);
  p = clamp_u(p);
  v = clamp_u(v);
  double out;
  switch (c.rotation) {
    case 0:
      out = base_hinv(c, p, v);
      break;
    case 90:
      out = 1.0 - base_hinv(c, 1.0 - p, v);
      break;
    case 180:
      out = 1.0 - base_hinv(c, 1.0 - p, 1.0 - v);
      break;
    case 270:
      out = base_hinv(c, p, 1.0 - v);
      break;
    default:
      out = p;
  }
  return clamp_u(out);
}

double copula_loglik(const BivariateCopula& c, std::span<const double> u,
                     std::span<const double> v) {
  if (u.size() != v.size()) throw DataError("copula_loglik: size mismatch");
  double ll = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    double d = copula_pdf(c, u[i], v[i]);
    if (!(d > 0.0) || !std::isfinite(d))
      return -std::numeric_limits<double>::infinity();
    ll += std::log(d);
  }
  return ll;
}

double copula_tau(const BivariateCopula& c) {
  double sign = (c.rotation == 90 || c.rotation == 270) ? -1.0 : 1.0;
  switch (c.family) {
    case CopulaFamily::independence:
      return 0.0;
    case CopulaFamily::gaussian:
    case CopulaFamily::student_t:
      return 2.0 * std::asin(c.par) / M_PI;
    case CopulaFamily::clayton:
      return sign * c.par / (c.par + 2.0);
    case CopulaFamily::gumbel:
      return sign * (1.0 - 1.0 / c.par);
    case CopulaFamily::frank: {
      double th = c.par;
      if (std::fabs(th) < 1e-12) return 0.0;
      return 1.0 - 4.0 / th * (1.0 - debye1(th));
    }
  }
  throw NumericalError("unknown copula family");
}

TailDependence copula_tail_dependence(const BivariateCopula& c) {
  TailDependence base{};
  switch (c.family) {
    case CopulaFamily::independence:
    case CopulaFamily::gaussian:
    case CopulaFamily::frank:
      base = {0.0, 0.0};
      break;
    case CopulaFamily::student_t: {
      double rho = c.par, nu = c.par2;
      double lam = 2.0 * student_t_cdf(
                             -std::sqrt((nu + 1.0) * (1.0 - rho) / (1.0 + rho)),
                             nu + 1.0);
      base = {lam, lam};
      break;
    }
    case CopulaFamily::clayton:
      base = {0.0, std::pow(2.0, -1.0 / c.par)};
      break;
    case CopulaFamily::gumbel:
      base = {2.0 - std::pow(2.0, 1.0 / c.par), 0.0};
      break;
  }
  switch (c.rotation) {
    case 0:
      return base;
    case 180:
      return {base.lower, base.upper};
    default:
      // 90/270 move mass to the off-diagonal corners.
      return {0.0, 0.0};
  }
}

namespace {

struct FitResult {
  BivariateCopula copula;
  double loglik;
};

FitResult fit_one_param(CopulaFamily family, int rotation,
                        std::span<const double> u, std::span<const double> v,
                        double lo, double hi) {
  auto obj = [&](double par) {
    BivariateCopula c{family, rotation, par, 0.0};
    return copula_loglik(c, u, v);
  };
  double par = maximize_scalar(obj, lo, hi, 48, 1e-7);
  BivariateCopula c{family, rotation, par, 0.0};
  return {c, copula_loglik(c, u, v)};
}

FitResult fit_student_t(std::span<const double> u, std::span<const double> v) {
  const std::size_t n = u.size();
  double tau = kendall_tau(u, v);
  double rho0 = std::clamp(std::sin(0.5 * M_PI * tau), -0.98, 0.98);

  // For fixed nu the t-quantiles of the data are reused across the rho search.
  auto profile = [&](double nu) -> std::pair<double, double> {
    std::vector<double> x(n), y(n);
    for (std::size_t i = 0; i < n; ++i) {
      x[i] = student_t_quantile(clamp_u(u[i]), nu);
      y[i] = student_t_quantile(clamp_u(v[i]), nu);
    }
    double log_norm = 0.0;  // sum of marginal t log-densities, rho-independent
    for (std::size_t i = 0; i < n; ++i)
      log_norm += student_t_log_pdf(x[i], nu) + student_t_log_pdf(y[i], nu);
    auto ll_rho = [&](double rho) {
      double r2 = 1.0 - rho * rho;
      double cst = std::lgamma(0.5 * nu + 1.0) - std::lgamma(0.5 * nu) -
                   std::log(nu * M_PI) - 0.5 * std::log(r2);
      double s = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        double quad =
            (x[i] * x[i] - 2.0 * rho * x[i] * y[i] + y[i] * y[i]) / (nu * r2);
        s += -(0.5 * nu + 1.0) * std::log1p(quad);
      }
      return static_cast<double>(n) * cst + s - log_norm;
    };
    double lo = std::clamp(rho0 - 0.3, -0.99, 0.99);
    double hi = std::clamp(rho0 + 0.3, -0.99, 0.99);
    double rho = maximize_scalar(ll_rho, lo, hi, 24, 1e-7);
    return {rho, ll_rho(rho)};
  };

  // Coarse scan, then 0.5 steps, then 0.1 steps near the optimum.
  const std::vector<double> coarse{2, 3, 4, 6, 9, 14, 21, 30};
  double best_nu = coarse[0], best_ll = -std::numeric_limits<double>::infinity();
  double best_rho = rho0;
  auto consider = [&](double nu) {
    auto [rho, ll] = profile(nu);
    if (ll > best_ll) {
      best_ll = ll;
      best_nu = nu;
      best_rho = rho;
    }
  };
  for (double nu : coarse) consider(nu);
  for (double nu = std::max(2.0, best_nu - 2.5); nu <= std::min(30.0, best_nu + 2.5) + 1e-9;
       nu += 0.5) {
    consider(nu);
  }
  double center = best_nu;
  for (double nu = std::max(2.0, center - 0.4); nu <= std::min(30.0, center + 0.4) + 1e-9;
       nu += 0.1) {
    consider(nu);
  }
  BivariateCopula c{CopulaFamily::student_t, 0, best_rho, best_nu};
  return {c, best_ll};
}

}  // namespace

BivariateCopula fit_copula(CopulaFamily family, int rotation,
                           std::span<const double> u,
                           std::span<const double> v) {
  if (u.size() != v.size() || u.size() < 10)
    throw DataError("fit_copula: need matched samples of size >= 10");
  for (std::size_t i = 0; i < u.size(); ++i)
    if (!(u[i] > 0.0 && u[i] < 1.0 && v[i] > 0.0 && v[i] < 1.0))
      throw DataError("fit_copula: pseudo-observations must lie in (0,1)");
  switch (family) {
    case CopulaFamily::independence:
      return BivariateCopula{};
    case CopulaFamily::gaussian:
      return fit_one_param(family, 0, u, v, -0.99, 0.99).copula;
    case CopulaFamily::student_t:
      return fit_student_t(u, v).copula;
    case CopulaFamily::clayton:
      return fit_one_param(family, rotation, u, v, 1e-3, 28.0).copula;
    case CopulaFamily::gumbel:
      return fit_one_param(family, rotation, u, v, 1.0 + 1e-6, 17.0).copula;
    case CopulaFamily::frank:
      return fit_one_param(family, 0, u, v, -35.0, 35.0).copula;
  }
  throw NumericalError("unknown copula family");
}

CopulaSelection select_copula(std::span<const double> u,
                              std::span<const double> v,
                              const std::vector<CopulaFamily>& families,
                              double independence_level) {
  const std::size_t n = u.size();
  if (n != v.size() || n < 10)
    throw DataError("select_copula: need matched samples of size >= 10");

  double tau = kendall_tau(u, v);
  bool has_independence =
      std::find(families.begin(), families.end(),
                CopulaFamily::independence) != families.end();

  // Kendall-tau independence pretest: under H0, 3*tau*sqrt(n(n-1)) /
  // sqrt(2(2n+5)) is asymptotically standard normal.
  if (has_independence && independence_level > 0.0) {
    double nn = static_cast<double>(n);
    double stat = 3.0 * tau * std::sqrt(nn * (nn - 1.0)) /
                  std::sqrt(2.0 * (2.0 * nn + 5.0));
    double pval = 2.0 * (1.0 - norm_cdf(std::fabs(stat)));
    if (pval > independence_level) {
      CopulaSelection sel;
      sel.copula = BivariateCopula{};
      sel.loglik = 0.0;
      sel.aic = 0.0;
      sel.independence_by_test = true;
      return sel;
    }
  }

  CopulaSelection best;
  best.aic = std::numeric_limits<double>::infinity();
  bool any_fit = false;
  auto consider = [&](const BivariateCopula& c) {
    double ll = copula_loglik(c, u, v);
    if (!std::isfinite(ll)) return;
    double aic = 2.0 * c.n_parameters() - 2.0 * ll;
    any_fit = true;
    if (aic < best.aic) {
      best.copula = c;
      best.loglik = ll;
      best.aic = aic;
    }
  };

  for (CopulaFamily fam : families) {
    try {
      switch (fam) {
        case CopulaFamily::independence:
          consider(BivariateCopula{});
          break;
        case CopulaFamily::gaussian:
        case CopulaFamily::frank:
        case CopulaFamily::student_t:
          consider(fit_copula(fam, 0, u, v));
          break;
        case CopulaFamily::clayton:
        case CopulaFamily::gumbel: {
          if (tau >= 0.0) {
            consider(fit_copula(fam, 0, u, v));
            consider(fit_copula(fam, 180, u, v));
          } else {
            consider(fit_copula(fam, 90, u, v));
            consider(fit_copula(fam, 270, u, v));
          }
          break;
        }
      }
    } catch (const std::exception&) {
      // skip families whose optimization failed
    }
  }

  if (!any_fit) {
    best.copula = BivariateCopula{};
    best.loglik = 0.0;
    best.aic = 0.0;
    best.fallback_independence = true;
  }
  return best;
}

nlohmann::json copula_to_json(const BivariateCopula& c) {
  return nlohmann::json{{"family", family_name(c.family)},
                        {"rotation", c.rotation},
                        {"par", c.par},
                        {"par2", c.par2}};
}

BivariateCopula copula_from_json(const nlohmann::json& j) {
  BivariateCopula c;
  c.family = family_from_name(j.at("family").get<std::string>());
  c.rotation = j.value("rotation", 0);
  c.par = j.value("par", 0.0);
  c.par2 = j.value("par2", 0.0);
  return c;
}

}  // namespace exsim
