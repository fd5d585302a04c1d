#pragma once

#include <span>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

namespace exsim {

enum class CopulaFamily {
  independence,
  gaussian,
  student_t,
  clayton,
  gumbel,
  frank,
};

std::string family_name(CopulaFamily f);
CopulaFamily family_from_name(const std::string& name);

// Bivariate copula with optional 90/180/270 degree rotation (used to give
// Clayton and Gumbel negative-dependence variants).
struct BivariateCopula {
  CopulaFamily family = CopulaFamily::independence;
  int rotation = 0;  // 0, 90, 180, 270
  double par = 0.0;
  double par2 = 0.0;  // student_t degrees of freedom

  int n_parameters() const;
};

double copula_pdf(const BivariateCopula& c, double u, double v);
double copula_cdf(const BivariateCopula& c, double u, double v);

// h_given_first(v, u)  = P(V <= v | U = u) = dC(u, v)/du
// h_given_second(u, v) = P(U <= u | V = v) = dC(u, v)/dv
double h_given_first(const BivariateCopula& c, double v, double u);
double h_given_second(const BivariateCopula& c, double u, double v);
// Inverses in the conditioned argument.
double hinv_given_first(const BivariateCopula& c, double p, double u);
double hinv_given_second(const BivariateCopula& c, double p, double v);

double copula_loglik(const BivariateCopula& c, std::span<const double> u,
                     std::span<const double> v);

// Closed-form Kendall's tau for the family (Frank via the Debye function).
double copula_tau(const BivariateCopula& c);
// (lambda_upper, lambda_lower)
struct TailDependence {
  double upper = 0.0;
  double lower = 0.0;
};
TailDependence copula_tail_dependence(const BivariateCopula& c);

// Maximum-likelihood fit of one family/rotation on pseudo-observations in
// (0,1). Deterministic: bounded grid plus golden-section; Student-t degrees
// of freedom profiled over {2, 2.5, ..., 30} then refined to 0.1 steps.
BivariateCopula fit_copula(CopulaFamily family, int rotation,
                           std::span<const double> u,
                           std::span<const double> v);

struct CopulaSelection {
  BivariateCopula copula;
  double loglik = 0.0;
  double aic = 0.0;
  bool fallback_independence = false;  // every candidate fit failed
  bool independence_by_test = false;   // Kendall-tau pretest kept independence
};

// Kendall-tau independence pretest (asymptotic normal) followed by minimum
// AIC over the candidate families. Rotations 0/180 compete for tau >= 0,
// 90/270 for tau < 0.
CopulaSelection select_copula(std::span<const double> u,
                              std::span<const double> v,
                              const std::vector<CopulaFamily>& families,
                              double independence_level = 0.01);

nlohmann::json copula_to_json(const BivariateCopula& c);
BivariateCopula copula_from_json(const nlohmann::json& j);

}  // namespace exsim
