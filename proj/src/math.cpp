#include "exsim/math.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <numeric>
#include <thread>

#include "exsim/errors.hpp"

namespace exsim {

double Rng::normal() {
  double u1 = uniform();
  double u2 = uniform();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
}

std::size_t Rng::index(std::size_t n) {
  if (n == 0) throw NumericalError("Rng::index: empty range");
  // Rejection sampling to avoid modulo bias.
  const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
  std::uint64_t x;
  do {
    x = next();
  } while (x >= limit);
  return static_cast<std::size_t>(x % n);
}

// ---- special functions ------------------------------------------------------

double norm_cdf(double x) { return 0.5 * std::erfc(-x * M_SQRT1_2); }

// Acklam's rational approximation plus one Halley refinement step.
double norm_quantile(double p) {
  if (!(p > 0.0 && p < 1.0))
    throw NumericalError("norm_quantile: p outside (0,1)");
  static const double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                             -2.759285104469687e+02, 1.383577518672690e+02,
                             -3.066479806614716e+01, 2.506628277459239e+00};
  static const double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                             -1.556989798598866e+02, 6.680131188771972e+01,
                             -1.328068155288572e+01};
  static const double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                             -2.400758277161838e+00, -2.549732539343734e+00,
                             4.374664141464968e+00,  2.938163982698783e+00};
  static const double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                             2.445134137142996e+00, 3.754408661907416e+00};
  const double plow = 0.02425;
  double x;
  if (p < plow) {
    double q = std::sqrt(-2.0 * std::log(p));
    x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  } else if (p <= 1.0 - plow) {
    double q = p - 0.5;
    double r = q * q;
    x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) *
        q /
        (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
  } else {
    double q = std::sqrt(-2.0 * std::log(1.0 - p));
    x = -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  }
  // Halley refinement against erfc-based CDF.
  double e = norm_cdf(x) - p;
  double u = e * std::sqrt(2.0 * M_PI) * std::exp(0.5 * x * x);
  x = x - u / (1.0 + 0.5 * x * u);
  return x;
}

namespace {

double betacf(double a, double b, double x) {
  constexpr int kMaxIter = 300;
  constexpr double kEps = 3e-16;
  constexpr double kFpMin = 1e-300;
  double qab = a + b, qap = a + 1.0, qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::fabs(d) < kFpMin) d = kFpMin;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= kMaxIter; ++m) {
    int m2 = 2 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < kFpMin) d = kFpMin;
    c = 1.0 + aa / c;
    if (std::fabs(c) < kFpMin) c = kFpMin;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < kFpMin) d = kFpMin;
    c = 1.0 + aa / c;
    if (std::fabs(c) < kFpMin) c = kFpMin;
    d = 1.0 / d;
    double del = d * c;
    h *= del;
    if (std::fabs(del - 1.0) < kEps) break;
  }
  return h;
}

}  // namespace

double inc_beta(double a, double b, double x) {
  if (x <= 0.0) return 0.0;
  if (x >= 1.0) return 1.0;
  double lbeta = std::lgamma(a) + std::lgamma(b) - std::lgamma(a + b);
  double front =
      std::exp(a * std::log(x) + b * std::log(1.0 - x) - lbeta);
  if (x < (a + 1.0) / (a + b + 2.0)) {
    return front * betacf(a, b, x) / a;
  }
  return 1.0 - front * betacf(b, a, 1.0 - x) / b;
}

double inv_inc_beta(double a, double b, double p) {
  if (p <= 0.0) return 0.0;
  if (p >= 1.0) return 1.0;
  double lo = 0.0, hi = 1.0;
  double x = 0.5;
  double lbeta = std::lgamma(a) + std::lgamma(b) - std::lgamma(a + b);
  for (int it = 0; it < 200; ++it) {
    double f = inc_beta(a, b, x) - p;
    if (f > 0.0) {
      hi = x;
    } else {
      lo = x;
    }
    double logdf =
        (a - 1.0) * std::log(x) + (b - 1.0) * std::log(1.0 - x) - lbeta;
    double step = f / std::exp(logdf);
    double xn = x - step;
    if (!(xn > lo && xn < hi)) xn = 0.5 * (lo + hi);
    if (std::fabs(xn - x) < 1e-15 * (1.0 + std::fabs(x))) {
      x = xn;
      break;
    }
    x = xn;
  }
  return x;
}

double student_t_cdf(double x, double nu) {
  if (nu <= 0.0) throw NumericalError("student_t_cdf: nu <= 0");
  if (std::isinf(x)) return x > 0 ? 1.0 : 0.0;
  double w = nu / (nu + x * x);
  double tail = 0.5 * inc_beta(0.5 * nu, 0.5, w);
  return x >= 0.0 ? 1.0 - tail : tail;
}

double student_t_quantile(double p, double nu) {
  if (!(p > 0.0 && p < 1.0))
    throw NumericalError("student_t_quantile: p outside (0,1)");
  if (nu <= 0.0) throw NumericalError("student_t_quantile: nu <= 0");
  double tail = p < 0.5 ? p : 1.0 - p;
  double w = inv_inc_beta(0.5 * nu, 0.5, 2.0 * tail);
  double x = w > 0.0 ? std::sqrt(nu * (1.0 - w) / w)
                     : std::numeric_limits<double>::infinity();
  return p < 0.5 ? -x : x;
}

double student_t_log_pdf(double x, double nu) {
  return std::lgamma(0.5 * (nu + 1.0)) - std::lgamma(0.5 * nu) -
         0.5 * std::log(nu * M_PI) -
         0.5 * (nu + 1.0) * std::log1p(x * x / nu);
}

namespace {

struct GaussLegendre {
  std::vector<double> nodes, weights;
  explicit GaussLegendre(int n) : nodes(n), weights(n) {
    for (int i = 0; i < n; ++i) {
      double t = std::cos(M_PI * (i + 0.75) / (n + 0.5));
      double p1 = 0.0, p0 = 0.0;
      for (int it = 0; it < 100; ++it) {
        p0 = 1.0;
        p1 = t;
        for (int k = 2; k <= n; ++k) {
          double p2 = ((2.0 * k - 1.0) * t * p1 - (k - 1.0) * p0) / k;
          p0 = p1;
          p1 = p2;
        }
        double dp = n * (t * p1 - p0) / (t * t - 1.0);
        double t1 = t - p1 / dp;
        if (std::fabs(t1 - t) < 1e-15) {
          t = t1;
          break;
        }
        t = t1;
      }
      p0 = 1.0;
      p1 = t;
      for (int k = 2; k <= n; ++k) {
        double p2 = ((2.0 * k - 1.0) * t * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      double dp = n * (t * p1 - p0) / (t * t - 1.0);
      nodes[i] = t;
      weights[i] = 2.0 / ((1.0 - t * t) * dp * dp);
    }
  }
};

const GaussLegendre& gl50() {
  static const GaussLegendre g(50);
  return g;
}

}  // namespace

double debye1(double x) {
  if (x == 0.0) return 1.0;
  if (x < 0.0) {
    // D1(-x) = D1(x) + x/2
    return debye1(-x) - x / 2.0;
  }
  const auto& g = gl50();
  double sum = 0.0;
  for (std::size_t i = 0; i < g.nodes.size(); ++i) {
    double t = 0.5 * x * (g.nodes[i] + 1.0);
    double f = t < 1e-8 ? 1.0 - 0.5 * t : t / std::expm1(t);
    sum += g.weights[i] * f;
  }
  sum *= 0.5 * x;  // integral over [0, x]
  return sum / x;
}

// ---- empirical distribution helpers -----------------------------------------

double ecdf_interp(std::span<const double> sorted, double x) {
  const std::size_t n = sorted.size();
  if (n == 0) throw NumericalError("ecdf_interp: empty sample");
  const double pmin = 0.5 / static_cast<double>(n);
  if (x <= sorted.front()) {
    return x < sorted.front() ? pmin : pmin;
  }
  if (x >= sorted.back()) return 1.0 - pmin;
  auto it = std::upper_bound(sorted.begin(), sorted.end(), x);
  std::size_t j = static_cast<std::size_t>(it - sorted.begin());  // x < sorted[j]
  // knot i has probability (i + 0.5)/n for 0-based i
  double x0 = sorted[j - 1], x1 = sorted[j];
  double p0 = (static_cast<double>(j - 1) + 0.5) / static_cast<double>(n);
  double p1 = (static_cast<double>(j) + 0.5) / static_cast<double>(n);
  if (x1 <= x0) return p1;
  return p0 + (p1 - p0) * (x - x0) / (x1 - x0);
}

double quantile_interp(std::span<const double> sorted, double q) {
  const std::size_t n = sorted.size();
  if (n == 0) throw NumericalError("quantile_interp: empty sample");
  const double pmin = 0.5 / static_cast<double>(n);
  if (q <= pmin) return sorted.front();
  if (q >= 1.0 - pmin) return sorted.back();
  double h = q * static_cast<double>(n) - 0.5;  // position among 0-based knots
  std::size_t i = static_cast<std::size_t>(std::floor(h));
  double frac = h - static_cast<double>(i);
  if (i + 1 >= n) return sorted.back();
  return sorted[i] + frac * (sorted[i + 1] - sorted[i]);
}

double mean(std::span<const double> xs) {
  if (xs.empty()) throw NumericalError("mean: empty sample");
  return std::accumulate(xs.begin(), xs.end(), 0.0) /
         static_cast<double>(xs.size());
}

double variance(std::span<const double> xs) {
  if (xs.size() < 2) throw NumericalError("variance: need at least 2 points");
  double m = mean(xs);
  double s = 0.0;
  for (double x : xs) s += (x - m) * (x - m);
  return s / static_cast<double>(xs.size() - 1);
}

double sd(std::span<const double> xs) { return std::sqrt(variance(xs)); }

namespace {

// Counts inversions in y via merge sort.
std::uint64_t merge_count(std::vector<double>& y, std::vector<double>& tmp,
                          std::size_t lo, std::size_t hi) {
  if (hi - lo < 2) return 0;
  std::size_t mid = lo + (hi - lo) / 2;
  std::uint64_t cnt =
      merge_count(y, tmp, lo, mid) + merge_count(y, tmp, mid, hi);
  std::size_t i = lo, j = mid, k = lo;
  while (i < mid && j < hi) {
    if (y[i] <= y[j]) {
      tmp[k++] = y[i++];
    } else {
      cnt += mid - i;
      tmp[k++] = y[j++];
    }
  }
  while (i < mid) tmp[k++] = y[i++];
  while (j < hi) tmp[k++] = y[j++];
  std::copy(tmp.begin() + lo, tmp.begin() + hi, y.begin() + lo);
  return cnt;
}

}  // namespace

double kendall_tau(std::span<const double> x, std::span<const double> y) {
  const std::size_t n = x.size();
  if (n != y.size() || n < 2)
    throw NumericalError("kendall_tau: bad input sizes");
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (x[a] != x[b]) return x[a] < x[b];
    return y[a] < y[b];
  });
  std::vector<double> ysorted(n);
  for (std::size_t i = 0; i < n; ++i) ysorted[i] = y[order[i]];
  std::vector<double> tmp(n);
  std::uint64_t inv = merge_count(ysorted, tmp, 0, n);
  double pairs = 0.5 * static_cast<double>(n) * static_cast<double>(n - 1);
  return 1.0 - 2.0 * static_cast<double>(inv) / pairs;
}

// ---- optimization ------------------------------------------------------------

double maximize_scalar(const std::function<double(double)>& f, double lo,
                       double hi, int grid, double tol) {
  if (!(hi > lo)) throw NumericalError("maximize_scalar: empty interval");
  double best_x = lo, best_f = -std::numeric_limits<double>::infinity();
  int best_i = 0;
  for (int i = 0; i <= grid; ++i) {
    double x = lo + (hi - lo) * static_cast<double>(i) / grid;
    double fx = f(x);
    if (std::isfinite(fx) && fx > best_f) {
      best_f = fx;
      best_x = x;
      best_i = i;
    }
  }
  if (!std::isfinite(best_f))
    throw NumericalError("maximize_scalar: objective not finite anywhere");
  double a = lo + (hi - lo) * static_cast<double>(std::max(best_i - 1, 0)) / grid;
  double b =
      lo + (hi - lo) * static_cast<double>(std::min(best_i + 1, grid)) / grid;
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double c = b - inv_phi * (b - a);
  double d = a + inv_phi * (b - a);
  double fc = f(c), fd = f(d);
  for (int it = 0; it < 200 && (b - a) > tol * (1.0 + std::fabs(a)); ++it) {
    if (fc > fd || !std::isfinite(fd)) {
      b = d;
      d = c;
      fd = fc;
      c = b - inv_phi * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + inv_phi * (b - a);
      fd = f(d);
    }
  }
  double xm = 0.5 * (a + b);
  double fm = f(xm);
  if (std::isfinite(fm) && fm >= best_f) return xm;
  return best_x;
}

double invert_monotone(const std::function<double(double)>& f, double target,
                       double lo, double hi, double tol,
                       const std::function<double(double)>* dfdx) {
  double flo = f(lo) - target;
  double fhi = f(hi) - target;
  if (flo > 0.0) return lo;
  if (fhi < 0.0) return hi;
  double x = 0.5 * (lo + hi);
  for (int it = 0; it < 200; ++it) {
    double fx = f(x) - target;
    if (fx > 0.0) {
      hi = x;
    } else {
      lo = x;
    }
    double xn;
    if (dfdx != nullptr) {
      double d = (*dfdx)(x);
      xn = d > 0.0 ? x - fx / d : 0.5 * (lo + hi);
      if (!(xn > lo && xn < hi)) xn = 0.5 * (lo + hi);
    } else {
      xn = 0.5 * (lo + hi);
    }
    if (std::fabs(xn - x) < tol) return xn;
    x = xn;
  }
  return x;
}

// ---- misc ---------------------------------------------------------------------

void parallel_for(std::size_t n, int threads,
                  const std::function<void(std::size_t)>& fn) {
  if (n == 0) return;
  int nt = std::max(1, threads);
  if (nt == 1 || n < 2) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  nt = static_cast<int>(std::min<std::size_t>(nt, n));
  std::vector<std::thread> pool;
  pool.reserve(nt);
  std::size_t chunk = (n + nt - 1) / nt;
  for (int t = 0; t < nt; ++t) {
    std::size_t b = std::min(n, t * chunk);
    std::size_t e = std::min(n, b + chunk);
    if (b >= e) break;
    pool.emplace_back([b, e, &fn] {
      for (std::size_t i = b; i < e; ++i) fn(i);
    });
  }
  for (auto& th : pool) th.join();
}

std::uint64_t fnv1a(std::span<const unsigned char> bytes) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char b : bytes) {
    h ^= b;
    h *= 1099511628211ull;
  }
  return h;
}

std::uint64_t fnv1a(const std::string& s) {
  return fnv1a(std::span<const unsigned char>(
      reinterpret_cast<const unsigned char*>(s.data()), s.size()));
}

std::string format_double(double v) {
  char buf[40];
  for (int prec = 1; prec <= 17; ++prec) {
    std::snprintf(buf, sizeof(buf), "%.*g", prec, v);
    if (std::strtod(buf, nullptr) == v) break;
  }
  return buf;
}

}  // namespace exsim
