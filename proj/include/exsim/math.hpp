#pragma once

#include <cstdint>
#include <functional>
#include <random>
#include <span>
#include <vector>

namespace exsim {

// Deterministic random stream. All variate generation is hand-rolled on top of
// mt19937_64 so that sequences are reproducible across standard library
// implementations; std::*_distribution is never used.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  // Substream derived from (seed, stream); used to make independent draws
  // reproducible regardless of execution order.
  Rng(std::uint64_t seed, std::uint64_t stream) {
    std::seed_seq seq{seed, stream};
    engine_.seed(seq);
  }

  std::uint64_t next() { return engine_(); }

  // Uniform on the open interval (0, 1).
  double uniform() {
    return (static_cast<double>(engine_() >> 11) + 0.5) * 0x1.0p-53;
  }

  double uniform(double a, double b) { return a + (b - a) * uniform(); }

  // Standard normal via Box-Muller (no spare caching, keeps state minimal).
  double normal();

  // Uniform integer in [0, n).
  std::size_t index(std::size_t n);

 private:
  std::mt19937_64 engine_;
};

// ---- special functions -----------------------------------------------------

double norm_cdf(double x);
double norm_quantile(double p);
double inc_beta(double a, double b, double x);      // regularized I_x(a, b)
double inv_inc_beta(double a, double b, double p);  // x with I_x(a, b) = p
double student_t_cdf(double x, double nu);
double student_t_quantile(double p, double nu);
double student_t_log_pdf(double x, double nu);
double debye1(double x);  // D1(x) = (1/x) * integral_0^x t/(e^t - 1) dt

// ---- empirical distribution helpers ----------------------------------------

// Interpolated empirical CDF on the (i - 0.5)/n plotting convention.
// Values below the smallest order statistic map to 1/(2n), above the largest
// to 1 - 1/(2n); linear between knots.
double ecdf_interp(std::span<const double> sorted, double x);

// Inverse of ecdf_interp; q outside [1/(2n), 1 - 1/(2n)] is clamped to the
// extreme order statistics.
double quantile_interp(std::span<const double> sorted, double q);

double mean(std::span<const double> xs);
double variance(std::span<const double> xs);  // n - 1 denominator
double sd(std::span<const double> xs);

// Kendall's tau, O(n log n) (merge-sort inversion counting; assumes
// continuous data, ties broken by the second coordinate).
double kendall_tau(std::span<const double> x, std::span<const double> y);

// ---- optimization -----------------------------------------------------------

// Deterministic 1-D maximizer: coarse grid scan followed by golden-section
// refinement between the neighbors of the best grid point.
double maximize_scalar(const std::function<double(double)>& f, double lo,
                       double hi, int grid = 64, double tol = 1e-9);

// Monotone-increasing scalar root find: returns x in [lo, hi] with
// f(x) = target, by bisection with a Newton acceleration when dfdx is given.
double invert_monotone(const std::function<double(double)>& f, double target,
                       double lo, double hi, double tol = 1e-12,
                       const std::function<double(double)>* dfdx = nullptr);

// ---- misc -------------------------------------------------------------------

// Runs fn(i) for i in [0, n). Work is split into contiguous chunks over
// `threads` std::threads; fn must only write to slot i so results do not
// depend on the schedule.
void parallel_for(std::size_t n, int threads,
                  const std::function<void(std::size_t)>& fn);

std::uint64_t fnv1a(std::span<const unsigned char> bytes);
std::uint64_t fnv1a(const std::string& s);

// Formats a double with enough digits to round-trip (deterministic %.17g
// trimmed of redundant digits).
std::string format_double(double v);

}  // namespace exsim
