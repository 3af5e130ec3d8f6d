#include <cmath>
#include <limits>

#include "legibot/errors.hpp"
#include "legibot/stats.hpp"

namespace legibot {

namespace {

/// Continued fraction for the incomplete beta (modified Lentz).
double beta_cf(double a, double b, double x) {
  constexpr double kEps = 3e-16;
  constexpr double kFpMin = 1e-300;
  const double qab = a + b;
  const double qap = a + 1.0;
  const double qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::abs(d) < kFpMin) d = kFpMin;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= 500; ++m) {
    const int m2 = 2 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < kFpMin) d = kFpMin;
    c = 1.0 + aa / c;
    if (std::abs(c) < kFpMin) c = kFpMin;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < kFpMin) d = kFpMin;
    c = 1.0 + aa / c;
    if (std::abs(c) < kFpMin) c = kFpMin;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::abs(del - 1.0) < kEps) break;
  }
  return h;
}

}  // namespace

double incomplete_beta(double a, double b, double x) {
  if (!(a > 0.0) || !(b > 0.0)) throw ValidationError("beta: a and b must be > 0");
  if (x < 0.0 || x > 1.0) throw ValidationError("beta: x must lie in [0, 1]");
  if (x == 0.0) return 0.0;
  if (x == 1.0) return 1.0;
  const double front = std::exp(std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) +
                                a * std::log(x) + b * std::log1p(-x));
  // The continued fraction converges fast below the distribution mean; use
  // the symmetry I_x(a,b) = 1 - I_{1-x}(b,a) above it.
  if (x < (a + 1.0) / (a + b + 2.0)) return front * beta_cf(a, b, x) / a;
  return 1.0 - front * beta_cf(b, a, 1.0 - x) / b;
}

double f_upper_tail(double F, int df1, int df2) {
  if (df1 < 1 || df2 < 1) throw ValidationError("f_upper_tail: dfs must be >= 1");
  if (F < 0.0) throw ValidationError("f_upper_tail: F must be >= 0");
  if (std::isinf(F)) return 0.0;
  const double x = df2 / (df2 + df1 * F);
  return incomplete_beta(0.5 * df2, 0.5 * df1, x);
}

double t_two_tailed_p(double t, int df) {
  if (df < 1) throw ValidationError("t_two_tailed_p: df must be >= 1");
  if (std::isinf(t)) return 0.0;
  const double x = df / (df + t * t);
  return incomplete_beta(0.5 * df, 0.5, x);
}

double t_quantile(double p, int df) {
  if (df < 1) throw ValidationError("t_quantile: df must be >= 1");
  if (!(p > 0.0 && p < 1.0)) throw ValidationError("t_quantile: p must lie in (0, 1)");
  if (p == 0.5) return 0.0;
  const bool upper = p > 0.5;
  const double tail = upper ? 2.0 * (1.0 - p) : 2.0 * p;  // two-tailed mass at |t|
  double lo = 0.0;
  double hi = 1.0;
  while (t_two_tailed_p(hi, df) > tail) hi *= 2.0;  // bracket |t|
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (t_two_tailed_p(mid, df) > tail) lo = mid;
    else hi = mid;
  }
  const double magnitude = 0.5 * (lo + hi);
  return upper ? magnitude : -magnitude;
}

}  // namespace legibot
