#ifndef LEGIBOT_TESTS_ORACLES_HPP
#define LEGIBOT_TESTS_ORACLES_HPP

// Independent reference implementations the tests compare the library
// against. Everything here is written from the defining formulas with plain
// loops, deliberately sharing no code with the library.

#include <cmath>
#include <cstdint>
#include <map>
#include <vector>

namespace oracles {

/// Deterministic xorshift64* stream for property tests.
class TinyRand {
 public:
  explicit TinyRand(std::uint64_t seed) : state_(seed ? seed : 0x9e3779b97f4a7c15ull) {}

  std::uint64_t next_u64() {
    state_ ^= state_ >> 12;
    state_ ^= state_ << 25;
    state_ ^= state_ >> 27;
    return state_ * 0x2545f4914f6cdd1dull;
  }

  /// Uniform in [0, 1).
  double next_unit() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  /// Uniform in [lo, hi).
  double next_in(double lo, double hi) { return lo + (hi - lo) * next_unit(); }

  /// Standard normal via Box-Muller.
  double next_normal() {
    const double u1 = next_unit();
    const double u2 = next_unit();
    return std::sqrt(-2.0 * std::log(1.0 - u1)) * std::cos(2.0 * M_PI * u2);
  }

  /// Uniform integer in [0, n).
  int next_below(int n) { return static_cast<int>(next_u64() % static_cast<std::uint64_t>(n)); }

 private:
  std::uint64_t state_;
};

/// P(F > f) for an F(df1, df2) variable by Simpson integration of the
/// density. The substitution x = u^2 removes the x^(df1/2 - 1) singularity at
/// zero, leaving a smooth integrand: F_cdf(f) = int_0^sqrt(f) 2 C u^(df1-1)
/// (1 + u^2 df1/df2)^(-(df1+df2)/2) du.
inline double f_upper_tail_by_integration(double f, double df1, double df2) {
  if (f <= 0.0) return 1.0;
  const double log_c = std::lgamma(0.5 * (df1 + df2)) - std::lgamma(0.5 * df1) -
                       std::lgamma(0.5 * df2) + 0.5 * df1 * std::log(df1 / df2);
  auto integrand = [&](double u) {
    if (u <= 0.0) return df1 == 1.0 ? 2.0 * std::exp(log_c) : 0.0;
    const double log_val = std::log(2.0) + log_c + (df1 - 1.0) * std::log(u) -
                           0.5 * (df1 + df2) * std::log1p(u * u * df1 / df2);
    return std::exp(log_val);
  };
  const double hi = std::sqrt(f);
  const int n = 200000;  // even
  const double h = hi / n;
  double sum = integrand(0.0) + integrand(hi);
  for (int i = 1; i < n; ++i) sum += integrand(i * h) * (i % 2 ? 4.0 : 2.0);
  const double cdf = sum * h / 3.0;
  return 1.0 - cdf;
}

/// Textbook split-plot sums of squares for a balanced design with one
/// between factor and one within factor. y[g][s][a] = observation of subject
/// s in group g at within level a; every group has the same subject count
/// and every subject has one observation per level.
struct SplitPlotOracle {
  double ss_between = 0.0;
  double ss_subjects = 0.0;
  double ss_within = 0.0;
  double ss_within_x_between = 0.0;
  double ss_error = 0.0;
  double df_between = 0.0;
  double df_subjects = 0.0;
  double df_within = 0.0;
  double df_within_x_between = 0.0;
  double df_error = 0.0;
};

inline SplitPlotOracle split_plot_reference(
    const std::vector<std::vector<std::vector<double>>>& y) {
  const int n_groups = static_cast<int>(y.size());
  const int levels = static_cast<int>(y[0][0].size());

  double grand = 0.0;
  int n_obs = 0, n_subj = 0;
  for (const auto& group : y) {
    n_subj += static_cast<int>(group.size());
    for (const auto& subj : group) {
      for (double v : subj) {
        grand += v;
        ++n_obs;
      }
    }
  }
  grand /= n_obs;

  std::vector<double> group_mean(y.size(), 0.0);
  std::vector<double> level_mean(levels, 0.0);
  std::vector<std::vector<double>> cell_mean(y.size(), std::vector<double>(levels, 0.0));
  for (int g = 0; g < n_groups; ++g) {
    int cnt = 0;
    for (const auto& subj : y[g]) {
      for (int a = 0; a < levels; ++a) {
        group_mean[g] += subj[a];
        cell_mean[g][a] += subj[a];
        level_mean[a] += subj[a];
        ++cnt;
      }
    }
    group_mean[g] /= cnt;
    for (int a = 0; a < levels; ++a) cell_mean[g][a] /= y[g].size();
  }
  for (int a = 0; a < levels; ++a) level_mean[a] /= n_subj;

  SplitPlotOracle out;
  for (int g = 0; g < n_groups; ++g) {
    const double d = group_mean[g] - grand;
    out.ss_between += levels * static_cast<double>(y[g].size()) * d * d;
    for (const auto& subj : y[g]) {
      double subj_mean = 0.0;
      for (double v : subj) subj_mean += v;
      subj_mean /= levels;
      const double e = subj_mean - group_mean[g];
      out.ss_subjects += levels * e * e;
      for (int a = 0; a < levels; ++a) {
        const double r = subj[a] - cell_mean[g][a] - subj_mean + group_mean[g];
        out.ss_error += r * r;
      }
    }
    for (int a = 0; a < levels; ++a) {
      const double i = cell_mean[g][a] - group_mean[g] - level_mean[a] + grand;
      out.ss_within_x_between += static_cast<double>(y[g].size()) * i * i;
    }
  }
  for (int a = 0; a < levels; ++a) {
    const double d = level_mean[a] - grand;
    out.ss_within += n_subj * d * d;
  }

  out.df_between = n_groups - 1;
  out.df_subjects = n_subj - n_groups;
  out.df_within = levels - 1;
  out.df_within_x_between = static_cast<double>(n_groups - 1) * (levels - 1);
  out.df_error = static_cast<double>(n_subj - n_groups) * (levels - 1);
  return out;
}

/// Unicycle propagation by fine Euler substepping; reference for the exact
/// integrate step.
struct TinyPose {
  double x = 0.0;
  double y = 0.0;
  double heading = 0.0;
};

inline TinyPose substep_integrate(TinyPose p, double v, double omega, double dt, int steps) {
  const double h = dt / steps;
  for (int i = 0; i < steps; ++i) {
    p.x += v * h * std::cos(p.heading);
    p.y += v * h * std::sin(p.heading);
    p.heading += omega * h;
  }
  return p;
}

}  // namespace oracles

#endif  // LEGIBOT_TESTS_ORACLES_HPP
