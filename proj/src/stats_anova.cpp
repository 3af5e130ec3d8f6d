#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>

#include "legibot/errors.hpp"
#include "legibot/stats.hpp"

namespace legibot {

namespace {

/// Validated rectangular layout: one row per subject, one column per within
/// cell (row-major over the within factors).
struct DesignTable {
  std::vector<std::string> subjects;
  std::vector<int> group;               // per subject
  std::vector<std::vector<double>> y;   // subject x within-cell
  std::vector<int> group_sizes;         // per between level
  std::vector<int> within_sizes;        // levels per within factor
  int cells = 1;                        // product of within_sizes
};

int cell_index(const std::vector<int>& levels, const std::vector<int>& sizes) {
  int idx = 0;
  for (size_t f = 0; f < sizes.size(); ++f) idx = idx * sizes[f] + levels[f];
  return idx;
}

void check_design(const MixedDesign& design) {
  if (design.within.empty() || design.within.size() > 2)
    throw ValidationError("anova: need one or two within factors");
  if (design.between.levels.size() < 2)
    throw ValidationError("anova: between factor needs at least 2 levels");
  for (const auto& f : design.within) {
    if (f.levels.size() < 2)
      throw ValidationError("anova: within factor " + f.name + " needs at least 2 levels");
  }
}

DesignTable tabulate(const std::vector<Observation>& data, const MixedDesign& design) {
  check_design(design);

  DesignTable t;
  t.within_sizes.reserve(design.within.size());
  for (const auto& f : design.within) t.within_sizes.push_back(static_cast<int>(f.levels.size()));
  for (int s : t.within_sizes) t.cells *= s;
  t.group_sizes.assign(design.between.levels.size(), 0);

  std::map<std::string, size_t> subject_row;
  std::vector<std::vector<bool>> filled;
  const double unset = std::numeric_limits<double>::quiet_NaN();

  for (const auto& obs : data) {
    if (obs.between < 0 || obs.between >= static_cast<int>(design.between.levels.size()))
      throw ValidationError("anova: between level out of range for subject " + obs.subject);
    if (obs.within.size() != design.within.size())
      throw ValidationError("anova: observation has wrong within-factor count for subject " +
                            obs.subject);
    for (size_t f = 0; f < obs.within.size(); ++f) {
      if (obs.within[f] < 0 || obs.within[f] >= t.within_sizes[f])
        throw ValidationError("anova: within level out of range for subject " + obs.subject);
    }

    auto [it, inserted] = subject_row.emplace(obs.subject, t.subjects.size());
    if (inserted) {
      t.subjects.push_back(obs.subject);
      t.group.push_back(obs.between);
      t.y.emplace_back(t.cells, unset);
      filled.emplace_back(t.cells, false);
      ++t.group_sizes[obs.between];
    } else if (t.group[it->second] != obs.between) {
      throw ValidationError("anova: subject " + obs.subject +
                            " appears under two between levels");
    }
    const size_t row = it->second;
    const int cell = cell_index(obs.within, t.within_sizes);
    if (filled[row][cell])
      throw ValidationError("anova: duplicate observation for subject " + obs.subject);
    filled[row][cell] = true;
    t.y[row][cell] = obs.value;
  }

  if (t.subjects.empty()) throw ValidationError("anova: no observations");
  for (size_t s = 0; s < t.subjects.size(); ++s) {
    for (int c = 0; c < t.cells; ++c) {
      if (!filled[s][c])
        throw ValidationError("anova: incomplete design, subject " + t.subjects[s] +
                              " is missing a within cell");
    }
  }
  for (size_t g = 0; g < t.group_sizes.size(); ++g) {
    if (t.group_sizes[g] < 2)
      throw ValidationError("anova: between level " + design.between.levels[g] +
                            " needs at least 2 subjects");
  }
  return t;
}

/// Level combination of a within cell for one factor subset, flattened
/// row-major over that subset's level counts.
int subset_levels(int cell, const std::vector<int>& sizes, const std::vector<int>& subset) {
  std::vector<int> levels(sizes.size());
  for (size_t f = sizes.size(); f-- > 0;) {
    levels[f] = cell % sizes[f];
    cell /= sizes[f];
  }
  int idx = 0;
  for (int f : subset) idx = idx * sizes[f] + levels[f];
  return idx;
}

struct StratumResult {
  double ss_effect = 0.0;
  double ss_cross = 0.0;  // effect x between
  double ss_error = 0.0;  // effect x subjects within groups
};

/// Decompose per-subject effect vectors into overall effect, group
/// difference, and subject error, weighting groups by size.
StratumResult stratum_decomposition(const std::vector<std::vector<double>>& v,
                                    const std::vector<int>& group,
                                    const std::vector<int>& group_sizes, double multiplicity) {
  const size_t S = v.size();
  const size_t L = v.front().size();
  const size_t G = group_sizes.size();

  std::vector<double> overall(L, 0.0);
  std::vector<std::vector<double>> per_group(G, std::vector<double>(L, 0.0));
  for (size_t s = 0; s < S; ++s) {
    for (size_t l = 0; l < L; ++l) per_group[group[s]][l] += v[s][l];
  }
  for (size_t g = 0; g < G; ++g) {
    for (size_t l = 0; l < L; ++l) {
      overall[l] += per_group[g][l];
      per_group[g][l] /= group_sizes[g];
    }
  }
  for (size_t l = 0; l < L; ++l) overall[l] /= static_cast<double>(S);

  StratumResult r;
  for (size_t l = 0; l < L; ++l) r.ss_effect += S * overall[l] * overall[l];
  for (size_t g = 0; g < G; ++g) {
    for (size_t l = 0; l < L; ++l) {
      const double d = per_group[g][l] - overall[l];
      r.ss_cross += group_sizes[g] * d * d;
    }
  }
  for (size_t s = 0; s < S; ++s) {
    for (size_t l = 0; l < L; ++l) {
      const double d = v[s][l] - per_group[group[s]][l];
      r.ss_error += d * d;
    }
  }
  r.ss_effect *= multiplicity;
  r.ss_cross *= multiplicity;
  r.ss_error *= multiplicity;
  return r;
}

AnovaRow make_row(const std::string& name, double ss, int df, const std::string& error_name,
                  double error_ss, int error_df) {
  AnovaRow row;
  row.name = name;
  row.ss = ss;
  row.df = df;
  row.ms = df > 0 ? ss / df : 0.0;
  row.error_name = error_name;
  row.error_ss = error_ss;
  row.error_df = error_df;
  row.error_ms = error_df > 0 ? error_ss / error_df : 0.0;
  if (row.error_ms > 0.0) {
    row.F = row.ms / row.error_ms;
    row.p = f_upper_tail(row.F, df, error_df);
  } else if (row.ss > 0.0) {
    row.F = std::numeric_limits<double>::infinity();
    row.p = 0.0;
  } else {
    row.F = 0.0;  // fully degenerate stratum
    row.p = 1.0;
  }
  const double denom = row.ss + row.error_ss;
  row.partial_eta_sq = denom > 0.0 ? row.ss / denom : 0.0;
  return row;
}

}  // namespace

std::string EffectTerm::label(const MixedDesign& design) const {
  std::string s;
  for (int f : within_indices) {
    if (!s.empty()) s += " x ";
    s += design.within[f].name;
  }
  if (includes_between) {
    if (!s.empty()) s += " x ";
    s += design.between.name;
  }
  return s;
}

std::vector<EffectTerm> enumerate_effects(const MixedDesign& design) {
  std::vector<EffectTerm> effects;
  effects.push_back({true, {}});
  std::vector<std::vector<int>> subsets;
  const int k = static_cast<int>(design.within.size());
  for (int f = 0; f < k; ++f) subsets.push_back({f});
  if (k == 2) subsets.push_back({0, 1});
  for (const auto& subset : subsets) {
    effects.push_back({false, subset});
    effects.push_back({true, subset});
  }
  return effects;
}

AnovaTable mixed_anova(const std::vector<Observation>& data, const MixedDesign& design) {
  const DesignTable t = tabulate(data, design);
  const size_t S = t.subjects.size();
  const int G = static_cast<int>(t.group_sizes.size());
  const int C = t.cells;

  std::vector<double> subject_mean(S, 0.0);
  double grand = 0.0;
  for (size_t s = 0; s < S; ++s) {
    for (int c = 0; c < C; ++c) subject_mean[s] += t.y[s][c];
    subject_mean[s] /= C;
    grand += subject_mean[s];
  }
  grand /= static_cast<double>(S);

  std::vector<double> group_mean(G, 0.0);
  for (size_t s = 0; s < S; ++s) group_mean[t.group[s]] += subject_mean[s];
  for (int g = 0; g < G; ++g) group_mean[g] /= t.group_sizes[g];

  double ss_between = 0.0;
  for (int g = 0; g < G; ++g)
    ss_between += t.group_sizes[g] * (group_mean[g] - grand) * (group_mean[g] - grand);
  ss_between *= C;
  double ss_subjects = 0.0;
  for (size_t s = 0; s < S; ++s) {
    const double d = subject_mean[s] - group_mean[t.group[s]];
    ss_subjects += d * d;
  }
  ss_subjects *= C;
  const int df_subjects = static_cast<int>(S) - G;

  AnovaTable table;
  table.rows.push_back(make_row(design.between.name, ss_between, G - 1,
                                "subjects within groups", ss_subjects, df_subjects));

  // Subject-centered values carry every within-subjects stratum.
  std::vector<std::vector<double>> z(S, std::vector<double>(C));
  for (size_t s = 0; s < S; ++s) {
    for (int c = 0; c < C; ++c) z[s][c] = t.y[s][c] - subject_mean[s];
  }

  // Per-subject effect vectors: margin means for main effects, the
  // double-centered remainder for the two-factor interaction.
  const int k = static_cast<int>(design.within.size());
  std::vector<std::vector<int>> subsets;
  for (int f = 0; f < k; ++f) subsets.push_back({f});
  if (k == 2) subsets.push_back({0, 1});

  std::map<std::vector<int>, std::vector<std::vector<double>>> margins;
  for (const auto& subset : subsets) {
    int L = 1;
    for (int f : subset) L *= t.within_sizes[f];
    std::vector<std::vector<double>> v(S, std::vector<double>(L, 0.0));
    for (size_t s = 0; s < S; ++s) {
      for (int c = 0; c < C; ++c) v[s][subset_levels(c, t.within_sizes, subset)] += z[s][c];
      for (double& x : v[s]) x /= static_cast<double>(C) / L;  // cells per margin entry
    }
    if (subset.size() == 2) {
      // Interaction contrast: remove both main-effect margins.
      for (size_t s = 0; s < S; ++s) {
        for (int c = 0; c < C; ++c) {
          const int l = subset_levels(c, t.within_sizes, subset);
          v[s][l] = z[s][c] - margins.at({0})[s][subset_levels(c, t.within_sizes, {0})] -
                    margins.at({1})[s][subset_levels(c, t.within_sizes, {1})];
        }
      }
    }
    margins[subset] = std::move(v);
  }

  for (const auto& subset : subsets) {
    int L = 1;
    int df = 1;
    std::string name;
    for (int f : subset) {
      L *= t.within_sizes[f];
      df *= t.within_sizes[f] - 1;
      if (!name.empty()) name += " x ";
      name += design.within[f].name;
    }
    const double mult = static_cast<double>(C) / L;
    const StratumResult r =
        stratum_decomposition(margins.at(subset), t.group, t.group_sizes, mult);
    const std::string error_name = name + " x subjects";
    const int error_df = df * df_subjects;
    table.rows.push_back(make_row(name, r.ss_effect, df, error_name, r.ss_error, error_df));
    table.rows.push_back(make_row(name + " x " + design.between.name, r.ss_cross,
                                  df * (G - 1), error_name, r.ss_error, error_df));
  }

  for (size_t s = 0; s < S; ++s) {
    for (int c = 0; c < C; ++c) {
      const double d = t.y[s][c] - grand;
      table.total_ss += d * d;
    }
  }
  table.total_df = static_cast<int>(S) * C - 1;
  return table;
}

// ---------------------------------------------------------------------------
// Aligned rank transform
// ---------------------------------------------------------------------------

namespace {

/// Unweighted marginal means of the full-factorial cell means, one entry per
/// level combination of `subset` (factor index -1 = between).
std::map<std::vector<int>, double> marginal_means(
    const std::map<std::vector<int>, double>& cell_means, const std::vector<int>& subset) {
  std::map<std::vector<int>, std::pair<double, int>> acc;
  for (const auto& [key, mean] : cell_means) {
    std::vector<int> sub;
    sub.reserve(subset.size());
    for (int f : subset) sub.push_back(key[f + 1]);  // key[0] holds the between level
    auto& a = acc[sub];
    a.first += mean;
    a.second += 1;
  }
  std::map<std::vector<int>, double> out;
  for (const auto& [key, sum] : acc) out[key] = sum.first / sum.second;
  return out;
}

}  // namespace

std::vector<double> art_align(const std::vector<Observation>& data,
                              const MixedDesign& design, const EffectTerm& effect) {
  const DesignTable t = tabulate(data, design);  // validation + level counts
  (void)t;

  // Full-factorial cell means keyed by (between, within...) levels.
  std::map<std::vector<int>, std::pair<double, int>> acc;
  for (const auto& obs : data) {
    std::vector<int> key;
    key.reserve(obs.within.size() + 1);
    key.push_back(obs.between);
    key.insert(key.end(), obs.within.begin(), obs.within.end());
    auto& a = acc[key];
    a.first += obs.value;
    a.second += 1;
  }
  std::map<std::vector<int>, double> cell_means;
  for (const auto& [key, sum] : acc) cell_means[key] = sum.first / sum.second;

  // The effect's factors, -1 standing for the between factor.
  std::vector<int> factors;
  if (effect.includes_between) factors.push_back(-1);
  for (int f : effect.within_indices) factors.push_back(f);
  if (factors.empty()) throw ValidationError("art: empty effect term");

  // Inclusion-exclusion over all sub-margins of the effect.
  const size_t n_sub = size_t{1} << factors.size();
  std::vector<std::pair<std::vector<int>, double>> terms;  // (subset, sign)
  std::vector<std::map<std::vector<int>, double>> tables;
  for (size_t mask = 0; mask < n_sub; ++mask) {
    std::vector<int> subset;
    for (size_t b = 0; b < factors.size(); ++b) {
      if (mask & (size_t{1} << b)) subset.push_back(factors[b]);
    }
    const double sign = (factors.size() - subset.size()) % 2 == 0 ? 1.0 : -1.0;
    tables.push_back(marginal_means(cell_means, subset));
    terms.push_back({subset, sign});
  }

  std::vector<double> aligned;
  aligned.reserve(data.size());
  for (const auto& obs : data) {
    std::vector<int> key;
    key.push_back(obs.between);
    key.insert(key.end(), obs.within.begin(), obs.within.end());
    const double residual = obs.value - cell_means.at(key);
    double estimate = 0.0;
    for (size_t i = 0; i < terms.size(); ++i) {
      std::vector<int> sub;
      for (int f : terms[i].first) sub.push_back(key[f + 1]);
      estimate += terms[i].second * tables[i].at(sub);
    }
    aligned.push_back(residual + estimate);
  }
  return aligned;
}

std::vector<double> midranks(const std::vector<double>& values) {
  std::vector<size_t> order(values.size());
  std::iota(order.begin(), order.end(), size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&values](size_t a, size_t b) { return values[a] < values[b]; });
  std::vector<double> ranks(values.size(), 0.0);
  size_t i = 0;
  while (i < order.size()) {
    size_t j = i;
    while (j + 1 < order.size() && values[order[j + 1]] == values[order[i]]) ++j;
    const double shared = 0.5 * (static_cast<double>(i + 1) + static_cast<double>(j + 1));
    for (size_t k = i; k <= j; ++k) ranks[order[k]] = shared;
    i = j + 1;
  }
  return ranks;
}

AnovaTable art_anova(const std::vector<Observation>& data, const MixedDesign& design) {
  AnovaTable out;
  for (const EffectTerm& effect : enumerate_effects(design)) {
    const std::vector<double> aligned = art_align(data, design, effect);
    const std::vector<double> ranks = midranks(aligned);
    std::vector<Observation> ranked = data;
    for (size_t i = 0; i < ranked.size(); ++i) ranked[i].value = ranks[i];
    const AnovaTable table = mixed_anova(ranked, design);
    const std::string label = effect.label(design);
    const auto it = std::find_if(table.rows.begin(), table.rows.end(),
                                 [&label](const AnovaRow& r) { return r.name == label; });
    if (it == table.rows.end()) throw RuntimeError("art: no row for effect " + label);
    out.rows.push_back(*it);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Pairwise comparisons
// ---------------------------------------------------------------------------

namespace {

PairwiseResult finish_comparison(PairwiseResult r, double t, int df, int family_size) {
  r.t = t;
  r.df = df;
  r.family_size = family_size;
  r.p_raw = t_two_tailed_p(t, df);
  r.p_adjusted = std::min(1.0, r.p_raw * family_size);
  r.r = std::sqrt(t * t / (t * t + df));
  return r;
}

double mean_of(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s / v.size();
}

double sample_variance(const std::vector<double>& v, double mean) {
  double ss = 0.0;
  for (double x : v) ss += (x - mean) * (x - mean);
  return ss / (v.size() - 1);
}

}  // namespace

PairwiseResult paired_comparison(const std::string& label_a, const std::string& label_b,
                                 const std::vector<double>& a,
                                 const std::vector<double>& b, int family_size) {
  if (a.size() != b.size()) throw ValidationError("pairwise: sample size mismatch");
  if (a.size() < 2) throw ValidationError("pairwise: need at least 2 pairs");
  if (family_size < 1) throw ValidationError("pairwise: family size must be >= 1");

  const size_t n = a.size();
  std::vector<double> diff(n);
  for (size_t i = 0; i < n; ++i) diff[i] = a[i] - b[i];
  const double md = mean_of(diff);
  const double var = sample_variance(diff, md);

  PairwiseResult r;
  r.label_a = label_a;
  r.label_b = label_b;
  r.mean_diff = md;
  if (var == 0.0) {
    r.df = static_cast<int>(n) - 1;
    r.family_size = family_size;
    r.zero_variance = true;
    return r;
  }
  const double t = md / std::sqrt(var / n);
  return finish_comparison(r, t, static_cast<int>(n) - 1, family_size);
}

PairwiseResult two_sample_comparison(const std::string& label_a, const std::string& label_b,
                                     const std::vector<double>& a,
                                     const std::vector<double>& b, int family_size) {
  if (a.size() < 2 || b.size() < 2)
    throw ValidationError("pairwise: need at least 2 observations per group");
  if (family_size < 1) throw ValidationError("pairwise: family size must be >= 1");

  const double ma = mean_of(a);
  const double mb = mean_of(b);
  const int df = static_cast<int>(a.size() + b.size()) - 2;
  const double pooled =
      ((a.size() - 1) * sample_variance(a, ma) + (b.size() - 1) * sample_variance(b, mb)) / df;

  PairwiseResult r;
  r.label_a = label_a;
  r.label_b = label_b;
  r.mean_diff = ma - mb;
  if (pooled == 0.0) {
    r.df = df;
    r.family_size = family_size;
    r.zero_variance = true;
    return r;
  }
  const double t = (ma - mb) / std::sqrt(pooled * (1.0 / a.size() + 1.0 / b.size()));
  return finish_comparison(r, t, df, family_size);
}

}  // namespace legibot
