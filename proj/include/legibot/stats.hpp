#ifndef LEGIBOT_STATS_HPP
#define LEGIBOT_STATS_HPP

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "legibot/cues.hpp"
#include "legibot/scenario.hpp"

namespace legibot {

// ---------------------------------------------------------------------------
// Survey data model
// ---------------------------------------------------------------------------

/// One Likert answer. Statements are numbered 1..8 ("1.1".."1.8"); 1.3 and
/// 1.4 probe path/goal comprehension, the remaining six form the social
/// acceptability scale.
struct ResponseRecord {
  std::string participant_id;
  MovementScenario scenario = MovementScenario::Turn;  // between-subjects
  CueType cue_type = CueType::None;  // None = control condition
  CueMode cue_mode = CueMode::None;  // None iff cue_type is None
  int statement = 1;                 // 1..8
  int rating = 3;                    // 1..5
  bool attention_passed = true;

  bool operator==(const ResponseRecord&) const = default;
};

std::string statement_name(int statement);            // 3 -> "1.3"
std::optional<int> parse_statement(const std::string& s);

/// The six statements averaged into the social acceptability score.
const std::array<int, 6>& sas_statements();

/// The seven per-participant conditions: 2 cue types x 3 modes + control.
const std::vector<std::pair<CueType, CueMode>>& all_conditions();

/// Parse the responses CSV (columns: participant_id, scenario, cue_type,
/// cue_mode, statement, rating, attention_passed). Rejects bad ratings,
/// inconsistent control rows, duplicate (participant, condition, statement)
/// rows, and participants appearing under two scenarios — all with row
/// numbers.
std::vector<ResponseRecord> responses_from_csv(const std::string& text,
                                               const std::string& origin = "<string>");
std::vector<ResponseRecord> ingest(const std::string& path);
std::string responses_to_csv(const std::vector<ResponseRecord>& records);
void write_responses(const std::vector<ResponseRecord>& records, const std::string& path);

/// Drop every record of any participant with at least one failed attention
/// check. Returns the kept records and the number of excluded participants.
std::pair<std::vector<ResponseRecord>, int> exclude_failures(
    const std::vector<ResponseRecord>& records);

/// One participant x condition social acceptability score.
struct SasScore {
  std::string participant_id;
  MovementScenario scenario = MovementScenario::Turn;
  CueType cue_type = CueType::None;
  CueMode cue_mode = CueMode::None;
  double score = 0.0;  // mean of the six scale statements, in [1, 5]

  bool operator==(const SasScore&) const = default;
};

/// Mean of the six scale statements per participant x condition. Throws
/// ValidationError naming any participant x condition missing a statement.
std::vector<SasScore> sas_scores(const std::vector<ResponseRecord>& records);

/// Internal-consistency reliability of a participants x items matrix:
/// (k/(k-1))·(1 - sum of item variances / variance of row totals), sample
/// variances. Throws ValidationError on k < 2, fewer than 2 rows, ragged
/// rows, or zero total variance.
double cronbach_alpha(const std::vector<std::vector<double>>& rows);

// ---------------------------------------------------------------------------
// Mixed (split-plot) ANOVA over a long-format observation table
// ---------------------------------------------------------------------------

/// One measurement: a subject, its between-group level, one level per
/// within factor, and the value.
struct Observation {
  std::string subject;
  int between = 0;          // between-factor level index
  std::vector<int> within;  // one level index per within factor
  double value = 0.0;
};

struct FactorSpec {
  std::string name;
  std::vector<std::string> levels;
};

/// One between-subjects factor plus one or two within-subjects factors.
struct MixedDesign {
  FactorSpec between;
  std::vector<FactorSpec> within;
};

/// An effect term: optionally the between factor crossed with a subset of
/// the within factors.
struct EffectTerm {
  bool includes_between = false;
  std::vector<int> within_indices;  // sorted indices into design.within

  std::string label(const MixedDesign& design) const;
  bool operator==(const EffectTerm&) const = default;
};

/// All testable effects in report order: between first, then within main
/// effects and interactions, each followed by its crossing with between.
std::vector<EffectTerm> enumerate_effects(const MixedDesign& design);

struct AnovaRow {
  std::string name;
  double ss = 0.0;
  int df = 0;
  double ms = 0.0;
  double F = 0.0;
  double p = 1.0;
  double partial_eta_sq = 0.0;
  std::string error_name;  // stratum the effect is tested against
  double error_ss = 0.0;
  int error_df = 0;
  double error_ms = 0.0;
};

struct AnovaTable {
  std::vector<AnovaRow> rows;
  double total_ss = 0.0;
  int total_df = 0;
};

/// Split-plot decomposition: the between effect is tested against
/// subjects-within-groups; each within effect (and its crossing with
/// between) against the matching effect x subjects stratum. Requires a
/// complete design (every subject measured in every within cell exactly
/// once) and at least two subjects per group; throws ValidationError
/// otherwise. Degenerate strata report F = 0, p = 1.
AnovaTable mixed_anova(const std::vector<Observation>& data, const MixedDesign& design);

// ---------------------------------------------------------------------------
// Distribution tails (hand-rolled; no numerics dependency)
// ---------------------------------------------------------------------------

/// Regularized incomplete beta I_x(a, b) via continued fraction.
double incomplete_beta(double a, double b, double x);

/// Upper tail of the F distribution. Throws ValidationError on df < 1 or
/// F < 0.
double f_upper_tail(double F, int df1, int df2);

/// Two-tailed p of the t distribution. Throws ValidationError on df < 1.
double t_two_tailed_p(double t, int df);

/// Quantile of the t distribution (bisection on the CDF), p in (0, 1).
double t_quantile(double p, int df);

// ---------------------------------------------------------------------------
// Aligned rank transform
// ---------------------------------------------------------------------------

/// Align the data for one target effect: subtract every other effect's
/// contribution (inclusion-exclusion over unweighted marginal means of the
/// full-factorial cells), keeping the target effect plus residual. Output
/// order matches the input order.
std::vector<double> art_align(const std::vector<Observation>& data,
                              const MixedDesign& design, const EffectTerm& effect);

/// Ranks with ties shared as midranks (1-based).
std::vector<double> midranks(const std::vector<double>& values);

/// Aligned-rank ANOVA: for each effect, align, midrank, run the full mixed
/// ANOVA on the ranks, and keep only that effect's row.
AnovaTable art_anova(const std::vector<Observation>& data, const MixedDesign& design);

// ---------------------------------------------------------------------------
// Pairwise comparisons
// ---------------------------------------------------------------------------

struct PairwiseResult {
  std::string label_a;
  std::string label_b;
  double mean_diff = 0.0;  // mean(a) - mean(b)
  double t = 0.0;
  int df = 0;
  double p_raw = 1.0;
  double p_adjusted = 1.0;  // min(1, p_raw * family_size)
  double r = 0.0;           // sqrt(t^2 / (t^2 + df))
  int family_size = 1;
  bool zero_variance = false;  // flagged instead of dividing by zero
};

/// Paired t test over equal-length samples. Throws ValidationError on size
/// mismatch or n < 2; zero-variance differences are flagged, not errors.
PairwiseResult paired_comparison(const std::string& label_a, const std::string& label_b,
                                 const std::vector<double>& a,
                                 const std::vector<double>& b, int family_size);

/// Two-sample pooled-variance t test for independent groups.
PairwiseResult two_sample_comparison(const std::string& label_a, const std::string& label_b,
                                     const std::vector<double>& a,
                                     const std::vector<double>& b, int family_size);

// ---------------------------------------------------------------------------
// Comprehension contrast (statements 1.3 vs 1.4)
// ---------------------------------------------------------------------------

enum class Verdict { Comprehension, Lack, Indeterminate, NotApplicable };

std::string verdict_name(Verdict v);

struct Quartiles {
  double q1 = 0.0;
  double median = 0.0;
  double q3 = 0.0;
};

/// Per scenario x cue type x cue mode cell: means and quartiles of the two
/// comprehension statements and the rule verdicts (Path/PathGoal expects
/// 1.3 > 1.4; Goal/PathGoal expects 1.4 > 1.3; ties are indeterminate).
struct ComprehensionCell {
  MovementScenario scenario = MovementScenario::Turn;
  CueType cue_type = CueType::None;
  CueMode cue_mode = CueMode::None;
  int n = 0;
  double mean_path_statement = 0.0;  // statement 1.3
  double mean_goal_statement = 0.0;  // statement 1.4
  double diff = 0.0;                 // 1.3 - 1.4
  Quartiles path_quartiles;
  Quartiles goal_quartiles;
  Verdict path_verdict = Verdict::NotApplicable;
  Verdict goal_verdict = Verdict::NotApplicable;
};

/// Throws ValidationError when a cell lacks either statement.
std::vector<ComprehensionCell> comprehension_report(
    const std::vector<ResponseRecord>& records);

// ---------------------------------------------------------------------------
// Synthetic responses
// ---------------------------------------------------------------------------

/// Condition cell key for synthetic latent means.
struct ConditionKey {
  MovementScenario scenario = MovementScenario::Turn;
  CueType cue_type = CueType::None;
  CueMode cue_mode = CueMode::None;

  auto operator<=>(const ConditionKey&) const = default;
};

struct SynthCell {
  double mean = 3.0;             // latent mean for scale statements
  double path_stmt_shift = 0.0;  // extra shift on statement 1.3
  double goal_stmt_shift = 0.0;  // extra shift on statement 1.4
};

struct SynthSpec {
  int n_participants = 229;
  int n_attention_failures = 0;  // planted on the first participants
  double subject_sd = 0.3;       // random intercept spread
  double noise_sd = 0.4;         // per-rating noise
  std::uint64_t seed = 0;
  std::array<double, 8> statement_offsets{};  // systematic offset per statement
  std::map<ConditionKey, SynthCell> cells;    // all 14 condition cells
};

/// Deterministic synthetic dataset: participants alternate scenarios, each
/// rates all 8 statements in all 7 conditions; rating = clamp(round(cell
/// mean + statement offset + subject intercept + noise), 1, 5).
std::vector<ResponseRecord> synth_responses(const SynthSpec& spec);

/// Preset whose planted cell means follow the published ordering (arrows
/// above lights, arrows/path highest, control lowest).
SynthSpec default_synth_spec(int n_participants = 289, int n_attention_failures = 60,
                             std::uint64_t seed = 7);

// ---------------------------------------------------------------------------
// Full analysis
// ---------------------------------------------------------------------------

/// Per-condition score summary with a within-subjects 95% CI half-width
/// (subject-centered normalization with a C/(C-1) correction over the C
/// conditions).
struct ConditionSummary {
  MovementScenario scenario = MovementScenario::Turn;
  CueType cue_type = CueType::None;
  CueMode cue_mode = CueMode::None;
  int n = 0;
  double mean = 0.0;
  double sd = 0.0;
  double ci_half_width = 0.0;
};

std::vector<ConditionSummary> sas_summary(const std::vector<SasScore>& scores);

struct ReliabilityCell {
  MovementScenario scenario = MovementScenario::Turn;
  CueType cue_type = CueType::None;
  CueMode cue_mode = CueMode::None;
  int n = 0;
  double alpha = 0.0;
};

struct AnalysisReport {
  std::string schema = "legibot-report/1";
  int participants_total = 0;
  int participants_excluded = 0;
  int participants_retained = 0;
  double pairwise_alpha = 0.025;  // Bonferroni-corrected threshold printed
  std::vector<ReliabilityCell> reliability;
  double min_alpha = 0.0;  // smallest per-cell scale reliability
  std::vector<ConditionSummary> sas_means;
  AnovaTable anova_with_control;  // 3 cue types (control folded in) x 2 scenarios
  AnovaTable anova_cue_only;      // 2 types x 3 modes x 2 scenarios
  AnovaTable art_path_statement;  // statement 1.3 ratings
  AnovaTable art_goal_statement;  // statement 1.4 ratings
  std::vector<PairwiseResult> pairwise_type_by_mode;   // arrows vs lights per scenario x mode
  std::vector<PairwiseResult> pairwise_modes;          // mode pairs per scenario x type
  std::vector<PairwiseResult> pairwise_type_overall;   // type-level pairs per scenario
  std::vector<ComprehensionCell> comprehension;
};

/// The whole pipeline after ingestion: exclusion, reliability, scores,
/// summaries, both mixed ANOVAs, both aligned-rank tables, the planned
/// pairwise families, and the comprehension contrast.
AnalysisReport analyze_responses(const std::vector<ResponseRecord>& records);

/// Deterministic machine-readable rendering (sorted keys, round-trip
/// floats).
std::string report_to_json(const AnalysisReport& report);
void write_report(const AnalysisReport& report, const std::string& path);

}  // namespace legibot

#endif  // LEGIBOT_STATS_HPP
