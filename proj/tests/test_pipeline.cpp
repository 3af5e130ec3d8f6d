// End-to-end statistics pipeline tests: the default synthetic study through
// analyze_responses, the planted effect structure, report serialization, and
// CSV round trips.

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "legibot/errors.hpp"
#include "legibot/stats.hpp"

using namespace legibot;
using nlohmann::json;

namespace {

const AnovaRow& row_named(const AnovaTable& table, const std::string& name) {
  for (const auto& r : table.rows) {
    if (r.name == name) return r;
  }
  FAIL("no row named " << name);
  static const AnovaRow none;
  return none;
}

const ConditionSummary& summary_cell(const AnalysisReport& report, MovementScenario scenario,
                                     CueType type, CueMode mode) {
  for (const auto& s : report.sas_means) {
    if (s.scenario == scenario && s.cue_type == type && s.cue_mode == mode) return s;
  }
  FAIL("no summary cell");
  static const ConditionSummary none;
  return none;
}

const ComprehensionCell& comp_cell(const AnalysisReport& report, MovementScenario scenario,
                                   CueType type, CueMode mode) {
  for (const auto& c : report.comprehension) {
    if (c.scenario == scenario && c.cue_type == type && c.cue_mode == mode) return c;
  }
  FAIL("no comprehension cell");
  static const ComprehensionCell none;
  return none;
}

// Mean score of a cue type across its three modes (the control has one cell).
double type_avg(const AnalysisReport& report, MovementScenario scenario, CueType type) {
  if (type == CueType::None)
    return summary_cell(report, scenario, type, CueMode::None).mean;
  double sum = 0.0;
  for (CueMode mode : {CueMode::Path, CueMode::Goal, CueMode::PathGoal})
    sum += summary_cell(report, scenario, type, mode).mean;
  return sum / 3.0;
}

std::set<std::string> key_set(const json& j) {
  std::set<std::string> keys;
  for (const auto& [key, value] : j.items()) keys.insert(key);
  return keys;
}

// Erase every record matching the predicate.
template <typename Pred>
std::vector<ResponseRecord> erase_if_records(std::vector<ResponseRecord> records, Pred pred) {
  records.erase(std::remove_if(records.begin(), records.end(), pred), records.end());
  return records;
}

}  // namespace

TEST_CASE("default synthetic study reproduces the planted findings") {
  const SynthSpec spec = default_synth_spec();
  CHECK(spec.n_participants == 289);
  CHECK(spec.n_attention_failures == 60);
  const std::vector<ResponseRecord> records = synth_responses(spec);
  const AnalysisReport report = analyze_responses(records);

  CHECK(report.participants_total == 289);
  CHECK(report.participants_excluded == 60);
  CHECK(report.participants_retained == 229);

  // Reliability: one cell per scenario x condition, computed over everyone
  // retained in that scenario, and comfortably above the usual 0.7 bar.
  REQUIRE(report.reliability.size() == 14);
  double observed_min = 1.0;
  int n_turn = 0;
  int n_straight = 0;
  for (const auto& cell : report.reliability) {
    observed_min = std::min(observed_min, cell.alpha);
    int& n = cell.scenario == MovementScenario::Turn ? n_turn : n_straight;
    if (n == 0) n = cell.n;
    CHECK(cell.n == n);
  }
  CHECK(report.min_alpha == observed_min);
  CHECK(report.min_alpha >= 0.7);
  CHECK(report.min_alpha <= 1.0);
  CHECK(n_turn + n_straight == 229);

  // Planted score structure: arrows above lights above the control in both
  // scenarios, with the turn arrows/path cell on top overall.
  REQUIRE(report.sas_means.size() == 14);
  for (MovementScenario scenario : {MovementScenario::Turn, MovementScenario::Straight}) {
    const double arrows = type_avg(report, scenario, CueType::Arrows);
    const double lights = type_avg(report, scenario, CueType::Lights);
    const double none = type_avg(report, scenario, CueType::None);
    CHECK(arrows - lights > 0.15);
    CHECK(lights - none > 0.2);
    CHECK(arrows - none > 0.4);
  }
  const double top = summary_cell(report, MovementScenario::Turn, CueType::Arrows,
                                  CueMode::Path).mean;
  for (const auto& s : report.sas_means) {
    if (s.cue_type == CueType::Arrows && s.cue_mode == CueMode::Path &&
        s.scenario == MovementScenario::Turn)
      continue;
    CHECK(top > s.mean);
  }
  for (const auto& s : report.sas_means) {
    CHECK(s.mean > 1.0);
    CHECK(s.mean < 5.0);
    CHECK(s.sd > 0.0);
    CHECK(s.ci_half_width > 0.0);
    CHECK(s.n == (s.scenario == MovementScenario::Turn ? n_turn : n_straight));
  }

  // Omnibus tables: the cue-type effect dominates both ANOVAs, and the
  // planted cell pattern produces a real three-way interaction.
  REQUIRE(report.anova_with_control.rows.size() == 3);
  CHECK(report.anova_with_control.rows[0].name == "scenario");
  CHECK(report.anova_with_control.rows[1].name == "cue_type");
  CHECK(report.anova_with_control.rows[2].name == "cue_type x scenario");
  CHECK(row_named(report.anova_with_control, "cue_type").p < 1e-6);

  REQUIRE(report.anova_cue_only.rows.size() == 7);
  const std::vector<std::string> factorial_rows = {
      "scenario",          "cue_type",           "cue_type x scenario",
      "cue_mode",          "cue_mode x scenario", "cue_type x cue_mode",
      "cue_type x cue_mode x scenario"};
  for (size_t i = 0; i < factorial_rows.size(); ++i)
    CHECK(report.anova_cue_only.rows[i].name == factorial_rows[i]);
  CHECK(row_named(report.anova_cue_only, "cue_type").p < 1e-6);
  CHECK(row_named(report.anova_cue_only, "cue_type x cue_mode x scenario").p < 0.001);

  // Aligned-rank tables on the comprehension statements: the planted
  // per-mode shifts make cue_mode the dominant effect on both.
  REQUIRE(report.art_path_statement.rows.size() == 7);
  REQUIRE(report.art_goal_statement.rows.size() == 7);
  for (size_t i = 0; i < factorial_rows.size(); ++i) {
    CHECK(report.art_path_statement.rows[i].name == factorial_rows[i]);
    CHECK(report.art_goal_statement.rows[i].name == factorial_rows[i]);
  }
  CHECK(row_named(report.art_path_statement, "cue_mode").p < 1e-6);
  CHECK(row_named(report.art_goal_statement, "cue_mode").p < 1e-6);

  // Planned pairwise families with their Bonferroni sizes.
  REQUIRE(report.pairwise_type_by_mode.size() == 6);
  REQUIRE(report.pairwise_modes.size() == 12);
  REQUIRE(report.pairwise_type_overall.size() == 6);
  for (const auto& r : report.pairwise_type_by_mode) CHECK(r.family_size == 6);
  for (const auto& r : report.pairwise_modes) CHECK(r.family_size == 12);
  for (const auto& r : report.pairwise_type_overall) CHECK(r.family_size == 6);

  CHECK(report.pairwise_type_by_mode[0].label_a == "turn arrows/path");
  CHECK(report.pairwise_type_by_mode[0].label_b == "turn lights/path");
  CHECK(report.pairwise_type_by_mode[3].label_a == "straight arrows/path");
  CHECK(report.pairwise_modes[0].label_a == "turn arrows/path");
  CHECK(report.pairwise_modes[0].label_b == "turn arrows/goal");
  CHECK(report.pairwise_modes[1].label_b == "turn arrows/path_goal");
  CHECK(report.pairwise_modes[2].label_a == "turn arrows/goal");
  CHECK(report.pairwise_modes[3].label_a == "turn lights/path");
  CHECK(report.pairwise_modes[6].label_a == "straight arrows/path");
  CHECK(report.pairwise_type_overall[0].label_a == "turn arrows");
  CHECK(report.pairwise_type_overall[0].label_b == "turn lights");
  CHECK(report.pairwise_type_overall[1].label_b == "turn none");
  CHECK(report.pairwise_type_overall[2].label_a == "turn lights");
  CHECK(report.pairwise_type_overall[3].label_a == "straight arrows");

  // Paired comparisons within a scenario use that scenario's participants.
  CHECK(report.pairwise_type_by_mode[0].df == n_turn - 1);
  CHECK(report.pairwise_type_by_mode[3].df == n_straight - 1);

  // The big planted contrasts come out strong and in the right direction.
  CHECK(report.pairwise_type_by_mode[0].mean_diff > 1.0);  // arrows/path vs lights/path
  CHECK(report.pairwise_type_by_mode[0].p_adjusted < 1e-6);
  CHECK(report.pairwise_type_overall[1].mean_diff > 0.5);  // arrows vs control
  CHECK(report.pairwise_type_overall[1].p_adjusted < 1e-6);

  // Comprehension verdicts follow the planted statement shifts: path modes
  // show path comprehension, goal modes goal comprehension, the combined
  // mode reports both, and the control reports neither.
  REQUIRE(report.comprehension.size() == 14);
  CHECK(report.comprehension[0].scenario == MovementScenario::Turn);
  CHECK(report.comprehension[0].cue_type == CueType::Arrows);
  CHECK(report.comprehension[0].cue_mode == CueMode::Path);
  CHECK(report.comprehension[7].scenario == MovementScenario::Straight);
  for (MovementScenario scenario : {MovementScenario::Turn, MovementScenario::Straight}) {
    for (CueType type : {CueType::Arrows, CueType::Lights}) {
      const ComprehensionCell& path = comp_cell(report, scenario, type, CueMode::Path);
      CHECK(path.path_verdict == Verdict::Comprehension);
      CHECK(path.goal_verdict == Verdict::NotApplicable);
      const ComprehensionCell& goal = comp_cell(report, scenario, type, CueMode::Goal);
      CHECK(goal.goal_verdict == Verdict::Comprehension);
      CHECK(goal.path_verdict == Verdict::NotApplicable);
      const ComprehensionCell& both = comp_cell(report, scenario, type, CueMode::PathGoal);
      CHECK(both.path_verdict != Verdict::NotApplicable);
      CHECK(both.goal_verdict != Verdict::NotApplicable);
    }
    const ComprehensionCell& control = comp_cell(report, scenario, CueType::None, CueMode::None);
    CHECK(control.path_verdict == Verdict::NotApplicable);
    CHECK(control.goal_verdict == Verdict::NotApplicable);
  }

  // The whole pipeline is deterministic end to end.
  const AnalysisReport again = analyze_responses(synth_responses(default_synth_spec()));
  CHECK(report_to_json(report) == report_to_json(again));
}

TEST_CASE("analysis validates its inputs") {
  SynthSpec spec = default_synth_spec(6, 0, 3);

  // Everyone failing the attention check leaves nothing to analyze.
  spec.n_attention_failures = 6;
  CHECK_THROWS_WITH_AS(analyze_responses(synth_responses(spec)),
                       "analysis: no records survive exclusion", ValidationError);

  // A missing scale item is caught while building the reliability matrix.
  spec.n_attention_failures = 0;
  const std::vector<ResponseRecord> records = synth_responses(spec);
  const auto missing_item = erase_if_records(records, [](const ResponseRecord& r) {
    return r.participant_id == "P001" && r.cue_type == CueType::Arrows &&
           r.cue_mode == CueMode::Path && r.statement == 5;
  });
  CHECK_THROWS_WITH_AS(analyze_responses(missing_item),
                       "analysis: participant P001 is missing statement 1.5", ValidationError);

  // A participant lacking a whole condition fails the summary stage, which
  // needs the complete within-subject set.
  const auto missing_condition = erase_if_records(records, [](const ResponseRecord& r) {
    return r.participant_id == "P001" && r.cue_type == CueType::None;
  });
  CHECK_THROWS_WITH_AS(
      analyze_responses(missing_condition),
      "summary: participant P001 is missing conditions; within-subject intervals need the "
      "complete set",
      ValidationError);

  // Exclusion numbers on a small clean run.
  spec.n_attention_failures = 1;
  const AnalysisReport small = analyze_responses(synth_responses(spec));
  CHECK(small.participants_total == 6);
  CHECK(small.participants_excluded == 1);
  CHECK(small.participants_retained == 5);
}

TEST_CASE("report json is stable and complete") {
  const AnalysisReport report = analyze_responses(synth_responses(default_synth_spec(12, 2, 9)));
  const std::string text = report_to_json(report);
  CHECK(text == report_to_json(report));
  CHECK(text.substr(0, 2) == "{\n");
  CHECK(text.back() == '\n');

  const json j = json::parse(text);
  CHECK(key_set(j) == std::set<std::string>{
                          "schema", "exclusion", "reliability", "sas_summary",
                          "anova_sas_with_control", "anova_sas_cue_only", "art_comprehension",
                          "pairwise", "comprehension"});
  CHECK(j["schema"] == "legibot-report/1");

  CHECK(j["exclusion"]["participants_total"] == 12);
  CHECK(j["exclusion"]["participants_excluded"] == 2);
  CHECK(j["exclusion"]["participants_retained"] == 10);

  REQUIRE(j["reliability"]["cells"].size() == 14);
  CHECK(key_set(j["reliability"]["cells"][0]) ==
        std::set<std::string>{"scenario", "cue_type", "cue_mode", "n", "alpha"});
  CHECK(j["reliability"]["min_alpha"] == report.min_alpha);

  REQUIRE(j["sas_summary"].size() == 14);
  CHECK(key_set(j["sas_summary"][0]) ==
        std::set<std::string>{"scenario", "cue_type", "cue_mode", "n", "mean", "sd",
                              "ci_half_width"});

  const std::set<std::string> row_keys = {"name", "ss",       "df",       "ms",
                                          "F",    "p",        "partial_eta_sq",
                                          "error_name", "error_ss", "error_df", "error_ms"};
  REQUIRE(j["anova_sas_with_control"]["rows"].size() == 3);
  REQUIRE(j["anova_sas_cue_only"]["rows"].size() == 7);
  CHECK(key_set(j["anova_sas_with_control"]["rows"][0]) == row_keys);
  CHECK(j["anova_sas_with_control"]["rows"][0]["name"] == "scenario");
  CHECK(key_set(j["anova_sas_with_control"]) ==
        std::set<std::string>{"rows", "total_ss", "total_df"});

  CHECK(key_set(j["art_comprehension"]) ==
        std::set<std::string>{"path_statement", "goal_statement"});
  REQUIRE(j["art_comprehension"]["path_statement"]["rows"].size() == 7);

  CHECK(j["pairwise"]["alpha"] == 0.025);
  REQUIRE(j["pairwise"]["type_by_mode"].size() == 6);
  REQUIRE(j["pairwise"]["modes"].size() == 12);
  REQUIRE(j["pairwise"]["type_overall"].size() == 6);
  CHECK(key_set(j["pairwise"]["type_by_mode"][0]) ==
        std::set<std::string>{"a", "b", "mean_diff", "t", "df", "p_raw", "p_adjusted", "r",
                              "family_size", "zero_variance"});
  CHECK(j["pairwise"]["type_by_mode"][0]["a"] == "turn arrows/path");

  REQUIRE(j["comprehension"].size() == 14);
  CHECK(key_set(j["comprehension"][0]) ==
        std::set<std::string>{"scenario", "cue_type", "cue_mode", "n", "mean_path_statement",
                              "mean_goal_statement", "diff", "path_quartiles", "goal_quartiles",
                              "path_verdict", "goal_verdict"});
  CHECK(key_set(j["comprehension"][0]["path_quartiles"]) ==
        std::set<std::string>{"q1", "median", "q3"});
  const std::set<std::string> verdicts = {"comprehension", "lack", "indeterminate", "n/a"};
  for (const auto& cell : j["comprehension"]) {
    CHECK(verdicts.count(cell["path_verdict"].get<std::string>()) == 1);
    CHECK(verdicts.count(cell["goal_verdict"].get<std::string>()) == 1);
  }

  // Non-finite F statistics are tagged as strings so the JSON stays valid.
  AnalysisReport degenerate;
  AnovaRow inf_row;
  inf_row.name = "x";
  inf_row.F = std::numeric_limits<double>::infinity();
  degenerate.anova_with_control.rows.push_back(inf_row);
  inf_row.F = -std::numeric_limits<double>::infinity();
  degenerate.anova_with_control.rows.push_back(inf_row);
  const json tagged = json::parse(report_to_json(degenerate));
  CHECK(tagged["anova_sas_with_control"]["rows"][0]["F"] == "inf");
  CHECK(tagged["anova_sas_with_control"]["rows"][1]["F"] == "-inf");
}

TEST_CASE("csv and report files round-trip") {
  const std::vector<ResponseRecord> records = synth_responses(default_synth_spec(8, 0, 5));

  const std::string text = responses_to_csv(records);
  CHECK(responses_from_csv(text) == records);

  const std::filesystem::path dir =
      std::filesystem::temp_directory_path() / "legibot_pipeline_io";
  std::filesystem::create_directories(dir);

  const std::string csv_path = (dir / "responses.csv").string();
  write_responses(records, csv_path);
  CHECK(ingest(csv_path) == records);

  const AnalysisReport report = analyze_responses(records);
  const std::string report_path = (dir / "report.json").string();
  write_report(report, report_path);
  std::ifstream in(report_path, std::ios::binary);
  REQUIRE(in.good());
  std::string on_disk((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  CHECK(on_disk == report_to_json(report));

  CHECK_THROWS_WITH_AS(write_report(report, (dir / "no_such" / "report.json").string()),
                       ("cannot write report file: " + (dir / "no_such" / "report.json").string())
                           .c_str(),
                       RuntimeError);

  std::filesystem::remove_all(dir);
}
