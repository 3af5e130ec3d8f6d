#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <set>

#include <json.hpp>

#include "legibot/errors.hpp"
#include "legibot/stats.hpp"

namespace legibot {

using nlohmann::json;

namespace {

int scenario_index(MovementScenario s) { return s == MovementScenario::Turn ? 0 : 1; }

std::string condition_label(MovementScenario scenario, CueType type, CueMode mode) {
  std::string label = movement_scenario_name(scenario) + " " + cue_type_name(type);
  if (mode != CueMode::None) label += "/" + cue_mode_name(mode);
  return label;
}

/// scores arranged as (scenario, type, mode) -> participant -> score.
using ScoreTable =
    std::map<std::tuple<MovementScenario, CueType, CueMode>, std::map<std::string, double>>;

ScoreTable tabulate_scores(const std::vector<SasScore>& scores) {
  ScoreTable table;
  for (const auto& s : scores) {
    table[{s.scenario, s.cue_type, s.cue_mode}][s.participant_id] = s.score;
  }
  return table;
}

/// Participants of one scenario in sorted order (from any of its cells).
std::vector<std::string> scenario_participants(const ScoreTable& table,
                                               MovementScenario scenario) {
  std::set<std::string> pids;
  for (const auto& [key, cell] : table) {
    if (std::get<0>(key) != scenario) continue;
    for (const auto& [pid, score] : cell) pids.insert(pid);
  }
  return {pids.begin(), pids.end()};
}

double cell_score(const ScoreTable& table, MovementScenario scenario, CueType type,
                  CueMode mode, const std::string& pid) {
  const auto cell = table.find({scenario, type, mode});
  if (cell == table.end())
    throw ValidationError("analysis: no scores for condition " +
                          condition_label(scenario, type, mode));
  const auto it = cell->second.find(pid);
  if (it == cell->second.end())
    throw ValidationError("analysis: participant " + pid + " is missing condition " +
                          condition_label(scenario, type, mode));
  return it->second;
}

/// Mean score across a cue type's modes (or the control's single score).
double type_level_score(const ScoreTable& table, MovementScenario scenario, CueType type,
                        const std::string& pid) {
  if (type == CueType::None) return cell_score(table, scenario, type, CueMode::None, pid);
  double sum = 0.0;
  int count = 0;
  for (CueMode mode : {CueMode::Path, CueMode::Goal, CueMode::PathGoal}) {
    sum += cell_score(table, scenario, type, mode, pid);
    ++count;
  }
  return sum / count;
}

constexpr CueMode kCueModes[] = {CueMode::Path, CueMode::Goal, CueMode::PathGoal};
constexpr MovementScenario kScenarios[] = {MovementScenario::Turn, MovementScenario::Straight};

}  // namespace

AnalysisReport analyze_responses(const std::vector<ResponseRecord>& records) {
  AnalysisReport report;

  std::set<std::string> all_pids;
  for (const auto& r : records) all_pids.insert(r.participant_id);
  report.participants_total = static_cast<int>(all_pids.size());

  auto [kept, excluded] = exclude_failures(records);
  report.participants_excluded = excluded;
  report.participants_retained = report.participants_total - excluded;
  if (kept.empty()) throw ValidationError("analysis: no records survive exclusion");

  // Scale reliability per condition cell: participants x the six scale items.
  std::map<std::tuple<MovementScenario, CueType, CueMode>,
           std::map<std::string, std::map<int, double>>>
      item_table;
  for (const auto& r : kept) {
    item_table[{r.scenario, r.cue_type, r.cue_mode}][r.participant_id][r.statement] = r.rating;
  }
  report.min_alpha = 1.0;
  for (MovementScenario scenario : kScenarios) {
    for (const auto& [type, mode] : all_conditions()) {
      const auto cell = item_table.find({scenario, type, mode});
      if (cell == item_table.end()) continue;
      std::vector<std::vector<double>> rows;
      for (const auto& [pid, ratings] : cell->second) {
        std::vector<double> row;
        for (int item : sas_statements()) {
          const auto it = ratings.find(item);
          if (it == ratings.end())
            throw ValidationError("analysis: participant " + pid + " is missing statement " +
                                  statement_name(item));
          row.push_back(it->second);
        }
        rows.push_back(std::move(row));
      }
      ReliabilityCell rc;
      rc.scenario = scenario;
      rc.cue_type = type;
      rc.cue_mode = mode;
      rc.n = static_cast<int>(rows.size());
      rc.alpha = cronbach_alpha(rows);
      report.min_alpha = std::min(report.min_alpha, rc.alpha);
      report.reliability.push_back(rc);
    }
  }

  const std::vector<SasScore> scores = sas_scores(kept);
  report.sas_means = sas_summary(scores);
  const ScoreTable table = tabulate_scores(scores);

  const FactorSpec scenario_factor{"scenario", {"turn", "straight"}};

  // Cue type including the control, against scenario. Each type enters as
  // the participant's mean across that type's conditions.
  {
    std::vector<Observation> data;
    const CueType types[] = {CueType::Arrows, CueType::Lights, CueType::None};
    for (MovementScenario scenario : kScenarios) {
      for (const auto& pid : scenario_participants(table, scenario)) {
        for (int ti = 0; ti < 3; ++ti) {
          data.push_back({pid, scenario_index(scenario), {ti},
                          type_level_score(table, scenario, types[ti], pid)});
        }
      }
    }
    const MixedDesign design{scenario_factor,
                             {FactorSpec{"cue_type", {"arrows", "lights", "none"}}}};
    report.anova_with_control = mixed_anova(data, design);
  }

  // Cue type x cue mode x scenario, control excluded.
  const MixedDesign factorial_design{
      scenario_factor,
      {FactorSpec{"cue_type", {"arrows", "lights"}},
       FactorSpec{"cue_mode", {"path", "goal", "path_goal"}}}};
  {
    std::vector<Observation> data;
    for (MovementScenario scenario : kScenarios) {
      for (const auto& pid : scenario_participants(table, scenario)) {
        for (int ti = 0; ti < 2; ++ti) {
          for (int mi = 0; mi < 3; ++mi) {
            data.push_back({pid, scenario_index(scenario), {ti, mi},
                            cell_score(table, scenario,
                                       ti == 0 ? CueType::Arrows : CueType::Lights,
                                       kCueModes[mi], pid)});
          }
        }
      }
    }
    report.anova_cue_only = mixed_anova(data, factorial_design);
  }

  // Aligned-rank tables on the two comprehension statements.
  for (int statement : {3, 4}) {
    std::map<std::tuple<std::string, int, int>, double> ratings;
    for (const auto& r : kept) {
      if (r.statement != statement || r.cue_type == CueType::None) continue;
      const int ti = r.cue_type == CueType::Arrows ? 0 : 1;
      int mi = 0;
      while (kCueModes[mi] != r.cue_mode) ++mi;
      ratings[{r.participant_id, ti, mi}] = r.rating;
    }
    std::vector<Observation> data;
    std::map<std::string, MovementScenario> scenario_of;
    for (const auto& r : kept) scenario_of[r.participant_id] = r.scenario;
    for (const auto& [key, value] : ratings) {
      const auto& [pid, ti, mi] = key;
      data.push_back({pid, scenario_index(scenario_of.at(pid)), {ti, mi}, value});
    }
    (statement == 3 ? report.art_path_statement : report.art_goal_statement) =
        art_anova(data, factorial_design);
  }

  // Planned pairwise families, each Bonferroni-corrected by its own size.
  auto paired_cells = [&table](MovementScenario scenario, CueType type_a, CueMode mode_a,
                               CueType type_b, CueMode mode_b, int family) {
    std::vector<double> a;
    std::vector<double> b;
    for (const auto& pid : scenario_participants(table, scenario)) {
      a.push_back(cell_score(table, scenario, type_a, mode_a, pid));
      b.push_back(cell_score(table, scenario, type_b, mode_b, pid));
    }
    return paired_comparison(condition_label(scenario, type_a, mode_a),
                             condition_label(scenario, type_b, mode_b), a, b, family);
  };

  for (MovementScenario scenario : kScenarios) {
    for (CueMode mode : kCueModes) {
      report.pairwise_type_by_mode.push_back(
          paired_cells(scenario, CueType::Arrows, mode, CueType::Lights, mode, 6));
    }
  }
  for (MovementScenario scenario : kScenarios) {
    for (CueType type : {CueType::Arrows, CueType::Lights}) {
      report.pairwise_modes.push_back(
          paired_cells(scenario, type, CueMode::Path, type, CueMode::Goal, 12));
      report.pairwise_modes.push_back(
          paired_cells(scenario, type, CueMode::Path, type, CueMode::PathGoal, 12));
      report.pairwise_modes.push_back(
          paired_cells(scenario, type, CueMode::Goal, type, CueMode::PathGoal, 12));
    }
  }
  for (MovementScenario scenario : kScenarios) {
    const CueType types[] = {CueType::Arrows, CueType::Lights, CueType::None};
    for (int i = 0; i < 3; ++i) {
      for (int j = i + 1; j < 3; ++j) {
        std::vector<double> a;
        std::vector<double> b;
        for (const auto& pid : scenario_participants(table, scenario)) {
          a.push_back(type_level_score(table, scenario, types[i], pid));
          b.push_back(type_level_score(table, scenario, types[j], pid));
        }
        report.pairwise_type_overall.push_back(paired_comparison(
            movement_scenario_name(scenario) + " " + cue_type_name(types[i]),
            movement_scenario_name(scenario) + " " + cue_type_name(types[j]), a, b, 6));
      }
    }
  }

  report.comprehension = comprehension_report(kept);
  return report;
}

// ---------------------------------------------------------------------------
// JSON rendering
// ---------------------------------------------------------------------------

namespace {

json finite_or_tag(double v) {
  if (std::isfinite(v)) return v;
  return v > 0 ? "inf" : "-inf";
}

json condition_json(MovementScenario scenario, CueType type, CueMode mode) {
  return {{"scenario", movement_scenario_name(scenario)},
          {"cue_type", cue_type_name(type)},
          {"cue_mode", cue_mode_name(mode)}};
}

json anova_json(const AnovaTable& table) {
  json rows = json::array();
  for (const auto& r : table.rows) {
    rows.push_back({{"name", r.name},
                    {"ss", r.ss},
                    {"df", r.df},
                    {"ms", r.ms},
                    {"F", finite_or_tag(r.F)},
                    {"p", r.p},
                    {"partial_eta_sq", r.partial_eta_sq},
                    {"error_name", r.error_name},
                    {"error_ss", r.error_ss},
                    {"error_df", r.error_df},
                    {"error_ms", r.error_ms}});
  }
  return {{"rows", rows}, {"total_ss", table.total_ss}, {"total_df", table.total_df}};
}

json pairwise_json(const std::vector<PairwiseResult>& results) {
  json arr = json::array();
  for (const auto& r : results) {
    arr.push_back({{"a", r.label_a},
                   {"b", r.label_b},
                   {"mean_diff", r.mean_diff},
                   {"t", r.t},
                   {"df", r.df},
                   {"p_raw", r.p_raw},
                   {"p_adjusted", r.p_adjusted},
                   {"r", r.r},
                   {"family_size", r.family_size},
                   {"zero_variance", r.zero_variance}});
  }
  return arr;
}

json quartiles_json(const Quartiles& q) {
  return {{"q1", q.q1}, {"median", q.median}, {"q3", q.q3}};
}

}  // namespace

std::string report_to_json(const AnalysisReport& report) {
  json j;
  j["schema"] = report.schema;
  j["exclusion"] = {{"participants_total", report.participants_total},
                    {"participants_excluded", report.participants_excluded},
                    {"participants_retained", report.participants_retained}};

  json reliability = json::array();
  for (const auto& c : report.reliability) {
    json cell = condition_json(c.scenario, c.cue_type, c.cue_mode);
    cell["n"] = c.n;
    cell["alpha"] = c.alpha;
    reliability.push_back(cell);
  }
  j["reliability"] = {{"cells", reliability}, {"min_alpha", report.min_alpha}};

  json sas = json::array();
  for (const auto& s : report.sas_means) {
    json cell = condition_json(s.scenario, s.cue_type, s.cue_mode);
    cell["n"] = s.n;
    cell["mean"] = s.mean;
    cell["sd"] = s.sd;
    cell["ci_half_width"] = s.ci_half_width;
    sas.push_back(cell);
  }
  j["sas_summary"] = sas;

  j["anova_sas_with_control"] = anova_json(report.anova_with_control);
  j["anova_sas_cue_only"] = anova_json(report.anova_cue_only);
  j["art_comprehension"] = {{"path_statement", anova_json(report.art_path_statement)},
                            {"goal_statement", anova_json(report.art_goal_statement)}};

  j["pairwise"] = {{"alpha", report.pairwise_alpha},
                   {"type_by_mode", pairwise_json(report.pairwise_type_by_mode)},
                   {"modes", pairwise_json(report.pairwise_modes)},
                   {"type_overall", pairwise_json(report.pairwise_type_overall)}};

  json comprehension = json::array();
  for (const auto& c : report.comprehension) {
    json cell = condition_json(c.scenario, c.cue_type, c.cue_mode);
    cell["n"] = c.n;
    cell["mean_path_statement"] = c.mean_path_statement;
    cell["mean_goal_statement"] = c.mean_goal_statement;
    cell["diff"] = c.diff;
    cell["path_quartiles"] = quartiles_json(c.path_quartiles);
    cell["goal_quartiles"] = quartiles_json(c.goal_quartiles);
    cell["path_verdict"] = verdict_name(c.path_verdict);
    cell["goal_verdict"] = verdict_name(c.goal_verdict);
    comprehension.push_back(cell);
  }
  j["comprehension"] = comprehension;

  return j.dump(2) + "\n";
}

void write_report(const AnalysisReport& report, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw RuntimeError("cannot write report file: " + path);
  out << report_to_json(report);
}

}  // namespace legibot
