#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <random>
#include <set>
#include <sstream>

#include "legibot/errors.hpp"
#include "legibot/numfmt.hpp"
#include "legibot/stats.hpp"

namespace legibot {

std::string statement_name(int statement) {
  return "1." + std::to_string(statement);
}

std::optional<int> parse_statement(const std::string& s) {
  if (s.size() == 3 && s[0] == '1' && s[1] == '.' && s[2] >= '1' && s[2] <= '8')
    return s[2] - '0';
  return std::nullopt;
}

const std::array<int, 6>& sas_statements() {
  static const std::array<int, 6> kItems = {1, 2, 5, 6, 7, 8};
  return kItems;
}

const std::vector<std::pair<CueType, CueMode>>& all_conditions() {
  static const std::vector<std::pair<CueType, CueMode>> kConditions = {
      {CueType::Arrows, CueMode::Path},     {CueType::Arrows, CueMode::Goal},
      {CueType::Arrows, CueMode::PathGoal}, {CueType::Lights, CueMode::Path},
      {CueType::Lights, CueMode::Goal},     {CueType::Lights, CueMode::PathGoal},
      {CueType::None, CueMode::None},
  };
  return kConditions;
}

// ---------------------------------------------------------------------------
// CSV ingestion
// ---------------------------------------------------------------------------

namespace {

constexpr const char* kCsvHeader =
    "participant_id,scenario,cue_type,cue_mode,statement,rating,attention_passed";

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  for (char c : line) {
    if (c == ',') {
      fields.push_back(field);
      field.clear();
    } else if (c != '\r') {
      field.push_back(c);
    }
  }
  fields.push_back(field);
  return fields;
}

[[noreturn]] void row_error(const std::string& origin, int row, const std::string& msg) {
  throw ValidationError(origin + ": row " + std::to_string(row) + ": " + msg);
}

std::string condition_label(CueType type, CueMode mode) {
  return cue_type_name(type) + "/" + cue_mode_name(mode);
}

double mean_of(const std::vector<double>& v) {
  double sum = 0.0;
  for (double x : v) sum += x;
  return sum / v.size();
}

double sample_variance(const std::vector<double>& v) {
  const double m = mean_of(v);
  double ss = 0.0;
  for (double x : v) ss += (x - m) * (x - m);
  return ss / (v.size() - 1);
}

}  // namespace

std::vector<ResponseRecord> responses_from_csv(const std::string& text,
                                               const std::string& origin) {
  std::istringstream in(text);
  std::string line;
  int row = 0;
  std::vector<ResponseRecord> records;
  std::map<std::string, MovementScenario> scenario_of;
  std::set<std::tuple<std::string, CueType, CueMode, int>> seen;

  while (std::getline(in, line)) {
    ++row;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (row == 1) {
      if (line != kCsvHeader)
        row_error(origin, row, std::string("expected header '") + kCsvHeader + "'");
      continue;
    }
    const auto fields = split_csv_line(line);
    if (fields.size() != 7)
      row_error(origin, row, "expected 7 fields, got " + std::to_string(fields.size()));

    ResponseRecord rec;
    rec.participant_id = fields[0];
    if (rec.participant_id.empty()) row_error(origin, row, "empty participant_id");

    if (fields[1] == "turn") rec.scenario = MovementScenario::Turn;
    else if (fields[1] == "straight") rec.scenario = MovementScenario::Straight;
    else row_error(origin, row, "unknown scenario '" + fields[1] + "'");

    const auto type = parse_cue_type(fields[2]);
    if (!type) row_error(origin, row, "unknown cue_type '" + fields[2] + "'");
    rec.cue_type = *type;
    const auto mode = parse_cue_mode(fields[3]);
    if (!mode) row_error(origin, row, "unknown cue_mode '" + fields[3] + "'");
    rec.cue_mode = *mode;
    if ((rec.cue_type == CueType::None) != (rec.cue_mode == CueMode::None))
      row_error(origin, row, "cue_type is none exactly when cue_mode is none");

    const auto statement = parse_statement(fields[4]);
    if (!statement) row_error(origin, row, "unknown statement '" + fields[4] + "'");
    rec.statement = *statement;

    try {
      size_t used = 0;
      rec.rating = std::stoi(fields[5], &used);
      if (used != fields[5].size()) throw std::invalid_argument(fields[5]);
    } catch (const std::exception&) {
      row_error(origin, row, "malformed rating '" + fields[5] + "'");
    }
    if (rec.rating < 1 || rec.rating > 5)
      row_error(origin, row, "rating must lie in [1, 5], got " + fields[5]);

    if (fields[6] == "true") rec.attention_passed = true;
    else if (fields[6] == "false") rec.attention_passed = false;
    else row_error(origin, row, "attention_passed must be true or false");

    const auto [it, inserted] = scenario_of.emplace(rec.participant_id, rec.scenario);
    if (!inserted && it->second != rec.scenario)
      row_error(origin, row,
                "participant " + rec.participant_id + " appears in both scenarios");
    if (!seen.emplace(rec.participant_id, rec.cue_type, rec.cue_mode, rec.statement).second)
      row_error(origin, row,
                "duplicate response for participant " + rec.participant_id + ", condition " +
                    condition_label(rec.cue_type, rec.cue_mode) + ", statement " +
                    statement_name(rec.statement));

    records.push_back(std::move(rec));
  }
  return records;
}

std::vector<ResponseRecord> ingest(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open responses file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return responses_from_csv(buf.str(), path);
}

std::string responses_to_csv(const std::vector<ResponseRecord>& records) {
  std::ostringstream out;
  out << kCsvHeader << "\n";
  for (const auto& r : records) {
    out << r.participant_id << "," << movement_scenario_name(r.scenario) << ","
        << cue_type_name(r.cue_type) << "," << cue_mode_name(r.cue_mode) << ","
        << statement_name(r.statement) << "," << r.rating << ","
        << (r.attention_passed ? "true" : "false") << "\n";
  }
  return out.str();
}

void write_responses(const std::vector<ResponseRecord>& records, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw RuntimeError("cannot write responses file: " + path);
  out << responses_to_csv(records);
}

std::pair<std::vector<ResponseRecord>, int> exclude_failures(
    const std::vector<ResponseRecord>& records) {
  std::set<std::string> failed;
  for (const auto& r : records) {
    if (!r.attention_passed) failed.insert(r.participant_id);
  }
  std::vector<ResponseRecord> kept;
  kept.reserve(records.size());
  for (const auto& r : records) {
    if (!failed.count(r.participant_id)) kept.push_back(r);
  }
  return {std::move(kept), static_cast<int>(failed.size())};
}

// ---------------------------------------------------------------------------
// Scale scores and reliability
// ---------------------------------------------------------------------------

std::vector<SasScore> sas_scores(const std::vector<ResponseRecord>& records) {
  // participant -> condition -> statement -> rating
  std::map<std::string, std::map<std::pair<CueType, CueMode>, std::map<int, int>>> table;
  std::map<std::string, MovementScenario> scenario_of;
  for (const auto& r : records) {
    const auto [it, inserted] = scenario_of.emplace(r.participant_id, r.scenario);
    if (!inserted && it->second != r.scenario)
      throw ValidationError("sas: participant " + r.participant_id +
                            " appears in both scenarios");
    auto& cell = table[r.participant_id][{r.cue_type, r.cue_mode}];
    if (!cell.emplace(r.statement, r.rating).second)
      throw ValidationError("sas: duplicate rating for participant " + r.participant_id +
                            ", condition " + condition_label(r.cue_type, r.cue_mode) +
                            ", statement " + statement_name(r.statement));
  }

  std::vector<SasScore> scores;
  for (const auto& [pid, conditions] : table) {
    for (const auto& [condition, ratings] : conditions) {
      double sum = 0.0;
      for (int item : sas_statements()) {
        const auto it = ratings.find(item);
        if (it == ratings.end())
          throw ValidationError("sas: participant " + pid + ", condition " +
                                condition_label(condition.first, condition.second) +
                                " is missing statement " + statement_name(item));
        sum += it->second;
      }
      scores.push_back({pid, scenario_of.at(pid), condition.first, condition.second,
                        sum / sas_statements().size()});
    }
  }
  return scores;
}

double cronbach_alpha(const std::vector<std::vector<double>>& rows) {
  if (rows.size() < 2) throw ValidationError("alpha: need at least 2 participants");
  const size_t k = rows.front().size();
  if (k < 2) throw ValidationError("alpha: need at least 2 items");
  for (const auto& row : rows) {
    if (row.size() != k) throw ValidationError("alpha: ragged item matrix");
  }

  std::vector<double> totals(rows.size(), 0.0);
  double item_var_sum = 0.0;
  for (size_t j = 0; j < k; ++j) {
    std::vector<double> item(rows.size());
    for (size_t i = 0; i < rows.size(); ++i) item[i] = rows[i][j];
    item_var_sum += sample_variance(item);
  }
  for (size_t i = 0; i < rows.size(); ++i) {
    for (double v : rows[i]) totals[i] += v;
  }
  const double total_var = sample_variance(totals);
  if (total_var == 0.0) throw ValidationError("alpha: total score variance is zero");
  return (static_cast<double>(k) / (k - 1)) * (1.0 - item_var_sum / total_var);
}

// ---------------------------------------------------------------------------
// Comprehension contrast
// ---------------------------------------------------------------------------

std::string verdict_name(Verdict v) {
  switch (v) {
    case Verdict::Comprehension: return "comprehension";
    case Verdict::Lack: return "lack";
    case Verdict::Indeterminate: return "indeterminate";
    case Verdict::NotApplicable: return "n/a";
  }
  return "n/a";
}

namespace {

Quartiles quartiles_of(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const auto at = [&v](double p) {
    const double idx = p * (v.size() - 1);
    const size_t lo = static_cast<size_t>(std::floor(idx));
    const size_t hi = std::min(lo + 1, v.size() - 1);
    const double frac = idx - lo;
    return v[lo] + frac * (v[hi] - v[lo]);
  };
  return {at(0.25), at(0.5), at(0.75)};
}

Verdict contrast_verdict(double favored, double other) {
  if (favored > other) return Verdict::Comprehension;
  if (favored < other) return Verdict::Lack;
  return Verdict::Indeterminate;
}

}  // namespace

std::vector<ComprehensionCell> comprehension_report(
    const std::vector<ResponseRecord>& records) {
  constexpr int kPathStatement = 3;
  constexpr int kGoalStatement = 4;
  std::map<std::tuple<MovementScenario, CueType, CueMode>,
           std::pair<std::vector<double>, std::vector<double>>>
      cells;
  for (const auto& r : records) {
    if (r.statement != kPathStatement && r.statement != kGoalStatement) continue;
    auto& cell = cells[{r.scenario, r.cue_type, r.cue_mode}];
    (r.statement == kPathStatement ? cell.first : cell.second).push_back(r.rating);
  }

  std::vector<ComprehensionCell> out;
  for (MovementScenario scenario : {MovementScenario::Turn, MovementScenario::Straight}) {
    for (const auto& [type, mode] : all_conditions()) {
      const auto it = cells.find({scenario, type, mode});
      if (it == cells.end()) continue;
      const auto& [path_ratings, goal_ratings] = it->second;
      if (path_ratings.empty() || goal_ratings.empty() ||
          path_ratings.size() != goal_ratings.size())
        throw ValidationError("comprehension: cell " + movement_scenario_name(scenario) +
                              " " + condition_label(type, mode) + " is missing statement " +
                              statement_name(path_ratings.empty() ? kPathStatement
                                                                  : kGoalStatement) +
                              " responses");
      ComprehensionCell cell;
      cell.scenario = scenario;
      cell.cue_type = type;
      cell.cue_mode = mode;
      cell.n = static_cast<int>(path_ratings.size());
      cell.mean_path_statement = mean_of(path_ratings);
      cell.mean_goal_statement = mean_of(goal_ratings);
      cell.diff = cell.mean_path_statement - cell.mean_goal_statement;
      cell.path_quartiles = quartiles_of(path_ratings);
      cell.goal_quartiles = quartiles_of(goal_ratings);
      if (mode == CueMode::Path || mode == CueMode::PathGoal)
        cell.path_verdict = contrast_verdict(cell.mean_path_statement, cell.mean_goal_statement);
      if (mode == CueMode::Goal || mode == CueMode::PathGoal)
        cell.goal_verdict = contrast_verdict(cell.mean_goal_statement, cell.mean_path_statement);
      out.push_back(std::move(cell));
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Synthetic responses
// ---------------------------------------------------------------------------

namespace {

/// Deterministic standard normal draws: 53-bit uniforms through the
/// Box-Muller transform, one value per call.
class GaussianSource {
public:
  explicit GaussianSource(std::uint64_t seed) : rng_(seed) {}

  double next() {
    const double u1 = uniform();
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(1.0 - u1)) * std::cos(2.0 * M_PI * u2);
  }

private:
  double uniform() {
    return (rng_() >> 11) * 0x1.0p-53;  // [0, 1)
  }

  std::mt19937_64 rng_;
};

}  // namespace

std::vector<ResponseRecord> synth_responses(const SynthSpec& spec) {
  if (spec.n_participants < 0 || spec.n_attention_failures < 0 ||
      spec.n_attention_failures > spec.n_participants)
    throw ValidationError("synth: failure count must lie in [0, n_participants]");
  if (spec.subject_sd < 0.0 || spec.noise_sd < 0.0)
    throw ValidationError("synth: spreads must be >= 0");

  GaussianSource gauss(spec.seed);
  std::vector<ResponseRecord> records;
  records.reserve(static_cast<size_t>(spec.n_participants) * all_conditions().size() * 8);

  for (int i = 0; i < spec.n_participants; ++i) {
    char pid[16];
    std::snprintf(pid, sizeof(pid), "P%03d", i + 1);
    const MovementScenario scenario =
        i % 2 == 0 ? MovementScenario::Turn : MovementScenario::Straight;
    const double intercept = spec.subject_sd * gauss.next();
    const bool fails = i < spec.n_attention_failures;
    bool first_record = true;

    for (const auto& [type, mode] : all_conditions()) {
      SynthCell cell;  // absent cells default to a flat 3.0 mean
      const auto it = spec.cells.find({scenario, type, mode});
      if (it != spec.cells.end()) cell = it->second;
      for (int statement = 1; statement <= 8; ++statement) {
        double latent = cell.mean + spec.statement_offsets[statement - 1] + intercept +
                        spec.noise_sd * gauss.next();
        if (statement == 3) latent += cell.path_stmt_shift;
        if (statement == 4) latent += cell.goal_stmt_shift;
        ResponseRecord rec;
        rec.participant_id = pid;
        rec.scenario = scenario;
        rec.cue_type = type;
        rec.cue_mode = mode;
        rec.statement = statement;
        rec.rating = static_cast<int>(std::clamp<long>(std::lround(latent), 1, 5));
        rec.attention_passed = !(fails && first_record);
        first_record = false;
        records.push_back(std::move(rec));
      }
    }
  }
  return records;
}

SynthSpec default_synth_spec(int n_participants, int n_attention_failures,
                             std::uint64_t seed) {
  SynthSpec spec;
  spec.n_participants = n_participants;
  spec.n_attention_failures = n_attention_failures;
  spec.seed = seed;
  spec.subject_sd = 0.45;
  spec.noise_sd = 0.35;
  // Scale statements get compensating offsets (sum 0) so condition means
  // stay at the planted cell means.
  spec.statement_offsets = {0.30, -0.30, 0.0, 0.0, 0.15, -0.15, 0.05, -0.05};

  struct Plant {
    CueType type;
    CueMode mode;
    double turn_mean;
    double straight_mean;
    double path_shift;  // statement 1.3
    double goal_shift;  // statement 1.4
  };
  const Plant plants[] = {
      {CueType::Arrows, CueMode::Path, 4.50, 4.30, 0.50, -0.50},
      {CueType::Arrows, CueMode::Goal, 3.60, 4.00, -0.50, 0.50},
      {CueType::Arrows, CueMode::PathGoal, 4.05, 4.15, 0.25, 0.10},
      {CueType::Lights, CueMode::Path, 3.25, 3.30, 0.50, -0.50},
      {CueType::Lights, CueMode::Goal, 3.85, 3.45, -0.50, 0.50},
      {CueType::Lights, CueMode::PathGoal, 3.95, 3.55, 0.25, 0.10},
      {CueType::None, CueMode::None, 2.90, 3.05, -0.30, -0.30},
  };
  for (const auto& p : plants) {
    spec.cells[{MovementScenario::Turn, p.type, p.mode}] = {p.turn_mean, p.path_shift,
                                                            p.goal_shift};
    spec.cells[{MovementScenario::Straight, p.type, p.mode}] = {p.straight_mean, p.path_shift,
                                                                p.goal_shift};
  }
  return spec;
}

// ---------------------------------------------------------------------------
// Condition summaries with within-subjects confidence intervals
// ---------------------------------------------------------------------------

std::vector<ConditionSummary> sas_summary(const std::vector<SasScore>& scores) {
  if (scores.empty()) throw ValidationError("summary: no scores");

  std::vector<ConditionSummary> out;
  for (MovementScenario scenario : {MovementScenario::Turn, MovementScenario::Straight}) {
    // participant -> condition index -> score
    std::map<std::string, std::map<size_t, double>> by_participant;
    for (const auto& s : scores) {
      if (s.scenario != scenario) continue;
      const auto& conditions = all_conditions();
      const auto it = std::find(conditions.begin(), conditions.end(),
                                std::make_pair(s.cue_type, s.cue_mode));
      if (it == conditions.end())
        throw ValidationError("summary: unknown condition " +
                              condition_label(s.cue_type, s.cue_mode));
      by_participant[s.participant_id][static_cast<size_t>(it - conditions.begin())] = s.score;
    }
    if (by_participant.empty()) continue;

    const size_t C = all_conditions().size();
    for (const auto& [pid, row] : by_participant) {
      if (row.size() != C)
        throw ValidationError("summary: participant " + pid +
                              " is missing conditions; within-subject intervals need the "
                              "complete set");
    }

    const int n = static_cast<int>(by_participant.size());
    // Subject-centered normalization removes between-participant offsets;
    // the C/(C-1) factor corrects the variance shrinkage it introduces.
    std::map<std::string, double> participant_mean;
    double grand = 0.0;
    for (const auto& [pid, row] : by_participant) {
      double m = 0.0;
      for (const auto& [c, v] : row) m += v;
      m /= C;
      participant_mean[pid] = m;
      grand += m;
    }
    grand /= n;

    for (size_t c = 0; c < C; ++c) {
      std::vector<double> raw;
      std::vector<double> normalized;
      raw.reserve(n);
      normalized.reserve(n);
      for (const auto& [pid, row] : by_participant) {
        raw.push_back(row.at(c));
        normalized.push_back(row.at(c) - participant_mean.at(pid) + grand);
      }
      ConditionSummary s;
      s.scenario = scenario;
      s.cue_type = all_conditions()[c].first;
      s.cue_mode = all_conditions()[c].second;
      s.n = n;
      s.mean = mean_of(raw);
      s.sd = n > 1 ? std::sqrt(sample_variance(raw)) : 0.0;
      if (n > 1) {
        const double corrected =
            sample_variance(normalized) * (static_cast<double>(C) / (C - 1));
        s.ci_half_width = t_quantile(0.975, n - 1) * std::sqrt(corrected / n);
      }
      out.push_back(s);
    }
  }
  return out;
}

}  // namespace legibot
