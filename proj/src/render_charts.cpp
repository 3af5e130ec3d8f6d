#include <algorithm>
#include <optional>
#include <sstream>

#include "legibot/errors.hpp"
#include "legibot/numfmt.hpp"
#include "legibot/render.hpp"

namespace legibot {

namespace {

constexpr double kWidth = 860.0;
constexpr double kHeight = 430.0;
constexpr double kMarginLeft = 52.0;
constexpr double kMarginRight = 18.0;
constexpr double kMarginTop = 46.0;
constexpr double kMarginBottom = 64.0;
constexpr double kFacetGap = 44.0;
constexpr double kScoreMin = 1.0;
constexpr double kScoreMax = 5.0;

const char* kArrowColor = "#2ecc40";
const char* kLightColor = "#ff851b";
const char* kAxisColor = "#555555";
const char* kGridColor = "#dddddd";
const char* kPathStmtColor = "#2e6fcc";
const char* kGoalStmtColor = "#cc4f2e";

struct Facet {
  double x0 = 0.0;  // left edge of the plot area
  double width = 0.0;
};

double plot_top() { return kMarginTop; }
double plot_height() { return kHeight - kMarginTop - kMarginBottom; }

double score_y(double v) {
  const double t = (kScoreMax - v) / (kScoreMax - kScoreMin);
  return plot_top() + t * plot_height();
}

Facet facet_area(int index) {
  const double total = kWidth - kMarginLeft - kMarginRight - kFacetGap;
  Facet f;
  f.width = 0.5 * total;
  f.x0 = kMarginLeft + index * (f.width + kFacetGap);
  return f;
}

void open_svg(std::ostringstream& out) {
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\""
      << kHeight << "\" viewBox=\"0 0 " << kWidth << " " << kHeight << "\">\n";
  out << "<rect width=\"" << kWidth << "\" height=\"" << kHeight << "\" fill=\"#ffffff\"/>\n";
}

void text_at(std::ostringstream& out, double x, double y, const std::string& s,
             const std::string& color, int size, const std::string& anchor = "middle") {
  out << "<text x=\"" << fmt_fixed(x) << "\" y=\"" << fmt_fixed(y) << "\" fill=\"" << color
      << "\" font-family=\"sans-serif\" font-size=\"" << size << "\" text-anchor=\"" << anchor
      << "\">" << s << "</text>\n";
}

void line_at(std::ostringstream& out, double x1, double y1, double x2, double y2,
             const std::string& color, double w, const std::string& dash = "") {
  out << "<line x1=\"" << fmt_fixed(x1) << "\" y1=\"" << fmt_fixed(y1) << "\" x2=\""
      << fmt_fixed(x2) << "\" y2=\"" << fmt_fixed(y2) << "\" stroke=\"" << color
      << "\" stroke-width=\"" << fmt_fixed(w) << "\"";
  if (!dash.empty()) out << " stroke-dasharray=\"" << dash << "\"";
  out << "/>\n";
}

void facet_frame(std::ostringstream& out, const Facet& f, const std::string& title) {
  for (int v = 1; v <= 5; ++v) {
    const double y = score_y(v);
    line_at(out, f.x0, y, f.x0 + f.width, y, kGridColor, 1.0);
    text_at(out, f.x0 - 8.0, y + 4.0, std::to_string(v), kAxisColor, 12, "end");
  }
  line_at(out, f.x0, plot_top(), f.x0, plot_top() + plot_height(), kAxisColor, 1.5);
  line_at(out, f.x0, plot_top() + plot_height(), f.x0 + f.width, plot_top() + plot_height(),
          kAxisColor, 1.5);
  text_at(out, f.x0 + 0.5 * f.width, plot_top() - 12.0, title, kAxisColor, 15);
}

const char* mode_label(CueMode mode) {
  switch (mode) {
    case CueMode::Path: return "path";
    case CueMode::Goal: return "goal";
    case CueMode::PathGoal: return "path+goal";
    case CueMode::None: return "none";
  }
  return "?";
}

}  // namespace

std::string plot_condition_means(const std::vector<ConditionSummary>& summary) {
  if (summary.empty()) throw ValidationError("chart: empty condition summary");

  const MovementScenario scenarios[] = {MovementScenario::Turn, MovementScenario::Straight};
  auto find_cell = [&](MovementScenario s, CueType t, CueMode m) -> const ConditionSummary* {
    for (const auto& c : summary) {
      if (c.scenario == s && c.cue_type == t && c.cue_mode == m) return &c;
    }
    return nullptr;
  };
  for (MovementScenario s : scenarios) {
    const bool any = std::any_of(summary.begin(), summary.end(),
                                 [&](const ConditionSummary& c) { return c.scenario == s; });
    if (!any)
      throw ValidationError(std::string("chart: no data for scenario ") +
                            movement_scenario_name(s));
  }

  std::ostringstream out;
  open_svg(out);

  // Legend: one swatch per cue type.
  const struct { CueType type; const char* color; const char* label; } series[] = {
      {CueType::Arrows, kArrowColor, "projected arrows"},
      {CueType::Lights, kLightColor, "flashing lights"}};
  double lx = kMarginLeft;
  for (const auto& s : series) {
    out << "<circle cx=\"" << fmt_fixed(lx) << "\" cy=\"16\" r=\"5\" fill=\"" << s.color
        << "\"/>\n";
    text_at(out, lx + 10.0, 20.0, s.label, kAxisColor, 12, "start");
    lx += 150.0;
  }
  text_at(out, lx + 24.0, 20.0, "no cue", kAxisColor, 12, "start");
  line_at(out, lx, 16.0, lx + 20.0, 16.0, kAxisColor, 1.5, "5 4");

  const CueMode modes[] = {CueMode::Path, CueMode::Goal, CueMode::PathGoal};
  for (int fi = 0; fi < 2; ++fi) {
    const MovementScenario scen = scenarios[fi];
    const Facet f = facet_area(fi);
    facet_frame(out, f, movement_scenario_name(scen));

    if (const ConditionSummary* none = find_cell(scen, CueType::None, CueMode::None)) {
      const double y = score_y(none->mean);
      line_at(out, f.x0, y, f.x0 + f.width, y, kAxisColor, 1.5, "5 4");
    }

    for (int mi = 0; mi < 3; ++mi) {
      const double cx = f.x0 + (mi + 0.5) / 3.0 * f.width;
      text_at(out, cx, plot_top() + plot_height() + 20.0, mode_label(modes[mi]), kAxisColor, 12);
      for (const auto& s : series) {
        const ConditionSummary* cell = find_cell(scen, s.type, modes[mi]);
        if (!cell) continue;
        const double x = cx + (s.type == CueType::Arrows ? -14.0 : 14.0);
        const double y = score_y(cell->mean);
        const double y_lo = score_y(cell->mean - cell->ci_half_width);
        const double y_hi = score_y(cell->mean + cell->ci_half_width);
        line_at(out, x, y_lo, x, y_hi, s.color, 1.5);
        line_at(out, x - 4.0, y_lo, x + 4.0, y_lo, s.color, 1.5);
        line_at(out, x - 4.0, y_hi, x + 4.0, y_hi, s.color, 1.5);
        out << "<circle class=\"cond-point\" cx=\"" << fmt_fixed(x) << "\" cy=\""
            << fmt_fixed(y) << "\" r=\"5\" fill=\"" << s.color << "\"/>\n";
      }
    }
    text_at(out, f.x0 + 0.5 * f.width, kHeight - 14.0, "cue mode", kAxisColor, 12);
  }
  text_at(out, 16.0, plot_top() + 0.5 * plot_height(), "score", kAxisColor, 12);

  out << "</svg>\n";
  return out.str();
}

std::string plot_comprehension(const std::vector<ComprehensionCell>& cells) {
  if (cells.empty()) throw ValidationError("chart: empty comprehension report");

  const MovementScenario scenarios[] = {MovementScenario::Turn, MovementScenario::Straight};
  const struct { CueType type; CueMode mode; const char* label; } groups[] = {
      {CueType::Arrows, CueMode::Path, "A/p"},
      {CueType::Arrows, CueMode::Goal, "A/g"},
      {CueType::Arrows, CueMode::PathGoal, "A/pg"},
      {CueType::Lights, CueMode::Path, "L/p"},
      {CueType::Lights, CueMode::Goal, "L/g"},
      {CueType::Lights, CueMode::PathGoal, "L/pg"},
      {CueType::None, CueMode::None, "none"}};

  auto find_cell = [&](MovementScenario s, CueType t, CueMode m) -> const ComprehensionCell* {
    for (const auto& c : cells) {
      if (c.scenario == s && c.cue_type == t && c.cue_mode == m) return &c;
    }
    return nullptr;
  };

  std::ostringstream out;
  open_svg(out);

  const struct { const char* color; const char* label; } series[] = {
      {kPathStmtColor, "understood the path"}, {kGoalStmtColor, "understood the goal"}};
  double lx = kMarginLeft;
  for (const auto& s : series) {
    out << "<rect x=\"" << fmt_fixed(lx) << "\" y=\"10\" width=\"12\" height=\"12\" fill=\""
        << s.color << "\"/>\n";
    text_at(out, lx + 18.0, 20.0, s.label, kAxisColor, 12, "start");
    lx += 180.0;
  }

  auto draw_box = [&](double x, const Quartiles& q, const char* color) {
    const double y1 = score_y(q.q3);
    const double y2 = score_y(q.q1);
    out << "<rect class=\"comp-box\" x=\"" << fmt_fixed(x - 6.0) << "\" y=\"" << fmt_fixed(y1)
        << "\" width=\"12\" height=\"" << fmt_fixed(std::max(1.0, y2 - y1)) << "\" fill=\""
        << color << "\" fill-opacity=\"0.45\" stroke=\"" << color << "\"/>\n";
    line_at(out, x - 6.0, score_y(q.median), x + 6.0, score_y(q.median), color, 2.0);
  };

  for (int fi = 0; fi < 2; ++fi) {
    const MovementScenario scen = scenarios[fi];
    const Facet f = facet_area(fi);
    facet_frame(out, f, movement_scenario_name(scen));

    const int n_groups = static_cast<int>(std::size(groups));
    for (int gi = 0; gi < n_groups; ++gi) {
      const double cx = f.x0 + (gi + 0.5) / n_groups * f.width;
      const ComprehensionCell* cell = find_cell(scen, groups[gi].type, groups[gi].mode);
      text_at(out, cx, plot_top() + plot_height() + 20.0, groups[gi].label, kAxisColor, 11);
      if (!cell) continue;
      if (cell->path_verdict == Verdict::Lack || cell->goal_verdict == Verdict::Lack) {
        // Soft red band flags every cell whose applicable rule failed.
        out << "<rect class=\"comp-lack\" x=\"" << fmt_fixed(cx - 0.5 * f.width / n_groups)
            << "\" y=\"" << fmt_fixed(plot_top()) << "\" width=\""
            << fmt_fixed(f.width / n_groups) << "\" height=\"" << fmt_fixed(plot_height())
            << "\" fill=\"#cc4f2e\" fill-opacity=\"0.12\"/>\n";
      }
      draw_box(cx - 8.0, cell->path_quartiles, kPathStmtColor);
      draw_box(cx + 8.0, cell->goal_quartiles, kGoalStmtColor);
    }
    text_at(out, f.x0 + 0.5 * f.width, kHeight - 14.0, "condition", kAxisColor, 12);
  }
  text_at(out, 16.0, plot_top() + 0.5 * plot_height(), "rating", kAxisColor, 12);

  out << "</svg>\n";
  return out.str();
}

}  // namespace legibot
