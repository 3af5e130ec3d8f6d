#include "legibot/sim.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "legibot/errors.hpp"

namespace legibot {

using nlohmann::json;

namespace {

struct LegContext {
  const PlannedPath* path;  // path the robot follows / previews
  Pose2D cue_goal1;         // goal pair feeding the cue rules
  Pose2D cue_goal2;
  int leg;
};

}  // namespace

Trace run(const ScenarioSpec& spec, const SimConfig& cfg) {
  validate_scenario(spec);
  if (!(cfg.dt > 0.0)) throw ValidationError("sim: dt must be > 0");
  if (!(cfg.goal_tolerance > 0.0)) throw ValidationError("sim: goal_tolerance must be > 0");
  if ((cfg.cue_type == CueType::None) != (cfg.cue_mode == CueMode::None))
    throw ValidationError("sim: cue type and mode must both be none or both be set");
  if (cfg.replan_every < 0) throw ValidationError("sim: replan_every must be >= 0");
  if (cfg.max_ticks <= 0) throw ValidationError("sim: max_ticks must be > 0");

  const double inflation = spec.circumscribed_radius() + cfg.planning_margin;
  const OccupancyGrid grid = build_occupancy_grid(spec, cfg.grid_resolution, inflation);

  Trace trace;
  trace.header.scenario = spec.name;
  trace.header.cue_type = cfg.cue_type;
  trace.header.cue_mode = cfg.cue_mode;
  trace.header.dt = cfg.dt;
  trace.header.seed = cfg.seed;

  CueController controller(cfg.cue_type, cfg.cue_mode, cfg.cue);
  Pose2D pose = spec.start;
  int tick = 0;

  auto emit = [&](const LegContext& ctx, const VelocityCommand& cmd, bool paused) {
    TraceRecord rec;
    rec.t = tick * cfg.dt;
    rec.pose = pose;
    rec.cmd = cmd;
    rec.inputs = compute_inputs(pose, *ctx.path, ctx.cue_goal1, ctx.cue_goal2);
    rec.cue = controller.step(pose, rec.inputs, rec.t);
    rec.leg = ctx.leg;
    rec.paused = paused;
    trace.records.push_back(std::move(rec));
    ++tick;
  };

  auto drive = [&](PlannedPath& path, const Pose2D& goal, const LegContext& ctx) {
    int since_plan = 0;
    while (norm(pose.position() - goal.position()) > cfg.goal_tolerance) {
      if (tick >= cfg.max_ticks)
        throw RuntimeError("sim: exceeded max_ticks before reaching the goal");
      if (cfg.replan_every > 0 && since_plan >= cfg.replan_every) {
        // The follower may legally graze the inflation band (it is padded by
        // the planning margin); defer the replan until the cell is free again.
        int cx = 0, cy = 0;
        grid.cell_of(pose.position(), cx, cy);
        if (!grid.occupied(cx, cy)) path = plan_path(grid, pose, goal);
        since_plan = 0;
      }
      const VelocityCommand cmd = follow_step(pose, path, cfg.limits);
      emit(ctx, cmd, false);
      pose = integrate(pose, cmd, cfg.dt);
      ++since_plan;
    }
  };

  // Leg 1: start -> goal1, cues reference the (goal1, goal2) pair.
  PlannedPath path1 = plan_path(grid, pose, spec.goal1);
  drive(path1, spec.goal1, {&path1, spec.goal1, spec.goal2, 0});

  // Junction pause: the robot holds still while the cues preview the next
  // leg, so inputs use the goal2 plan with the (goal1, goal2) pair.
  PlannedPath path2 = plan_path(grid, pose, spec.goal2);
  const int pause_ticks = static_cast<int>(std::ceil(spec.pause_at_goal1_s / cfg.dt));
  for (int k = 0; k < pause_ticks; ++k) {
    if (tick >= cfg.max_ticks) throw RuntimeError("sim: exceeded max_ticks during the pause");
    emit({&path2, spec.goal1, spec.goal2, 1}, VelocityCommand{}, true);
  }

  // Leg 2: goal1 -> goal2. The goal pair degenerates to (goal2, goal2): the
  // turn bearing reads 0 and goal cues only mark the terminal approach.
  const LegContext leg2{&path2, spec.goal2, spec.goal2, 1};
  drive(path2, spec.goal2, leg2);
  emit(leg2, VelocityCommand{}, false);  // terminal record inside tolerance

  return trace;
}

// ---------------------------------------------------------------------------
// Trace serialization: one JSON object per line, header first.
// ---------------------------------------------------------------------------

namespace {

json pose_to_json(const Pose2D& p) { return json::array({p.x, p.y, p.heading}); }

Pose2D pose_from_json(const json& j) {
  return {j.at(0).get<double>(), j.at(1).get<double>(), j.at(2).get<double>()};
}

json record_to_json(const TraceRecord& r) {
  json polygon = json::array();
  for (const auto& v : r.cue.arrow.polygon) polygon.push_back(json::array({v.x, v.y}));
  return json{
      {"t", r.t},
      {"pose", pose_to_json(r.pose)},
      {"cmd", json::array({r.cmd.linear, r.cmd.angular})},
      {"inputs",
       {{"theta_p", r.inputs.theta_p_deg},
        {"theta_g1", r.inputs.theta_g1_deg},
        {"theta_g1g2", r.inputs.theta_g1g2_deg},
        {"d", r.inputs.d_m}}},
      {"cue",
       {{"source", cue_source_name(r.cue.active_source)},
        {"lights",
         {{"left", r.cue.lights.left_active},
          {"right", r.cue.lights.right_active},
          {"freq", r.cue.lights.frequency_hz ? json(*r.cue.lights.frequency_hz) : json()},
          {"lit", r.cue.lights.lit}}},
        {"arrow",
         {{"visible", r.cue.arrow.visible},
          {"dir", r.cue.arrow.direction_deg},
          {"fill", r.cue.arrow.fill == ArrowFill::Solid ? "solid" : "dashed"},
          {"freq", r.cue.arrow.frequency_hz ? json(*r.cue.arrow.frequency_hz) : json()},
          {"lit", r.cue.arrow.lit},
          {"polygon", polygon}}}}},
      {"leg", r.leg},
      {"paused", r.paused},
  };
}

TraceRecord record_from_json(const json& j) {
  TraceRecord r;
  r.t = j.at("t").get<double>();
  r.pose = pose_from_json(j.at("pose"));
  r.cmd = {j.at("cmd").at(0).get<double>(), j.at("cmd").at(1).get<double>()};
  const json& in = j.at("inputs");
  r.inputs.theta_p_deg = in.at("theta_p").get<double>();
  r.inputs.theta_g1_deg = in.at("theta_g1").get<double>();
  r.inputs.theta_g1g2_deg = in.at("theta_g1g2").get<double>();
  r.inputs.d_m = in.at("d").get<double>();
  const json& cue = j.at("cue");
  const std::string source = cue.at("source").get<std::string>();
  if (source == "path") r.cue.active_source = CueSource::Path;
  else if (source == "goal") r.cue.active_source = CueSource::Goal;
  else if (source != "none") throw ValidationError("trace: unknown cue source " + source);
  const json& lights = cue.at("lights");
  r.cue.lights.left_active = lights.at("left").get<bool>();
  r.cue.lights.right_active = lights.at("right").get<bool>();
  if (!lights.at("freq").is_null()) r.cue.lights.frequency_hz = lights.at("freq").get<double>();
  r.cue.lights.lit = lights.at("lit").get<bool>();
  const json& arrow = cue.at("arrow");
  r.cue.arrow.visible = arrow.at("visible").get<bool>();
  r.cue.arrow.direction_deg = arrow.at("dir").get<double>();
  const std::string fill = arrow.at("fill").get<std::string>();
  if (fill == "solid") r.cue.arrow.fill = ArrowFill::Solid;
  else if (fill == "dashed") r.cue.arrow.fill = ArrowFill::Dashed;
  else throw ValidationError("trace: unknown arrow fill " + fill);
  if (!arrow.at("freq").is_null()) r.cue.arrow.frequency_hz = arrow.at("freq").get<double>();
  r.cue.arrow.lit = arrow.at("lit").get<bool>();
  for (const auto& v : arrow.at("polygon"))
    r.cue.arrow.polygon.push_back({v.at(0).get<double>(), v.at(1).get<double>()});
  r.leg = j.at("leg").get<int>();
  r.paused = j.at("paused").get<bool>();
  return r;
}

}  // namespace

std::string trace_to_text(const Trace& trace) {
  std::ostringstream out;
  const json header{
      {"schema", trace.header.schema},
      {"scenario", trace.header.scenario},
      {"cue_type", cue_type_name(trace.header.cue_type)},
      {"cue_mode", cue_mode_name(trace.header.cue_mode)},
      {"dt", trace.header.dt},
      {"seed", trace.header.seed},
  };
  out << header.dump() << "\n";
  for (const auto& rec : trace.records) out << record_to_json(rec).dump() << "\n";
  return out.str();
}

Trace trace_from_text(const std::string& text, const std::string& origin) {
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  Trace trace;
  bool have_header = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    json j;
    try {
      j = json::parse(line);
    } catch (const json::exception& e) {
      throw ValidationError(origin + ":" + std::to_string(line_no) + ": " + e.what());
    }
    try {
      if (!have_header) {
        const std::string schema = j.at("schema").get<std::string>();
        if (schema != trace.header.schema)
          throw ValidationError(origin + ": unsupported trace schema '" + schema + "'");
        trace.header.scenario = j.at("scenario").get<std::string>();
        const auto type = parse_cue_type(j.at("cue_type").get<std::string>());
        const auto mode = parse_cue_mode(j.at("cue_mode").get<std::string>());
        if (!type || !mode) throw ValidationError(origin + ": unknown cue type/mode in header");
        trace.header.cue_type = *type;
        trace.header.cue_mode = *mode;
        trace.header.dt = j.at("dt").get<double>();
        trace.header.seed = j.at("seed").get<std::uint64_t>();
        have_header = true;
      } else {
        trace.records.push_back(record_from_json(j));
      }
    } catch (const json::exception& e) {
      throw ValidationError(origin + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
  if (!have_header) throw ValidationError(origin + ": missing trace header line");
  return trace;
}

void write_trace(const Trace& trace, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw RuntimeError("cannot write trace file: " + path);
  out << trace_to_text(trace);
  if (!out) throw RuntimeError("failed writing trace file: " + path);
}

Trace read_trace(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open trace file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return trace_from_text(buf.str(), path);
}

}  // namespace legibot
