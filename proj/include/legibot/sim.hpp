#ifndef LEGIBOT_SIM_HPP
#define LEGIBOT_SIM_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "legibot/cues.hpp"
#include "legibot/nav.hpp"
#include "legibot/scenario.hpp"

namespace legibot {

/// One tick of a run: robot state, the command it issued, the cue signals,
/// and the cue output. `leg` is the goal index the robot is pursuing or
/// previewing (0 = goal1, 1 = goal2); pause records carry leg 1 because the
/// cues preview the second leg during the pause.
struct TraceRecord {
  double t = 0.0;
  Pose2D pose;
  VelocityCommand cmd;
  CueInputs inputs;
  CueState cue;
  int leg = 0;
  bool paused = false;

  bool operator==(const TraceRecord&) const = default;
};

struct SimConfig {
  double dt = 0.05;             // seconds per tick
  double goal_tolerance = 0.15; // meters
  CueType cue_type = CueType::None;
  CueMode cue_mode = CueMode::None;
  CueConfig cue;
  FollowLimits limits;
  double grid_resolution = 0.05;  // meters per cell
  double planning_margin = 0.15;  // extra inflation beyond the robot radius
  int replan_every = 0;           // ticks between replans; 0 plans once per leg
  int max_ticks = 20000;          // non-termination guard
  std::uint64_t seed = 0;         // recorded in the trace header
};

/// Header describing one trace file.
struct TraceHeader {
  std::string schema = "legibot-trace/1";
  std::string scenario;
  CueType cue_type = CueType::None;
  CueMode cue_mode = CueMode::None;
  double dt = 0.05;
  std::uint64_t seed = 0;

  bool operator==(const TraceHeader&) const = default;
};

struct Trace {
  TraceHeader header;
  std::vector<TraceRecord> records;

  bool operator==(const Trace&) const = default;
};

/// Run a scenario end to end: drive start->goal1, hold for the scripted
/// pause while the cues preview the goal1->goal2 leg, then drive to goal2.
/// One record per tick; deterministic for a given (spec, cfg). Throws
/// ValidationError on inconsistent config and RuntimeError when planning
/// fails or max_ticks elapses.
Trace run(const ScenarioSpec& spec, const SimConfig& cfg);

/// Line-delimited trace I/O; read(write(x)) == x exactly. write_trace
/// throws RuntimeError on I/O failure; read_trace throws ValidationError on
/// malformed records or a schema version it does not understand.
void write_trace(const Trace& trace, const std::string& path);
Trace read_trace(const std::string& path);

std::string trace_to_text(const Trace& trace);
Trace trace_from_text(const std::string& text, const std::string& origin = "<string>");

}  // namespace legibot

#endif  // LEGIBOT_SIM_HPP
