#include "legibot/cues.hpp"

#include <algorithm>
#include <cmath>

#include "legibot/errors.hpp"

namespace legibot {

std::string cue_type_name(CueType t) {
  switch (t) {
    case CueType::Arrows: return "arrows";
    case CueType::Lights: return "lights";
    case CueType::None: return "none";
  }
  return "none";
}

std::string cue_mode_name(CueMode m) {
  switch (m) {
    case CueMode::Path: return "path";
    case CueMode::Goal: return "goal";
    case CueMode::PathGoal: return "path_goal";
    case CueMode::None: return "none";
  }
  return "none";
}

std::optional<CueType> parse_cue_type(const std::string& s) {
  if (s == "arrows") return CueType::Arrows;
  if (s == "lights") return CueType::Lights;
  if (s == "none") return CueType::None;
  return std::nullopt;
}

std::optional<CueMode> parse_cue_mode(const std::string& s) {
  if (s == "path") return CueMode::Path;
  if (s == "goal") return CueMode::Goal;
  if (s == "path_goal") return CueMode::PathGoal;
  if (s == "none") return CueMode::None;
  return std::nullopt;
}

std::string cue_source_name(CueSource s) {
  switch (s) {
    case CueSource::None: return "none";
    case CueSource::Path: return "path";
    case CueSource::Goal: return "goal";
  }
  return "none";
}

namespace {

constexpr double kRadToDeg = 180.0 / M_PI;
constexpr double kDegToRad = M_PI / 180.0;

/// Robot-frame bearing of a world point, degrees, positive to the left.
double bearing_deg(const Pose2D& pose, Vec2 target) {
  const Vec2 v = target - pose.position();
  if (norm(v) < 1e-12) return 0.0;
  return normalize_angle(std::atan2(v.y, v.x) - pose.heading) * kRadToDeg;
}

double clamp_freq(double f, const CueConfig& cfg) {
  return std::clamp(f, cfg.freq_min_hz, cfg.freq_max_hz);
}

double goal_frequency(const CueInputs& in, const CueConfig& cfg) {
  const double arg =
      cfg.invert_goal_frequency ? cfg.goal_distance_threshold_m - in.d_m : in.d_m;
  return clamp_freq(cfg.goal_freq_coeff_hz_per_m * arg, cfg);
}

bool goal_lights_condition(const CueInputs& in, const CueConfig& cfg) {
  return in.d_m < cfg.goal_distance_threshold_m &&
         std::abs(in.theta_g1_deg) < cfg.goal_bearing_threshold_deg &&
         std::abs(in.theta_g1g2_deg) > cfg.goal_turn_threshold_deg;
}

bool goal_arrows_condition(const CueInputs& in, const CueConfig& cfg) {
  return in.d_m < cfg.goal_distance_threshold_m &&
         std::abs(in.theta_g1_deg) < cfg.goal_bearing_threshold_deg;
}

}  // namespace

CueInputs compute_inputs(const Pose2D& pose, const PlannedPath& path,
                         const Pose2D& goal1, const Pose2D& goal2) {
  CueInputs in;
  in.theta_p_deg = bearing_deg(pose, point_along_path(path, pose, 1.0));
  in.theta_g1_deg = bearing_deg(pose, goal1.position());
  const Vec2 g12 = goal2.position() - goal1.position();
  in.theta_g1g2_deg =
      norm(g12) < 1e-9
          ? 0.0
          : normalize_angle(std::atan2(g12.y, g12.x) - pose.heading) * kRadToDeg;
  in.d_m = norm(goal1.position() - pose.position());
  return in;
}

bool flash_phase(double freq_hz, double t, double duty_cycle) {
  const double cycles = t * freq_hz;
  const double fract = cycles - std::floor(cycles);
  return fract < duty_cycle;
}

LightState lights_path(const CueInputs& in, const CueConfig& cfg, double t) {
  LightState s;
  if (std::abs(in.theta_p_deg) > cfg.path_angle_threshold_deg) {
    (in.theta_p_deg > 0.0 ? s.left_active : s.right_active) = true;
    s.frequency_hz = clamp_freq(cfg.path_freq_coeff_hz_per_deg * std::abs(in.theta_p_deg), cfg);
    s.lit = flash_phase(*s.frequency_hz, t, cfg.duty_cycle);
  }
  return s;
}

LightState lights_goal(const CueInputs& in, const CueConfig& cfg, double t) {
  LightState s;
  if (goal_lights_condition(in, cfg)) {
    (in.theta_g1g2_deg > 0.0 ? s.left_active : s.right_active) = true;
    s.frequency_hz = goal_frequency(in, cfg);
    s.lit = flash_phase(*s.frequency_hz, t, cfg.duty_cycle);
  }
  return s;
}

ArrowState arrows_path(const CueInputs& in, const CueConfig&) {
  ArrowState s;
  s.visible = true;
  s.direction_deg = in.theta_p_deg;
  s.fill = ArrowFill::Solid;
  s.lit = true;
  return s;
}

ArrowState arrows_goal(const CueInputs& in, const CueConfig& cfg, double t) {
  ArrowState s;
  if (goal_arrows_condition(in, cfg)) {
    s.visible = true;
    s.direction_deg = in.theta_g1g2_deg;
    s.fill = ArrowFill::Dashed;
    s.frequency_hz = goal_frequency(in, cfg);
    s.lit = flash_phase(*s.frequency_hz, t, cfg.duty_cycle);
  }
  return s;
}

CueState cue_step(CueType type, CueMode mode, const CueInputs& in,
                  const CueConfig& cfg, double t) {
  CueState out;
  if (type == CueType::None || mode == CueMode::None) return out;

  if (type == CueType::Lights) {
    const bool want_goal = mode != CueMode::Path && goal_lights_condition(in, cfg);
    if (want_goal) {
      out.lights = lights_goal(in, cfg, t);
      out.active_source = CueSource::Goal;
    } else if (mode != CueMode::Goal) {
      out.lights = lights_path(in, cfg, t);
      if (out.lights.any_active()) out.active_source = CueSource::Path;
    }
    return out;
  }

  const bool want_goal = mode != CueMode::Path && goal_arrows_condition(in, cfg);
  if (want_goal) {
    out.arrow = arrows_goal(in, cfg, t);
    out.active_source = CueSource::Goal;
  } else if (mode != CueMode::Goal) {
    out.arrow = arrows_path(in, cfg);
    out.active_source = CueSource::Path;
  }
  return out;
}

std::vector<Vec2> arrow_polygon(const Pose2D& pose, double direction_deg,
                                const CueConfig& cfg) {
  const double L = cfg.arrow_length_m;
  const double head_len = 0.4 * L;
  const double shaft_half = L / 6.0;
  const double head_half = L / 3.0;

  const Vec2 ahead{std::cos(pose.heading), std::sin(pose.heading)};
  const Vec2 tail = pose.position() + cfg.arrow_anchor_offset_m * ahead;
  const double phi = pose.heading + direction_deg * kDegToRad;
  const Vec2 u{std::cos(phi), std::sin(phi)};   // shaft direction
  const Vec2 n{-std::sin(phi), std::cos(phi)};  // left normal

  const Vec2 joint = tail + (L - head_len) * u;
  // Perimeter order with the tip last: right barb, right shaft joint, right
  // tail, left tail, left shaft joint, left barb, tip.
  return {
      joint - head_half * n,
      joint - shaft_half * n,
      tail - shaft_half * n,
      tail + shaft_half * n,
      joint + shaft_half * n,
      joint + head_half * n,
      tail + L * u,
  };
}

bool CueController::smoothed(int& run, bool raw_active) {
  run = raw_active ? run + 1 : 0;
  return run > cfg_.activation_smoothing_ticks;
}

CueState CueController::step(const Pose2D& pose, const CueInputs& in, double t) {
  CueState out = cue_step(type_, mode_, in, cfg_, 0.0);

  const bool left = smoothed(left_run_, out.lights.left_active);
  const bool right = smoothed(right_run_, out.lights.right_active);
  if (out.lights.left_active != left || out.lights.right_active != right) {
    out.lights.left_active = left;
    out.lights.right_active = right;
    if (!out.lights.any_active()) {
      out.lights.frequency_hz.reset();
      if (type_ == CueType::Lights) out.active_source = CueSource::None;
    }
  }
  if (left && !left_was_active_) left_origin_ = t;
  if (right && !right_was_active_) right_origin_ = t;
  left_was_active_ = left;
  right_was_active_ = right;
  if (out.lights.frequency_hz) {
    out.lights.lit = flash_phase(*out.lights.frequency_hz, t - (left ? left_origin_ : right_origin_),
                                 cfg_.duty_cycle);
  } else {
    out.lights.lit = false;
  }

  const bool arrow_visible = smoothed(arrow_run_, out.arrow.visible);
  if (!arrow_visible && out.arrow.visible) {
    out.arrow = ArrowState{};
    if (type_ == CueType::Arrows) out.active_source = CueSource::None;
  }
  const bool flashing = out.arrow.visible && out.arrow.fill == ArrowFill::Dashed;
  if (flashing && !arrow_was_flashing_) arrow_origin_ = t;
  arrow_was_flashing_ = flashing;
  if (flashing) {
    out.arrow.lit = flash_phase(*out.arrow.frequency_hz, t - arrow_origin_, cfg_.duty_cycle);
  }
  if (out.arrow.visible) {
    out.arrow.polygon = arrow_polygon(pose, out.arrow.direction_deg, cfg_);
  }
  return out;
}

}  // namespace legibot
