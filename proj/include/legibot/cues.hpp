#ifndef LEGIBOT_CUES_HPP
#define LEGIBOT_CUES_HPP

#include <optional>
#include <string>
#include <vector>

#include "legibot/nav.hpp"
#include "legibot/scenario.hpp"

namespace legibot {

/// Which hardware cue the robot runs, or none for the control condition.
enum class CueType { Arrows, Lights, None };

/// What the cue communicates: the immediate path, the upcoming goal, or the
/// goal whenever its activation condition holds with path as fallback.
enum class CueMode { Path, Goal, PathGoal, None };

std::string cue_type_name(CueType t);
std::string cue_mode_name(CueMode m);
std::optional<CueType> parse_cue_type(const std::string& s);
std::optional<CueMode> parse_cue_mode(const std::string& s);

/// Signals the cue rules consume, all in the robot frame. Positive angles
/// are to the robot's left.
struct CueInputs {
  double theta_p_deg = 0.0;     // bearing to the point 1 m along the path
  double theta_g1_deg = 0.0;    // bearing to goal 1
  double theta_g1g2_deg = 0.0;  // bearing of the vector goal1 -> goal2
  double d_m = 0.0;             // distance to goal 1

  bool operator==(const CueInputs&) const = default;
};

/// Rule constants. Defaults express the published behavior; every knob is a
/// plain field so alternatives stay testable.
struct CueConfig {
  double freq_min_hz = 0.5;
  double freq_max_hz = 5.0;
  double path_angle_threshold_deg = 20.0;    // |theta_p| must exceed this
  double goal_bearing_threshold_deg = 45.0;  // |theta_g1| must be under this
  double goal_distance_threshold_m = 1.5;    // d must be under this
  double goal_turn_threshold_deg = 20.0;     // |theta_g1g2| must exceed this (lights)
  double path_freq_coeff_hz_per_deg = 0.1;
  double goal_freq_coeff_hz_per_m = 5.0;
  // When set, goal-cue frequency rises as the robot nears goal 1
  // (coeff·(threshold − d)) instead of falling with distance (coeff·d).
  bool invert_goal_frequency = false;
  double arrow_length_m = 0.30;        // tip-to-tail world length
  double arrow_anchor_offset_m = 0.5;  // tail distance ahead of robot center
  double duty_cycle = 0.5;             // on fraction of each flash period
  // Consecutive raw-active ticks required before the controller reports a
  // channel active; 0 reports immediately.
  int activation_smoothing_ticks = 0;
};

/// One LED per robot side; at most one side is active at a time.
struct LightState {
  bool left_active = false;
  bool right_active = false;
  std::optional<double> frequency_hz;  // set iff a channel is active
  bool lit = false;                    // instantaneous flash phase

  bool any_active() const { return left_active || right_active; }

  bool operator==(const LightState&) const = default;
};

enum class ArrowFill { Solid, Dashed };

/// Floor-projected arrow. Solid arrows hold lit; dashed arrows flash.
struct ArrowState {
  bool visible = false;
  double direction_deg = 0.0;          // robot frame
  ArrowFill fill = ArrowFill::Solid;
  std::optional<double> frequency_hz;  // set iff fill is Dashed
  bool lit = false;
  std::vector<Vec2> polygon;           // world-frame outline when visible

  bool operator==(const ArrowState&) const = default;
};

/// Which rule produced the current output.
enum class CueSource { None, Path, Goal };

std::string cue_source_name(CueSource s);

struct CueState {
  LightState lights;
  ArrowState arrow;
  CueSource active_source = CueSource::None;

  bool operator==(const CueState&) const = default;
};

/// Robot-frame signals for the cue rules: bearings to the 1 m path preview
/// point, to goal1, and of the goal1->goal2 vector, plus distance to goal1.
/// Throws RuntimeError on an empty path.
CueInputs compute_inputs(const Pose2D& pose, const PlannedPath& path,
                         const Pose2D& goal1, const Pose2D& goal2);

/// Square wave: true during the duty fraction of each period, phase zero at
/// t = 0. Callers put phase zero at channel activation by shifting t.
bool flash_phase(double freq_hz, double t, double duty_cycle = 0.5);

/// Path-mode lights: active iff |theta_p| exceeds the path angle threshold;
/// the side with the turn flashes at 0.1·|theta_p| Hz (clamped).
LightState lights_path(const CueInputs& in, const CueConfig& cfg, double t);

/// Goal-mode lights: active iff near goal1, goal1 roughly ahead, and the
/// goal1->goal2 bearing exceeds the turn threshold; flashes at 5·d Hz
/// (clamped) on the side of the upcoming turn.
LightState lights_goal(const CueInputs& in, const CueConfig& cfg, double t);

/// Path-mode arrow: always on, solid, pointing along theta_p.
ArrowState arrows_path(const CueInputs& in, const CueConfig& cfg);

/// Goal-mode arrow: visible iff near goal1 with goal1 roughly ahead (no turn
/// condition); dashed, pointing along theta_g1g2, flashing at 5·d Hz
/// (clamped).
ArrowState arrows_goal(const CueInputs& in, const CueConfig& cfg, double t);

/// One combined step. PathGoal yields the goal rule's output whenever its
/// activation condition holds and the path rule's output otherwise. Phase
/// zero is t = 0 for every channel; CueController owns per-channel phase.
CueState cue_step(CueType type, CueMode mode, const CueInputs& in,
                  const CueConfig& cfg, double t);

/// World-frame arrow outline: tail anchored ahead of the robot center along
/// its heading, shaft toward direction_deg (robot frame), head taking 40% of
/// the length. Seven vertices, tip last.
std::vector<Vec2> arrow_polygon(const Pose2D& pose, double direction_deg,
                                const CueConfig& cfg);

/// Tick-to-tick cue state: resets each flash channel's phase at its
/// activation edge, applies optional activation smoothing, and attaches the
/// world-frame arrow polygon.
class CueController {
public:
  CueController(CueType type, CueMode mode, const CueConfig& cfg)
      : type_(type), mode_(mode), cfg_(cfg) {}

  CueState step(const Pose2D& pose, const CueInputs& in, double t);

private:
  bool smoothed(int& run, bool raw_active);

  CueType type_;
  CueMode mode_;
  CueConfig cfg_;
  double left_origin_ = 0.0;
  double right_origin_ = 0.0;
  double arrow_origin_ = 0.0;
  bool left_was_active_ = false;
  bool right_was_active_ = false;
  bool arrow_was_flashing_ = false;
  int left_run_ = 0;
  int right_run_ = 0;
  int arrow_run_ = 0;
};

}  // namespace legibot

#endif  // LEGIBOT_CUES_HPP
