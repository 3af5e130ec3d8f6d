#ifndef LEGIBOT_RENDER_HPP
#define LEGIBOT_RENDER_HPP

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "legibot/sim.hpp"
#include "legibot/stats.hpp"

namespace legibot {

/// Colors, scale, and animation stride. One style value is shared across a
/// whole render so every frame uses the same transform.
struct RenderStyle {
  double scale_px_per_m = 100.0;
  double margin_m = 0.5;              // world border around the scene bounds
  int frame_stride = 1;               // records per emitted frame
  std::string background = "#fdfdfb";
  std::string wall_color = "#333333";
  std::string obstacle_color = "#8d6e63";
  std::string robot_color = "#4466aa";
  std::string goal_color = "#888888";
  std::string observer_color = "#aa4488";
  std::string arrow_color = "#2ecc40";  // projected arrows are green
  std::string light_color = "#ff851b";  // the side LEDs are orange
};

/// One SVG frame: walls, obstacle, goals, observer, the robot rectangle with
/// its two side LEDs (filled only while lit), and the arrow polygon when
/// visible (dashed outline when flashing). Pure function of its inputs.
std::string render_frame(const TraceRecord& record, const ScenarioSpec& spec,
                         const RenderStyle& style);

/// Render every frame_stride-th record. format "frames" writes
/// frame_000000.svg.. into out_dir; format "gif" writes animation.gif with
/// real-time delays. Returns the written paths in order. Throws
/// ValidationError on an empty trace or unknown format, RuntimeError on I/O
/// failure.
std::vector<std::string> render_animation(const Trace& trace, const ScenarioSpec& spec,
                                          const std::string& out_dir,
                                          const std::string& format,
                                          const RenderStyle& style);

/// Score means chart: one point with CI whiskers per cue type x mode,
/// faceted by scenario. Every point carries class="cond-point". Throws
/// ValidationError on an empty summary.
std::string plot_condition_means(const std::vector<ConditionSummary>& summary);

/// Quartile boxes of the two comprehension statements per condition cell,
/// faceted by scenario. Throws ValidationError on empty input.
std::string plot_comprehension(const std::vector<ComprehensionCell>& cells);

// ---------------------------------------------------------------------------
// Raster backend for animated output
// ---------------------------------------------------------------------------

/// Palette-indexed raster frame.
struct IndexedImage {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> pixels;  // row-major palette indices
};

/// 16-color render palette shared by all raster frames; index 0 is the
/// background.
const std::array<std::array<std::uint8_t, 3>, 16>& render_palette();

/// Rasterize one record with the same layout as render_frame.
IndexedImage rasterize_frame(const TraceRecord& record, const ScenarioSpec& spec,
                             const RenderStyle& style);

/// Encode frames as an animated GIF (infinite loop) with a fixed per-frame
/// delay in centiseconds. Throws ValidationError on empty input or size
/// mismatches.
std::vector<std::uint8_t> gif_encode(const std::vector<IndexedImage>& frames,
                                     const std::array<std::array<std::uint8_t, 3>, 16>& palette,
                                     int delay_cs);

}  // namespace legibot

#endif  // LEGIBOT_RENDER_HPP
