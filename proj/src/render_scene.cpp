#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "legibot/errors.hpp"
#include "legibot/numfmt.hpp"
#include "legibot/render.hpp"

namespace legibot {

namespace {

constexpr double kRadToDeg = 180.0 / M_PI;

/// Shared world->pixel transform; fixed per (spec, style) so every frame of
/// a trace lines up.
struct Camera {
  double min_x = 0.0;
  double max_y = 0.0;
  double scale = 100.0;
  int width_px = 0;
  int height_px = 0;

  double px(double x) const { return (x - min_x) * scale; }
  double py(double y) const { return (max_y - y) * scale; }
};

Camera make_camera(const ScenarioSpec& spec, const RenderStyle& style) {
  double min_x = spec.start.x, max_x = spec.start.x;
  double min_y = spec.start.y, max_y = spec.start.y;
  auto expand = [&](Vec2 p) {
    min_x = std::min(min_x, p.x);
    max_x = std::max(max_x, p.x);
    min_y = std::min(min_y, p.y);
    max_y = std::max(max_y, p.y);
  };
  for (const auto& w : spec.walls) {
    expand(w.a);
    expand(w.b);
  }
  for (const auto& p : spec.obstacle) expand(p);
  expand(spec.observer.position());

  Camera cam;
  cam.min_x = min_x - style.margin_m;
  cam.max_y = max_y + style.margin_m;
  cam.scale = style.scale_px_per_m;
  cam.width_px = static_cast<int>(std::ceil((max_x - min_x + 2.0 * style.margin_m) * cam.scale));
  cam.height_px = static_cast<int>(std::ceil((max_y - min_y + 2.0 * style.margin_m) * cam.scale));
  return cam;
}

void svg_open(std::ostringstream& out, int width, int height, const std::string& background) {
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\""
      << height << "\" viewBox=\"0 0 " << width << " " << height << "\">\n";
  out << "<rect width=\"" << width << "\" height=\"" << height << "\" fill=\"" << background
      << "\"/>\n";
}

void svg_line(std::ostringstream& out, const Camera& cam, Vec2 a, Vec2 b,
              const std::string& color, double width_px) {
  out << "<line x1=\"" << fmt_fixed(cam.px(a.x)) << "\" y1=\"" << fmt_fixed(cam.py(a.y))
      << "\" x2=\"" << fmt_fixed(cam.px(b.x)) << "\" y2=\"" << fmt_fixed(cam.py(b.y))
      << "\" stroke=\"" << color << "\" stroke-width=\"" << fmt_fixed(width_px)
      << "\" stroke-linecap=\"round\"/>\n";
}

void svg_polygon(std::ostringstream& out, const Camera& cam, const std::vector<Vec2>& pts,
                 const std::string& fill, const std::string& stroke, double stroke_w,
                 const std::string& dasharray) {
  out << "<polygon points=\"";
  for (size_t i = 0; i < pts.size(); ++i) {
    out << (i ? " " : "") << fmt_fixed(cam.px(pts[i].x)) << "," << fmt_fixed(cam.py(pts[i].y));
  }
  out << "\" fill=\"" << fill << "\" stroke=\"" << stroke << "\" stroke-width=\""
      << fmt_fixed(stroke_w) << "\"";
  if (!dasharray.empty()) out << " stroke-dasharray=\"" << dasharray << "\"";
  out << "/>\n";
}

void svg_circle(std::ostringstream& out, double cx, double cy, double r,
                const std::string& fill, const std::string& stroke, double stroke_w) {
  out << "<circle cx=\"" << fmt_fixed(cx) << "\" cy=\"" << fmt_fixed(cy) << "\" r=\""
      << fmt_fixed(r) << "\" fill=\"" << fill << "\" stroke=\"" << stroke
      << "\" stroke-width=\"" << fmt_fixed(stroke_w) << "\"/>\n";
}

void svg_text(std::ostringstream& out, double x, double y, const std::string& text,
              const std::string& color, int size, const std::string& anchor = "middle") {
  out << "<text x=\"" << fmt_fixed(x) << "\" y=\"" << fmt_fixed(y) << "\" fill=\"" << color
      << "\" font-family=\"sans-serif\" font-size=\"" << size << "\" text-anchor=\"" << anchor
      << "\">" << text << "</text>\n";
}

/// Robot footprint corners in the world frame.
std::vector<Vec2> robot_outline(const Pose2D& pose, const ScenarioSpec& spec) {
  const double hl = 0.5 * spec.robot_length_m;
  const double hw = 0.5 * spec.robot_width_m;
  const double c = std::cos(pose.heading);
  const double s = std::sin(pose.heading);
  auto corner = [&](double fx, double fy) {
    return Vec2{pose.x + fx * c - fy * s, pose.y + fx * s + fy * c};
  };
  return {corner(hl, hw), corner(hl, -hw), corner(-hl, -hw), corner(-hl, hw)};
}

Vec2 robot_point(const Pose2D& pose, double fx, double fy) {
  const double c = std::cos(pose.heading);
  const double s = std::sin(pose.heading);
  return {pose.x + fx * c - fy * s, pose.y + fx * s + fy * c};
}

}  // namespace

std::string render_frame(const TraceRecord& record, const ScenarioSpec& spec,
                         const RenderStyle& style) {
  const Camera cam = make_camera(spec, style);
  std::ostringstream out;
  svg_open(out, cam.width_px, cam.height_px, style.background);

  if (!spec.obstacle.empty())
    svg_polygon(out, cam, spec.obstacle, style.obstacle_color, style.obstacle_color,
                1.0, "");
  for (const auto& w : spec.walls) {
    svg_line(out, cam, w.a, w.b, style.wall_color, 0.08 * cam.scale);
  }

  const struct { const Pose2D& pose; const char* label; } goals[] = {
      {spec.goal1, "G1"}, {spec.goal2, "G2"}};
  for (const auto& g : goals) {
    svg_circle(out, cam.px(g.pose.x), cam.py(g.pose.y), 0.12 * cam.scale, "none",
               style.goal_color, 2.0);
    svg_text(out, cam.px(g.pose.x), cam.py(g.pose.y) - 0.2 * cam.scale, g.label,
             style.goal_color, 14);
  }

  // Observer: a dot with a short gaze tick.
  svg_circle(out, cam.px(spec.observer.x), cam.py(spec.observer.y), 0.14 * cam.scale,
             style.observer_color, style.observer_color, 1.0);
  const Vec2 gaze{spec.observer.x + 0.3 * std::cos(spec.observer.heading),
                  spec.observer.y + 0.3 * std::sin(spec.observer.heading)};
  svg_line(out, cam, spec.observer.position(), gaze, style.observer_color, 2.0);

  // The projected arrow goes under the robot, like a floor projection.
  const ArrowState& arrow = record.cue.arrow;
  if (arrow.visible && !arrow.polygon.empty()) {
    svg_polygon(out, cam, arrow.polygon, arrow.lit ? style.arrow_color : "none",
                style.arrow_color, 2.0,
                arrow.fill == ArrowFill::Dashed ? "6 4" : "");
  }

  svg_polygon(out, cam, robot_outline(record.pose, spec), style.robot_color,
              style.robot_color, 1.0, "");
  const Vec2 nose = robot_point(record.pose, 0.5 * spec.robot_length_m, 0.0);
  svg_line(out, cam, record.pose.position(), nose, style.background, 2.0);

  // Side LEDs: always outlined, filled only while that channel is lit.
  const LightState& lights = record.cue.lights;
  const struct { double side; bool on; } leds[] = {
      {+1.0, lights.left_active && lights.lit}, {-1.0, lights.right_active && lights.lit}};
  for (const auto& led : leds) {
    const Vec2 at = robot_point(record.pose, 0.0, led.side * 0.5 * spec.robot_width_m);
    svg_circle(out, cam.px(at.x), cam.py(at.y), 0.06 * cam.scale,
               led.on ? style.light_color : "none", style.light_color, 2.0);
  }

  out << "</svg>\n";
  return out.str();
}

std::vector<std::string> render_animation(const Trace& trace, const ScenarioSpec& spec,
                                          const std::string& out_dir,
                                          const std::string& format,
                                          const RenderStyle& style) {
  if (trace.records.empty()) throw ValidationError("render: empty trace");
  if (style.frame_stride < 1) throw ValidationError("render: frame_stride must be >= 1");
  if (format != "frames" && format != "gif")
    throw ValidationError("render: unknown format '" + format + "'");

  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) throw RuntimeError("render: cannot create directory " + out_dir);

  std::vector<std::string> written;
  if (format == "frames") {
    int frame = 0;
    for (size_t i = 0; i < trace.records.size(); i += style.frame_stride) {
      char name[32];
      std::snprintf(name, sizeof(name), "frame_%06d.svg", frame++);
      const std::string path = out_dir + "/" + name;
      std::ofstream out(path, std::ios::binary);
      if (!out) throw RuntimeError("render: cannot write " + path);
      out << render_frame(trace.records[i], spec, style);
      written.push_back(path);
    }
    return written;
  }

  std::vector<IndexedImage> frames;
  for (size_t i = 0; i < trace.records.size(); i += style.frame_stride) {
    frames.push_back(rasterize_frame(trace.records[i], spec, style));
  }
  const int delay_cs =
      std::max(1, static_cast<int>(std::lround(100.0 * trace.header.dt * style.frame_stride)));
  const std::vector<std::uint8_t> bytes = gif_encode(frames, render_palette(), delay_cs);
  const std::string path = out_dir + "/animation.gif";
  std::ofstream out(path, std::ios::binary);
  if (!out) throw RuntimeError("render: cannot write " + path);
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
  if (!out) throw RuntimeError("render: failed writing " + path);
  written.push_back(path);
  return written;
}

}  // namespace legibot
