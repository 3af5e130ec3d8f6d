#include <algorithm>
#include <cmath>
#include <cstring>

#include "legibot/errors.hpp"
#include "legibot/render.hpp"

namespace legibot {

namespace {

// Palette slots. Index 0 is the background and doubles as the GIF
// background color.
enum PaletteIndex : std::uint8_t {
  kBg = 0,
  kWall = 1,
  kObstacle = 2,
  kRobot = 3,
  kGoal = 4,
  kObserver = 5,
  kArrow = 6,
  kLight = 7,
  kWhite = 8,
};

struct Raster {
  IndexedImage img;
  double min_x = 0.0;
  double max_y = 0.0;
  double scale = 100.0;

  double px(double x) const { return (x - min_x) * scale; }
  double py(double y) const { return (max_y - y) * scale; }

  void plot(int x, int y, std::uint8_t idx) {
    if (x < 0 || y < 0 || x >= img.width || y >= img.height) return;
    img.pixels[static_cast<size_t>(y) * img.width + x] = idx;
  }

  void disc(double cx, double cy, double r, std::uint8_t idx) {
    const int x0 = static_cast<int>(std::floor(cx - r));
    const int x1 = static_cast<int>(std::ceil(cx + r));
    const int y0 = static_cast<int>(std::floor(cy - r));
    const int y1 = static_cast<int>(std::ceil(cy + r));
    for (int y = y0; y <= y1; ++y) {
      for (int x = x0; x <= x1; ++x) {
        const double dx = x + 0.5 - cx;
        const double dy = y + 0.5 - cy;
        if (dx * dx + dy * dy <= r * r) plot(x, y, idx);
      }
    }
  }

  void ring(double cx, double cy, double r, double w, std::uint8_t idx) {
    const int x0 = static_cast<int>(std::floor(cx - r - w));
    const int x1 = static_cast<int>(std::ceil(cx + r + w));
    const int y0 = static_cast<int>(std::floor(cy - r - w));
    const int y1 = static_cast<int>(std::ceil(cy + r + w));
    for (int y = y0; y <= y1; ++y) {
      for (int x = x0; x <= x1; ++x) {
        const double dx = x + 0.5 - cx;
        const double dy = y + 0.5 - cy;
        const double d = std::sqrt(dx * dx + dy * dy);
        if (std::abs(d - r) <= 0.5 * w) plot(x, y, idx);
      }
    }
  }

  // Thick segment, drawn as discs along the line; step < 1 px keeps it solid.
  void stroke(Vec2 a, Vec2 b, double width_px, std::uint8_t idx) {
    const double ax = px(a.x), ay = py(a.y);
    const double bx = px(b.x), by = py(b.y);
    const double len = std::hypot(bx - ax, by - ay);
    const int steps = std::max(1, static_cast<int>(std::ceil(len / 0.5)));
    for (int i = 0; i <= steps; ++i) {
      const double t = static_cast<double>(i) / steps;
      disc(ax + t * (bx - ax), ay + t * (by - ay), 0.5 * width_px, idx);
    }
  }

  // Even-odd scanline fill over pixel centers.
  void fill_polygon(const std::vector<Vec2>& world_pts, std::uint8_t idx) {
    if (world_pts.size() < 3) return;
    std::vector<double> xs(world_pts.size()), ys(world_pts.size());
    double lo = 1e300, hi = -1e300;
    for (size_t i = 0; i < world_pts.size(); ++i) {
      xs[i] = px(world_pts[i].x);
      ys[i] = py(world_pts[i].y);
      lo = std::min(lo, ys[i]);
      hi = std::max(hi, ys[i]);
    }
    const int y0 = std::max(0, static_cast<int>(std::floor(lo)));
    const int y1 = std::min(img.height - 1, static_cast<int>(std::ceil(hi)));
    std::vector<double> hits;
    for (int y = y0; y <= y1; ++y) {
      const double yc = y + 0.5;
      hits.clear();
      for (size_t i = 0; i < world_pts.size(); ++i) {
        const size_t j = (i + 1) % world_pts.size();
        const double ya = ys[i], yb = ys[j];
        if ((ya <= yc) == (yb <= yc)) continue;
        hits.push_back(xs[i] + (yc - ya) / (yb - ya) * (xs[j] - xs[i]));
      }
      std::sort(hits.begin(), hits.end());
      for (size_t k = 0; k + 1 < hits.size(); k += 2) {
        const int xa = static_cast<int>(std::ceil(hits[k] - 0.5));
        const int xb = static_cast<int>(std::floor(hits[k + 1] - 0.5));
        for (int x = xa; x <= xb; ++x) plot(x, y, idx);
      }
    }
  }

  void stroke_polygon(const std::vector<Vec2>& pts, double width_px, std::uint8_t idx,
                      bool dashed) {
    if (pts.size() < 2) return;
    if (!dashed) {
      for (size_t i = 0; i < pts.size(); ++i) stroke(pts[i], pts[(i + 1) % pts.size()], width_px, idx);
      return;
    }
    // Dash pattern walks the perimeter so corners do not reset the phase.
    const double on_m = 0.06, off_m = 0.04;
    double phase = 0.0;
    for (size_t i = 0; i < pts.size(); ++i) {
      Vec2 a = pts[i];
      const Vec2 b = pts[(i + 1) % pts.size()];
      double remaining = norm(b - a);
      if (remaining <= 0.0) continue;
      const Vec2 dir = (1.0 / remaining) * (b - a);
      while (remaining > 1e-9) {
        const bool on = phase < on_m;
        const double span = std::min(remaining, (on ? on_m : on_m + off_m) - phase);
        if (on) stroke(a, a + span * dir, width_px, idx);
        a = a + span * dir;
        remaining -= span;
        phase += span;
        if (phase >= on_m + off_m) phase -= on_m + off_m;
      }
    }
  }
};

Vec2 robot_point(const Pose2D& pose, double fx, double fy) {
  const double c = std::cos(pose.heading);
  const double s = std::sin(pose.heading);
  return {pose.x + fx * c - fy * s, pose.y + fx * s + fy * c};
}

// ---------------------------------------------------------------------------
// GIF89a writing: LZW with variable code width, 16-color global table.

class BitPacker {
 public:
  void put(std::uint32_t code, int width) {
    acc_ |= static_cast<std::uint64_t>(code) << nbits_;
    nbits_ += width;
    while (nbits_ >= 8) {
      bytes_.push_back(static_cast<std::uint8_t>(acc_ & 0xff));
      acc_ >>= 8;
      nbits_ -= 8;
    }
  }

  std::vector<std::uint8_t> finish() {
    if (nbits_ > 0) bytes_.push_back(static_cast<std::uint8_t>(acc_ & 0xff));
    acc_ = 0;
    nbits_ = 0;
    return std::move(bytes_);
  }

 private:
  std::vector<std::uint8_t> bytes_;
  std::uint64_t acc_ = 0;
  int nbits_ = 0;
};

std::vector<std::uint8_t> lzw_compress(const std::vector<std::uint8_t>& pixels,
                                       int min_code_size) {
  const int clear_code = 1 << min_code_size;
  const int eoi_code = clear_code + 1;

  // Dictionary keyed by (prefix code << 8) | next pixel.
  std::vector<int> dict(4096 << 8, -1);
  int next_code = eoi_code + 1;
  int code_width = min_code_size + 1;

  BitPacker out;
  out.put(static_cast<std::uint32_t>(clear_code), code_width);

  auto reset = [&] {
    std::fill(dict.begin(), dict.end(), -1);
    next_code = eoi_code + 1;
    code_width = min_code_size + 1;
  };
  reset();

  int cur = -1;
  for (std::uint8_t p : pixels) {
    if (cur < 0) {
      cur = p;
      continue;
    }
    const size_t key = (static_cast<size_t>(cur) << 8) | p;
    if (dict[key] >= 0) {
      cur = dict[key];
      continue;
    }
    out.put(static_cast<std::uint32_t>(cur), code_width);
    if (next_code < 4096) {
      dict[key] = next_code++;
      if (next_code - 1 == (1 << code_width) && code_width < 12) ++code_width;
    } else {
      out.put(static_cast<std::uint32_t>(clear_code), code_width);
      reset();
    }
    cur = p;
  }
  if (cur >= 0) out.put(static_cast<std::uint32_t>(cur), code_width);
  out.put(static_cast<std::uint32_t>(eoi_code), code_width);
  return out.finish();
}

void put_u16(std::vector<std::uint8_t>& out, int v) {
  out.push_back(static_cast<std::uint8_t>(v & 0xff));
  out.push_back(static_cast<std::uint8_t>((v >> 8) & 0xff));
}

void put_sub_blocks(std::vector<std::uint8_t>& out, const std::vector<std::uint8_t>& data) {
  size_t off = 0;
  while (off < data.size()) {
    const size_t n = std::min<size_t>(255, data.size() - off);
    out.push_back(static_cast<std::uint8_t>(n));
    out.insert(out.end(), data.begin() + off, data.begin() + off + n);
    off += n;
  }
  out.push_back(0);  // block terminator
}

}  // namespace

const std::array<std::array<std::uint8_t, 3>, 16>& render_palette() {
  static const std::array<std::array<std::uint8_t, 3>, 16> palette = {{
      {0xfd, 0xfd, 0xfb},  // background
      {0x33, 0x33, 0x33},  // walls
      {0x8d, 0x6e, 0x63},  // obstacle
      {0x44, 0x66, 0xaa},  // robot body
      {0x88, 0x88, 0x88},  // goal markers
      {0xaa, 0x44, 0x88},  // observer
      {0x2e, 0xcc, 0x40},  // arrow cue
      {0xff, 0x85, 0x1b},  // light cue
      {0xff, 0xff, 0xff},  // highlights
      {0xdd, 0xdd, 0xdd},
      {0xbb, 0xbb, 0xbb},
      {0x99, 0x99, 0x99},
      {0x77, 0x77, 0x77},
      {0x55, 0x55, 0x55},
      {0x22, 0x22, 0x22},
      {0x00, 0x00, 0x00},
  }};
  return palette;
}

IndexedImage rasterize_frame(const TraceRecord& record, const ScenarioSpec& spec,
                             const RenderStyle& style) {
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

  Raster r;
  r.min_x = min_x - style.margin_m;
  r.max_y = max_y + style.margin_m;
  r.scale = style.scale_px_per_m;
  r.img.width = static_cast<int>(std::ceil((max_x - min_x + 2.0 * style.margin_m) * r.scale));
  r.img.height = static_cast<int>(std::ceil((max_y - min_y + 2.0 * style.margin_m) * r.scale));
  r.img.pixels.assign(static_cast<size_t>(r.img.width) * r.img.height, kBg);

  if (!spec.obstacle.empty()) r.fill_polygon(spec.obstacle, kObstacle);
  for (const auto& w : spec.walls) r.stroke(w.a, w.b, 0.08 * r.scale, kWall);

  for (const Pose2D* goal : {&spec.goal1, &spec.goal2}) {
    r.ring(r.px(goal->x), r.py(goal->y), 0.12 * r.scale, 2.0, kGoal);
  }
  r.disc(r.px(spec.observer.x), r.py(spec.observer.y), 0.14 * r.scale, kObserver);
  const Vec2 gaze{spec.observer.x + 0.3 * std::cos(spec.observer.heading),
                  spec.observer.y + 0.3 * std::sin(spec.observer.heading)};
  r.stroke(spec.observer.position(), gaze, 2.0, kObserver);

  const ArrowState& arrow = record.cue.arrow;
  if (arrow.visible && !arrow.polygon.empty()) {
    if (arrow.lit) r.fill_polygon(arrow.polygon, kArrow);
    r.stroke_polygon(arrow.polygon, 2.0, kArrow, arrow.fill == ArrowFill::Dashed);
  }

  const double hl = 0.5 * spec.robot_length_m;
  const double hw = 0.5 * spec.robot_width_m;
  r.fill_polygon({robot_point(record.pose, hl, hw), robot_point(record.pose, hl, -hw),
                  robot_point(record.pose, -hl, -hw), robot_point(record.pose, -hl, hw)},
                 kRobot);
  r.stroke(record.pose.position(), robot_point(record.pose, hl, 0.0), 2.0, kWhite);

  const LightState& lights = record.cue.lights;
  const struct { double side; bool on; } leds[] = {
      {+1.0, lights.left_active && lights.lit}, {-1.0, lights.right_active && lights.lit}};
  for (const auto& led : leds) {
    const Vec2 at = robot_point(record.pose, 0.0, led.side * hw);
    if (led.on) {
      r.disc(r.px(at.x), r.py(at.y), 0.06 * r.scale, kLight);
    } else {
      r.ring(r.px(at.x), r.py(at.y), 0.06 * r.scale, 2.0, kLight);
    }
  }
  return r.img;
}

std::vector<std::uint8_t> gif_encode(const std::vector<IndexedImage>& frames,
                                     const std::array<std::array<std::uint8_t, 3>, 16>& palette,
                                     int delay_cs) {
  if (frames.empty()) throw ValidationError("gif: no frames");
  if (delay_cs < 1) throw ValidationError("gif: delay must be >= 1 cs");
  const int width = frames[0].width;
  const int height = frames[0].height;
  for (const auto& f : frames) {
    if (f.width != width || f.height != height)
      throw ValidationError("gif: frame dimensions differ");
    if (f.pixels.size() != static_cast<size_t>(width) * height)
      throw ValidationError("gif: pixel buffer size mismatch");
    for (std::uint8_t p : f.pixels) {
      if (p >= 16) throw ValidationError("gif: pixel index out of palette range");
    }
  }

  std::vector<std::uint8_t> out;
  out.insert(out.end(), {'G', 'I', 'F', '8', '9', 'a'});
  put_u16(out, width);
  put_u16(out, height);
  // Global color table present, 8-bit color resolution, 2^(3+1)=16 entries.
  out.push_back(0xf3);
  out.push_back(0);  // background color index
  out.push_back(0);  // pixel aspect ratio
  for (const auto& rgb : palette) out.insert(out.end(), rgb.begin(), rgb.end());

  // Application extension: loop forever.
  out.insert(out.end(), {0x21, 0xff, 0x0b});
  const char app[] = "NETSCAPE2.0";
  out.insert(out.end(), app, app + 11);
  out.insert(out.end(), {0x03, 0x01, 0x00, 0x00, 0x00});

  for (const auto& frame : frames) {
    // Graphic control: keep previous frame in place, no transparency.
    out.insert(out.end(), {0x21, 0xf9, 0x04, 0x04});
    put_u16(out, delay_cs);
    out.push_back(0);  // transparent color index (unused)
    out.push_back(0);  // terminator

    out.push_back(0x2c);  // image descriptor
    put_u16(out, 0);
    put_u16(out, 0);
    put_u16(out, width);
    put_u16(out, height);
    out.push_back(0);  // no local color table, not interlaced

    const int min_code_size = 4;  // 16-color palette
    out.push_back(static_cast<std::uint8_t>(min_code_size));
    put_sub_blocks(out, lzw_compress(frame.pixels, min_code_size));
  }

  out.push_back(0x3b);  // trailer
  return out;
}

}  // namespace legibot
