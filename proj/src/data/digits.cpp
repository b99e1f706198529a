#include "cfs/data.hpp"

#include "cfs/errors.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>

namespace cfs {

namespace {

struct Point {
  double x;
  double y;
};

using Stroke = std::vector<Point>;
using Glyph = std::vector<Stroke>;

// Elliptical arc in the unit box (y down), angles in degrees, 0 = +x,
// increasing clockwise on screen.
Stroke arc(double cx, double cy, double rx, double ry, double from, double to, int segments = 14) {
  Stroke s;
  for (int i = 0; i <= segments; ++i) {
    const double t = (from + (to - from) * i / segments) * std::numbers::pi / 180.0;
    s.push_back({cx + rx * std::cos(t), cy + ry * std::sin(t)});
  }
  return s;
}

Stroke join(Stroke a, const Stroke& b) {
  a.insert(a.end(), b.begin(), b.end());
  return a;
}

Glyph glyph(int digit, bool variant) {
  switch (digit) {
    case 0:
      return {arc(0.5, 0.5, 0.3, 0.44, 0, 360, 24)};
    case 1:
      if (variant) return {{{0.32, 0.22}, {0.52, 0.04}, {0.52, 0.96}}};
      return {{{0.5, 0.04}, {0.5, 0.96}}};
    case 2:
      return {join(arc(0.5, 0.3, 0.3, 0.26, 200, 360 + 20, 10),
                   Stroke{{0.2, 0.95}, {variant ? 0.9 : 0.84, 0.95}})};
    case 3:
      return {join(arc(0.48, 0.27, 0.28, 0.22, 200, 450, 12),
                   arc(0.48, 0.72, 0.32, 0.24, 270, 520, 12))};
    case 4:
      if (variant) return {{{0.2, 0.05}, {0.15, 0.6}, {0.85, 0.6}}, {{0.66, 0.3}, {0.66, 0.96}}};
      return {{{0.66, 0.96}, {0.66, 0.04}, {0.14, 0.64}, {0.88, 0.64}}};
    case 5:
      return {join(Stroke{{0.8, 0.05}, {0.27, 0.05}, {0.22, 0.44}},
                   arc(0.5, 0.67, 0.32, 0.28, 220, 500, 12))};
    case 6:
      return {join(Stroke{{0.72, 0.04}, {0.42, 0.3}},
                   arc(0.5, 0.7, 0.29, 0.26, 200, 200 + 360, 20))};
    case 7:
      if (variant) return {{{0.14, 0.05}, {0.86, 0.05}, {0.42, 0.96}}, {{0.3, 0.5}, {0.72, 0.5}}};
      return {{{0.14, 0.05}, {0.86, 0.05}, {0.42, 0.96}}};
    case 8:
      return {arc(0.5, 0.26, 0.24, 0.21, 0, 360, 18), arc(0.5, 0.71, 0.3, 0.25, 0, 360, 20)};
    case 9:
      return {join(arc(0.48, 0.3, 0.28, 0.25, 0, 360, 18),
                   Stroke{{0.76, 0.3}, {variant ? 0.62 : 0.7, 0.96}})};
    default:
      throw ContractError("glyph: digit out of range");
  }
}

double segment_distance(Point p, Point a, Point b) {
  const double vx = b.x - a.x;
  const double vy = b.y - a.y;
  const double len2 = vx * vx + vy * vy;
  double t = len2 > 0.0 ? ((p.x - a.x) * vx + (p.y - a.y) * vy) / len2 : 0.0;
  t = std::clamp(t, 0.0, 1.0);
  const double dx = p.x - (a.x + t * vx);
  const double dy = p.y - (a.y + t * vy);
  return std::sqrt(dx * dx + dy * dy);
}

Matrix render_one(int digit, std::size_t side, Rng& rng) {
  const Glyph base = glyph(digit, rng.uniform() < 0.35);
  const double s = static_cast<double>(side);
  // The glyph box maps to roughly the central 20/28 of the frame.
  const double box = s * rng.uniform(0.62, 0.74);
  const double aspect = rng.uniform(0.8, 1.1);
  const double angle = rng.uniform(-0.22, 0.22);
  const double shear = rng.uniform(-0.25, 0.25);
  const double cx = s / 2.0 + rng.uniform(-0.05, 0.05) * s;
  const double cy = s / 2.0 + rng.uniform(-0.05, 0.05) * s;
  const double width = s / 28.0 * rng.uniform(1.0, 1.9);
  const double jitter = 0.035;

  std::vector<Stroke> strokes;
  for (const Stroke& stroke : base) {
    Stroke out;
    for (Point p : stroke) {
      double x = (p.x - 0.5 + rng.uniform(-jitter, jitter)) * box * aspect;
      double y = (p.y - 0.5 + rng.uniform(-jitter, jitter)) * box;
      x += shear * y;
      const double rx = x * std::cos(angle) - y * std::sin(angle);
      const double ry = x * std::sin(angle) + y * std::cos(angle);
      out.push_back({cx + rx, cy + ry});
    }
    strokes.push_back(std::move(out));
  }

  Matrix img = Matrix::Zero(1, static_cast<Eigen::Index>(side * side));
  for (std::size_t r = 0; r < side; ++r) {
    for (std::size_t c = 0; c < side; ++c) {
      const Point p{static_cast<double>(c) + 0.5, static_cast<double>(r) + 0.5};
      double best = 1e9;
      for (const Stroke& stroke : strokes) {
        for (std::size_t i = 0; i + 1 < stroke.size(); ++i) {
          best = std::min(best, segment_distance(p, stroke[i], stroke[i + 1]));
        }
      }
      // Linear falloff over one pixel outside the stroke core.
      const double v = std::clamp(width - best + 0.5, 0.0, 1.0);
      img(0, static_cast<Eigen::Index>(r * side + c)) = v;
    }
  }
  const double peak = img.maxCoeff();
  if (peak > 0.0) img /= peak;
  return img;
}

}  // namespace

ImageSet render_digits(std::size_t count, std::size_t side, Rng& rng) {
  if (side < 8) throw ContractError("render_digits: side must be >= 8");
  ImageSet set;
  set.side = side;
  set.pixels.resize(static_cast<Eigen::Index>(count), static_cast<Eigen::Index>(side * side));
  std::vector<std::size_t> order;
  for (std::size_t i = 0; i < count; ++i) {
    if (order.empty()) {
      order = rng.permutation(10);
    }
    const int digit = static_cast<int>(order.back());
    order.pop_back();
    set.labels.push_back(digit);
    set.pixels.row(static_cast<Eigen::Index>(i)) = render_one(digit, side, rng);
  }
  return set;
}

}  // namespace cfs
