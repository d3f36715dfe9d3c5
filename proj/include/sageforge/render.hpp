#pragma once

// Deterministic software rasterizer for scene overviews: an orthographic
// top-down map plus four corner axonometric views. No lighting, no textures;
// objects are flat-colored by category with a height shade. The images feed
// the optional remote critic and documentation; the built-in rule critic
// works from scene state directly.

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "sageforge/scene.hpp"

namespace sageforge {

struct Image {
  int width = 0, height = 0;
  std::vector<uint8_t> data;  // rgb, row-major, top row first

  Image() = default;
  Image(int w, int h, std::array<uint8_t, 3> fill_color) : width(w), height(h) {
    data.resize(size_t(w) * h * 3);
    for (size_t i = 0; i < data.size(); i += 3) {
      data[i] = fill_color[0];
      data[i + 1] = fill_color[1];
      data[i + 2] = fill_color[2];
    }
  }

  void set(int x, int y, std::array<uint8_t, 3> c) {
    if (x < 0 || y < 0 || x >= width || y >= height) return;
    size_t i = (size_t(y) * width + x) * 3;
    data[i] = c[0];
    data[i + 1] = c[1];
    data[i + 2] = c[2];
  }
};

// Binary PPM (P6): tiny, lossless, and byte-stable.
inline std::string encode_ppm(const Image& img) {
  std::string out = "P6\n" + std::to_string(img.width) + " " +
                    std::to_string(img.height) + "\n255\n";
  out.append(reinterpret_cast<const char*>(img.data.data()), img.data.size());
  return out;
}

namespace detail {

inline constexpr std::array<uint8_t, 3> kBackground{255, 255, 255};
inline constexpr std::array<uint8_t, 3> kFloor{230, 230, 230};
inline constexpr std::array<uint8_t, 3> kWall{40, 40, 40};

// Category color: channels confined to [50, 205] so no object color collides
// with the floor, wall, or background constants.
inline std::array<uint8_t, 3> category_color(const std::string& category) {
  uint64_t h = fnv1a64(category);
  auto chan = [&](int k) { return uint8_t(50 + ((h >> (k * 8)) & 0xff) % 156); };
  return {chan(0), chan(1), chan(2)};
}

inline std::array<uint8_t, 3> shade(std::array<uint8_t, 3> c, double f) {
  auto s = [&](uint8_t v) { return uint8_t(std::clamp(v * f, 0.0, 255.0)); };
  return {s(c[0]), s(c[1]), s(c[2])};
}

// Fill a convex polygon given a point-to-pixel mapping already applied
// (polygon in pixel coordinates, y down).
inline void fill_convex(Image& img, const Polygon2& px, std::array<uint8_t, 3> c) {
  if (px.size() < 3) return;
  double min_x = 1e30, min_y = 1e30, max_x = -1e30, max_y = -1e30;
  for (const Vec2& p : px) {
    min_x = std::min(min_x, p.x);
    min_y = std::min(min_y, p.y);
    max_x = std::max(max_x, p.x);
    max_y = std::max(max_y, p.y);
  }
  int x0 = std::max(0, int(std::floor(min_x))), x1 = std::min(img.width - 1, int(std::ceil(max_x)));
  int y0 = std::max(0, int(std::floor(min_y))), y1 = std::min(img.height - 1, int(std::ceil(max_y)));
  // The polygon may wind either way in pixel space; normalize to CCW.
  Polygon2 poly = px;
  if (polygon_area(poly) < 0) std::reverse(poly.begin(), poly.end());
  for (int y = y0; y <= y1; ++y)
    for (int x = x0; x <= x1; ++x)
      if (point_in_convex(poly, {x + 0.5, y + 0.5})) img.set(x, y, c);
}

inline void draw_segment(Image& img, Vec2 a, Vec2 b, double radius,
                         std::array<uint8_t, 3> c) {
  double min_x = std::min(a.x, b.x) - radius, max_x = std::max(a.x, b.x) + radius;
  double min_y = std::min(a.y, b.y) - radius, max_y = std::max(a.y, b.y) + radius;
  int x0 = std::max(0, int(std::floor(min_x))), x1 = std::min(img.width - 1, int(std::ceil(max_x)));
  int y0 = std::max(0, int(std::floor(min_y))), y1 = std::min(img.height - 1, int(std::ceil(max_y)));
  for (int y = y0; y <= y1; ++y)
    for (int x = x0; x <= x1; ++x)
      if (dist_point_segment({x + 0.5, y + 0.5}, a, b) <= radius) img.set(x, y, c);
}

}  // namespace detail

struct RenderedViews {
  Image top_down;
  std::array<Image, 4> corners;
  double px_per_meter = 0;  // top-down scale, for area oracles
};

inline RenderedViews render_views(const Scene& scene, int size = 512) {
  RenderedViews out;
  // World bounds: rooms, falling back to object footprints, then a unit box.
  Aabb2 bounds;
  for (const Room& r : scene.plan.rooms)
    for (const Vec2& p : r.polygon) bounds.expand(p);
  for (const SceneObject& o : scene.objects)
    if (!o.mesh.empty())
      for (const Vec2& p : world_obb(o).footprint()) bounds.expand(p);
  if (bounds.min.x > bounds.max.x) {
    bounds.expand({0, 0});
    bounds.expand({1, 1});
  }
  const double margin = 0.25;
  Vec2 span{bounds.max.x - bounds.min.x + 2 * margin,
            bounds.max.y - bounds.min.y + 2 * margin};
  double scale = size / std::max({span.x, span.y, 1e-6});
  Vec2 origin{bounds.min.x - margin, bounds.min.y - margin};
  auto to_px = [&](Vec2 w) -> Vec2 {
    return {(w.x - origin.x) * scale, size - (w.y - origin.y) * scale};
  };
  out.px_per_meter = scale;

  double wall_h = 2.6;
  for (const Room& r : scene.plan.rooms) wall_h = std::max(wall_h, r.wall_height);

  // --- Top-down ---
  Image& top = out.top_down;
  top = Image(size, size, detail::kBackground);
  for (const Room& r : scene.plan.rooms) {
    Polygon2 px;
    for (const Vec2& p : r.polygon) px.push_back(to_px(p));
    detail::fill_convex(top, px, detail::kFloor);
  }
  for (const Room& r : scene.plan.rooms)
    for (size_t i = 0; i < r.polygon.size(); ++i)
      detail::draw_segment(top, to_px(r.polygon[i]),
                           to_px(r.polygon[(i + 1) % r.polygon.size()]), 1.5,
                           detail::kWall);
  // Door spans drawn as floor-colored gaps over the wall strokes.
  for (const Door& d : scene.plan.doors)
    detail::draw_segment(top, to_px(d.p0), to_px(d.p1), 2.0, detail::kFloor);
  // Objects: lower tops first so taller furniture paints over its base.
  std::vector<const SceneObject*> order;
  for (const SceneObject& o : scene.objects)
    if (!o.mesh.empty()) order.push_back(&o);
  std::stable_sort(order.begin(), order.end(),
                   [](const SceneObject* a, const SceneObject* b) {
                     double ta = world_obb(*a).top(), tb = world_obb(*b).top();
                     if (ta != tb) return ta < tb;
                     return a->id < b->id;
                   });
  for (const SceneObject* o : order) {
    Obb box = world_obb(*o);
    Polygon2 px;
    for (const Vec2& p : box.footprint()) px.push_back(to_px(p));
    double f = std::clamp(0.55 + 0.45 * box.top() / wall_h, 0.0, 1.0);
    detail::fill_convex(top, px, detail::shade(detail::category_color(o->category), f));
  }

  // --- Corner axonometric views ---
  Vec2 c_lo = bounds.min, c_hi = bounds.max;
  Vec2 center2{(c_lo.x + c_hi.x) / 2, (c_lo.y + c_hi.y) / 2};
  double diag = std::max(1e-6, (c_hi - c_lo).norm());
  std::array<Vec2, 4> corners2{Vec2{c_lo.x, c_lo.y}, Vec2{c_hi.x, c_lo.y},
                               Vec2{c_hi.x, c_hi.y}, Vec2{c_lo.x, c_hi.y}};
  for (int ci = 0; ci < 4; ++ci) {
    Vec2 cxy = corners2[size_t(ci)];
    Vec2 away = (cxy - center2).normalized();
    Vec3 eye{cxy.x + away.x * diag * 0.4, cxy.y + away.y * diag * 0.4, diag * 0.8};
    Vec3 look{center2.x, center2.y, wall_h * 0.3};
    Vec3 fwd = (look - eye).normalized();
    Vec3 right = fwd.cross({0, 0, 1}).normalized();
    Vec3 up = right.cross(fwd);
    auto project = [&](Vec3 p) -> Vec3 {  // (u, v, depth)
      Vec3 q = p - look;
      return {q.dot(right), q.dot(up), q.dot(fwd)};
    };
    // Fit the room volume into the frame.
    double min_u = 1e30, max_u = -1e30, min_v = 1e30, max_v = -1e30;
    auto fit = [&](Vec3 p) {
      Vec3 pr = project(p);
      min_u = std::min(min_u, pr.x);
      max_u = std::max(max_u, pr.x);
      min_v = std::min(min_v, pr.y);
      max_v = std::max(max_v, pr.y);
    };
    for (double zx : {0.0, wall_h}) {
      fit({c_lo.x, c_lo.y, zx});
      fit({c_hi.x, c_lo.y, zx});
      fit({c_hi.x, c_hi.y, zx});
      fit({c_lo.x, c_hi.y, zx});
    }
    double vscale = size * 0.9 / std::max({max_u - min_u, max_v - min_v, 1e-6});
    Vec2 voff{(min_u + max_u) / 2, (min_v + max_v) / 2};
    auto vpx = [&](Vec3 p) -> Vec2 {
      Vec3 pr = project(p);
      return {size / 2.0 + (pr.x - voff.x) * vscale,
              size / 2.0 - (pr.y - voff.y) * vscale};
    };

    Image& img = out.corners[size_t(ci)];
    img = Image(size, size, detail::kBackground);
    // Far walls first (interior faces visible from this corner).
    for (const Room& r : scene.plan.rooms)
      for (size_t i = 0; i < r.polygon.size(); ++i) {
        Vec2 a = r.polygon[i], b = r.polygon[(i + 1) % r.polygon.size()];
        Vec2 dir = (b - a).normalized();
        Vec2 outward{dir.y, -dir.x};  // CCW polygon: interior on the left
        if (outward.x * fwd.x + outward.y * fwd.y <= 0) continue;
        Polygon2 quad{vpx({a.x, a.y, 0}), vpx({b.x, b.y, 0}),
                      vpx({b.x, b.y, r.wall_height}), vpx({a.x, a.y, r.wall_height})};
        detail::fill_convex(img, quad, detail::shade(detail::kFloor, 0.82));
      }
    for (const Room& r : scene.plan.rooms) {
      Polygon2 px;
      for (const Vec2& p : r.polygon) px.push_back(vpx({p.x, p.y, 0}));
      detail::fill_convex(img, px, detail::kFloor);
    }
    // Objects far-to-near along the view direction, as OBB silhouettes.
    std::vector<std::pair<double, const SceneObject*>> depth_order;
    for (const SceneObject& o : scene.objects) {
      if (o.mesh.empty()) continue;
      Obb box = world_obb(o);
      depth_order.emplace_back(project(box.center).z, &o);
    }
    std::stable_sort(depth_order.begin(), depth_order.end(),
                     [](const auto& a, const auto& b) {
                       if (a.first != b.first) return a.first < b.first;
                       return a.second->id < b.second->id;
                     });
    for (const auto& [depth, o] : depth_order) {
      Obb box = world_obb(*o);
      std::vector<Vec2> pts;
      for (int sx : {-1, 1})
        for (int sy : {-1, 1})
          for (int sz : {-1, 1}) {
            Vec3 local{box.half.x * sx, box.half.y * sy, box.half.z * sz};
            pts.push_back(vpx(box.center + box.orientation.rotate(local)));
          }
      Polygon2 hull = convex_hull(pts);
      double f = std::clamp(0.6 + 0.4 * box.top() / wall_h, 0.0, 1.0);
      detail::fill_convex(img, hull, detail::shade(detail::category_color(o->category), f));
    }
  }
  return out;
}

}  // namespace sageforge
