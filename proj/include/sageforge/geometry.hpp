#pragma once
// Small geometry kit: Vec2/Vec3, quaternions, poses, convex 2D polygon
// helpers, oriented bounding boxes with SAT overlap, and triangle meshes.
// Coordinates are metric, +Z up, quaternions stored (w, x, y, z).

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <optional>
#include <tuple>
#include <vector>

#include "sageforge/common.hpp"

namespace sageforge {

// ---------------------------------------------------------------------------
// Vectors

struct Vec2 {
  double x = 0, y = 0;
  Vec2 operator+(Vec2 o) const { return {x + o.x, y + o.y}; }
  Vec2 operator-(Vec2 o) const { return {x - o.x, y - o.y}; }
  Vec2 operator*(double s) const { return {x * s, y * s}; }
  double dot(Vec2 o) const { return x * o.x + y * o.y; }
  double cross(Vec2 o) const { return x * o.y - y * o.x; }
  double norm() const { return std::sqrt(x * x + y * y); }
  Vec2 normalized() const {
    double n = norm();
    return n > 0 ? Vec2{x / n, y / n} : Vec2{0, 0};
  }
};

struct Vec3 {
  double x = 0, y = 0, z = 0;
  Vec3 operator+(Vec3 o) const { return {x + o.x, y + o.y, z + o.z}; }
  Vec3 operator-(Vec3 o) const { return {x - o.x, y - o.y, z - o.z}; }
  Vec3 operator*(double s) const { return {x * s, y * s, z * s}; }
  Vec3 operator-() const { return {-x, -y, -z}; }
  double dot(Vec3 o) const { return x * o.x + y * o.y + z * o.z; }
  Vec3 cross(Vec3 o) const {
    return {y * o.z - z * o.y, z * o.x - x * o.z, x * o.y - y * o.x};
  }
  double norm() const { return std::sqrt(dot(*this)); }
  Vec3 normalized() const {
    double n = norm();
    return n > 1e-12 ? Vec3{x / n, y / n, z / n} : Vec3{0, 0, 0};
  }
  Vec2 xy() const { return {x, y}; }
};

// ---------------------------------------------------------------------------
// Quaternion (w, x, y, z)

struct Quat {
  double w = 1, x = 0, y = 0, z = 0;

  static Quat identity() { return {}; }

  static Quat from_axis_angle(Vec3 axis, double rad) {
    Vec3 a = axis.normalized();
    double h = rad * 0.5, s = std::sin(h);
    return {std::cos(h), a.x * s, a.y * s, a.z * s};
  }

  static Quat from_yaw(double rad) { return from_axis_angle({0, 0, 1}, rad); }

  Quat operator*(const Quat& o) const {
    return {w * o.w - x * o.x - y * o.y - z * o.z,
            w * o.x + x * o.w + y * o.z - z * o.y,
            w * o.y - x * o.z + y * o.w + z * o.x,
            w * o.z + x * o.y - y * o.x + z * o.w};
  }

  Quat conjugate() const { return {w, -x, -y, -z}; }

  double dot(const Quat& o) const { return w * o.w + x * o.x + y * o.y + z * o.z; }

  double norm() const { return std::sqrt(dot(*this)); }

  Quat normalized() const {
    double n = norm();
    if (n < 1e-12) return identity();
    return {w / n, x / n, y / n, z / n};
  }

  Vec3 rotate(Vec3 v) const {
    Vec3 u{x, y, z};
    Vec3 t = u.cross(v) * 2.0;
    return v + t * w + u.cross(t);
  }

  // Yaw of the rotated +X axis projected to the ground plane.
  double yaw() const {
    Vec3 fx = rotate({1, 0, 0});
    return std::atan2(fx.y, fx.x);
  }
};

// Geodesic angle between orientations, in degrees.
inline double quat_angle_deg(const Quat& a, const Quat& b) {
  double d = std::min(1.0, std::abs(a.normalized().dot(b.normalized())));
  return rad2deg(2.0 * std::acos(d));
}

// ---------------------------------------------------------------------------
// Pose

struct Pose {
  Vec3 position{};
  Quat orientation{};

  Vec3 apply(Vec3 local) const { return position + orientation.rotate(local); }

  static Pose at(double x, double y, double z, double yaw = 0) {
    return {{x, y, z}, Quat::from_yaw(yaw)};
  }
};

// ---------------------------------------------------------------------------
// Convex 2D polygon helpers. Polygons are CCW vertex loops.

using Polygon2 = std::vector<Vec2>;

inline double polygon_area(const Polygon2& p) {
  double a = 0;
  for (size_t i = 0; i < p.size(); ++i) {
    Vec2 u = p[i], v = p[(i + 1) % p.size()];
    a += u.cross(v);
  }
  return 0.5 * a;
}

inline Vec2 polygon_centroid(const Polygon2& p) {
  if (p.empty()) return {};
  double a = 0;
  Vec2 c{0, 0};
  for (size_t i = 0; i < p.size(); ++i) {
    Vec2 u = p[i], v = p[(i + 1) % p.size()];
    double w = u.cross(v);
    a += w;
    c = c + (u + v) * w;
  }
  if (std::abs(a) < 1e-12) {  // degenerate: average the vertices
    Vec2 m{0, 0};
    for (Vec2 q : p) m = m + q;
    return m * (1.0 / double(p.size()));
  }
  return c * (1.0 / (3.0 * a));
}

// Andrew monotone chain; returns CCW hull without repeated endpoint.
inline Polygon2 convex_hull(std::vector<Vec2> pts) {
  std::sort(pts.begin(), pts.end(), [](Vec2 a, Vec2 b) {
    return a.x < b.x || (a.x == b.x && a.y < b.y);
  });
  pts.erase(std::unique(pts.begin(), pts.end(),
                        [](Vec2 a, Vec2 b) { return a.x == b.x && a.y == b.y; }),
            pts.end());
  size_t n = pts.size();
  if (n <= 2) return pts;
  std::vector<Vec2> h(2 * n);
  size_t k = 0;
  for (size_t i = 0; i < n; ++i) {
    while (k >= 2 && (h[k - 1] - h[k - 2]).cross(pts[i] - h[k - 2]) <= 0) --k;
    h[k++] = pts[i];
  }
  for (size_t i = n - 1, t = k + 1; i-- > 0;) {
    while (k >= t && (h[k - 1] - h[k - 2]).cross(pts[i] - h[k - 2]) <= 0) --k;
    h[k++] = pts[i];
  }
  h.resize(k - 1);
  return h;
}

inline double dist_point_segment(Vec2 p, Vec2 a, Vec2 b) {
  Vec2 ab = b - a;
  double t = ab.dot(ab) > 1e-18 ? std::clamp((p - a).dot(ab) / ab.dot(ab), 0.0, 1.0) : 0.0;
  return (p - (a + ab * t)).norm();
}

// Signed distance of a point to the polygon boundary: positive inside,
// negative outside. Degenerate polygons (point, segment) are always
// "outside" by the distance to them.
inline double signed_dist_inside(const Polygon2& poly, Vec2 p) {
  if (poly.empty()) return -1e30;
  if (poly.size() == 1) return -(p - poly[0]).norm();
  if (poly.size() == 2) return -dist_point_segment(p, poly[0], poly[1]);
  double inside = 1e30;
  bool out = false;
  double out_d = 1e30;
  for (size_t i = 0; i < poly.size(); ++i) {
    Vec2 a = poly[i], b = poly[(i + 1) % poly.size()];
    Vec2 e = b - a;
    double len = e.norm();
    if (len < 1e-12) continue;
    double s = e.cross(p - a) / len;  // left distance (CCW => inside positive)
    if (s < 0) {
      out = true;
      out_d = std::min(out_d, dist_point_segment(p, a, b));
    } else {
      inside = std::min(inside, s);
    }
  }
  return out ? -out_d : inside;
}

inline bool point_in_convex(const Polygon2& poly, Vec2 p, double eps = 1e-9) {
  return signed_dist_inside(poly, p) >= -eps;
}

// Sutherland-Hodgman clip of a convex subject polygon by a convex CCW clip
// polygon.
inline Polygon2 convex_clip(const Polygon2& subject, const Polygon2& clip) {
  if (subject.empty() || clip.size() < 3) return {};
  Polygon2 out = subject;
  for (size_t i = 0; i < clip.size() && !out.empty(); ++i) {
    Vec2 a = clip[i], b = clip[(i + 1) % clip.size()];
    Vec2 e = b - a;
    Polygon2 in;
    in.swap(out);
    for (size_t j = 0; j < in.size(); ++j) {
      Vec2 p = in[j], q = in[(j + 1) % in.size()];
      double sp = e.cross(p - a), sq = e.cross(q - a);
      if (sp >= 0) out.push_back(p);
      if ((sp < 0) != (sq < 0)) {
        double t = sp / (sp - sq);
        out.push_back(p + (q - p) * t);
      }
    }
  }
  return out;
}

// SAT penetration depth between convex CCW polygons: > 0 when overlapping,
// <= 0 otherwise (not a signed clearance).
inline double convex_overlap_depth(const Polygon2& a, const Polygon2& b) {
  if (a.size() < 3 || b.size() < 3) return 0;
  double depth = 1e30;
  auto run_axes = [&](const Polygon2& poly) {
    for (size_t i = 0; i < poly.size(); ++i) {
      Vec2 e = poly[(i + 1) % poly.size()] - poly[i];
      double len = e.norm();
      if (len < 1e-12) continue;
      Vec2 n{-e.y / len, e.x / len};
      double amin = 1e30, amax = -1e30, bmin = 1e30, bmax = -1e30;
      for (Vec2 p : a) {
        double d = n.dot(p);
        amin = std::min(amin, d);
        amax = std::max(amax, d);
      }
      for (Vec2 p : b) {
        double d = n.dot(p);
        bmin = std::min(bmin, d);
        bmax = std::max(bmax, d);
      }
      double ov = std::min(amax, bmax) - std::max(amin, bmin);
      depth = std::min(depth, ov);
      if (depth <= 0) return false;
    }
    return true;
  };
  if (!run_axes(a)) return depth;
  run_axes(b);
  return depth;
}

inline bool convex_overlap(const Polygon2& a, const Polygon2& b, double tol = 0) {
  return convex_overlap_depth(a, b) > tol;
}

// ---------------------------------------------------------------------------
// Oriented bounding box

struct Obb {
  Vec3 center{};
  Vec3 half{};       // positive half extents
  Quat orientation{};

  double volume() const { return 8.0 * half.x * half.y * half.z; }

  std::array<Vec3, 3> axes() const {
    return {orientation.rotate({1, 0, 0}), orientation.rotate({0, 1, 0}),
            orientation.rotate({0, 0, 1})};
  }

  std::array<Vec3, 8> corners() const {
    auto ax = axes();
    std::array<Vec3, 8> out;
    int k = 0;
    for (int i : {-1, 1})
      for (int j : {-1, 1})
        for (int l : {-1, 1})
          out[k++] = center + ax[0] * (half.x * i) + ax[1] * (half.y * j) +
                     ax[2] * (half.z * l);
    return out;
  }

  // Convex hull of the corners projected to the ground plane.
  Polygon2 footprint() const {
    std::vector<Vec2> pts;
    for (Vec3 c : corners()) pts.push_back(c.xy());
    return convex_hull(pts);
  }

  double top() const {
    double t = -1e30;
    for (Vec3 c : corners()) t = std::max(t, c.z);
    return t;
  }

  double bottom() const {
    double b = 1e30;
    for (Vec3 c : corners()) b = std::min(b, c.z);
    return b;
  }
};

// SAT over the 15 candidate axes. Two boxes are reported as colliding only
// when the minimum separating-axis overlap exceeds `tol` (penetration deeper
// than the tolerance), so resting contact within `tol` does not count.
inline bool obb_overlap(const Obb& a, const Obb& b, double tol = 0) {
  auto axa = a.axes();
  auto axb = b.axes();
  Vec3 d = b.center - a.center;
  std::vector<Vec3> axes;
  axes.reserve(15);
  for (auto& ax : axa) axes.push_back(ax);
  for (auto& ax : axb) axes.push_back(ax);
  for (auto& u : axa)
    for (auto& v : axb) {
      Vec3 c = u.cross(v);
      if (c.norm() > 1e-9) axes.push_back(c.normalized());
    }
  for (const Vec3& ax : axes) {
    double ra = std::abs(ax.dot(axa[0])) * a.half.x +
                std::abs(ax.dot(axa[1])) * a.half.y +
                std::abs(ax.dot(axa[2])) * a.half.z;
    double rb = std::abs(ax.dot(axb[0])) * b.half.x +
                std::abs(ax.dot(axb[1])) * b.half.y +
                std::abs(ax.dot(axb[2])) * b.half.z;
    double overlap = ra + rb - std::abs(ax.dot(d));
    if (overlap <= tol) return false;
  }
  return true;
}

// ---------------------------------------------------------------------------
// Triangle mesh

struct Aabb {
  Vec3 min{1e30, 1e30, 1e30};
  Vec3 max{-1e30, -1e30, -1e30};
  void expand(Vec3 p) {
    min.x = std::min(min.x, p.x);
    min.y = std::min(min.y, p.y);
    min.z = std::min(min.z, p.z);
    max.x = std::max(max.x, p.x);
    max.y = std::max(max.y, p.y);
    max.z = std::max(max.z, p.z);
  }
  Vec3 center() const { return (min + max) * 0.5; }
  Vec3 size() const { return max - min; }
};

struct Aabb2 {
  Vec2 min{1e30, 1e30};
  Vec2 max{-1e30, -1e30};
  void expand(Vec2 p) {
    min.x = std::min(min.x, p.x);
    min.y = std::min(min.y, p.y);
    max.x = std::max(max.x, p.x);
    max.y = std::max(max.y, p.y);
  }
  static Aabb2 of(const Polygon2& pts) {
    Aabb2 box;
    for (Vec2 p : pts) box.expand(p);
    return box;
  }
};

struct TriMesh {
  std::vector<Vec3> vertices;
  std::vector<std::array<int, 3>> triangles;
  bool watertight = false;  // recorded by repair_mesh, not enforced

  bool empty() const { return vertices.empty(); }

  Aabb aabb() const {
    Aabb box;
    for (Vec3 v : vertices) box.expand(v);
    return box;
  }
};

inline TriMesh transform_mesh(const TriMesh& m, const Pose& pose) {
  TriMesh out = m;
  for (Vec3& v : out.vertices) v = pose.apply(v);
  return out;
}

inline void scale_mesh(TriMesh& m, double s) {
  for (Vec3& v : m.vertices) v = v * s;
}

inline void translate_mesh(TriMesh& m, Vec3 t) {
  for (Vec3& v : m.vertices) v = v + t;
}

// Merge vertices closer than eps (grid quantization), drop degenerate
// triangles.
inline void weld_vertices(TriMesh& m, double eps = 1e-6) {
  std::map<std::tuple<long long, long long, long long>, int> grid;
  std::vector<int> remap(m.vertices.size());
  std::vector<Vec3> verts;
  for (size_t i = 0; i < m.vertices.size(); ++i) {
    Vec3 v = m.vertices[i];
    auto key = std::make_tuple(llround(v.x / eps), llround(v.y / eps),
                               llround(v.z / eps));
    auto it = grid.find(key);
    if (it == grid.end()) {
      grid.emplace(key, int(verts.size()));
      remap[i] = int(verts.size());
      verts.push_back(v);
    } else {
      remap[i] = it->second;
    }
  }
  std::vector<std::array<int, 3>> tris;
  for (auto& t : m.triangles) {
    std::array<int, 3> r{remap[size_t(t[0])], remap[size_t(t[1])], remap[size_t(t[2])]};
    if (r[0] == r[1] || r[1] == r[2] || r[0] == r[2]) continue;
    tris.push_back(r);
  }
  m.vertices = std::move(verts);
  m.triangles = std::move(tris);
}

inline void drop_degenerate_triangles(TriMesh& m, double min_area = 1e-12) {
  std::vector<std::array<int, 3>> tris;
  for (auto& t : m.triangles) {
    if (t[0] == t[1] || t[1] == t[2] || t[0] == t[2]) continue;
    Vec3 a = m.vertices[size_t(t[0])], b = m.vertices[size_t(t[1])],
         c = m.vertices[size_t(t[2])];
    if ((b - a).cross(c - a).norm() * 0.5 < min_area) continue;
    tris.push_back(t);
  }
  m.triangles = std::move(tris);
}

// Watertight = every undirected edge is shared by exactly two triangles with
// opposite winding.
inline bool check_watertight(const TriMesh& m) {
  if (m.triangles.empty()) return false;
  std::map<std::pair<int, int>, int> directed;
  for (auto& t : m.triangles) {
    for (int i = 0; i < 3; ++i) {
      int a = t[size_t(i)], b = t[size_t((i + 1) % 3)];
      if (++directed[{a, b}] > 1) return false;  // non-manifold fan
    }
  }
  for (auto& [edge, count] : directed) {
    auto rev = directed.find({edge.second, edge.first});
    if (rev == directed.end() || rev->second != count) return false;
  }
  return true;
}

inline void repair_mesh(TriMesh& m) {
  drop_degenerate_triangles(m);
  weld_vertices(m);
  drop_degenerate_triangles(m);
  m.watertight = check_watertight(m);
}

// Volume and volume centroid by signed tetrahedra (exact for watertight
// meshes). Falls back to the AABB center when the volume is ~0.
inline std::pair<double, Vec3> mesh_volume_centroid(const TriMesh& m) {
  double vol = 0;
  Vec3 c{0, 0, 0};
  for (auto& t : m.triangles) {
    Vec3 a = m.vertices[size_t(t[0])], b = m.vertices[size_t(t[1])],
         d = m.vertices[size_t(t[2])];
    double v = a.dot(b.cross(d)) / 6.0;
    vol += v;
    c = c + (a + b + d) * (v / 4.0);
  }
  if (std::abs(vol) < 1e-9) return {0.0, m.empty() ? Vec3{} : m.aabb().center()};
  return {std::abs(vol), c * (1.0 / vol)};
}

}  // namespace sageforge
