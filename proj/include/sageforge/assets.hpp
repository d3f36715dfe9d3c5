#pragma once
// Procedural asset provider. Each household category maps to a parametric
// template; synthesis is a pure function of (description, category, seed).
// Meshes come out watertight with the base at z=0 and bounding-box height
// exactly 1.0; rescale_to_height sets the real size. Physical attributes are
// derived from an editable table (JSON-overridable).

#include <cstring>
#include <filesystem>

#include <nlohmann/json.hpp>

#include "sageforge/geometry.hpp"
#include "sageforge/mesh_obj.hpp"
#include "sageforge/scene.hpp"

namespace sageforge {

// ---------------------------------------------------------------------------
// Category table

struct CategorySpec {
  std::string name;
  std::string kind;     // template family, see build_template
  double p0 = 0, p1 = 0, p2 = 0, p3 = 0;  // family-specific parameters
  double w_ratio = 1, d_ratio = 1;        // footprint relative to height
  double h_min = 0.5, h_max = 1.0;        // height band, meters
  double density = 400;                   // kg/m^3
  double metallic = 0, roughness = 0.7;
  bool static_ = false;
  PlacementClass default_class = PlacementClass::Floor;
  double wall_lo = 1.2, wall_hi = 1.7;    // mount-center band for Wall class
};

inline std::vector<CategorySpec> default_attribute_table() {
  using PC = PlacementClass;
  std::vector<CategorySpec> t;
  auto add = [&](CategorySpec s) { t.push_back(std::move(s)); };
  // -- floor furniture ------------------------------------------------------
  add({"bed", "bed", .08, 0, 0, 0, 2.6, 3.2, .50, .65, 180, 0, .85, false, PC::Floor});
  add({"nightstand", "box", 0, 0, 0, 0, .80, .80, .45, .60, 400, 0, .65, false, PC::Floor});
  add({"wardrobe", "box", 0, 0, 0, 0, .55, .32, 1.8, 2.1, 300, 0, .6, false, PC::Floor});
  add({"dresser", "box", 0, 0, 0, 0, 1.2, .55, .80, 1.0, 350, 0, .6, false, PC::Floor});
  add({"desk", "slab_legs", .06, .08, 0, 0, 1.7, .85, .72, .78, 400, .1, .55, false, PC::Floor});
  add({"table", "slab_legs", .06, .08, 0, 0, 1.7, 1.15, .73, .78, 450, 0, .6, false, PC::Floor});
  add({"dining table", "slab_legs", .05, .07, 0, 0, 2.2, 1.25, .73, .78, 450, 0, .55, false, PC::Floor});
  add({"coffee table", "slab_legs", .10, .10, 0, 0, 2.4, 1.4, .40, .50, 450, 0, .6, false, PC::Floor});
  add({"side table", "slab_legs", .08, .10, 0, 0, .9, .9, .50, .60, 420, 0, .6, false, PC::Floor});
  add({"meeting table", "slab_legs", .05, .07, 0, 0, 3.5, 1.6, .73, .78, 450, 0, .5, false, PC::Floor});
  add({"chair", "lseat", .50, .22, 0, 0, .52, .55, .85, .95, 250, 0, .7, false, PC::Floor});
  add({"office chair", "lseat", .50, .25, 0, 0, .55, .55, .90, 1.0, 300, .3, .5, false, PC::Floor});
  add({"armchair", "lseat", .45, .30, 0, 0, 1.0, .95, .75, .90, 220, 0, .9, false, PC::Floor});
  add({"sofa", "lseat", .45, .28, 0, 0, 2.3, 1.05, .75, .90, 200, 0, .9, false, PC::Floor});
  add({"bookcase", "shelves", 3, 0, 0, 0, .55, .20, 1.6, 2.0, 350, 0, .6, false, PC::Floor});
  add({"tv stand", "box", 0, 0, 0, 0, 3.2, .85, .45, .55, 380, 0, .55, false, PC::Floor});
  add({"cabinet", "box", 0, 0, 0, 0, .85, .45, .90, 1.2, 380, 0, .6, false, PC::Floor});
  add({"counter", "box", 0, 0, 0, 0, 2.0, .70, .85, .95, 500, 0, .4, false, PC::Floor});
  add({"kitchen island", "box", 0, 0, 0, 0, 1.8, .95, .90, .95, 500, 0, .4, false, PC::Floor});
  add({"refrigerator", "box", 0, 0, 0, 0, .42, .40, 1.6, 1.9, 350, .7, .3, false, PC::Floor});
  add({"stove", "box", 0, 0, 0, 0, .65, .68, .85, .95, 450, .6, .4, false, PC::Floor});
  add({"dishwasher", "box", 0, 0, 0, 0, .70, .70, .80, .90, 400, .6, .4, false, PC::Floor});
  add({"floor lamp", "lamp", .22, .18, 0, 0, .35, .35, 1.4, 1.7, 150, .3, .5, false, PC::Floor});
  add({"plant", "plant", .28, .42, 0, 0, .55, .55, .90, 1.5, 150, 0, .8, false, PC::Floor});
  add({"bench", "box", 0, 0, 0, 0, 2.6, .80, .45, .50, 350, 0, .6, false, PC::Floor});
  add({"stool", "cylinder", .42, 1, 16, 0, .84, .84, .45, .55, 300, 0, .6, false, PC::Floor});
  add({"crate", "box", 0, 0, 0, 0, 1.0, 1.0, .30, .50, 250, 0, .8, false, PC::Floor});
  add({"filing cabinet", "box", 0, 0, 0, 0, .40, .50, 1.0, 1.3, 400, .8, .35, false, PC::Floor});
  add({"trash bin", "cylinder", .35, .9, 14, 0, .70, .70, .30, .50, 200, .5, .5, false, PC::Floor});
  // -- wall-mounted ---------------------------------------------------------
  add({"painting", "box", 0, 0, 0, 0, 1.2, .05, .50, .90, 350, 0, .7, true, PC::Wall, 1.3, 1.7});
  add({"mirror", "box", 0, 0, 0, 0, .70, .05, .80, 1.2, 500, .2, .1, true, PC::Wall, 1.3, 1.6});
  add({"poster", "box", 0, 0, 0, 0, .70, .03, .50, .80, 200, 0, .8, true, PC::Wall, 1.3, 1.7});
  add({"clock", "box", 0, 0, 0, 0, 1.0, .12, .30, .40, 300, .3, .5, true, PC::Wall, 1.7, 2.0});
  add({"wall shelf", "box", 0, 0, 0, 0, 8.0, 2.0, .10, .14, 400, 0, .6, true, PC::Wall, 1.1, 1.6});
  add({"tv", "box", 0, 0, 0, 0, 1.9, .08, .55, .75, 800, .6, .3, true, PC::Wall, 1.1, 1.5});
  add({"whiteboard", "box", 0, 0, 0, 0, 1.5, .05, .90, 1.2, 300, .1, .4, true, PC::Wall, 1.1, 1.4});
  // -- table-top objects ----------------------------------------------------
  add({"mug", "cylinder", .42, .95, 14, 0, .84, .84, .09, .12, 600, .05, .4, false, PC::OnTop});
  add({"cup", "cylinder", .40, .85, 14, 0, .80, .80, .08, .11, 500, .05, .4, false, PC::OnTop});
  add({"bowl", "bowl", .5, .15, 16, 0, 2.4, 2.4, .07, .10, 500, .05, .35, false, PC::OnTop});
  add({"plate", "cylinder", 4.0, .98, 18, 0, 8.0, 8.0, .02, .03, 600, .05, .3, false, PC::OnTop});
  add({"apple", "sphere", .10, 0, 0, 0, .95, .95, .07, .09, 700, 0, .5, false, PC::OnTop});
  add({"book", "box", 0, 0, 0, 0, 3.2, 4.6, .04, .06, 700, 0, .9, false, PC::OnTop});
  add({"laptop", "box", 0, 0, 0, 0, 13.0, 9.0, .02, .03, 1200, .7, .4, false, PC::OnTop});
  add({"lamp", "lamp", .30, .26, 0, 0, .60, .60, .35, .50, 250, .4, .5, false, PC::OnTop});
  add({"vase", "cylinder", .28, .62, 14, 0, .56, .56, .25, .40, 400, .05, .3, false, PC::OnTop});
  add({"pillow", "rounded_slab", .48, 6, 0, 0, 3.2, 2.4, .10, .14, 80, 0, .95, false, PC::OnTop});
  add({"pot", "cylinder", .45, .95, 14, 0, .9, .9, .15, .25, 800, .9, .35, false, PC::OnTop});
  add({"pan", "cylinder", 1.8, .98, 14, 0, 3.6, 3.6, .05, .08, 900, .9, .3, false, PC::OnTop});
  add({"bottle", "cylinder", .16, .7, 12, 0, .32, .32, .25, .30, 300, .1, .2, false, PC::OnTop});
  add({"can", "cylinder", .27, .98, 14, 0, .54, .54, .10, .13, 350, .9, .3, false, PC::OnTop});
  add({"pen", "box", 0, 0, 0, 0, 14.0, 1.0, .010, .015, 400, .2, .4, false, PC::OnTop});
  add({"phone", "box", 0, 0, 0, 0, 7.0, 15.0, .008, .012, 1000, .6, .3, false, PC::OnTop});
  add({"monitor", "box", 0, 0, 0, 0, 1.3, .15, .40, .50, 600, .6, .3, false, PC::OnTop});
  add({"keyboard", "box", 0, 0, 0, 0, 14.0, 5.0, .02, .03, 500, .3, .5, false, PC::OnTop});
  add({"toaster", "box", 0, 0, 0, 0, 1.4, .9, .18, .25, 400, .8, .35, false, PC::OnTop});
  add({"photo frame", "box", 0, 0, 0, 0, .75, .12, .15, .25, 500, .1, .5, false, PC::OnTop});
  add({"alarm clock", "box", 0, 0, 0, 0, 1.1, .5, .08, .12, 400, .4, .4, false, PC::OnTop});
  add({"jar", "cylinder", .32, .9, 12, 0, .64, .64, .12, .18, 500, .05, .2, false, PC::OnTop});
  return t;
}

// Mutable singleton so a CLI config file can override the defaults once at
// startup; everything else treats it as read-only.
inline std::vector<CategorySpec>& attribute_table() {
  static std::vector<CategorySpec> table = default_attribute_table();
  return table;
}

inline const std::map<std::string, std::string>& category_aliases() {
  static const std::map<std::string, std::string> aliases = {
      {"bookshelf", "bookcase"}, {"couch", "sofa"},
      {"coffeetable", "coffee table"}, {"fridge", "refrigerator"},
      {"coke can", "can"}, {"soda can", "can"}, {"tv table", "tv stand"},
      {"picture", "painting"}, {"picture frame", "photo frame"},
      {"night stand", "nightstand"}, {"potted plant", "plant"},
      {"office desk", "desk"}, {"sidetable", "side table"},
  };
  return aliases;
}

inline std::string normalize_category(const std::string& raw) {
  std::string c = trim(lowercase(raw));
  auto alias = category_aliases().find(c);
  if (alias != category_aliases().end()) c = alias->second;
  return c;
}

inline const CategorySpec* find_category(const std::string& raw) {
  std::string c = normalize_category(raw);
  for (const auto& s : attribute_table())
    if (s.name == c) return &s;
  return nullptr;
}

inline const CategorySpec& require_category(const std::string& raw) {
  const CategorySpec* s = find_category(raw);
  if (!s) fail(Errc::UnknownCategory, "no attribute entry for '" + raw + "'");
  return *s;
}

// JSON override: a list of objects mirroring CategorySpec; entries replace
// same-named rows or append new ones. See README for the schema.
inline void load_attribute_overrides(const nlohmann::json& j) {
  for (const auto& e : j) {
    CategorySpec s;
    s.name = normalize_category(e.at("name").get<std::string>());
    s.kind = e.value("kind", std::string("box"));
    s.p0 = e.value("p0", 0.0);
    s.p1 = e.value("p1", 0.0);
    s.p2 = e.value("p2", 0.0);
    s.p3 = e.value("p3", 0.0);
    s.w_ratio = e.value("w_ratio", 1.0);
    s.d_ratio = e.value("d_ratio", 1.0);
    s.h_min = e.at("h_min").get<double>();
    s.h_max = e.at("h_max").get<double>();
    s.density = e.at("density").get<double>();
    s.metallic = e.value("metallic", 0.0);
    s.roughness = e.value("roughness", 0.7);
    s.static_ = e.value("static", false);
    std::string cls = e.value("placement_class", std::string("floor"));
    s.default_class = placement_class_from_name(cls);
    s.wall_lo = e.value("wall_lo", 1.2);
    s.wall_hi = e.value("wall_hi", 1.7);
    bool replaced = false;
    for (auto& row : attribute_table())
      if (row.name == s.name) {
        row = s;
        replaced = true;
      }
    if (!replaced) attribute_table().push_back(std::move(s));
  }
}

// ---------------------------------------------------------------------------
// Mesh template builders. All builders append closed sub-meshes; the result
// is normalized afterwards.

namespace detail {

inline void append_box(TriMesh& m, Vec2 center, double w, double d, double z0,
                       double z1) {
  int base = int(m.vertices.size());
  for (double z : {z0, z1})
    for (int yi : {-1, 1})
      for (int xi : {-1, 1})
        m.vertices.push_back({center.x + w / 2 * xi, center.y + d / 2 * yi, z});
  auto quad = [&](int a, int b, int c, int dd) {
    m.triangles.push_back({base + a, base + b, base + c});
    m.triangles.push_back({base + a, base + c, base + dd});
  };
  quad(0, 2, 3, 1);
  quad(4, 5, 7, 6);
  quad(0, 1, 5, 4);
  quad(3, 2, 6, 7);
  quad(1, 3, 7, 5);
  quad(2, 0, 4, 6);
}

// Closed cylinder, optionally tapered; r1 is the top radius.
inline void append_cylinder(TriMesh& m, Vec2 center, double r0, double r1,
                            double z0, double z1, int n) {
  int base = int(m.vertices.size());
  for (int i = 0; i < n; ++i) {
    double a = 2 * kPi * i / n;
    m.vertices.push_back({center.x + r0 * std::cos(a), center.y + r0 * std::sin(a), z0});
  }
  for (int i = 0; i < n; ++i) {
    double a = 2 * kPi * i / n;
    m.vertices.push_back({center.x + r1 * std::cos(a), center.y + r1 * std::sin(a), z1});
  }
  int c0 = int(m.vertices.size());
  m.vertices.push_back({center.x, center.y, z0});
  int c1 = int(m.vertices.size());
  m.vertices.push_back({center.x, center.y, z1});
  for (int i = 0; i < n; ++i) {
    int j = (i + 1) % n;
    m.triangles.push_back({base + i, base + j, base + n + j});
    m.triangles.push_back({base + i, base + n + j, base + n + i});
    m.triangles.push_back({base + j, base + i, c0});          // bottom, -Z out
    m.triangles.push_back({base + n + i, base + n + j, c1});  // top, +Z out
  }
}

// Open-topped bowl: outer wall, rim ring, inner wall, raised inner floor.
inline void append_bowl(TriMesh& m, double r_outer, double wall, int n) {
  double r_inner = r_outer - wall;
  double z_rim = 1.0, z_floor = 0.18;
  auto ring = [&](double r, double z) {
    int base = int(m.vertices.size());
    for (int i = 0; i < n; ++i) {
      double a = 2 * kPi * i / n;
      m.vertices.push_back({r * std::cos(a), r * std::sin(a), z});
    }
    return base;
  };
  int ob = ring(r_outer * 0.72, 0.0);   // tapered base
  int ot = ring(r_outer, z_rim);
  int it = ring(r_inner, z_rim);
  int ib = ring(r_inner * 0.80, z_floor);
  int cb = int(m.vertices.size());
  m.vertices.push_back({0, 0, 0});
  int cf = int(m.vertices.size());
  m.vertices.push_back({0, 0, z_floor});
  for (int i = 0; i < n; ++i) {
    int j = (i + 1) % n;
    auto band = [&](int lo, int hi) {
      m.triangles.push_back({lo + i, lo + j, hi + j});
      m.triangles.push_back({lo + i, hi + j, hi + i});
    };
    band(ob, ot);              // outer wall
    band(ot, it);              // rim
    band(it, ib);              // inner wall
    m.triangles.push_back({ib + i, ib + j, cf});  // inner floor, +Z out
    m.triangles.push_back({ob + j, ob + i, cb});  // bottom, -Z out
  }
}

inline void append_sphere(TriMesh& m, double radius, Vec3 center, int subdiv = 1) {
  // Icosahedron with poles on +-Z, subdivided and projected to the sphere.
  std::vector<Vec3> v;
  std::vector<std::array<int, 3>> f;
  double zr = 1.0 / std::sqrt(5.0), rr = 2.0 / std::sqrt(5.0);
  v.push_back({0, 0, 1});
  for (int i = 0; i < 5; ++i) {
    double a = 2 * kPi * i / 5;
    v.push_back({rr * std::cos(a), rr * std::sin(a), zr});
  }
  for (int i = 0; i < 5; ++i) {
    double a = 2 * kPi * i / 5 + kPi / 5;
    v.push_back({rr * std::cos(a), rr * std::sin(a), -zr});
  }
  v.push_back({0, 0, -1});
  for (int i = 0; i < 5; ++i) {
    int j = (i + 1) % 5;
    f.push_back({0, 1 + i, 1 + j});
    f.push_back({1 + i, 6 + i, 1 + j});
    f.push_back({1 + j, 6 + i, 6 + j});
    f.push_back({6 + i, 11, 6 + j});
  }
  for (int s = 0; s < subdiv; ++s) {
    std::map<std::pair<int, int>, int> mid;
    auto midpoint = [&](int a, int b) {
      auto key = std::minmax(a, b);
      auto it = mid.find(key);
      if (it != mid.end()) return it->second;
      Vec3 p = ((v[size_t(a)] + v[size_t(b)]) * 0.5).normalized();
      v.push_back(p);
      mid.emplace(key, int(v.size()) - 1);
      return int(v.size()) - 1;
    };
    std::vector<std::array<int, 3>> nf;
    for (auto& t : f) {
      int ab = midpoint(t[0], t[1]), bc = midpoint(t[1], t[2]), ca = midpoint(t[2], t[0]);
      nf.push_back({t[0], ab, ca});
      nf.push_back({t[1], bc, ab});
      nf.push_back({t[2], ca, bc});
      nf.push_back({ab, bc, ca});
    }
    f = std::move(nf);
  }
  int base = int(m.vertices.size());
  for (const Vec3& p : v) m.vertices.push_back(center + p * radius);
  for (auto& t : f) m.triangles.push_back({base + t[0], base + t[1], base + t[2]});
}

// Rounded-rectangle profile in (x,z), extruded along y: pillows. The side
// strips are narrow so an upright pillow has almost no flat contact.
inline void append_rounded_slab(TriMesh& m, double w, double d, double round_frac,
                                int facets) {
  double r = round_frac;  // corner radius as a fraction of unit height
  std::vector<Vec2> prof;  // (x, z), CCW
  auto arc = [&](Vec2 c, double a0, double a1) {
    for (int i = 0; i <= facets; ++i) {
      double a = a0 + (a1 - a0) * i / facets;
      prof.push_back({c.x + r * std::cos(a), c.y + r * std::sin(a)});
    }
  };
  arc({w / 2 - r, r}, -kPi / 2, 0);
  arc({w / 2 - r, 1 - r}, 0, kPi / 2);
  arc({-w / 2 + r, 1 - r}, kPi / 2, kPi);
  arc({-w / 2 + r, r}, kPi, 1.5 * kPi);
  int n = int(prof.size());
  int base = int(m.vertices.size());
  for (double y : {-d / 2, d / 2})
    for (const Vec2& p : prof) m.vertices.push_back({p.x, y, p.y});
  for (int i = 0; i < n; ++i) {
    int j = (i + 1) % n;
    m.triangles.push_back({base + i, base + n + j, base + j});
    m.triangles.push_back({base + i, base + n + i, base + n + j});
  }
  // End caps: fan around the centroid (profile is convex).
  for (int side = 0; side < 2; ++side) {
    Vec2 c{0, 0};
    for (const Vec2& p : prof) c = c + p * (1.0 / n);
    int ci = int(m.vertices.size());
    m.vertices.push_back({c.x, side ? d / 2 : -d / 2, c.y});
    for (int i = 0; i < n; ++i) {
      int j = (i + 1) % n;
      if (side)
        m.triangles.push_back({base + n + i, ci, base + n + j});
      else
        m.triangles.push_back({base + j, ci, base + i});
    }
  }
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Template assembly

inline TriMesh build_template(const CategorySpec& spec, Rng& rng) {
  using namespace detail;
  TriMesh m;
  auto jitter = [&](double v) { return v * rng.uniform(0.92, 1.08); };
  double w = jitter(spec.w_ratio), d = jitter(spec.d_ratio);
  const std::string& k = spec.kind;
  if (k == "box") {
    append_box(m, {0, 0}, w, d, 0, 1);
  } else if (k == "cylinder") {
    double r = jitter(spec.p0);
    int n = std::max(8, int(spec.p2));
    append_cylinder(m, {0, 0}, r, r * spec.p1, 0, 1, n);
  } else if (k == "bowl") {
    append_bowl(m, w / 2, spec.p1 * w, std::max(10, int(spec.p2)));
  } else if (k == "slab_legs") {
    double slab = std::max(0.04, spec.p0), leg = std::max(0.03, spec.p1);
    double lw = leg * std::min(w, d);
    double inset = lw * 0.75;
    append_box(m, {0, 0}, w, d, 1 - slab, 1);
    for (int xi : {-1, 1})
      for (int yi : {-1, 1})
        append_box(m, {xi * (w / 2 - inset - lw / 2), yi * (d / 2 - inset - lw / 2)},
                   lw, lw, 0, 1 - slab);
  } else if (k == "shelves") {
    // Sub-boxes interpenetrate slightly so no vertices coincide; each box
    // stays an independently closed component.
    int boards = std::max(1, int(spec.p0));
    double t = 0.035;
    double px = t * w * 2.5;  // side panel thickness
    double ovx = 0.02 * px, ovy = 0.02 * t * d;
    append_box(m, {-(w - px) / 2, 0}, px, d, 0, 1 - t / 2);
    append_box(m, {(w - px) / 2, 0}, px, d, 0, 1 - t / 2);
    append_box(m, {0, -(d - t * d) / 2}, w - 2 * px + 2 * ovx, t * d, 0, 1 - t / 2);
    double span = 1.0 - t;
    for (int i = 0; i < boards; ++i) {
      double z = 0.02 + i * (span - 0.02) / boards;
      append_box(m, {0, (t * d - ovy) / 2}, w - 2 * px + 2 * ovx, d - t * d + ovy,
                 z, z + t);
    }
    append_box(m, {0, 0}, w, d, 1 - t, 1);  // top panel
  } else if (k == "lseat") {
    double seat_h = spec.p0, back_d = spec.p1 * d;
    double ov = 0.02 * back_d;  // seat sinks a hair into the backrest
    append_box(m, {0, (back_d - ov) / 2}, w, d - back_d + ov, 0, seat_h);
    append_box(m, {0, -(d - back_d) / 2}, w, back_d, 0, 1);  // backrest
  } else if (k == "sphere") {
    append_sphere(m, 0.5, {0, 0, 0.5}, 1);
    double cut = std::max(0.0, spec.p0);
    for (Vec3& v : m.vertices) v.z = std::max(v.z, cut);  // flatten the base
  } else if (k == "rounded_slab") {
    append_rounded_slab(m, w, d, spec.p0, std::max(3, int(spec.p1)));
  } else if (k == "lamp") {
    double base_r = spec.p0, shade_r = jitter(spec.p1);
    append_cylinder(m, {0, 0}, base_r, base_r * 0.85, 0, 0.07, 14);
    append_cylinder(m, {0, 0}, 0.025, 0.025, 0.07, 0.72, 8);
    append_cylinder(m, {0, 0}, shade_r, shade_r * 0.62, 0.72, 1.0, 14);
  } else if (k == "bed") {
    double head_t = spec.p0 * d;
    double ov = 0.02 * head_t;  // frame sinks a hair into the headboard
    append_box(m, {0, (head_t - ov) / 2}, w, d - head_t + ov, 0, 0.55);
    append_box(m, {0, -(d - head_t) / 2}, w, head_t, 0, 1.0);  // headboard
  } else if (k == "plant") {
    double pot_r = spec.p0, fol_r = jitter(spec.p1);
    append_cylinder(m, {0, 0}, pot_r * 0.8, pot_r, 0, 0.35, 12);
    append_cylinder(m, {0, 0}, 0.03, 0.03, 0.35, 0.6, 8);
    append_sphere(m, fol_r, {0, 0, 1.0 - fol_r}, 1);
  } else {
    fail(Errc::UnknownCategory, "unknown template kind '" + k + "'");
  }
  return m;
}

// ---------------------------------------------------------------------------
// Public provider API

struct AssetRequest {
  std::string description;
  std::string category;
  uint64_t seed = 0;
};

struct Asset {
  std::string description;
  std::string category;  // normalized
  TriMesh mesh;          // unit height, base at z=0
};

// Scale so the bounding-box height is exactly `height`.
inline void rescale_to_height(TriMesh& mesh, double height) {
  if (height <= 0) fail(Errc::NonPositiveHeight, "target height must be > 0");
  if (mesh.empty()) fail(Errc::EmptyMesh, "cannot rescale an empty mesh");
  double h = mesh.aabb().size().z;
  if (h <= 0) fail(Errc::DegenerateVolume, "mesh has zero height");
  scale_mesh(mesh, height / h);
}

// Recenter over the origin, drop the base to z=0, normalize height to 1.
inline void normalize_template(TriMesh& mesh) {
  if (mesh.empty()) fail(Errc::EmptyMesh, "cannot normalize an empty mesh");
  Aabb box = mesh.aabb();
  Vec3 c = box.center();
  translate_mesh(mesh, {-c.x, -c.y, -box.min.z});
  rescale_to_height(mesh, 1.0);
}

inline uint64_t asset_seed(const AssetRequest& req) {
  return hash_mix(fnv1a64(req.description), hash_mix(fnv1a64(req.category), req.seed));
}

// Pure in (description, category, seed): identical requests yield identical
// meshes, different seeds vary the proportions.
inline Asset synthesize_asset(const AssetRequest& req) {
  const CategorySpec& spec = require_category(req.category);
  Rng rng(asset_seed(req));
  TriMesh mesh = build_template(spec, rng);
  repair_mesh(mesh);
  normalize_template(mesh);
  return {req.description, spec.name, std::move(mesh)};
}

inline double sample_category_height(const std::string& category, uint64_t seed) {
  const CategorySpec& spec = require_category(category);
  Rng rng(hash_mix(asset_seed({"", category, seed}), 0x9e17));
  return rng.uniform(spec.h_min, spec.h_max);
}

// Height sampled from the category band, mass from density x OBB volume,
// material constants straight from the table.
inline PhysicalAttributes estimate_physical_attributes(const std::string& category,
                                                       const Obb& obb,
                                                       uint64_t seed = 0) {
  const CategorySpec& spec = require_category(category);
  double vol = obb.volume();
  if (vol <= 1e-12) fail(Errc::DegenerateVolume, "obb volume is zero");
  PhysicalAttributes a;
  a.height = sample_category_height(category, seed);
  a.mass = spec.density * vol;
  a.metallic = spec.metallic;
  a.roughness = spec.roughness;
  a.static_ = spec.static_;
  return a;
}

// ---------------------------------------------------------------------------
// Catalog directory: <dir>/<category>/<variant>.obj. Variants are picked by
// seed, meshes repaired and normalized like templates.

inline Asset load_catalog_asset(const std::filesystem::path& dir,
                                const AssetRequest& req) {
  namespace fs = std::filesystem;
  std::string cat = normalize_category(req.category);
  fs::path sub = dir / cat;
  std::vector<fs::path> variants;
  if (fs::is_directory(sub))
    for (const auto& e : fs::directory_iterator(sub))
      if (e.path().extension() == ".obj") variants.push_back(e.path());
  if (variants.empty())
    fail(Errc::UnknownCategory, "no catalog meshes under " + sub.string());
  std::sort(variants.begin(), variants.end());
  const fs::path& chosen = variants[size_t(asset_seed(req) % variants.size())];
  TriMesh mesh = read_obj(read_file(chosen));
  if (mesh.empty()) fail(Errc::EmptyMesh, "catalog mesh is empty: " + chosen.string());
  repair_mesh(mesh);
  normalize_template(mesh);
  return {req.description, cat, std::move(mesh)};
}

struct AssetProviderOptions {
  std::string catalog_dir;  // empty: procedural templates only
};

inline Asset provide_asset(const AssetRequest& req,
                           const AssetProviderOptions& opt = {}) {
  if (!opt.catalog_dir.empty()) {
    try {
      return load_catalog_asset(opt.catalog_dir, req);
    } catch (const Error&) {
      // fall through to the procedural templates
    }
  }
  return synthesize_asset(req);
}

// ---------------------------------------------------------------------------
// Description perturbation (for category-preserving augmentation).

struct PerturbationTable {
  std::vector<std::string> adjectives;
};

inline PerturbationTable default_perturbations() {
  return {{"red", "blue", "green", "white", "black", "beige", "teal", "gray",
           "wooden", "metal", "ceramic", "plastic", "fabric", "glass",
           "small", "large", "modern", "vintage", "rustic", "minimalist"}};
}

struct PerturbResult {
  std::string text;
  bool changed = false;
  std::string note;  // set when the perturbation degenerates to identity
};

inline PerturbResult perturb_description(const std::string& desc, uint64_t seed,
                                         const PerturbationTable& table = default_perturbations()) {
  if (table.adjectives.empty())
    return {desc, false, "empty perturbation table; description unchanged"};
  Rng rng(hash_mix(fnv1a64(desc), hash_mix(seed, 0xad31)));
  std::string low = lowercase(desc);
  std::vector<std::string> fresh;
  for (const auto& a : table.adjectives)
    if (low.find(a) == std::string::npos) fresh.push_back(a);
  if (fresh.empty())
    return {desc, false, "all adjectives already present; description unchanged"};
  const std::string& adj = fresh[size_t(rng.uniform_int(0, int64_t(fresh.size()) - 1))];
  // Insert after a leading article if there is one.
  for (const char* art : {"a ", "an ", "the "}) {
    size_t len = std::strlen(art);
    if (low.rfind(art, 0) == 0)
      return {desc.substr(0, len) + adj + " " + desc.substr(len), true, ""};
  }
  return {adj + " " + desc, true, ""};
}

}  // namespace sageforge
