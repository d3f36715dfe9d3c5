#pragma once

// Placement planning: keyword classification into Floor/Wall/OnTop, grid
// candidate sampling, constraint scoring, and depth-first search over
// placement requests with backtracking.
//
// Collision handling is two-staged on purpose. Sampling applies a cheap 2D
// footprint gate that tolerates up to `broad_margin` of footprint overlap,
// and every surviving candidate carries an exact OBB `collision_free` flag
// (5 mm penetration tolerance). With `exact_gate` on (the default) only
// exact-clear candidates are accepted; the no-physics ablation turns the
// exact gate off and lives with what the footprint gate lets through.

#include <algorithm>
#include <functional>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "sageforge/assets.hpp"
#include "sageforge/constraints.hpp"
#include "sageforge/physics.hpp"
#include "sageforge/scene.hpp"
#include "sageforge/surfaces.hpp"

namespace sageforge {

struct CandidatePlacement {
  std::string object_id;
  Pose pose;
  double score = 0;
  bool collision_free = false;
  SupportRelation support;
  double dist_center = 0;  // tie-break: distance to room center / surface center
  int grid_index = 0;      // tie-break: enumeration order
};

struct PlacementOptions {
  int cap = 50;                  // candidates handed to the search
  double grid = 0.10;            // meters
  int yaw_count = 8;             // 45 degree increments
  double broad_margin = 0.015;   // tolerated footprint overlap in the cheap gate
  double surface_margin = 0.01;  // inward inset for on-top containment
  double wall_gap = 0.005;       // clearance between wall objects and the wall
  double door_clearance = 0.45;  // keep-out radius around door spans
  bool exact_gate = true;        // only exact OBB-clear candidates are eligible
  bool use_physics = true;       // settle-validate acceptances
  int node_budget = 200;         // DFS expansions before falling back to greedy
  SettleParams settle;
};

// ---------------------------------------------------------------------------
// Classification

struct ClassifyResult {
  PlacementClass cls = PlacementClass::Floor;
  std::string rule;  // which keyword decided
};

inline ClassifyResult classify_placement_explain(const std::string& description,
                                                 const std::string& constraints) {
  std::string d = lowercase(description);
  std::string c = lowercase(constraints);
  auto has = [](const std::string& hay, const char* needle) {
    return hay.find(needle) != std::string::npos;
  };
  // Floor phrases that would otherwise trip the on-top category words
  // ("pot" in "potted", "book" in "bookcase", ...).
  for (const char* kw : {"floor lamp", "standing lamp", "floor plant",
                         "potted plant", "bookcase", "bookshelf"})
    if (has(d, kw)) return {PlacementClass::Floor, kw};
  for (const char* kw : {"hung", "hanging", "hangs", "mounted", "wall-mounted",
                         "on the wall", "above the", "painting", "poster",
                         "mirror", "wall clock", "whiteboard", "tapestry",
                         "wall shelf", "wall art", "sconce", "banner"})
    if (has(d, kw)) return {PlacementClass::Wall, kw};
  if (has(c, "on(")) return {PlacementClass::OnTop, "on-constraint"};
  for (const char* kw : {"on the ", "on a ", "on an ", "onto ", "atop ", "on top"})
    if (has(d, kw) || has(c, kw)) return {PlacementClass::OnTop, kw};
  for (const char* kw : {"mug", "cup", "bowl", "plate", "apple", "banana", "book",
                         "laptop", "lamp", "vase", "pillow", "cushion", "pot",
                         "pan", "bottle", "can", "pen", "phone", "monitor",
                         "keyboard", "toaster", "photo frame", "alarm clock",
                         "jar", "tray", "clock", "notebook", "remote"})
    if (has(d, kw)) return {PlacementClass::OnTop, kw};
  for (const char* kw : {"bed", "sofa", "couch", "table", "desk", "chair", "stool",
                         "bench", "wardrobe", "dresser", "cabinet", "bookcase",
                         "bookshelf", "shelf", "refrigerator", "fridge", "stove",
                         "oven", "dishwasher", "counter", "island", "nightstand",
                         "plant", "bin", "crate", "ottoman", "armchair"})
    if (has(d, kw)) return {PlacementClass::Floor, kw};
  return {PlacementClass::Floor, "default"};
}

inline PlacementClass classify_placement(const std::string& description,
                                         const std::string& constraints = "") {
  return classify_placement_explain(description, constraints).cls;
}

// ---------------------------------------------------------------------------
// Anchor resolution and scoring

// Resolve an anchor reference (object id, category, or description substring)
// to the nearest matching object, excluding `self_id`.
inline const SceneObject* resolve_anchor(const Scene& scene, const std::string& ref,
                                         Vec2 from, const std::string& self_id) {
  if (const SceneObject* exact = scene.find(trim(ref)))
    if (exact->id != self_id) return exact;
  std::string cat = normalize_category(ref);
  std::string low = lowercase(trim(ref));
  const SceneObject* best = nullptr;
  double best_d = 0;
  for (const auto& o : scene.objects) {
    if (o.id == self_id) continue;
    if (o.category != cat && lowercase(o.description).find(low) == std::string::npos)
      continue;
    double d = (o.pose.position.xy() - from).norm();
    if (!best || d < best_d) {
      best = &o;
      best_d = d;
    }
  }
  return best;
}

namespace detail {

inline double ramp_down(double x, double lo, double hi) {
  // 1 below lo, 0 above hi, linear between.
  if (x <= lo) return 1;
  if (x >= hi) return 0;
  return (hi - x) / (hi - lo);
}

inline double room_inradius(const Room& room) {
  return std::max(1e-6, signed_dist_inside(room.polygon, polygon_centroid(room.polygon)));
}

}  // namespace detail

// Satisfaction of one constraint in [0, 1] for a candidate pose.
inline double constraint_satisfaction(const Constraint& c, const Scene& scene,
                                      const CandidatePlacement& cand,
                                      const std::string& self_id) {
  using K = ConstraintKind;
  Vec2 p = cand.pose.position.xy();
  const Room* room = scene.room_at(p);
  auto anchor = [&]() -> const SceneObject& {
    const SceneObject* a = resolve_anchor(scene, c.anchor, p, self_id);
    if (!a) fail(Errc::DanglingAnchor, "constraint anchor '" + c.anchor + "' not found");
    return *a;
  };
  switch (c.kind) {
    case K::NearObject: {
      double d = (anchor().pose.position.xy() - p).norm();
      return detail::ramp_down(d, c.param, 2 * c.param);
    }
    case K::FarFrom: {
      double d = (anchor().pose.position.xy() - p).norm();
      return 1.0 - detail::ramp_down(d, c.param / 2, c.param);
    }
    case K::Facing: {
      const SceneObject& a = anchor();
      double target = std::atan2(a.pose.position.y - cand.pose.position.y,
                                 a.pose.position.x - cand.pose.position.x);
      double dev = std::abs(wrap_angle(target - cand.pose.orientation.yaw()));
      return detail::ramp_down(dev, c.param, 2 * c.param);
    }
    case K::AlignedWith: {
      const SceneObject& a = anchor();
      double rel = cand.pose.orientation.yaw() - a.pose.orientation.yaw();
      double dev = kPi;
      for (int k = 0; k < 4; ++k)
        dev = std::min(dev, std::abs(wrap_angle(rel + k * kPi / 2)));
      return detail::ramp_down(dev, c.param, 2 * c.param);
    }
    case K::GlobalEdge: {
      if (!room) return 0;
      double d = std::max(0.0, signed_dist_inside(room->polygon, p));
      return std::clamp(1.0 - d / detail::room_inradius(*room), 0.0, 1.0);
    }
    case K::GlobalMiddle: {
      if (!room) return 0;
      double d = (polygon_centroid(room->polygon) - p).norm();
      return std::clamp(1.0 - d / detail::room_inradius(*room), 0.0, 1.0);
    }
    case K::GlobalCorner: {
      if (!room) return 0;
      Vec2 c0 = polygon_centroid(room->polygon);
      double dc = 1e30, diag = 1e-6;
      for (const Vec2& v : room->polygon) {
        dc = std::min(dc, (v - p).norm());
        diag = std::max(diag, (v - c0).norm());
      }
      return std::clamp(1.0 - dc / diag, 0.0, 1.0);
    }
    case K::OnTopOf: {
      if (cand.support.parent == kFloorParent || cand.support.parent == kWallParent)
        return 0;
      const SceneObject* parent = scene.find(cand.support.parent);
      if (!parent) return 0;
      const SceneObject* want = resolve_anchor(scene, c.anchor, p, self_id);
      if (!want) fail(Errc::DanglingAnchor, "constraint anchor '" + c.anchor + "' not found");
      return parent->id == want->id ||
                     parent->category == normalize_category(c.anchor)
                 ? 1.0
                 : 0.0;
    }
  }
  return 0;
}

// Weighted sum of per-constraint satisfactions. Empty constraint set -> 0.
inline double score_candidate(const CandidatePlacement& cand,
                              const std::vector<Constraint>& constraints,
                              const Scene& scene) {
  double s = 0;
  for (const Constraint& c : constraints)
    s += c.weight * constraint_satisfaction(c, scene, cand, cand.object_id);
  return s;
}

// ---------------------------------------------------------------------------
// Candidate sampling

namespace detail {

struct ObstacleSet {
  std::vector<const SceneObject*> objects;
  std::vector<Obb> boxes;
  std::vector<Polygon2> footprints;
  std::vector<Polygon2> door_rects;

  static ObstacleSet build(const Scene& scene, const PlacementOptions& opts) {
    ObstacleSet s;
    for (const auto& o : scene.objects) {
      s.objects.push_back(&o);
      s.boxes.push_back(world_obb(o));
      s.footprints.push_back(s.boxes.back().footprint());
    }
    for (const Door& d : scene.plan.doors) {
      Vec2 dir = (d.p1 - d.p0).normalized();
      Vec2 nrm{-dir.y, dir.x};
      double c = opts.door_clearance;
      Polygon2 rect{d.p0 - dir * c - nrm * c, d.p1 + dir * c - nrm * c,
                    d.p1 + dir * c + nrm * c, d.p0 - dir * c + nrm * c};
      if (polygon_area(rect) < 0) std::reverse(rect.begin(), rect.end());
      s.door_rects.push_back(std::move(rect));
    }
    return s;
  }
};

// Cheap gate: true when the candidate footprint overlaps some object footprint
// by more than the tolerated margin (only objects sharing the z interval).
inline bool broad_blocked(const ObstacleSet& obs, const Polygon2& fp, double z_lo,
                          double z_hi, const PlacementOptions& opts,
                          const std::string& skip_id) {
  for (size_t i = 0; i < obs.objects.size(); ++i) {
    if (obs.objects[i]->id == skip_id) continue;
    const Obb& b = obs.boxes[i];
    if (b.top() <= z_lo + 1e-9 || b.bottom() >= z_hi - 1e-9) continue;
    if (convex_overlap_depth(fp, obs.footprints[i]) > opts.broad_margin) return true;
  }
  return false;
}

inline bool blocks_door(const ObstacleSet& obs, const Polygon2& fp) {
  for (const Polygon2& rect : obs.door_rects)
    if (convex_overlap(fp, rect, 0)) return true;
  return false;
}

// Exact stage: OBB vs everything, support parent excluded.
inline bool exact_collision_free(const ObstacleSet& obs, const Obb& box,
                                 const std::string& skip_id,
                                 const std::string& parent_id) {
  for (size_t i = 0; i < obs.objects.size(); ++i) {
    const std::string& oid = obs.objects[i]->id;
    if (oid == skip_id || oid == parent_id) continue;
    if (obb_overlap(box, obs.boxes[i], kCollisionTol)) return false;
  }
  return true;
}

struct StyledShape {
  TriMesh mesh;    // style-rotated local mesh
  Aabb box;        // its bounds
  double z_off;    // pose z minus target base height
};

inline StyledShape styled_shape(const SceneObject& obj, const Quat& style) {
  StyledShape s;
  s.mesh = transform_mesh(obj.mesh, Pose{{0, 0, 0}, style});
  s.box = s.mesh.aabb();
  s.z_off = -s.box.min.z;
  return s;
}

// World OBB of the styled local box under a candidate pose: the style is
// already folded into the mesh, so only the yaw component moves the box.
inline Obb styled_obb(const StyledShape& s, const Pose& pose, double yaw) {
  Obb o;
  o.half = s.box.size() * 0.5;
  o.orientation = Quat::from_yaw(yaw);
  o.center = pose.position + o.orientation.rotate(s.box.center());
  return o;
}

}  // namespace detail

// Sample up to opts.cap scored candidates; see header comment for gating.
// Throws NoFreeSpace when nothing eligible exists, DanglingAnchor when an
// OnTopOf anchor matches nothing.
inline std::vector<CandidatePlacement> sample_candidates(
    const Scene& scene, const SceneObject& obj, PlacementClass cls,
    const std::vector<Constraint>& constraints, const PlacementOptions& opts = {},
    const Quat& style = Quat::identity()) {
  if (obj.mesh.empty()) fail(Errc::EmptyMesh, "object " + obj.id + " has no mesh");
  detail::ObstacleSet obs = detail::ObstacleSet::build(scene, opts);
  detail::StyledShape shape = detail::styled_shape(obj, style);
  std::vector<CandidatePlacement> all;
  int index = 0;

  auto push_candidate = [&](Vec2 xy, double base_z, double yaw,
                            const SupportRelation& rel, Vec2 center_ref,
                            const std::function<bool(const Polygon2&)>& contained) {
    int idx = index++;
    Pose pose;
    pose.position = {xy.x, xy.y, base_z + shape.z_off};
    pose.orientation = (Quat::from_yaw(yaw) * style).normalized();
    Obb box = detail::styled_obb(shape, pose, yaw);
    Polygon2 fp = box.footprint();
    if (!contained(fp)) return;
    if (detail::blocks_door(obs, fp)) return;
    if (detail::broad_blocked(obs, fp, box.bottom(), box.top(), opts,
                              rel.parent))
      return;
    CandidatePlacement c;
    c.object_id = obj.id;
    c.pose = pose;
    c.support = rel;
    c.support.child = obj.id;
    c.grid_index = idx;
    c.dist_center = (xy - center_ref).norm();
    c.collision_free = detail::exact_collision_free(obs, box, obj.id, rel.parent);
    all.push_back(std::move(c));
  };

  auto grid_points = [&](const Aabb2& bbox) {
    std::vector<Vec2> pts;
    for (double y = bbox.min.y + opts.grid / 2; y < bbox.max.y; y += opts.grid)
      for (double x = bbox.min.x + opts.grid / 2; x < bbox.max.x; x += opts.grid)
        pts.push_back({x, y});
    return pts;
  };

  if (cls == PlacementClass::Floor) {
    for (const Room& room : scene.plan.rooms) {
      Aabb2 bbox = Aabb2::of(room.polygon);
      Vec2 center = polygon_centroid(room.polygon);
      auto inside_room = [&](const Polygon2& fp) {
        for (const Vec2& p : fp)
          if (signed_dist_inside(room.polygon, p) < 0) return false;
        return true;
      };
      for (Vec2 p : grid_points(bbox)) {
        if (!point_in_convex(room.polygon, p)) {
          index += opts.yaw_count;
          continue;
        }
        for (int k = 0; k < opts.yaw_count; ++k)
          push_candidate(p, 0.0, 2 * kPi * k / opts.yaw_count,
                         {obj.id, kFloorParent, -1}, center, inside_room);
      }
    }
  } else if (cls == PlacementClass::Wall) {
    const CategorySpec* spec = find_category(obj.category);
    double lo = spec && spec->wall_hi > 0 ? spec->wall_lo : 1.2;
    double hi = spec && spec->wall_hi > 0 ? spec->wall_hi : 1.8;
    double h = shape.box.size().z;
    double depth = shape.box.size().y;
    for (const Room& room : scene.plan.rooms) {
      Vec2 center = polygon_centroid(room.polygon);
      auto inside_room = [&](const Polygon2& fp) {
        for (const Vec2& p : fp)
          if (signed_dist_inside(room.polygon, p) < -1e-6) return false;
        return true;
      };
      if (h >= room.wall_height) continue;
      for (size_t e = 0; e < room.polygon.size(); ++e) {
        Vec2 a = room.polygon[e], b = room.polygon[(e + 1) % room.polygon.size()];
        Vec2 dir = (b - a).normalized();
        Vec2 inward{-dir.y, dir.x};  // CCW: interior on the left
        double len = (b - a).norm();
        double yaw = std::atan2(inward.y, inward.x) - kPi / 2;  // +Y into room
        double zc = std::clamp((lo + hi) / 2, h / 2, room.wall_height - h / 2);
        for (double s = opts.grid / 2; s < len; s += opts.grid) {
          Vec2 p = a + dir * s + inward * (depth / 2 + opts.wall_gap);
          push_candidate(p, zc - h / 2, yaw, {obj.id, kWallParent, -1}, center,
                         inside_room);
        }
      }
    }
  } else {  // OnTop
    std::string anchor_text;
    for (const Constraint& c : constraints)
      if (c.kind == ConstraintKind::OnTopOf) anchor_text = c.anchor;
    std::vector<const SceneObject*> parents;
    std::string cat = anchor_text.empty() ? "" : normalize_category(anchor_text);
    std::string low = lowercase(trim(anchor_text));
    for (const auto& o : scene.objects) {
      if (o.id == obj.id) continue;
      if (anchor_text.empty()) continue;
      if (o.id == trim(anchor_text) || o.category == cat ||
          lowercase(o.description).find(low) != std::string::npos)
        parents.push_back(&o);
    }
    if (parents.empty())
      fail(Errc::DanglingAnchor,
           anchor_text.empty() ? "on-top request without on(...) constraint"
                               : "no object matches on(" + anchor_text + ")");
    for (const SceneObject* parent : parents) {
      TriMesh world = transform_mesh(parent->mesh, parent->pose);
      auto surfaces = extract_support_surfaces(world);
      for (size_t si = 0; si < surfaces.size(); ++si) {
        const SupportSurface& surf = surfaces[si];
        double top = surf.height + shape.box.size().z;
        auto contained = [&](const Polygon2& fp) {
          for (const Vec2& p : fp)
            if (signed_dist_inside(surf.hull, p) < opts.surface_margin) return false;
          // Headroom: parent structure above this spot (shelf board, headboard)
          // must clear the object's top. Tested against surface material so a
          // bowl rim ring does not veto the cavity it encloses.
          Vec2 mid = polygon_centroid(fp);
          for (size_t sj = 0; sj < surfaces.size(); ++sj) {
            const SupportSurface& above = surfaces[sj];
            if (above.height <= surf.height + 1e-3 || above.height >= top + 0.005)
              continue;
            if (above.covers(mid)) return false;
            for (const Vec2& p : fp)
              if (above.covers(p)) return false;
          }
          return true;
        };
        Vec2 scenter = polygon_centroid(surf.hull);
        Aabb2 bbox = Aabb2::of(surf.hull);
        std::vector<Vec2> pts = grid_points(bbox);
        pts.push_back(scenter);  // small surfaces may fit only dead center
        for (Vec2 p : pts)
          for (int k = 0; k < opts.yaw_count; ++k)
            push_candidate(p, surf.height, 2 * kPi * k / opts.yaw_count,
                           {obj.id, parent->id, int(si)}, scenter, contained);
      }
    }
  }

  // Score, order, truncate.
  for (CandidatePlacement& c : all) c.score = score_candidate(c, constraints, scene);
  std::sort(all.begin(), all.end(), [](const CandidatePlacement& a,
                                       const CandidatePlacement& b) {
    if (a.score != b.score) return a.score > b.score;
    if (a.dist_center != b.dist_center) return a.dist_center < b.dist_center;
    return a.grid_index < b.grid_index;
  });
  if (opts.exact_gate)
    std::erase_if(all, [](const CandidatePlacement& c) { return !c.collision_free; });
  if (all.empty())
    fail(Errc::NoFreeSpace, "no free placement for object " + obj.id);
  if (int(all.size()) > opts.cap) all.resize(size_t(opts.cap));
  return all;
}

// ---------------------------------------------------------------------------
// Plan search

struct PlacementRequest {
  SceneObject object;  // synthesized, real-size mesh; pose ignored
  std::vector<Constraint> constraints;
  Quat style = Quat::identity();  // extra base orientation (e.g. upright pillow)
};

struct PlacementFailure {
  std::string object_id;
  Errc reason = Errc::NoFreeSpace;
  std::string detail;
};

struct PlacementPlan {
  std::vector<std::pair<std::string, CandidatePlacement>> placed;
  std::vector<PlacementFailure> unplaced;
};

namespace detail {

inline int class_rank(PlacementClass c) {
  switch (c) {
    case PlacementClass::Floor: return 0;
    case PlacementClass::Wall: return 1;
    case PlacementClass::OnTop: return 2;
  }
  return 3;
}

}  // namespace detail

// DFS with backtracking over the requests (Floor, Wall, then OnTop). Every
// acceptance is optionally settle-validated; failures land in `unplaced`
// instead of throwing. Deterministic for a fixed scene and request list.
inline PlacementPlan plan_placements(const Scene& scene,
                                     std::vector<PlacementRequest> requests,
                                     const PlacementOptions& opts = {}) {
  std::stable_sort(requests.begin(), requests.end(),
                   [](const PlacementRequest& a, const PlacementRequest& b) {
                     return detail::class_rank(a.object.placement_class) <
                            detail::class_rank(b.object.placement_class);
                   });
  Scene work = scene;
  PlacementPlan plan;
  int budget = opts.node_budget;

  // Try candidates for request i on the working scene; returns the accepted
  // candidate (pose and support already final) or nullopt.
  auto try_accept = [&](const PlacementRequest& req,
                        const CandidatePlacement& cand)
      -> std::optional<CandidatePlacement> {
    CandidatePlacement out = cand;
    if (opts.use_physics) {
      SceneObject probe = req.object;
      probe.pose = cand.pose;
      ValidationOutcome v = validate_pose(work, probe, cand.pose, opts.settle);
      if (!v.accepted) return std::nullopt;
      out.pose = v.pose;
      out.support = v.support;
      out.support.child = req.object.id;
    }
    return out;
  };

  // A false return leaves `work` and `plan` exactly as at node entry; greedy
  // mode never backtracks and always returns true.
  std::function<bool(size_t, bool)> dfs = [&](size_t i, bool greedy) -> bool {
    if (i == requests.size()) return true;
    if (budget <= 0) greedy = true;
    const PlacementRequest& req = requests[i];
    size_t unplaced_mark = plan.unplaced.size();
    std::vector<CandidatePlacement> candidates;
    try {
      candidates = sample_candidates(work, req.object, req.object.placement_class,
                                     req.constraints, opts, req.style);
    } catch (const Error& e) {
      if (e.code() == Errc::DanglingAnchor || greedy ||
          e.code() != Errc::NoFreeSpace) {
        plan.unplaced.push_back({req.object.id, e.code(), e.what()});
        if (dfs(i + 1, greedy)) return true;
        plan.unplaced.resize(unplaced_mark);
        return false;
      }
      return false;  // NoFreeSpace: let the caller try its next candidate
    }
    for (const CandidatePlacement& cand : candidates) {
      --budget;
      std::optional<CandidatePlacement> acc = try_accept(req, cand);
      if (!acc) continue;
      SceneObject placed = req.object;
      placed.pose = acc->pose;
      work.insert_object(placed, acc->support);
      plan.placed.emplace_back(req.object.id, *acc);
      if (dfs(i + 1, greedy)) return true;
      work.erase_object(req.object.id);
      plan.placed.pop_back();
      plan.unplaced.resize(unplaced_mark);
      if (budget <= 0) greedy = true;
      if (greedy) {
        // Keep this candidate and move on without further backtracking.
        work.insert_object(placed, acc->support);
        plan.placed.emplace_back(req.object.id, *acc);
        return dfs(i + 1, true);
      }
    }
    if (greedy) {
      plan.unplaced.push_back({req.object.id, Errc::NoFreeSpace,
                               "no stable candidate for " + req.object.id});
      return dfs(i + 1, true);
    }
    return false;
  };

  if (!dfs(0, false)) {
    // Backtracking exhausted the root: redo greedily, keeping what fits.
    work = scene;
    plan = PlacementPlan{};
    budget = 0;
    dfs(0, true);
  }
  return plan;
}

// Apply a plan to a scene: insert each placed object at its accepted pose.
inline void apply_plan(Scene& scene, const std::vector<PlacementRequest>& requests,
                       const PlacementPlan& plan) {
  for (const auto& [id, cand] : plan.placed) {
    const PlacementRequest* req = nullptr;
    for (const auto& r : requests)
      if (r.object.id == id) req = &r;
    if (!req) fail(Errc::ObjectNotFound, "plan references unknown request " + id);
    SceneObject obj = req->object;
    obj.pose = cand.pose;
    scene.insert_object(std::move(obj), cand.support);
  }
}

// Convenience wrapper for single-object placement (the asset_place tool).
struct PlaceOutcome {
  bool placed = false;
  CandidatePlacement candidate;
  Errc reason = Errc::NoFreeSpace;
  std::string detail;
};

inline PlaceOutcome place_object(Scene& scene, const PlacementRequest& request,
                                 const PlacementOptions& opts = {}) {
  PlacementPlan plan = plan_placements(scene, {request}, opts);
  PlaceOutcome out;
  if (!plan.placed.empty()) {
    out.placed = true;
    out.candidate = plan.placed.front().second;
    SceneObject obj = request.object;
    obj.pose = out.candidate.pose;
    scene.insert_object(std::move(obj), out.candidate.support);
  } else if (!plan.unplaced.empty()) {
    out.reason = plan.unplaced.front().reason;
    out.detail = plan.unplaced.front().detail;
  }
  return out;
}

}  // namespace sageforge
