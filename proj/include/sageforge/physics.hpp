#pragma once

// Deterministic quasi-static settle oracle and scene physics metrics.
//
// Settling drops an object along -Z until mesh vertices touch a support field
// (another object's support surface or the room floor), then, while the
// volume centroid projects less than 1 cm inside the contact footprint hull,
// tips the object about the nearest hull feature in 1 degree increments,
// re-dropping after every step. An object is stable when its settled pose
// stays within 0.2 m translation and 8 degrees rotation of the start pose.

#include <algorithm>
#include <map>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "sageforge/scene.hpp"
#include "sageforge/scene_io.hpp"
#include "sageforge/surfaces.hpp"

namespace sageforge {

struct SettleParams {
  int max_iterations = 120;       // outer drop/tip cycles
  double contact_tol = 0.002;     // vertices within 2 mm of the plane touch it
  double com_margin = 0.01;       // centroid must sit >= 1 cm inside the hull
  double tip_step_deg = 1.0;
  double rest_tol = 0.02;         // max embedding for a field to count as rest
};

struct SettleResult {
  std::string object_id;
  Pose pre_pose, post_pose;
  int iterations = 0;
  bool converged = false;
  std::string parent_id;     // field the object finally rests on (FLOOR or id)
  int surface_index = -1;
};

struct StabilityVerdict {
  bool stable = false;
  double delta_translation = 0;
  double delta_rotation_deg = 0;
};

inline constexpr double kStabilityMaxTranslation = 0.2;  // meters
inline constexpr double kStabilityMaxRotationDeg = 8.0;  // degrees
inline constexpr double kCollisionTol = 0.005;           // OBB penetration tolerance

inline StabilityVerdict check_stability(const Pose& pre, const Pose& post) {
  StabilityVerdict v;
  v.delta_translation = (post.position - pre.position).norm();
  v.delta_rotation_deg = quat_angle_deg(pre.orientation, post.orientation);
  v.stable = v.delta_translation <= kStabilityMaxTranslation &&
             v.delta_rotation_deg <= kStabilityMaxRotationDeg;
  return v;
}

namespace detail {

// A horizontal plane region something can rest on: either one support surface
// of a scene object, or a room floor.
struct SupportField {
  double height = 0;
  std::string parent_id;               // kFloorParent for floors
  int surface_index = -1;
  const SupportSurface* surface = nullptr;  // null for floors
  const Polygon2* room_poly = nullptr;      // set for floors

  bool covers(Vec2 p) const {
    if (surface) return surface->covers(p);
    return room_poly && point_in_convex(*room_poly, p);
  }
};

}  // namespace detail

// Snapshot of a scene with cached world-frame support surfaces; the hub for
// settling and stability metrics. Objects in `exclude` never act as supports
// (the settling object itself and everything stacked on it).
class SettleWorld {
 public:
  explicit SettleWorld(const Scene& scene, SettleParams params = {})
      : scene_(scene), params_(params) {}

  const SettleParams& params() const { return params_; }

  void invalidate(const std::string& id) { surfaces_.erase(id); }

  const std::vector<SupportSurface>& surfaces_of(const SceneObject& obj) {
    auto it = surfaces_.find(obj.id);
    if (it != surfaces_.end()) return it->second;
    auto world = transform_mesh(obj.mesh, obj.pose);
    return surfaces_.emplace(obj.id, extract_support_surfaces(world)).first->second;
  }

  // All fields the given world-frame mesh could rest on, given its vertical
  // extent; fields deeper than rest_tol inside the mesh are not rests.
  struct FieldHit {
    detail::SupportField field;
    double gap = 0;  // min over covered vertices of (v.z - field.height)
  };

  // First contact along -Z: the qualifying field with the smallest gap.
  // Returns false when nothing lies underneath (outside every room, no
  // surface coverage).
  bool first_contact(const TriMesh& world, const std::set<std::string>& exclude,
                     FieldHit& out) {
    bool found = false;
    auto consider = [&](const detail::SupportField& f) {
      double gap = 0;
      bool any = false;
      for (const Vec3& v : world.vertices) {
        if (!f.covers(v.xy())) continue;
        double g = v.z - f.height;
        if (!any || g < gap) gap = g;
        any = true;
      }
      if (!any || gap < -params_.rest_tol) return;
      if (!found || gap < out.gap) {
        out = {f, gap};
        found = true;
      }
    };
    for (const Room& room : scene_.plan.rooms) {
      detail::SupportField f;
      f.height = 0;
      f.parent_id = kFloorParent;
      f.room_poly = &room.polygon;
      consider(f);
    }
    for (const SceneObject& other : scene_.objects) {
      if (exclude.count(other.id)) continue;
      const auto& surfaces = surfaces_of(other);
      for (size_t i = 0; i < surfaces.size(); ++i) {
        detail::SupportField f;
        f.height = surfaces[i].height;
        f.parent_id = other.id;
        f.surface_index = int(i);
        f.surface = &surfaces[i];
        consider(f);
      }
    }
    return found;
  }

  // Settle an object (not necessarily present in the scene) from `start`.
  SettleResult settle_pose(const SceneObject& obj, const Pose& start,
                           const std::set<std::string>& exclude) {
    SettleResult r{obj.id, start, start, 0, false, "", -1};
    if (obj.attrs.static_) {
      r.converged = true;
      return r;
    }
    if (obj.mesh.empty()) fail(Errc::EmptyMesh, "cannot settle empty mesh " + obj.id);
    Pose pose = start;
    for (int it = 1; it <= params_.max_iterations; ++it) {
      r.iterations = it;
      TriMesh world = transform_mesh(obj.mesh, pose);
      FieldHit hit;
      if (!first_contact(world, exclude, hit))
        fail(Errc::NoSupportBelow, "nothing under object " + obj.id);
      if (hit.gap != 0.0) {
        pose.position.z -= hit.gap;
        for (Vec3& v : world.vertices) v.z -= hit.gap;
      }
      r.parent_id = hit.field.parent_id;
      r.surface_index = hit.field.surface_index;
      // Contact footprint: touching vertices over the field material.
      std::vector<Vec2> touching;
      for (const Vec3& v : world.vertices)
        if (std::abs(v.z - hit.field.height) <= params_.contact_tol &&
            hit.field.covers(v.xy()))
          touching.push_back(v.xy());
      Polygon2 hull = convex_hull(touching);
      Vec2 com = mesh_volume_centroid(world).second.xy();
      if (signed_dist_inside(hull, com) >= params_.com_margin) {
        r.converged = true;
        break;
      }
      pose = tip_once(pose, hull, com, hit.field.height);
    }
    r.post_pose = pose;
    return r;
  }

  SettleResult settle(const std::string& id) {
    const SceneObject& obj = scene_.get(id);
    std::set<std::string> exclude{id};
    for (const auto& d : scene_.descendants_of(id)) exclude.insert(d);
    return settle_pose(obj, obj.pose, exclude);
  }

 private:
  // One tip step: rotate about the support feature nearest the centroid
  // projection, in whichever direction lowers the centroid.
  Pose tip_once(const Pose& pose, const Polygon2& hull, Vec2 com, double height) {
    Vec2 q = com;        // pivot point on the hull boundary
    Vec2 edge_dir{1, 0};
    bool on_edge = false;
    if (hull.size() == 1) {
      q = hull[0];
    } else if (hull.size() >= 2) {
      double best = -1;
      for (size_t i = 0; i < hull.size(); ++i) {
        Vec2 a = hull[i], b = hull[(i + 1) % hull.size()];
        if (hull.size() == 2 && i == 1) break;
        double d = dist_point_segment(com, a, b);
        if (best < 0 || d < best) {
          best = d;
          Vec2 ab = b - a;
          double len2 = ab.dot(ab);
          double t = len2 > 0 ? std::clamp((com - a).dot(ab) / len2, 0.0, 1.0) : 0.0;
          q = a + ab * t;
          on_edge = len2 > 0 && t > 1e-9 && t < 1.0 - 1e-9;
          edge_dir = len2 > 0 ? ab.normalized() : Vec2{1, 0};
        }
      }
    }
    Vec3 axis_dir;
    if (on_edge) {
      axis_dir = {edge_dir.x, edge_dir.y, 0};
    } else {
      Vec2 out = com - q;
      double n = out.norm();
      if (n < 1e-12) out = Vec2{1, 0};
      else out = out * (1.0 / n);
      axis_dir = {-out.y, out.x, 0};  // horizontal, perpendicular to outward
    }
    Vec3 pivot{q.x, q.y, height};
    double step = deg2rad(params_.tip_step_deg);
    Pose best_pose;
    double best_z = 0;
    bool have = false;
    for (int sign : {1, -1}) {
      Quat rot = Quat::from_axis_angle(axis_dir, sign * step);
      Pose cand;
      cand.position = pivot + rot.rotate(pose.position - pivot);
      cand.orientation = (rot * pose.orientation).normalized();
      // The sign that sinks the centroid column is the falling direction; any
      // probe point above the plane on that column gives the same sign.
      Vec3 lifted{com.x, com.y, height + 1.0};
      double z = (pivot + rot.rotate(lifted - pivot)).z;
      if (!have || z < best_z) {
        best_pose = cand;
        best_z = z;
        have = true;
      }
    }
    return best_pose;
  }

  const Scene& scene_;
  SettleParams params_;
  std::map<std::string, std::vector<SupportSurface>> surfaces_;
};

inline SettleResult settle_object(const Scene& scene, const std::string& id,
                                  const SettleParams& params = {}) {
  SettleWorld world(scene, params);
  return world.settle(id);
}

// What an object dropped at `pose` would land on first.
struct SupportHit {
  std::string parent_id;
  int surface_index = -1;
  double height = 0;
  double drop = 0;
};

inline SupportHit find_support_below(const Scene& scene, const SceneObject& obj,
                                     const Pose& pose,
                                     const std::set<std::string>& exclude_extra = {}) {
  SettleWorld world(scene);
  std::set<std::string> exclude = exclude_extra;
  exclude.insert(obj.id);
  for (const auto& d : scene.descendants_of(obj.id)) exclude.insert(d);
  SettleWorld::FieldHit hit;
  TriMesh mesh = transform_mesh(obj.mesh, pose);
  if (!world.first_contact(mesh, exclude, hit))
    fail(Errc::NoSupportBelow, "nothing under object " + obj.id);
  return {hit.field.parent_id, hit.field.surface_index, hit.field.height, hit.gap};
}

// ---------------------------------------------------------------------------
// Collision metrics

struct CollisionReport {
  std::vector<std::pair<std::string, std::string>> colliding_pairs;
  double collision_ratio = 0;
};

// True when (a, b) is a direct support pair in either direction.
inline bool is_support_pair(const Scene& scene, const std::string& a,
                            const std::string& b) {
  const SupportRelation* ra = scene.support_of(a);
  const SupportRelation* rb = scene.support_of(b);
  return (ra && ra->parent == b) || (rb && rb->parent == a);
}

inline CollisionReport scene_collision_ratio(const Scene& scene) {
  CollisionReport rep;
  size_t n = scene.objects.size();
  if (n == 0) return rep;
  std::vector<Obb> boxes;
  boxes.reserve(n);
  for (const auto& o : scene.objects) boxes.push_back(world_obb(o));
  std::set<std::string> hit;
  for (size_t i = 0; i < n; ++i)
    for (size_t j = i + 1; j < n; ++j) {
      const std::string& a = scene.objects[i].id;
      const std::string& b = scene.objects[j].id;
      if (is_support_pair(scene, a, b)) continue;
      if (obb_overlap(boxes[i], boxes[j], kCollisionTol)) {
        rep.colliding_pairs.emplace_back(a, b);
        hit.insert(a);
        hit.insert(b);
      }
    }
  rep.collision_ratio = double(hit.size()) / double(n);
  return rep;
}

// ---------------------------------------------------------------------------
// Placement validation (the physics critic's accept/reject decision)

enum class RejectReason { None, Unstable, NoSupport, Collision };

inline const char* reject_reason_name(RejectReason r) {
  switch (r) {
    case RejectReason::None: return "none";
    case RejectReason::Unstable: return "unstable";
    case RejectReason::NoSupport: return "no-support";
    case RejectReason::Collision: return "collision";
  }
  return "?";
}

struct ValidationOutcome {
  bool accepted = false;
  bool adjusted = false;
  Pose pose;                 // the accepted pose (original or first settle's)
  RejectReason reason = RejectReason::None;
  SettleResult first, second;
  SupportRelation support;   // where the accepted pose actually rests
};

namespace detail {

// OBB collision of a prospective object pose against the scene, ignoring its
// support parent (resting contact is not a collision).
inline bool pose_collides(const Scene& scene, const SceneObject& obj,
                          const Pose& pose, const std::string& parent_id) {
  SceneObject probe = obj;
  probe.pose = pose;
  Obb box = world_obb(probe);
  for (const auto& other : scene.objects) {
    if (other.id == obj.id || other.id == parent_id) continue;
    if (obb_overlap(box, world_obb(other), kCollisionTol)) return true;
  }
  return false;
}

}  // namespace detail

// Settle once; if stable, accept the original pose. Otherwise re-settle from
// the settled pose and accept that adjustment if the second pass holds still.
// Collisions at the accepted pose reject regardless of stability.
inline ValidationOutcome validate_pose(const Scene& scene, const SceneObject& obj,
                                       const Pose& pose, const SettleParams& params = {}) {
  ValidationOutcome out;
  SettleWorld world(scene, params);
  std::set<std::string> exclude{obj.id};
  for (const auto& d : scene.descendants_of(obj.id)) exclude.insert(d);
  try {
    out.first = world.settle_pose(obj, pose, exclude);
  } catch (const Error& e) {
    if (e.code() != Errc::NoSupportBelow) throw;
    out.reason = RejectReason::NoSupport;
    return out;
  }
  StabilityVerdict v1 = check_stability(pose, out.first.post_pose);
  const SettleResult* rest = &out.first;
  if (out.first.converged && v1.stable) {
    out.pose = pose;
  } else {
    try {
      out.second = world.settle_pose(obj, out.first.post_pose, exclude);
    } catch (const Error& e) {
      if (e.code() != Errc::NoSupportBelow) throw;
      out.reason = RejectReason::NoSupport;
      return out;
    }
    StabilityVerdict v2 = check_stability(out.first.post_pose, out.second.post_pose);
    if (!out.second.converged || !v2.stable) {
      out.reason = RejectReason::Unstable;
      return out;
    }
    out.pose = out.first.post_pose;
    out.adjusted = true;
    rest = &out.second;
  }
  if (detail::pose_collides(scene, obj, out.pose, rest->parent_id)) {
    out.reason = RejectReason::Collision;
    out.accepted = false;
    return out;
  }
  out.accepted = true;
  out.support = SupportRelation{obj.id, rest->parent_id, rest->surface_index};
  return out;
}

// ---------------------------------------------------------------------------
// Batch settle: one pass over dynamic floor objects, bottom up. Stable
// objects adopt their settled pose (descendants ride along); unstable ones
// are removed together with everything stacked on them.

struct BatchSettleResult {
  Scene scene;
  std::vector<std::string> removed;
  std::vector<SettleResult> results;
};

inline BatchSettleResult batch_settle(const Scene& input, const SettleParams& params = {}) {
  BatchSettleResult out{input, {}, {}};
  Scene& scene = out.scene;
  std::vector<std::string> order;
  for (const auto& o : scene.objects) {
    const SupportRelation* rel = scene.support_of(o.id);
    if (!o.attrs.static_ && rel && rel->parent == kFloorParent) order.push_back(o.id);
  }
  std::stable_sort(order.begin(), order.end(), [&](const auto& a, const auto& b) {
    return world_obb(scene.get(a)).bottom() < world_obb(scene.get(b)).bottom();
  });
  SettleWorld world(scene, params);
  for (const std::string& id : order) {
    SceneObject& obj = scene.get(id);
    std::set<std::string> exclude{id};
    std::vector<std::string> kids = scene.descendants_of(id);
    for (const auto& d : kids) exclude.insert(d);
    SettleResult res;
    bool stable = false;
    try {
      res = world.settle_pose(obj, obj.pose, exclude);
      stable = res.converged && check_stability(obj.pose, res.post_pose).stable;
    } catch (const Error& e) {
      if (e.code() != Errc::NoSupportBelow) throw;
      stable = false;
      res = SettleResult{id, obj.pose, obj.pose, 0, false, "", -1};
    }
    out.results.push_back(res);
    if (!stable) {
      for (auto it = kids.rbegin(); it != kids.rend(); ++it) {
        scene.erase_object(*it);
        world.invalidate(*it);
        out.removed.push_back(*it);
      }
      scene.erase_object(id);
      world.invalidate(id);
      out.removed.push_back(id);
      continue;
    }
    if ((res.post_pose.position - obj.pose.position).norm() > 0 ||
        quat_angle_deg(res.post_pose.orientation, obj.pose.orientation) > 0) {
      // Rigid delta carried onto the object and all descendants.
      Pose pre = obj.pose;
      Quat rd = res.post_pose.orientation * pre.orientation.conjugate();
      auto carry = [&](SceneObject& o) {
        o.pose.position =
            res.post_pose.position + rd.rotate(o.pose.position - pre.position);
        o.pose.orientation = (rd * o.pose.orientation).normalized();
        world.invalidate(o.id);
      };
      carry(obj);
      obj.pose = res.post_pose;  // exact, avoids accumulated rounding
      for (const auto& k : kids) carry(scene.get(k));
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Stability metrics

struct StabilityReport {
  double stability_ratio = 1.0;
  std::vector<std::string> unstable_ids;
  std::vector<SettleResult> results;
};

inline StabilityReport scene_stability_report(const Scene& scene,
                                              const SettleParams& params = {}) {
  StabilityReport rep;
  SettleWorld world(scene, params);
  int dynamic = 0, stable = 0;
  for (const auto& obj : scene.objects) {
    if (obj.attrs.static_) continue;
    ++dynamic;
    bool ok = false;
    try {
      SettleResult res = world.settle(obj.id);
      rep.results.push_back(res);
      ok = res.converged && check_stability(obj.pose, res.post_pose).stable;
    } catch (const Error& e) {
      if (e.code() != Errc::NoSupportBelow) throw;
    }
    if (ok) ++stable;
    else rep.unstable_ids.push_back(obj.id);
  }
  rep.stability_ratio = dynamic == 0 ? 1.0 : double(stable) / double(dynamic);
  return rep;
}

inline double scene_stability_ratio(const Scene& scene,
                                    const SettleParams& params = {}) {
  return scene_stability_report(scene, params).stability_ratio;
}

inline nlohmann::ordered_json metrics_report(const Scene& scene,
                                             const SettleParams& params = {}) {
  CollisionReport col = scene_collision_ratio(scene);
  StabilityReport stab = scene_stability_report(scene, params);
  nlohmann::ordered_json j;
  j["num_objects"] = scene.objects.size();
  j["collision_ratio"] = col.collision_ratio;
  j["stability_ratio"] = stab.stability_ratio;
  j["unstable_ids"] = stab.unstable_ids;
  auto pairs = nlohmann::ordered_json::array();
  for (const auto& [a, b] : col.colliding_pairs) pairs.push_back({a, b});
  j["colliding_pairs"] = pairs;
  return j;
}

}  // namespace sageforge
