#pragma once
// Structural scene validation. validate_scene reports every violated
// invariant as a (code, subject, detail) entry; an empty report means the
// scene is well-formed.

#include <set>

#include "sageforge/scene.hpp"

namespace sageforge {

struct Violation {
  std::string code;    // stable machine-readable code
  std::string subject; // object/room id, may be empty
  std::string detail;
};

struct ValidationReport {
  std::vector<Violation> violations;
  bool ok() const { return violations.empty(); }
};

inline ValidationReport validate_scene(const Scene& scene) {
  ValidationReport rep;
  auto add = [&](std::string code, std::string subject, std::string detail) {
    rep.violations.push_back({std::move(code), std::move(subject), std::move(detail)});
  };

  // Rooms: simple CCW rectangles with positive area.
  std::set<std::string> room_ids;
  for (const auto& r : scene.plan.rooms) {
    if (!room_ids.insert(r.id).second) add("DuplicateRoomId", r.id, "room id reused");
    if (r.polygon.size() < 3) {
      add("DegenerateRoom", r.id, "fewer than 3 vertices");
      continue;
    }
    if (polygon_area(r.polygon) <= 0)
      add("RoomNotCcw", r.id, "polygon area non-positive (must be CCW)");
    if (r.wall_height <= 0) add("BadWallHeight", r.id, "wall height must be > 0");
  }
  // Room interiors disjoint (boundaries may touch).
  for (size_t i = 0; i < scene.plan.rooms.size(); ++i)
    for (size_t j = i + 1; j < scene.plan.rooms.size(); ++j) {
      const auto& a = scene.plan.rooms[i];
      const auto& b = scene.plan.rooms[j];
      if (a.polygon.size() >= 3 && b.polygon.size() >= 3 &&
          convex_overlap(a.polygon, b.polygon, 1e-9))
        add("RoomsOverlap", a.id, "interior overlaps room " + b.id);
    }
  // Doors lie on a wall shared by both rooms.
  for (const auto& d : scene.plan.doors) {
    bool found_a = room_ids.count(d.room_a) > 0, found_b = room_ids.count(d.room_b) > 0;
    if (!found_a || !found_b) {
      add("DoorRoomMissing", d.room_a + "/" + d.room_b, "door references unknown room");
      continue;
    }
    auto on_boundary = [&](const Room& r) {
      const double tol = 1e-6;
      double d0 = std::abs(signed_dist_inside(r.polygon, d.p0));
      double d1 = std::abs(signed_dist_inside(r.polygon, d.p1));
      return d0 <= tol && d1 <= tol;
    };
    for (const auto& r : scene.plan.rooms)
      if ((r.id == d.room_a || r.id == d.room_b) && !on_boundary(r))
        add("DoorOffWall", r.id, "door segment not on the room boundary");
  }

  // Objects.
  std::set<std::string> ids;
  for (const auto& o : scene.objects) {
    if (o.id.size() != 8 || o.id.find_first_not_of("0123456789abcdef") != std::string::npos)
      add("BadObjectId", o.id, "ids are eight lowercase hex chars");
    if (!ids.insert(o.id).second) add("DuplicateObjectId", o.id, "object id reused");
    if (o.mesh.empty()) {
      add("EmptyMesh", o.id, "object has no mesh vertices");
    } else {
      Aabb box = o.mesh.aabb();
      Vec3 size = box.size();
      if (size.x <= 0 || size.y <= 0 || size.z <= 0)
        add("DegenerateMesh", o.id, "mesh bounding box has a zero extent");
      if (std::abs(box.min.z) > 1e-6)
        add("MeshBaseOffOrigin", o.id, "local mesh base must sit at z=0");
      for (const auto& t : o.mesh.triangles)
        for (int k : t)
          if (k < 0 || k >= int(o.mesh.vertices.size())) {
            add("BadTriangleIndex", o.id, "triangle index out of range");
            goto next_mesh;
          }
      next_mesh:;
    }
    double qn = o.pose.orientation.norm();
    if (std::abs(qn - 1.0) > 1e-6)
      add("UnnormalizedQuaternion", o.id, "orientation norm " + std::to_string(qn));
    if (o.attrs.mass < 0) add("NegativeMass", o.id, "mass must be >= 0");
    if (o.attrs.height <= 0) add("BadHeight", o.id, "attr height must be > 0");
    if (o.attrs.metallic < 0 || o.attrs.metallic > 1 || o.attrs.roughness < 0 ||
        o.attrs.roughness > 1)
      add("BadMaterial", o.id, "metallic/roughness must be within [0,1]");
    if (o.placement_class == PlacementClass::Wall && !o.attrs.static_)
      add("WallNotStatic", o.id, "wall-mounted objects must be static");
  }

  // Supports: every object exactly one relation; parents exist; graph acyclic.
  std::map<std::string, int> support_count;
  for (const auto& s : scene.supports) {
    ++support_count[s.child];
    if (!ids.count(s.child))
      add("SupportChildMissing", s.child, "support child is not in the scene");
    if (s.parent != kFloorParent && s.parent != kWallParent && !ids.count(s.parent))
      add("SupportParentMissing", s.child, "parent " + s.parent + " not in scene");
    if (s.parent == s.child) add("SelfSupport", s.child, "object supports itself");
  }
  for (const auto& o : scene.objects) {
    int n = support_count.count(o.id) ? support_count[o.id] : 0;
    if (n == 0) add("MissingSupport", o.id, "object has no support relation");
    if (n > 1) add("MultipleSupport", o.id, "object has more than one support relation");
  }
  // Cycle check by walking parents (graph is tiny).
  for (const auto& o : scene.objects) {
    std::set<std::string> seen;
    std::string cur = o.id;
    while (true) {
      const SupportRelation* rel = scene.support_of(cur);
      if (!rel || rel->parent == kFloorParent || rel->parent == kWallParent) break;
      if (!seen.insert(cur).second) {
        add("SupportCycle", o.id, "support chain loops");
        break;
      }
      if (!scene.find(rel->parent)) break;
      cur = rel->parent;
    }
  }

  return rep;
}

}  // namespace sageforge
