#pragma once
// Scene data model: rooms, objects, support relations, task specs. A Scene is
// a plain value type; every mutation goes through free functions so tools and
// tests share one code path.

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "sageforge/geometry.hpp"

namespace sageforge {

// Support-parent sentinels (anything else is an object id).
inline constexpr const char* kFloorParent = "FLOOR";
inline constexpr const char* kWallParent = "WALL";

enum class PlacementClass { Floor, Wall, OnTop };

inline const char* placement_class_name(PlacementClass c) {
  switch (c) {
    case PlacementClass::Floor: return "floor";
    case PlacementClass::Wall: return "wall";
    case PlacementClass::OnTop: return "on_top";
  }
  return "floor";
}

inline PlacementClass placement_class_from_name(const std::string& s) {
  if (s == "wall") return PlacementClass::Wall;
  if (s == "on_top") return PlacementClass::OnTop;
  if (s == "floor") return PlacementClass::Floor;
  fail(Errc::ParseError, "unknown placement class: " + s);
}

struct PhysicalAttributes {
  double height = 0;    // target bounding-box height, meters
  double mass = 0;      // kg
  double metallic = 0;  // [0,1]
  double roughness = 0.5;
  bool static_ = false; // immovable (wall-mounted objects are always static)
};

struct SceneObject {
  std::string id;          // eight hex chars, unique in the scene
  std::string description; // free-form text the object was requested with
  std::string category;    // attribute-table key, lowercase
  PlacementClass placement_class = PlacementClass::Floor;
  Pose pose;               // local mesh frame -> world
  TriMesh mesh;            // local frame: base at z=0, +Z up
  PhysicalAttributes attrs;
  bool task_relevant = false;
  std::string mesh_path;   // relative sidecar path, set on save/load
};

struct Rgb {
  double r = 0.5, g = 0.5, b = 0.5;
};

struct Room {
  std::string id;
  std::string kind;      // e.g. "bedroom"; free-form label
  Polygon2 polygon;      // CCW loop; axis-aligned rectangle in v1
  double wall_height = 2.6;
  Rgb floor_color;
  Rgb wall_color;
};

struct Door {
  std::string room_a;
  std::string room_b;
  Vec2 p0, p1;           // segment on the shared wall
  double width = 0.9;
};

struct FloorPlan {
  std::vector<Room> rooms;
  std::vector<Door> doors;
};

struct SupportRelation {
  std::string child;     // object id
  std::string parent;    // object id, kFloorParent, or kWallParent
  int surface = -1;      // index into the parent's support surfaces (-1: n/a)
};

struct RequiredObject {
  std::string description;
  std::string category;
  std::string constraints;  // constraint mini-language, may be empty
};

struct TaskSpec {
  std::string prompt;
  std::vector<std::string> room_types;
  std::vector<RequiredObject> required_objects;
};

struct Scene {
  int schema_version = 1;
  uint64_t seed = 0;
  uint64_t id_counter = 0;  // persisted so ids stay unique across edits
  TaskSpec task;
  FloorPlan plan;
  std::vector<SceneObject> objects;      // kept sorted by id
  std::vector<SupportRelation> supports; // kept sorted by child id

  const SceneObject* find(const std::string& id) const {
    for (const auto& o : objects)
      if (o.id == id) return &o;
    return nullptr;
  }

  SceneObject* find(const std::string& id) {
    for (auto& o : objects)
      if (o.id == id) return &o;
    return nullptr;
  }

  const SceneObject& get(const std::string& id) const {
    const SceneObject* o = find(id);
    if (!o) fail(Errc::ObjectNotFound, "no object with id " + id);
    return *o;
  }

  SceneObject& get(const std::string& id) {
    SceneObject* o = find(id);
    if (!o) fail(Errc::ObjectNotFound, "no object with id " + id);
    return *o;
  }

  const SupportRelation* support_of(const std::string& child) const {
    for (const auto& s : supports)
      if (s.child == child) return &s;
    return nullptr;
  }

  std::vector<std::string> children_of(const std::string& parent) const {
    std::vector<std::string> out;
    for (const auto& s : supports)
      if (s.parent == parent) out.push_back(s.child);
    return out;
  }

  // All transitive OnTop descendants, in dependency order (parents first).
  std::vector<std::string> descendants_of(const std::string& id) const {
    std::vector<std::string> out;
    std::vector<std::string> frontier{id};
    while (!frontier.empty()) {
      std::vector<std::string> next;
      for (const auto& p : frontier)
        for (const auto& c : children_of(p)) {
          out.push_back(c);
          next.push_back(c);
        }
      frontier = std::move(next);
    }
    return out;
  }

  std::string new_id() {
    for (;;) {
      uint64_t h = hash_mix(seed, 0x5cede5ull + id_counter++);
      std::string id = hex_id(h);
      if (!find(id)) return id;
    }
  }

  void insert_object(SceneObject obj, SupportRelation rel) {
    rel.child = obj.id;
    auto at = std::lower_bound(
        objects.begin(), objects.end(), obj,
        [](const SceneObject& a, const SceneObject& b) { return a.id < b.id; });
    objects.insert(at, std::move(obj));
    auto sat = std::lower_bound(supports.begin(), supports.end(), rel,
                                [](const SupportRelation& a, const SupportRelation& b) {
                                  return a.child < b.child;
                                });
    supports.insert(sat, std::move(rel));
  }

  void erase_object(const std::string& id) {
    std::erase_if(objects, [&](const SceneObject& o) { return o.id == id; });
    std::erase_if(supports, [&](const SupportRelation& s) { return s.child == id; });
  }

  const Room* room_at(Vec2 p) const {
    for (const auto& r : plan.rooms)
      if (point_in_convex(r.polygon, p)) return &r;
    return nullptr;
  }

  const Room* room_of(const SceneObject& obj) const {
    return room_at(obj.pose.position.xy());
  }
};

// Tight world-frame OBB: local axis-aligned bounds of the mesh carried through
// the object's pose.
inline Obb world_obb(const SceneObject& obj) {
  if (obj.mesh.empty()) fail(Errc::EmptyMesh, "object " + obj.id + " has no mesh");
  Aabb box = obj.mesh.aabb();
  Vec3 half = box.size() * 0.5;
  return Obb{obj.pose.apply(box.center()), half, obj.pose.orientation};
}

inline Polygon2 object_footprint(const SceneObject& obj) {
  return world_obb(obj).footprint();
}

}  // namespace sageforge
