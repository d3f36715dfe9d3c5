#pragma once
// Scene file format: one UTF-8 JSON document plus sidecar OBJ meshes in a
// "<stem>.meshes/" directory next to it. Keys are emitted in a fixed order and
// floats use shortest round-trip formatting, so identical scenes serialize to
// identical bytes and load back bit-exactly.

#include <filesystem>

#include <nlohmann/json.hpp>

#include "sageforge/mesh_obj.hpp"
#include "sageforge/scene.hpp"

namespace sageforge {

using json = nlohmann::ordered_json;

// --- JSON builders ----------------------------------------------------------

inline json to_json(const Vec3& v) { return json::array({v.x, v.y, v.z}); }
inline json to_json(const Vec2& v) { return json::array({v.x, v.y}); }
inline json to_json(const Quat& q) { return json::array({q.w, q.x, q.y, q.z}); }
inline json to_json(const Rgb& c) { return json::array({c.r, c.g, c.b}); }

inline json to_json(const Pose& p) {
  return json{{"position", to_json(p.position)},
              {"orientation", to_json(p.orientation)}};
}

inline json to_json(const PhysicalAttributes& a) {
  return json{{"height", a.height},
              {"mass", a.mass},
              {"metallic", a.metallic},
              {"roughness", a.roughness},
              {"static", a.static_}};
}

inline json to_json(const TaskSpec& t) {
  json req = json::array();
  for (const auto& r : t.required_objects)
    req.push_back(json{{"description", r.description},
                       {"category", r.category},
                       {"constraints", r.constraints}});
  return json{{"prompt", t.prompt},
              {"room_types", t.room_types},
              {"required_objects", req}};
}

inline json to_json(const FloorPlan& p) {
  json rooms = json::array();
  for (const auto& r : p.rooms) {
    json poly = json::array();
    for (const auto& v : r.polygon) poly.push_back(to_json(v));
    rooms.push_back(json{{"id", r.id},
                         {"kind", r.kind},
                         {"polygon", poly},
                         {"wall_height", r.wall_height},
                         {"floor_color", to_json(r.floor_color)},
                         {"wall_color", to_json(r.wall_color)}});
  }
  json doors = json::array();
  for (const auto& d : p.doors)
    doors.push_back(json{{"room_a", d.room_a},
                         {"room_b", d.room_b},
                         {"p0", to_json(d.p0)},
                         {"p1", to_json(d.p1)},
                         {"width", d.width}});
  return json{{"rooms", rooms}, {"doors", doors}};
}

// --- JSON readers ------------------------------------------------------------

inline Vec3 vec3_from(const json& j) { return {j.at(0), j.at(1), j.at(2)}; }
inline Vec2 vec2_from(const json& j) { return {j.at(0), j.at(1)}; }
inline Quat quat_from(const json& j) { return {j.at(0), j.at(1), j.at(2), j.at(3)}; }
inline Rgb rgb_from(const json& j) { return {j.at(0), j.at(1), j.at(2)}; }

inline Pose pose_from(const json& j) {
  return {vec3_from(j.at("position")), quat_from(j.at("orientation"))};
}

inline PhysicalAttributes attrs_from(const json& j) {
  PhysicalAttributes a;
  a.height = j.at("height");
  a.mass = j.at("mass");
  a.metallic = j.at("metallic");
  a.roughness = j.at("roughness");
  a.static_ = j.at("static");
  return a;
}

inline TaskSpec task_from(const json& j) {
  TaskSpec t;
  t.prompt = j.at("prompt");
  for (const auto& r : j.at("room_types")) t.room_types.push_back(r);
  for (const auto& r : j.at("required_objects")) {
    t.required_objects.push_back({r.at("description"), r.at("category"),
                                  r.at("constraints")});
  }
  return t;
}

inline FloorPlan plan_from(const json& j) {
  FloorPlan p;
  for (const auto& rj : j.at("rooms")) {
    Room r;
    r.id = rj.at("id");
    r.kind = rj.at("kind");
    for (const auto& v : rj.at("polygon")) r.polygon.push_back(vec2_from(v));
    r.wall_height = rj.at("wall_height");
    r.floor_color = rgb_from(rj.at("floor_color"));
    r.wall_color = rgb_from(rj.at("wall_color"));
    p.rooms.push_back(std::move(r));
  }
  if (j.contains("doors")) {
    for (const auto& dj : j.at("doors")) {
      Door d;
      d.room_a = dj.at("room_a");
      d.room_b = dj.at("room_b");
      d.p0 = vec2_from(dj.at("p0"));
      d.p1 = vec2_from(dj.at("p1"));
      d.width = dj.at("width");
      p.doors.push_back(d);
    }
  }
  return p;
}

// --- Whole-scene serialization ------------------------------------------------

// Mesh paths are fixed as "<stem>.meshes/<id>.obj" relative to the scene file.
inline std::string scene_mesh_dir_name(const std::filesystem::path& scene_path) {
  return scene_path.stem().string() + ".meshes";
}

// The scene document, with mesh references but without mesh payloads.
inline json scene_to_json(const Scene& scene) {
  json objects = json::array();
  for (const auto& o : scene.objects) {
    objects.push_back(json{{"id", o.id},
                           {"description", o.description},
                           {"category", o.category},
                           {"placement_class", placement_class_name(o.placement_class)},
                           {"pose", to_json(o.pose)},
                           {"mesh", o.mesh_path},
                           {"watertight", o.mesh.watertight},
                           {"attrs", to_json(o.attrs)},
                           {"task_relevant", o.task_relevant}});
  }
  json supports = json::array();
  for (const auto& s : scene.supports)
    supports.push_back(json{{"child", s.child}, {"parent", s.parent},
                            {"surface", s.surface}});
  return json{{"schema_version", scene.schema_version},
              {"seed", scene.seed},
              {"id_counter", scene.id_counter},
              {"task", to_json(scene.task)},
              {"plan", to_json(scene.plan)},
              {"objects", objects},
              {"supports", supports}};
}

inline Scene scene_from_json(const json& j) {
  Scene s;
  s.schema_version = j.at("schema_version");
  if (s.schema_version != 1)
    fail(Errc::ParseError,
         "unsupported schema_version " + std::to_string(s.schema_version));
  s.seed = j.at("seed");
  s.id_counter = j.at("id_counter");
  s.task = task_from(j.at("task"));
  s.plan = plan_from(j.at("plan"));
  for (const auto& oj : j.at("objects")) {
    SceneObject o;
    o.id = oj.at("id");
    o.description = oj.at("description");
    o.category = oj.at("category");
    o.placement_class = placement_class_from_name(oj.at("placement_class"));
    o.pose = pose_from(oj.at("pose"));
    o.mesh_path = oj.at("mesh");
    o.mesh.watertight = oj.at("watertight");
    o.attrs = attrs_from(oj.at("attrs"));
    o.task_relevant = oj.at("task_relevant");
    s.objects.push_back(std::move(o));
  }
  for (const auto& sj : j.at("supports"))
    s.supports.push_back({sj.at("child"), sj.at("parent"), sj.at("surface")});
  return s;
}

inline std::string scene_to_string(const Scene& scene) {
  return scene_to_json(scene).dump(2) + "\n";
}

// Write the JSON document plus one OBJ per object. Mesh paths in the document
// are updated in the returned copy semantics: save mutates the scene's
// mesh_path fields so save -> load round-trips.
inline void save_scene(Scene& scene, const std::filesystem::path& path) {
  namespace fs = std::filesystem;
  std::string dir = scene_mesh_dir_name(path);
  for (auto& o : scene.objects) o.mesh_path = dir + "/" + o.id + ".obj";
  fs::path parent = path.has_parent_path() ? path.parent_path() : fs::path(".");
  for (const auto& o : scene.objects)
    write_file_atomic(parent / dir / (o.id + ".obj"), write_obj(o.mesh));
  write_file_atomic(path, scene_to_string(scene));
}

inline Scene parse_scene_string(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    fail(Errc::ParseError,
         "scene JSON invalid at byte " + std::to_string(e.byte) + ": " + e.what());
  }
  try {
    return scene_from_json(j);
  } catch (const nlohmann::json::exception& e) {
    fail(Errc::ParseError, std::string("scene JSON malformed: ") + e.what());
  }
}

inline Scene load_scene(const std::filesystem::path& path) {
  namespace fs = std::filesystem;
  Scene s = parse_scene_string(read_file(path));
  fs::path parent = path.has_parent_path() ? path.parent_path() : fs::path(".");
  for (auto& o : s.objects) {
    if (o.mesh_path.empty()) fail(Errc::ParseError, "object " + o.id + " has no mesh path");
    bool watertight = o.mesh.watertight;
    o.mesh = read_obj(read_file(parent / o.mesh_path));
    o.mesh.watertight = watertight;  // recorded flag wins over re-check
  }
  return s;
}

// Canonical content hash: the JSON document bytes plus every mesh's bytes.
inline uint64_t scene_hash(const Scene& scene) {
  Scene copy = scene;
  std::string dir = "scene.meshes";
  for (auto& o : copy.objects) o.mesh_path = dir + "/" + o.id + ".obj";
  uint64_t h = fnv1a64(scene_to_string(copy));
  for (const auto& o : copy.objects)
    h = hash_mix(h, mesh_content_hash(o.mesh));
  return h;
}

}  // namespace sageforge
