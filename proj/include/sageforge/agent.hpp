#pragma once
// The agent loop: a scene initializer with per-room-type furnishing templates,
// the six generator/critic tools, a deterministic scripted policy, and the
// generation driver. The policy is an MCP client: it only sees tool results,
// so the same code drives an in-process server or a remote one and produces
// byte-identical scenes.

#include <algorithm>
#include <deque>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "sageforge/assets.hpp"
#include "sageforge/critic.hpp"
#include "sageforge/physics.hpp"
#include "sageforge/placement.hpp"
#include "sageforge/protocol.hpp"
#include "sageforge/scene_io.hpp"

namespace sageforge {

// ---------------------------------------------------------------------------
// Room-type configuration

// One object a room template proposes. Leans are whole degrees about the
// local X axis: the settle loop tips in 1-degree steps, so integer leans are
// exactly recoverable while fractional ones would rock forever.
struct FurnishingEntry {
  std::string description;
  std::string category;
  std::string constraints;
  int lean_deg = 0;
  int count = 1;
};

struct RoomTypeSpec {
  std::string name;
  double size_lo = 3.0;  // square-ish rooms sampled from [lo, hi] per side
  double size_hi = 5.0;
  std::vector<FurnishingEntry> furnishings;
};

inline std::vector<RoomTypeSpec> default_room_types() {
  std::vector<RoomTypeSpec> t;
  t.push_back({"bedroom",
               3.6,
               4.8,
               {{"a queen bed", "bed", "edge", 0, 1},
                {"a wooden nightstand", "nightstand", "near(bed, 1.2), aligned(bed)", 0, 1},
                {"a tall wardrobe", "wardrobe", "edge", 0, 1},
                {"a chest dresser", "dresser", "edge", 0, 1},
                {"a bedroom bench", "bench", "near(bed, 1.5), aligned(bed)", 0, 1},
                {"an armchair", "armchair", "corner", 0, 1},
                {"a potted plant", "plant", "corner", 0, 1},
                {"a floor lamp", "floor lamp", "corner", 0, 1},
                {"a framed photo", "photo frame", "on(bed)", 70, 1},
                {"a phone", "phone", "on(bed)", 0, 1},
                {"a paperback book", "book", "on(dresser)", 0, 1},
                {"a ceramic vase", "vase", "on(dresser)", 0, 1}}});
  t.push_back({"kitchen",
               3.8,
               5.2,
               {{"a kitchen counter", "counter", "edge", 0, 1},
                {"a stove", "stove", "edge, aligned(counter)", 0, 1},
                {"a dishwasher", "dishwasher", "edge, aligned(counter)", 0, 1},
                {"a kitchen island", "kitchen island", "middle", 0, 1},
                {"a refrigerator", "refrigerator", "edge", 0, 1},
                {"a trash bin", "trash bin", "corner", 0, 1},
                {"a potted plant", "plant", "corner", 0, 1},
                {"a kitchen stool", "stool", "near(kitchen island, 1.2)", 0, 2},
                {"a cookbook", "book", "on(counter)", 70, 1},
                {"a glass jar", "jar", "on(counter)", 0, 1},
                {"a water bottle", "bottle", "on(kitchen island)", 0, 1},
                {"a soda can", "can", "on(kitchen island)", 0, 1}}});
  t.push_back({"living room",
               4.2,
               6.0,
               {{"a fabric sofa", "sofa", "edge", 0, 1},
                {"a coffee table", "coffee table", "near(sofa, 1.2), aligned(sofa)", 0, 1},
                {"a tv stand", "tv stand", "edge, facing(sofa)", 0, 1},
                {"a bookcase", "bookcase", "edge", 0, 1},
                {"an armchair", "armchair", "corner", 0, 1},
                {"a side table", "side table", "near(sofa, 1.0)", 0, 1},
                {"a potted plant", "plant", "corner", 0, 1},
                {"a floor lamp", "floor lamp", "corner", 0, 1},
                {"a paperback book", "book", "on(coffee table)", 70, 1},
                {"a soda can", "can", "on(coffee table)", 0, 1}}});
  t.push_back({"office",
               3.2,
               5.0,
               {{"an office desk", "desk", "edge", 0, 1},
                {"an office chair", "office chair", "near(desk, 1.0), facing(desk)", 0, 1},
                {"a bookcase", "bookcase", "edge", 0, 1},
                {"a filing cabinet", "filing cabinet", "corner", 0, 1},
                {"a potted plant", "plant", "corner", 0, 1},
                {"a trash bin", "trash bin", "corner", 0, 1},
                {"a framed photo", "photo frame", "on(desk)", 70, 1}}});
  t.push_back({"meeting room",
               4.0,
               6.5,
               {{"a meeting table", "meeting table", "middle", 0, 1},
                {"a whiteboard", "whiteboard", "", 0, 1},
                {"a trash bin", "trash bin", "corner", 0, 1},
                {"a potted plant", "plant", "corner", 0, 1},
                {"a notebook", "book", "on(meeting table)", 70, 1}}});
  return t;
}

inline const RoomTypeSpec* find_room_type(const std::vector<RoomTypeSpec>& types,
                                          const std::string& name) {
  std::string n = trim(lowercase(name));
  for (const auto& t : types)
    if (t.name == n) return &t;
  return nullptr;
}

// Config schema: {"room_types": [{"name": ..., "size": [lo, hi],
//   "furnishings": [{"description", "category", "constraints", "lean_deg",
//   "count"}]}]}. Unlisted fields keep their defaults.
inline std::vector<RoomTypeSpec> room_types_from_json(const json& j) {
  std::vector<RoomTypeSpec> out;
  for (const auto& tj : j.at("room_types")) {
    RoomTypeSpec t;
    t.name = trim(lowercase(tj.at("name").get<std::string>()));
    if (tj.contains("size")) {
      t.size_lo = tj.at("size").at(0);
      t.size_hi = tj.at("size").at(1);
    }
    if (t.size_lo <= 0 || t.size_hi < t.size_lo)
      fail(Errc::ParseError, "bad size band for room type " + t.name);
    for (const auto& fj : tj.value("furnishings", json::array())) {
      FurnishingEntry e;
      e.description = fj.at("description");
      e.category = normalize_category(fj.at("category").get<std::string>());
      e.constraints = fj.value("constraints", std::string());
      e.lean_deg = fj.value("lean_deg", 0);
      e.count = fj.value("count", 1);
      if (!find_category(e.category))
        fail(Errc::UnknownCategory, "room template uses unknown category " + e.category);
      t.furnishings.push_back(std::move(e));
    }
    out.push_back(std::move(t));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Prompt parsing

namespace detail {

inline bool word_at(const std::string& hay, size_t pos, size_t len) {
  auto alpha = [](char c) { return (c >= 'a' && c <= 'z') || (c >= '0' && c <= '9'); };
  if (pos > 0 && alpha(hay[pos - 1])) return false;
  size_t end = pos + len;
  // A bare plural 's' still ends the word ("two chairs" names a chair).
  if (end < hay.size() && hay[end] == 's' &&
      (end + 1 >= hay.size() || !alpha(hay[end + 1])))
    return true;
  if (end < hay.size() && alpha(hay[end])) return false;
  return true;
}

// All word-boundary occurrences of `needle` in `hay`.
inline std::vector<size_t> find_word(const std::string& hay, const std::string& needle) {
  std::vector<size_t> out;
  for (size_t pos = hay.find(needle); pos != std::string::npos;
       pos = hay.find(needle, pos + 1))
    if (word_at(hay, pos, needle.size())) out.push_back(pos);
  return out;
}

}  // namespace detail

// Longest category (or alias) name appearing in the text, word-bounded.
inline std::string infer_category(const std::string& text) {
  std::string low = lowercase(text);
  std::string best;
  std::string best_canon;
  auto consider = [&](const std::string& surface, const std::string& canon) {
    if (surface.size() <= best.size()) return;
    if (!detail::find_word(low, surface).empty()) {
      best = surface;
      best_canon = canon;
    }
  };
  for (const auto& s : attribute_table()) consider(s.name, s.name);
  for (const auto& [alias, canon] : category_aliases()) consider(alias, canon);
  if (best_canon.empty())
    fail(Errc::UnknownCategory, "no known category in '" + text + "'");
  return best_canon;
}

// Keyword task parser: room types from room-name mentions, required objects
// from category-name mentions (longest match wins on overlaps). When no room
// is named, the first recognized object votes for its usual room.
inline TaskSpec task_from_prompt(const std::string& prompt) {
  TaskSpec task;
  task.prompt = trim(prompt);
  std::string low = lowercase(prompt);
  std::vector<char> used(low.size(), 0);
  auto claim = [&](size_t pos, size_t len) {
    for (size_t i = pos; i < pos + len && i < used.size(); ++i) used[i] = 1;
  };
  auto free_span = [&](size_t pos, size_t len) {
    for (size_t i = pos; i < pos + len && i < used.size(); ++i)
      if (used[i]) return false;
    return true;
  };

  const std::vector<std::string> room_names = {"meeting room", "living room",
                                               "bedroom", "kitchen", "office"};
  std::vector<std::pair<size_t, std::string>> room_hits;
  for (const auto& name : room_names)
    for (size_t pos : detail::find_word(low, name))
      if (free_span(pos, name.size())) {
        claim(pos, name.size());
        room_hits.emplace_back(pos, name);
      }
  std::sort(room_hits.begin(), room_hits.end());
  for (const auto& [pos, name] : room_hits)
    if (std::find(task.room_types.begin(), task.room_types.end(), name) ==
        task.room_types.end())
      task.room_types.push_back(name);

  // Category vocabulary: canonical names plus aliases, longest first so
  // "dining table" claims its span before "table" can.
  std::vector<std::pair<std::string, std::string>> vocab;  // surface -> canonical
  for (const auto& s : attribute_table()) vocab.emplace_back(s.name, s.name);
  for (const auto& [alias, canon] : category_aliases()) vocab.emplace_back(alias, canon);
  std::sort(vocab.begin(), vocab.end(), [](const auto& a, const auto& b) {
    if (a.first.size() != b.first.size()) return a.first.size() > b.first.size();
    return a.first < b.first;
  });
  std::vector<std::pair<size_t, std::pair<std::string, std::string>>> hits;
  for (const auto& [surface, canon] : vocab)
    for (size_t pos : detail::find_word(low, surface))
      if (free_span(pos, surface.size())) {
        claim(pos, surface.size());
        hits.emplace_back(pos, std::make_pair(surface, canon));
      }
  std::sort(hits.begin(), hits.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });
  std::set<std::string> seen;
  for (const auto& [pos, sc] : hits) {
    if (!seen.insert(sc.second).second) continue;
    task.required_objects.push_back(
        {detail::with_article(sc.first), sc.second, ""});
  }

  if (task.room_types.empty()) {
    static const std::vector<std::pair<std::string, std::string>> votes = {
        {"bed", "bedroom"},          {"nightstand", "bedroom"},
        {"wardrobe", "bedroom"},     {"dresser", "bedroom"},
        {"apple", "kitchen"},        {"bowl", "kitchen"},
        {"pan", "kitchen"},          {"pot", "kitchen"},
        {"stove", "kitchen"},        {"counter", "kitchen"},
        {"toaster", "kitchen"},      {"refrigerator", "kitchen"},
        {"kitchen island", "kitchen"}, {"plate", "kitchen"},
        {"mug", "kitchen"},          {"cup", "kitchen"},
        {"dining table", "kitchen"}, {"desk", "office"},
        {"office chair", "office"},  {"monitor", "office"},
        {"keyboard", "office"},      {"filing cabinet", "office"},
        {"whiteboard", "office"},    {"meeting table", "meeting room"}};
    for (const auto& r : task.required_objects) {
      for (const auto& [cat, room] : votes)
        if (r.category == cat) {
          task.room_types.push_back(room);
          break;
        }
      if (!task.room_types.empty()) break;
    }
    if (task.room_types.empty()) task.room_types.push_back("living room");
  }
  return task;
}

// ---------------------------------------------------------------------------
// Scene initialization

struct SceneInitResult {
  Scene scene;
  std::vector<FurnishingEntry> proposed;  // required objects first
  std::vector<std::string> warnings;
};

// Empty floor-plan shell (floor + walls + doors) and the proposal list. Rooms
// line up along +X; adjacent rooms share a wall with a 0.9 m door cut.
inline SceneInitResult scene_init(const TaskSpec& task, uint64_t seed,
                                  const std::vector<RoomTypeSpec>& types =
                                      default_room_types()) {
  if (task.room_types.empty())
    fail(Errc::InvalidArgument, "task needs at least one room type");
  SceneInitResult out;
  out.scene.seed = seed;
  out.scene.task = task;
  Rng rng(hash_mix(seed, fnv1a64("scene_init")));

  double xoff = 0;
  double prev_depth = 0;
  std::vector<const RoomTypeSpec*> specs;
  for (size_t i = 0; i < task.room_types.size(); ++i) {
    const std::string& name = task.room_types[i];
    const RoomTypeSpec* spec = find_room_type(types, name);
    double lo = 3.0, hi = 5.0;
    if (spec) {
      lo = spec->size_lo;
      hi = spec->size_hi;
    } else {
      out.warnings.push_back("unknown room type '" + name +
                             "': using the generic size band");
    }
    specs.push_back(spec);
    double w = std::round(rng.uniform(lo, hi) * 100) / 100;
    double d = std::round(rng.uniform(lo, hi) * 100) / 100;
    Room room;
    room.id = "room" + std::to_string(i);
    room.kind = trim(lowercase(name));
    room.polygon = {{xoff, 0}, {xoff + w, 0}, {xoff + w, d}, {xoff, d}};
    out.scene.plan.rooms.push_back(room);
    if (i > 0) {
      Door door;
      door.room_a = "room" + std::to_string(i - 1);
      door.room_b = room.id;
      double yc = std::min(prev_depth, d) / 2;
      door.p0 = {xoff, yc - door.width / 2};
      door.p1 = {xoff, yc + door.width / 2};
      out.scene.plan.doors.push_back(door);
    }
    xoff += w;
    prev_depth = d;
  }

  // Required objects lead the proposal list; templates fill in around them,
  // skipping categories the task already demands.
  std::set<std::string> required_cats;
  for (const auto& r : task.required_objects) {
    std::string cat = normalize_category(r.category);
    required_cats.insert(cat);
    out.proposed.push_back({r.description, cat, r.constraints, 0, 1});
  }
  for (const RoomTypeSpec* spec : specs) {
    if (!spec) continue;
    for (const auto& e : spec->furnishings) {
      if (required_cats.count(e.category)) continue;
      for (int k = 0; k < e.count; ++k) out.proposed.push_back(e);
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Instruction resolution (asset_move / asset_remove)

// Match by id when one is given; otherwise the longest category name that
// appears in the instruction wins. Zero or several matches both raise
// ObjectNotFound: ambiguity is an error, with the candidates listed.
inline const SceneObject& resolve_instruction(const Scene& scene,
                                              const std::string& id,
                                              const std::string& instruction) {
  if (!id.empty()) return scene.get(id);
  std::string low = lowercase(instruction);
  size_t best_len = 0;
  std::vector<const SceneObject*> best;
  for (const auto& o : scene.objects) {
    size_t len = 0;
    if (low.find(o.id) != std::string::npos) len = 100 + o.id.size();
    else if (!o.category.empty() &&
             !detail::find_word(low, o.category).empty())
      len = o.category.size();
    if (len == 0) continue;
    if (len > best_len) {
      best_len = len;
      best.clear();
    }
    if (len == best_len) best.push_back(&o);
  }
  if (best.empty())
    fail(Errc::ObjectNotFound, "no object matches '" + instruction + "'");
  if (best.size() > 1) {
    std::string ids;
    for (const auto* o : best) ids += (ids.empty() ? "" : ", ") + o->id;
    fail(Errc::ObjectNotFound,
         "ambiguous instruction '" + instruction + "': candidates " + ids);
  }
  return *best.front();
}

// ---------------------------------------------------------------------------
// Tool registration

struct AgentToolOptions {
  AssetProviderOptions assets;
  std::vector<RoomTypeSpec> room_types = default_room_types();
  CriticOptions critic;
};

namespace detail {

// Rigid delta that maps old_base onto new_base, applied to a follower pose.
inline Pose carry_pose(const Pose& old_base, const Pose& new_base,
                       const Pose& follower) {
  Quat rel = (new_base.orientation * old_base.orientation.conjugate()).normalized();
  Pose out;
  out.position =
      new_base.position + rel.rotate(follower.position - old_base.position);
  out.orientation = (rel * follower.orientation).normalized();
  return out;
}

// Shared by asset_place and the move re-placement path.
inline nlohmann::ordered_json place_tool_result(const PlaceOutcome& out,
                                                const SceneObject& obj) {
  nlohmann::ordered_json r;
  r["placed"] = out.placed;
  r["id"] = obj.id;
  r["category"] = obj.category;
  if (out.placed) {
    r["position"] = to_json(out.candidate.pose.position);
    r["support"] = out.candidate.support.parent;
    r["score"] = out.candidate.score;
  } else {
    r["reason"] = errc_name(out.reason);
    r["detail"] = out.detail;
  }
  return r;
}

// Synthesize and size an object for placement. The placement class comes from
// the description/constraint keywords, falling back to the category default.
inline SceneObject make_placement_object(Scene& scene, const std::string& description,
                                         const std::string& category,
                                         const std::string& constraints,
                                         double height_scale, bool task_relevant,
                                         uint64_t seed,
                                         const AssetProviderOptions& assets) {
  const CategorySpec& spec = require_category(category);
  Asset asset = provide_asset({description, spec.name, seed}, assets);
  double height = sample_category_height(spec.name, seed) * height_scale;
  rescale_to_height(asset.mesh, height);

  SceneObject obj;
  obj.id = scene.new_id();
  obj.description = description;
  obj.category = spec.name;
  obj.mesh = std::move(asset.mesh);
  ClassifyResult cls = classify_placement_explain(description, constraints);
  obj.placement_class = cls.rule == "default" ? spec.default_class : cls.cls;
  obj.attrs = estimate_physical_attributes(spec.name, world_obb(obj), seed);
  obj.attrs.height = height;
  obj.task_relevant = task_relevant;
  return obj;
}

}  // namespace detail

// The six paper tools plus two admin tools (scene_dump, scene_save). All are
// stateless: everything they touch lives in the per-session state.
inline void register_default_tools(ToolServer& server,
                                   const AgentToolOptions& opts = {}) {
  using J = nlohmann::ordered_json;
  auto obj_schema = [](std::initializer_list<const char*> fields) {
    J props = J::object();
    for (const char* f : fields) props[f] = J{{"type", "string"}};
    return J{{"type", "object"}, {"properties", props}};
  };

  server.register_tool(
      {"scene_init",
       "create an empty room shell from a task spec and propose furnishings",
       obj_schema({"prompt"}), J{{"type", "object"}}},
      [opts](SessionState& st, const J& args) {
        TaskSpec task;
        if (args.contains("task"))
          task = task_from(args.at("task"));
        else if (args.contains("prompt"))
          task = task_from_prompt(args.at("prompt").get<std::string>());
        else
          fail(Errc::InvalidArgument, "scene_init needs a task or a prompt");
        uint64_t seed = args.value("seed", uint64_t(0));
        SceneInitResult init = scene_init(task, seed, opts.room_types);
        st.scene = std::move(init.scene);
        st.rng = Rng(hash_mix(seed, fnv1a64("agent_session")));
        J rooms = J::array();
        for (const auto& r : st.scene.plan.rooms) {
          Aabb2 box = Aabb2::of(r.polygon);
          rooms.push_back(
              J{{"id", r.id},
                {"kind", r.kind},
                {"size", J::array({box.max.x - box.min.x, box.max.y - box.min.y})}});
        }
        J proposed = J::array();
        for (const auto& e : init.proposed)
          proposed.push_back(J{{"description", e.description},
                               {"category", e.category},
                               {"constraints", e.constraints},
                               {"lean_deg", e.lean_deg}});
        return J{{"rooms", rooms},
                 {"doors", st.scene.plan.doors.size()},
                 {"proposed", proposed},
                 {"warnings", init.warnings}};
      });

  server.register_tool(
      {"asset_place", "synthesize an object and place it under constraints",
       obj_schema({"description", "category", "constraints"}),
       J{{"type", "object"}}},
      [opts](SessionState& st, const J& args) {
        std::string description = args.at("description");
        std::string category = normalize_category(
            args.value("category", std::string()));
        if (category.empty()) category = infer_category(description);
        std::string constraints = args.value("constraints", std::string());
        double height_scale = args.value("height_scale", 1.0);
        bool physics = args.value("physics", true);
        int lean_deg = args.value("lean_deg", 0);

        SceneObject obj = detail::make_placement_object(
            st.scene, description, category, constraints, height_scale,
            args.value("task_relevant", false), st.rng.next(), opts.assets);

        PlacementRequest req;
        req.object = std::move(obj);
        req.constraints = parse_constraints(constraints);
        if (lean_deg != 0)
          req.style = Quat::from_axis_angle({1, 0, 0}, deg2rad(double(lean_deg)));
        PlacementOptions popts;
        popts.exact_gate = physics;
        popts.use_physics = physics;
        PlaceOutcome out = place_object(st.scene, req, popts);
        return detail::place_tool_result(out, req.object);
      });

  server.register_tool(
      {"asset_move", "relocate an object under new constraints; restores on failure",
       obj_schema({"id", "instruction", "constraints"}), J{{"type", "object"}}},
      [](SessionState& st, const J& args) {
        const SceneObject& target = resolve_instruction(
            st.scene, args.value("id", std::string()),
            args.value("instruction", std::string()));
        std::string constraints = args.value("constraints", std::string());
        bool physics = args.value("physics", true);

        Scene backup = st.scene;
        SceneObject moving = target;
        Pose old_pose = moving.pose;
        std::vector<std::string> kids = st.scene.descendants_of(moving.id);
        std::vector<SceneObject> kid_objs;
        std::vector<SupportRelation> kid_rels;
        for (const auto& kid : kids) {
          kid_objs.push_back(st.scene.get(kid));
          kid_rels.push_back(*st.scene.support_of(kid));
        }
        for (auto it = kids.rbegin(); it != kids.rend(); ++it)
          st.scene.erase_object(*it);
        st.scene.erase_object(moving.id);

        // Keep the same keywords that classified it originally; only the
        // spatial constraints change.
        PlacementRequest req;
        req.object = moving;
        req.constraints = parse_constraints(constraints);
        ClassifyResult cls = classify_placement_explain(moving.description, constraints);
        req.object.placement_class =
            cls.rule == "default" ? moving.placement_class : cls.cls;
        PlacementOptions popts;
        popts.exact_gate = physics;
        popts.use_physics = physics;
        PlaceOutcome out = place_object(st.scene, req, popts);
        if (!out.placed) {
          st.scene = std::move(backup);
          nlohmann::ordered_json r;
          r["moved"] = false;
          r["id"] = moving.id;
          r["reason"] = errc_name(Errc::MoveFailed);
          r["detail"] = "restored to its original pose (" + out.detail + ")";
          return r;
        }
        // Children ride along rigidly.
        for (size_t i = 0; i < kid_objs.size(); ++i) {
          SceneObject kid = kid_objs[i];
          kid.pose = detail::carry_pose(old_pose, out.candidate.pose, kid.pose);
          st.scene.insert_object(std::move(kid), kid_rels[i]);
        }
        nlohmann::ordered_json r;
        r["moved"] = true;
        r["id"] = moving.id;
        r["position"] = to_json(out.candidate.pose.position);
        r["support"] = out.candidate.support.parent;
        return r;
      });

  server.register_tool(
      {"asset_remove", "delete an object; whatever rested on it settles again",
       obj_schema({"id", "instruction"}), J{{"type", "object"}}},
      [](SessionState& st, const J& args) {
        const SceneObject& target = resolve_instruction(
            st.scene, args.value("id", std::string()),
            args.value("instruction", std::string()));
        std::string gone = target.id;
        std::vector<std::string> children = st.scene.children_of(gone);
        st.scene.erase_object(gone);

        std::vector<std::string> removed{gone};
        std::vector<std::string> resettled;
        for (const auto& child_id : children) {
          SceneObject* child = st.scene.find(child_id);
          if (!child) continue;
          std::erase_if(st.scene.supports, [&](const SupportRelation& s) {
            return s.child == child_id;
          });
          ValidationOutcome v = validate_pose(st.scene, *child, child->pose);
          if (!v.accepted) {
            std::vector<std::string> drop = st.scene.descendants_of(child_id);
            for (auto it = drop.rbegin(); it != drop.rend(); ++it) {
              st.scene.erase_object(*it);
              removed.push_back(*it);
            }
            st.scene.erase_object(child_id);
            removed.push_back(child_id);
            continue;
          }
          Pose before = child->pose;
          child->pose = v.pose;
          SupportRelation rel = v.support;
          rel.child = child_id;
          st.scene.supports.push_back(rel);
          std::sort(st.scene.supports.begin(), st.scene.supports.end(),
                    [](const SupportRelation& a, const SupportRelation& b) {
                      return a.child < b.child;
                    });
          for (const auto& below : st.scene.descendants_of(child_id)) {
            SceneObject& d = st.scene.get(below);
            d.pose = detail::carry_pose(before, child->pose, d.pose);
          }
          resettled.push_back(child_id);
        }
        return nlohmann::ordered_json{{"removed", removed},
                                      {"resettled", resettled}};
      });

  server.register_tool(
      {"visual_critic", "layout feedback: missing objects, companions, decor, misplacements",
       J{{"type", "object"}}, J{{"type", "object"}}},
      [opts](SessionState& st, const J& args) {
        CriticOptions copts = opts.critic;
        if (args.contains("config"))
          copts = critic_options_from_json(args.at("config"));
        return to_json(critique(st.scene, st.scene.task, copts));
      });

  server.register_tool(
      {"physics_critic", "settle-based stability and collision report",
       J{{"type", "object"}}, J{{"type", "object"}}},
      [](SessionState& st, const J&) { return metrics_report(st.scene); });

  server.register_tool(
      {"scene_dump", "full scene document with inline mesh payloads",
       J{{"type", "object"}}, J{{"type", "object"}}},
      [](SessionState& st, const J&) {
        J meshes = J::object();
        for (const auto& o : st.scene.objects) meshes[o.id] = write_obj(o.mesh);
        return J{{"scene", scene_to_json(st.scene)}, {"meshes", meshes}};
      });

  server.register_tool(
      {"scene_save", "write the session scene (json + obj sidecars) to a path",
       obj_schema({"path"}), J{{"type", "object"}}},
      [](SessionState& st, const J& args) {
        std::string path = args.at("path");
        save_scene(st.scene, path);
        return J{{"path", path}, {"hash", hex64(scene_hash(st.scene))}};
      });
}

// Rebuild a scene from a scene_dump result (bit-exact: JSON doubles and OBJ
// floats both use shortest round-trip formatting).
inline Scene scene_from_dump(const nlohmann::ordered_json& dump) {
  Scene s = scene_from_json(dump.at("scene"));
  for (auto& o : s.objects) {
    bool watertight = o.mesh.watertight;
    o.mesh = read_obj(dump.at("meshes").at(o.id).get<std::string>());
    o.mesh.watertight = watertight;
  }
  return s;
}

// ---------------------------------------------------------------------------
// Scripted policy

struct GenerationBudget {
  int max_iterations = 40;  // tool calls after scene_init
  int max_retries = 3;      // placement attempts per object
};

struct GenerationOptions {
  uint64_t seed = 0;
  GenerationBudget budget;
  bool use_visual_critic = true;
  bool use_physics_critic = true;
  int max_critic_rounds = 3;
  int max_physics_rounds = 2;
  std::string session = "default";
  // Categories the policy never places (layout augmentation reserves them for
  // re-injected kept objects). Normalized names.
  std::set<std::string> exclude_categories;
};

struct ActionDecision {
  bool terminate = false;
  std::string tool;
  nlohmann::ordered_json args;
  std::string reason;  // set when terminating
};

struct PendingAction {
  std::string tool;
  nlohmann::ordered_json args;
  std::string key;  // retry-bookkeeping identity
  std::string sig;  // stable request signature, for the skip memory
};

// Client-side bookkeeping only: the policy never touches the scene directly.
struct PolicyState {
  TaskSpec task;
  GenerationOptions opts;
  enum class Phase { Init, Act, Done } phase = Phase::Init;
  enum class Check { Visual, Physics } next_check = Check::Visual;
  std::deque<PendingAction> queue;
  std::map<std::string, int> retries;
  std::set<std::string> skipped;  // requests that exhausted their retries
  int critic_rounds = 0;
  int physics_rounds = 0;
  bool visual_ok = false;
  bool physics_ok = false;
  std::string done_reason;
  std::vector<std::string> notes;
};

// Deterministic transitions: Init -> place proposals -> visual critic ->
// apply feedback -> physics critic -> Terminate. Pure in the state.
inline ActionDecision scripted_policy_step(const PolicyState& st) {
  using Phase = PolicyState::Phase;
  using Check = PolicyState::Check;
  ActionDecision d;
  if (st.phase == Phase::Init) {
    d.tool = "scene_init";
    d.args = nlohmann::ordered_json{{"task", to_json(st.task)},
                                    {"seed", st.opts.seed}};
    return d;
  }
  if (st.phase == Phase::Done) {
    d.terminate = true;
    d.reason = st.done_reason.empty() ? "satisfied" : st.done_reason;
    return d;
  }
  if (!st.queue.empty()) {
    d.tool = st.queue.front().tool;
    d.args = st.queue.front().args;
    return d;
  }
  bool visual_due = st.next_check == Check::Visual && st.opts.use_visual_critic &&
                    st.critic_rounds < st.opts.max_critic_rounds && !st.visual_ok;
  if (visual_due) {
    d.tool = "visual_critic";
    d.args = nlohmann::ordered_json::object();
    return d;
  }
  if (st.opts.use_physics_critic && !st.physics_ok &&
      st.physics_rounds <= st.opts.max_physics_rounds) {
    d.tool = "physics_critic";
    d.args = nlohmann::ordered_json::object();
    return d;
  }
  d.terminate = true;
  if (!st.opts.use_physics_critic || st.physics_ok)
    d.reason = (st.visual_ok || !st.opts.use_visual_critic) ? "satisfied"
                                                            : "critic-unsatisfied";
  else
    d.reason = "physics-unresolved";
  return d;
}

namespace detail {

inline std::string place_sig(const std::string& description,
                             const std::string& category,
                             const std::string& constraints) {
  return "place|" + description + "|" + category + "|" + constraints;
}

inline PendingAction place_action(const FurnishingEntry& e, bool physics,
                                  bool task_relevant, const std::string& key) {
  nlohmann::ordered_json args{{"description", e.description},
                              {"category", e.category},
                              {"constraints", e.constraints},
                              {"physics", physics},
                              {"task_relevant", task_relevant}};
  if (e.lean_deg != 0) args["lean_deg"] = e.lean_deg;
  return {"asset_place", std::move(args), key,
          place_sig(e.description, e.category, e.constraints)};
}

// OnTop objects cannot place without their anchor; everything else retries
// with the planner free to pick any spot.
inline std::string keep_anchors_only(const std::string& constraints) {
  std::vector<Constraint> kept;
  for (const Constraint& c : parse_constraints(constraints))
    if (c.kind == ConstraintKind::OnTopOf) kept.push_back(c);
  return constraints_to_string(kept);
}

}  // namespace detail

// Fold a tool result back into the policy state.
inline void scripted_policy_observe(PolicyState& st, const ActionDecision& d,
                                    const nlohmann::ordered_json& result) {
  using Phase = PolicyState::Phase;
  using Check = PolicyState::Check;
  if (d.terminate) return;
  bool physics = st.opts.use_physics_critic;

  if (d.tool == "scene_init") {
    int n = 0;
    size_t required = st.task.required_objects.size();
    for (const auto& p : result.at("proposed")) {
      FurnishingEntry e{p.at("description"), p.at("category"),
                        p.at("constraints"), p.value("lean_deg", 0), 1};
      bool task_obj = size_t(n) < required;
      int key = n++;
      if (st.opts.exclude_categories.count(normalize_category(e.category)))
        continue;
      st.queue.push_back(detail::place_action(
          e, physics, task_obj, "init#" + std::to_string(key)));
    }
    st.phase = Phase::Act;
    st.next_check = Check::Visual;
    return;
  }

  if (d.tool == "asset_place") {
    if (st.queue.empty()) return;
    PendingAction& front = st.queue.front();
    if (result.value("placed", false)) {
      st.queue.pop_front();
      return;
    }
    int n = ++st.retries[front.key];
    if (n >= st.opts.budget.max_retries) {
      st.notes.push_back("skipped " +
                         front.args.value("description", std::string()) + " (" +
                         result.value("reason", std::string()) + ")");
      st.skipped.insert(front.sig);
      st.queue.pop_front();
      return;
    }
    if (n == 1) {
      // First alternative: relax to the bare anchors so the planner can pick
      // any spot (on-top anchors must survive or the request is unplaceable).
      front.args["constraints"] = detail::keep_anchors_only(
          front.args.value("constraints", std::string()));
      front.args.erase("lean_deg");
    } else if (n == 2) {
      // Second alternative: a smaller object, 20% shorter.
      front.args["height_scale"] = 0.8;
    }
    return;
  }

  if (d.tool == "asset_move") {
    if (!st.queue.empty()) {
      if (!result.value("moved", false)) st.skipped.insert(st.queue.front().sig);
      st.queue.pop_front();
    }
    return;
  }
  if (d.tool == "asset_remove") {
    if (!st.queue.empty()) st.queue.pop_front();
    return;
  }

  if (d.tool == "visual_critic") {
    st.critic_rounds += 1;
    CritiqueFeedback fb = feedback_from_json(result);
    if (fb.satisfied) {
      st.visual_ok = true;
      st.next_check = Check::Physics;
      return;
    }
    size_t queued = 0;
    int n = 0;
    for (const auto& id : fb.remove) {
      st.queue.push_back({"asset_remove", nlohmann::ordered_json{{"id", id}},
                          "critic-remove#" + id, "remove|" + id});
      ++queued;
    }
    for (const auto& mv : fb.move) {
      std::string sig = "move|" + mv.id + "|" + mv.constraints;
      if (st.skipped.count(sig)) continue;
      st.queue.push_back({"asset_move",
                          nlohmann::ordered_json{{"id", mv.id},
                                                 {"constraints", mv.constraints},
                                                 {"physics", physics}},
                          "critic-move#" + mv.id, sig});
      ++queued;
    }
    for (const auto& add : fb.add) {
      if (st.opts.exclude_categories.count(normalize_category(add.category)))
        continue;
      if (st.skipped.count(
              detail::place_sig(add.description, add.category, add.constraints)))
        continue;  // already proven unplaceable; do not loop on it
      FurnishingEntry e{add.description, add.category, add.constraints, 0, 1};
      st.queue.push_back(detail::place_action(
          e, physics, false,
          "critic" + std::to_string(st.critic_rounds) + "#" + std::to_string(n)));
      ++n;
      ++queued;
    }
    if (queued == 0) {
      // Everything left in the feedback is known-unsatisfiable: accept the
      // scene rather than burning the remaining rounds on it.
      st.notes.push_back("residual critic feedback is unplaceable; accepting");
      st.visual_ok = true;
      st.next_check = Check::Physics;
      return;
    }
    st.next_check = Check::Visual;  // re-critique after applying the feedback
    return;
  }

  if (d.tool == "physics_critic") {
    double collision = result.value("collision_ratio", 1.0);
    double stability = result.value("stability_ratio", 0.0);
    if (collision == 0.0 && stability == 1.0) {
      st.physics_ok = true;
      st.phase = Phase::Done;
      if (st.opts.use_visual_critic && !st.visual_ok)
        st.done_reason = "critic-unsatisfied";
      return;
    }
    st.physics_rounds += 1;
    if (st.physics_rounds > st.opts.max_physics_rounds) {
      st.phase = Phase::Done;
      st.done_reason = "physics-unresolved";
      return;
    }
    std::set<std::string> doomed;
    for (const auto& id : result.value("unstable_ids", nlohmann::ordered_json::array()))
      doomed.insert(id.get<std::string>());
    for (const auto& pair : result.value("colliding_pairs",
                                         nlohmann::ordered_json::array()))
      doomed.insert(pair.at(1).get<std::string>());
    for (const auto& id : doomed)
      st.queue.push_back({"asset_remove", nlohmann::ordered_json{{"id", id}},
                          "physics-remove#" + id});
    st.next_check = Check::Physics;
    return;
  }
}

// ---------------------------------------------------------------------------
// Episode log

struct EpisodeEntry {
  int iteration = 0;
  std::string tool;
  nlohmann::ordered_json args;
  std::string digest;  // fnv1a64 of the result document
  std::string note;
};

struct EpisodeLog {
  std::vector<EpisodeEntry> entries;
};

inline std::string episode_to_jsonl(const EpisodeLog& log) {
  std::string out;
  for (const auto& e : log.entries) {
    nlohmann::ordered_json j{{"iteration", e.iteration},
                             {"tool", e.tool},
                             {"args", e.args},
                             {"digest", e.digest},
                             {"note", e.note}};
    out += j.dump() + "\n";
  }
  return out;
}

inline EpisodeLog episode_from_jsonl(const std::string& text) {
  EpisodeLog log;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    nlohmann::ordered_json j;
    try {
      j = nlohmann::ordered_json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
      fail(Errc::ParseError,
           "episode line " + std::to_string(lineno) + ": " + e.what());
    }
    log.entries.push_back({j.at("iteration"), j.at("tool"), j.value("args", nlohmann::ordered_json()),
                           j.value("digest", std::string()),
                           j.value("note", std::string())});
  }
  return log;
}

// ---------------------------------------------------------------------------
// Generation driver

struct GenerationResult {
  Scene scene;
  EpisodeLog log;
  bool satisfied = false;
  bool budget_exhausted = false;
  std::string reason;
};

// Drive the scripted policy over any JSON-RPC client. scene_init is setup and
// does not count against the iteration budget.
inline GenerationResult run_generation_with(JsonRpcClient& client,
                                            const TaskSpec& task,
                                            const GenerationOptions& opts = {}) {
  PolicyState st;
  st.task = task;
  st.opts = opts;
  GenerationResult out;
  int iterations = 0;

  for (;;) {
    ActionDecision d = scripted_policy_step(st);
    if (d.terminate) {
      out.reason = d.reason;
      out.log.entries.push_back({iterations, "terminate", {}, "", d.reason});
      break;
    }
    bool counted = d.tool != "scene_init";
    if (counted && iterations >= opts.budget.max_iterations) {
      out.budget_exhausted = true;
      out.reason = "budget-exhausted";
      out.log.entries.push_back({iterations, "terminate", {}, "", out.reason});
      break;
    }
    nlohmann::ordered_json result;
    try {
      result = client.call_tool(d.tool, d.args, opts.session);
    } catch (const Error& e) {
      // Hard tool errors skip the offending action instead of aborting; the
      // policy must still advance or the loop would retry forever.
      st.notes.push_back(std::string("tool error: ") + e.what());
      out.log.entries.push_back({iterations, d.tool, d.args, "", e.what()});
      if (counted) ++iterations;
      if (d.tool == "scene_init") {
        out.reason = std::string("init-failed: ") + e.what();
        out.log.entries.push_back({iterations, "terminate", {}, "", out.reason});
        break;
      }
      if (d.tool == "visual_critic") {
        st.critic_rounds = opts.max_critic_rounds;
        st.next_check = PolicyState::Check::Physics;
      } else if (d.tool == "physics_critic") {
        st.phase = PolicyState::Phase::Done;
        st.done_reason = "physics-critic-error";
      } else if (!st.queue.empty()) {
        st.queue.pop_front();
      }
      continue;
    }
    if (counted) ++iterations;
    out.log.entries.push_back(
        {iterations, d.tool, d.args, hex64(fnv1a64(result.dump())), ""});
    scripted_policy_observe(st, d, result);
  }

  out.satisfied = (st.visual_ok || !opts.use_visual_critic) &&
                  (st.physics_ok || !opts.use_physics_critic) &&
                  !out.budget_exhausted;
  nlohmann::ordered_json dump =
      client.call_tool("scene_dump", nlohmann::ordered_json::object(), opts.session);
  out.scene = scene_from_dump(dump);
  return out;
}

// In-process convenience wrapper: a private server behind a loopback client.
inline GenerationResult run_generation(const TaskSpec& task,
                                       const GenerationOptions& opts = {},
                                       const AgentToolOptions& tool_opts = {}) {
  ToolServer server;
  register_default_tools(server, tool_opts);
  LoopbackTransport loop(server);
  JsonRpcClient client(loop);
  return run_generation_with(client, task, opts);
}

// Re-execute a logged episode against a fresh in-process server, verifying
// every result digest; returns the reproduced scene.
inline Scene replay_episode(const EpisodeLog& log,
                            const AgentToolOptions& tool_opts = {}) {
  ToolServer server;
  register_default_tools(server, tool_opts);
  LoopbackTransport loop(server);
  JsonRpcClient client(loop);
  for (const auto& e : log.entries) {
    if (e.tool == "terminate" || e.tool.empty()) continue;
    nlohmann::ordered_json result;
    try {
      result = client.call_tool(e.tool, e.args);
    } catch (const Error&) {
      if (e.digest.empty()) continue;  // the original call failed too
      throw;
    }
    std::string digest = hex64(fnv1a64(result.dump()));
    if (!e.digest.empty() && digest != e.digest)
      fail(Errc::InvalidArgument,
           "replay diverged at iteration " + std::to_string(e.iteration) +
               " (" + e.tool + ")");
  }
  nlohmann::ordered_json dump =
      client.call_tool("scene_dump", nlohmann::ordered_json::object());
  return scene_from_dump(dump);
}

}  // namespace sageforge
