#pragma once

// Rule-based visual critic: inspects scene state and emits structured
// add/move/remove feedback. Four passes:
//   (a) required task objects missing from the scene -> add
//   (b) combination rules (chairs around tables, books on shelves) -> add
//   (c) floor coverage below a density threshold -> add background decor
//   (d) geometric misplacements (stranded on-top objects, blocked doors)
//       -> remove / move
// The critic is a pure function of the scene snapshot; an optional remote
// hook with the same feedback schema can replace it outside CI.

#include <map>
#include <set>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "sageforge/assets.hpp"
#include "sageforge/scene.hpp"

namespace sageforge {

struct AddRequest {
  std::string description;
  std::string category;
  std::string constraints;
};

struct MoveRequest {
  std::string id;
  std::string constraints;
};

struct CritiqueFeedback {
  std::vector<AddRequest> add;
  std::vector<MoveRequest> move;
  std::vector<std::string> remove;
  bool satisfied = false;  // true iff all three lists are empty

  void finish() { satisfied = add.empty() && move.empty() && remove.empty(); }
};

// "Every <trigger> wants at least <min_count> <companion>s." The constraint
// template may reference {trigger}, replaced by the trigger object's id.
struct CombinationRule {
  std::string trigger;
  std::string companion;
  int min_count = 1;
  std::string constraints;
};

struct DecorEntry {
  std::string description;
  std::string category;
  std::string constraints;
};

inline std::vector<CombinationRule> default_combination_rules() {
  return {
      {"dining table", "chair", 2, "near({trigger}, 1.2), facing({trigger})"},
      {"dining table", "plate", 2, "on({trigger})"},
      {"dining table", "bowl", 1, "on({trigger})"},
      {"meeting table", "office chair", 4, "near({trigger}, 1.4), facing({trigger})"},
      {"desk", "office chair", 1, "near({trigger}, 0.9), facing({trigger})"},
      {"desk", "lamp", 1, "on({trigger})"},
      {"desk", "laptop", 1, "on({trigger})"},
      {"desk", "monitor", 1, "on({trigger})"},
      {"desk", "keyboard", 1, "on({trigger})"},
      {"desk", "pen", 1, "on({trigger})"},
      {"sofa", "coffee table", 1, "near({trigger}, 1.5), aligned({trigger})"},
      {"sofa", "pillow", 2, "on({trigger})"},
      {"coffee table", "book", 1, "on({trigger})"},
      {"bed", "pillow", 2, "on({trigger})"},
      {"bed", "nightstand", 1, "near({trigger}, 0.9), aligned({trigger})"},
      {"nightstand", "lamp", 1, "on({trigger})"},
      {"nightstand", "alarm clock", 1, "on({trigger})"},
      {"bookcase", "book", 3, "on({trigger})"},
      {"counter", "toaster", 1, "on({trigger})"},
      {"counter", "pot", 1, "on({trigger})"},
      {"kitchen island", "bowl", 1, "on({trigger})"},
      {"stove", "pan", 1, "on({trigger})"},
      {"armchair", "pillow", 1, "on({trigger})"},
      {"side table", "vase", 1, "on({trigger})"},
      {"tv stand", "photo frame", 1, "on({trigger})"},
  };
}

inline std::vector<DecorEntry> default_decor_entries() {
  return {
      {"a potted floor plant", "plant", "edge"},
      {"a floor lamp", "floor lamp", "corner"},
      {"an armchair", "armchair", "edge"},
      {"a bookcase", "bookcase", "edge"},
      {"a side table", "side table", "edge"},
      {"a trash bin", "trash bin", "corner"},
  };
}

struct CriticOptions {
  std::vector<CombinationRule> rules = default_combination_rules();
  std::vector<DecorEntry> decor = default_decor_entries();
  double coverage_threshold = 0.15;  // occupied floor fraction
  double association_radius = 1.5;   // companions must stand this close
  int decor_batch = 2;               // background adds per critique round
};

// Rule file schema: {"rules": [{"trigger","companion","min","constraints"}...],
// "decor": [{"description","category","constraints"}...],
// "coverage_threshold": f, "association_radius": f, "decor_batch": n}.
// Omitted sections keep their defaults.
inline CriticOptions critic_options_from_json(const nlohmann::json& j) {
  CriticOptions o;
  if (j.contains("rules")) {
    o.rules.clear();
    for (const auto& e : j.at("rules")) {
      CombinationRule r;
      r.trigger = normalize_category(e.at("trigger").get<std::string>());
      r.companion = normalize_category(e.at("companion").get<std::string>());
      r.min_count = e.value("min", 1);
      r.constraints = e.value("constraints", std::string());
      if (r.trigger == r.companion)
        fail(Errc::ParseError, "rule trigger equals companion: " + r.trigger);
      o.rules.push_back(std::move(r));
    }
  }
  if (j.contains("decor")) {
    o.decor.clear();
    for (const auto& e : j.at("decor"))
      o.decor.push_back({e.at("description").get<std::string>(),
                         normalize_category(e.at("category").get<std::string>()),
                         e.value("constraints", std::string())});
  }
  o.coverage_threshold = j.value("coverage_threshold", o.coverage_threshold);
  o.association_radius = j.value("association_radius", o.association_radius);
  o.decor_batch = j.value("decor_batch", o.decor_batch);
  return o;
}

// Required categories not yet covered by scene objects, as a multiset
// difference: each scene object satisfies at most one required entry.
inline std::vector<RequiredObject> check_task_objects(const Scene& scene,
                                                      const TaskSpec& task) {
  std::map<std::string, int> have;
  for (const auto& o : scene.objects) ++have[o.category];
  std::vector<RequiredObject> missing;
  for (const RequiredObject& req : task.required_objects) {
    std::string cat = normalize_category(req.category);
    auto it = have.find(cat);
    if (it != have.end() && it->second > 0) --it->second;
    else missing.push_back(req);
  }
  return missing;
}

namespace detail {

inline std::string with_article(const std::string& noun) {
  if (noun.empty()) return noun;
  return (std::string("aeiou").find(noun[0]) != std::string::npos ? "an " : "a ") + noun;
}

inline std::string expand_trigger(std::string tpl, const std::string& id) {
  const std::string key = "{trigger}";
  size_t pos;
  while ((pos = tpl.find(key)) != std::string::npos) tpl.replace(pos, key.size(), id);
  return tpl;
}

inline double floor_coverage(const Scene& scene) {
  double total = 0;
  for (const Room& r : scene.plan.rooms) total += polygon_area(r.polygon);
  if (total <= 0) return 1.0;
  double occupied = 0;
  for (const SceneObject& o : scene.objects) {
    const SupportRelation* rel = scene.support_of(o.id);
    if (!rel || rel->parent != kFloorParent || o.mesh.empty()) continue;
    occupied += std::abs(polygon_area(world_obb(o).footprint()));
  }
  return occupied / total;
}

}  // namespace detail

inline CritiqueFeedback critique(const Scene& scene, const TaskSpec& task,
                                 const CriticOptions& opts = {}) {
  CritiqueFeedback fb;

  // (a) Missing required task objects.
  for (const RequiredObject& req : check_task_objects(scene, task))
    fb.add.push_back({req.description, req.category, req.constraints});

  // (b) Combination rules: count companions supported by or standing near
  // each trigger instance.
  for (const CombinationRule& rule : opts.rules) {
    std::string trig_cat = normalize_category(rule.trigger);
    std::string comp_cat = normalize_category(rule.companion);
    for (const SceneObject& t : scene.objects) {
      if (t.category != trig_cat) continue;
      int count = 0;
      for (const SceneObject& c : scene.objects) {
        if (c.category != comp_cat || c.id == t.id) continue;
        const SupportRelation* rel = scene.support_of(c.id);
        bool on_trigger = rel && rel->parent == t.id;
        bool nearby = (c.pose.position.xy() - t.pose.position.xy()).norm() <=
                      opts.association_radius;
        if (on_trigger || nearby) ++count;
      }
      for (int k = count; k < rule.min_count; ++k)
        fb.add.push_back({detail::with_article(comp_cat), comp_cat,
                          detail::expand_trigger(rule.constraints, t.id)});
    }
  }

  // (c) Sparse floors want background decor, a bounded batch per round.
  if (!opts.decor.empty() && detail::floor_coverage(scene) < opts.coverage_threshold) {
    std::set<std::string> decor_cats;
    for (const DecorEntry& d : opts.decor) decor_cats.insert(d.category);
    size_t existing = 0;
    for (const SceneObject& o : scene.objects)
      if (decor_cats.count(o.category)) ++existing;
    for (int k = 0; k < opts.decor_batch; ++k) {
      const DecorEntry& d = opts.decor[(existing + size_t(k)) % opts.decor.size()];
      fb.add.push_back({d.description, d.category, d.constraints});
    }
  }

  // (d) Misplacements. An on-top object sitting directly on the floor fell or
  // was stranded: remove it. A floor object crowding a door span: move it to
  // the room edge (the planner's door keep-out will find a clear spot).
  for (const SceneObject& o : scene.objects) {
    const SupportRelation* rel = scene.support_of(o.id);
    if (!rel) continue;
    if (o.placement_class == PlacementClass::OnTop && rel->parent == kFloorParent) {
      fb.remove.push_back(o.id);
      continue;
    }
    if (rel->parent == kFloorParent && !o.attrs.static_ && !o.mesh.empty() &&
        !scene.plan.doors.empty()) {
      Polygon2 fp = world_obb(o).footprint();
      for (const Door& d : scene.plan.doors) {
        Vec2 dir = (d.p1 - d.p0).normalized();
        Vec2 nrm{-dir.y, dir.x};
        const double c = 0.45;  // door keep-out, matches the placement planner
        Polygon2 rect{d.p0 - dir * c - nrm * c, d.p1 + dir * c - nrm * c,
                      d.p1 + dir * c + nrm * c, d.p0 - dir * c + nrm * c};
        if (polygon_area(rect) < 0) std::reverse(rect.begin(), rect.end());
        if (convex_overlap(fp, rect, 0)) {
          fb.move.push_back({o.id, "edge"});
          break;
        }
      }
    }
  }

  fb.finish();
  return fb;
}

// ---------------------------------------------------------------------------
// Wire format (shared with the tool server and the remote-hook mode).

inline nlohmann::ordered_json to_json(const CritiqueFeedback& fb) {
  nlohmann::ordered_json j;
  j["add"] = nlohmann::ordered_json::array();
  for (const auto& a : fb.add)
    j["add"].push_back({{"description", a.description},
                        {"category", a.category},
                        {"constraints", a.constraints}});
  j["move"] = nlohmann::ordered_json::array();
  for (const auto& m : fb.move)
    j["move"].push_back({{"id", m.id}, {"constraints", m.constraints}});
  j["remove"] = fb.remove;
  j["satisfied"] = fb.satisfied;
  return j;
}

inline CritiqueFeedback feedback_from_json(const nlohmann::json& j) {
  CritiqueFeedback fb;
  for (const auto& a : j.value("add", nlohmann::json::array()))
    fb.add.push_back({a.at("description").get<std::string>(),
                      a.at("category").get<std::string>(),
                      a.value("constraints", std::string())});
  for (const auto& m : j.value("move", nlohmann::json::array()))
    fb.move.push_back({m.at("id").get<std::string>(),
                       m.value("constraints", std::string())});
  for (const auto& r : j.value("remove", nlohmann::json::array()))
    fb.remove.push_back(r.get<std::string>());
  fb.satisfied = j.value("satisfied", false);
  return fb;
}

}  // namespace sageforge
