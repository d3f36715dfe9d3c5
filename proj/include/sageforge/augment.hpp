#pragma once
// Scene augmentation: expands one generated scene into task-consistent
// variants at three levels. Configuration resamples task-object poses in
// place, category regenerates task-object assets while preserving their
// category and support, and layout regenerates the entire background around
// the kept objects. Every emitted variant is re-validated to be
// simulation-ready (structurally valid, zero collisions, fully stable).

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <future>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "sageforge/agent.hpp"
#include "sageforge/validate.hpp"

namespace sageforge {

// ---------------------------------------------------------------------------
// Requests and results

enum class AugmentLevel { Configuration, Category, Layout };

inline const char* augment_level_name(AugmentLevel v) {
  switch (v) {
    case AugmentLevel::Configuration: return "configuration";
    case AugmentLevel::Category: return "category";
    case AugmentLevel::Layout: return "layout";
  }
  return "?";
}

inline AugmentLevel augment_level_from_name(const std::string& s) {
  std::string low = lowercase(trim(s));
  if (low == "configuration") return AugmentLevel::Configuration;
  if (low == "category") return AugmentLevel::Category;
  if (low == "layout") return AugmentLevel::Layout;
  fail(Errc::ParseError, "unknown augmentation level: " + s);
}

struct AugmentationRequest {
  AugmentLevel level = AugmentLevel::Configuration;
  std::vector<std::string> task_object_ids;
  uint64_t seed = 0;
  int count = 1;
};

struct AugmentOptions {
  PlacementOptions placement;     // grid, gates, settle physics
  AssetProviderOptions assets;    // category regeneration source
  PerturbationTable perturbations = default_perturbations();
  GenerationOptions generation;   // layout background runs
  AgentToolOptions tools;         // room templates / critic rules for layout
  int reseed_attempts = 8;        // retries per variant before it is skipped
};

struct AugmentVariant {
  Scene scene;
  int index = 0;      // variant number within the batch
  uint64_t seed = 0;  // sub-seed the variant was produced from
  bool ok = false;    // false: skipped, `note` holds the reason
  std::string note;
};

namespace detail {

inline uint64_t variant_seed(uint64_t seed, AugmentLevel level, int index,
                             int attempt) {
  uint64_t h = hash_mix(seed, fnv1a64(augment_level_name(level)));
  return hash_mix(h, (uint64_t(uint32_t(index)) << 20) | uint32_t(attempt));
}

inline void check_request(const Scene& scene, const AugmentationRequest& req,
                          AugmentLevel expected) {
  if (req.level != expected)
    fail(Errc::InvalidArgument,
         std::string("request level is ") + augment_level_name(req.level) +
             ", expected " + augment_level_name(expected));
  if (req.count < 1) fail(Errc::InvalidArgument, "variant count must be >= 1");
  for (const auto& id : req.task_object_ids) {
    const SceneObject& o = scene.get(id);
    if (!o.task_relevant)
      fail(Errc::InvalidArgument, "object " + id + " is not task-relevant");
  }
}

inline std::string join_notes(const std::vector<std::string>& notes) {
  std::string out;
  for (const auto& n : notes) {
    if (!out.empty()) out += "; ";
    out += n;
  }
  return out;
}

// Simulation-ready check shared by all three levels. Returns the first flaw.
inline std::optional<std::string> variant_flaw(const Scene& s,
                                               const SettleParams& settle) {
  ValidationReport rep = validate_scene(s);
  if (!rep.ok())
    return "structural " + rep.violations.front().code + ": " +
           rep.violations.front().detail;
  CollisionReport col = scene_collision_ratio(s);
  if (col.collision_ratio != 0.0)
    return "collision ratio " + std::to_string(col.collision_ratio);
  StabilityReport stab = scene_stability_report(s, settle);
  if (stab.stability_ratio != 1.0)
    return "stability ratio " + std::to_string(stab.stability_ratio);
  return std::nullopt;
}

// Re-place an object where it structurally was: a concrete parent pins an
// on(id) anchor; floor and wall objects keep only their placement class.
inline std::vector<Constraint> anchor_constraints(const SupportRelation& rel) {
  std::vector<Constraint> out;
  if (rel.parent != kFloorParent && rel.parent != kWallParent)
    out.push_back({ConstraintKind::OnTopOf, rel.parent, 0, 1.0});
  return out;
}

struct DetachedChild {
  SceneObject obj;
  SupportRelation rel;
};

struct Subtree {
  SceneObject root;
  SupportRelation root_rel;
  std::vector<DetachedChild> children;  // dependency order, parents first
};

inline Subtree detach_subtree(Scene& scene, const std::string& id) {
  const SupportRelation* rel = scene.support_of(id);
  Subtree out{scene.get(id), rel ? *rel : SupportRelation{id, kFloorParent, -1},
              {}};
  for (const auto& cid : scene.descendants_of(id))
    out.children.push_back({scene.get(cid), *scene.support_of(cid)});
  for (auto it = out.children.rbegin(); it != out.children.rend(); ++it)
    scene.erase_object(it->obj.id);
  scene.erase_object(id);
  return out;
}

// Like place_object, but starts from a seeded offset in the candidate list so
// different seeds pick different (still gate- and settle-validated) spots.
inline PlaceOutcome place_seeded(Scene& scene, const PlacementRequest& req,
                                 const PlacementOptions& opts, Rng& rng) {
  PlaceOutcome out;
  std::vector<CandidatePlacement> cands;
  try {
    cands = sample_candidates(scene, req.object, req.object.placement_class,
                              req.constraints, opts, req.style);
  } catch (const Error& e) {
    out.reason = e.code();
    out.detail = e.what();
    return out;
  }
  size_t start = size_t(rng.uniform_int(0, int64_t(cands.size()) - 1));
  for (size_t k = 0; k < cands.size(); ++k) {
    CandidatePlacement cand = cands[(start + k) % cands.size()];
    if (opts.use_physics) {
      SceneObject probe = req.object;
      probe.pose = cand.pose;
      ValidationOutcome v = validate_pose(scene, probe, cand.pose, opts.settle);
      if (!v.accepted) continue;
      cand.pose = v.pose;
      cand.support = v.support;
      cand.support.child = req.object.id;
    }
    SceneObject obj = req.object;
    obj.pose = cand.pose;
    scene.insert_object(std::move(obj), cand.support);
    out.placed = true;
    out.candidate = cand;
    return out;
  }
  out.detail = "no stable candidate for " + req.object.id;
  return out;
}

// ---------------------------------------------------------------------------
// Batch driver. Attempt chains are independent per variant (phase 1, sharded
// across `jobs` threads), then a serial pass resolves cross-variant
// duplicates in index order so the output is identical for any job count.

struct VariantSlot {
  AugmentVariant var;
  int attempt = 0;  // attempt index the current `var` came from
};

template <typename Compute>
VariantSlot advance_variant(int v, int from, int attempts, Compute& compute) {
  VariantSlot s;
  s.var.index = v;
  s.var.note = "no attempt left";
  for (int a = from; a < attempts; ++a) {
    s.attempt = a;
    s.var = compute(v, a);
    s.var.index = v;
    if (s.var.ok) break;
  }
  return s;
}

template <typename Compute, typename Conflicts>
std::vector<AugmentVariant> run_variant_batch(int count, int attempts, int jobs,
                                              Compute compute,
                                              Conflicts conflicts) {
  attempts = std::max(attempts, 1);
  std::vector<VariantSlot> slots(static_cast<size_t>(count));
  int shards = std::clamp(jobs, 1, count);
  if (shards > 1) {
    std::vector<std::future<void>> workers;
    for (int t = 0; t < shards; ++t)
      workers.push_back(std::async(std::launch::async, [&, t] {
        for (int v = t; v < count; v += shards)
          slots[size_t(v)] = advance_variant(v, 0, attempts, compute);
      }));
    for (auto& w : workers) w.get();
  } else {
    for (int v = 0; v < count; ++v)
      slots[size_t(v)] = advance_variant(v, 0, attempts, compute);
  }
  std::vector<AugmentVariant> out;
  out.reserve(size_t(count));
  std::vector<const AugmentVariant*> accepted;
  for (int v = 0; v < count; ++v) {
    VariantSlot& s = slots[size_t(v)];
    while (s.var.ok && conflicts(s.var, accepted)) {
      if (s.attempt + 1 >= attempts) {
        s.var.ok = false;
        s.var.note = "duplicates an earlier variant";
        break;
      }
      s = advance_variant(v, s.attempt + 1, attempts, compute);
    }
    out.push_back(std::move(s.var));
    if (out.back().ok) accepted.push_back(&out.back());
  }
  return out;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Configuration level: resample task-object poses, background untouched

inline std::vector<AugmentVariant> augment_configuration(
    const Scene& scene, const AugmentationRequest& req,
    const AugmentOptions& opts = {}, int jobs = 1) {
  detail::check_request(scene, req, AugmentLevel::Configuration);
  std::vector<AugmentVariant> out;
  if (req.task_object_ids.empty()) {
    for (int v = 0; v < req.count; ++v)
      out.push_back({scene, v,
                     detail::variant_seed(req.seed, req.level, v, 0), true,
                     "no task objects; identity copy"});
    return out;
  }

  auto compute = [&](int v, int a) {
    AugmentVariant var;
    var.seed = detail::variant_seed(req.seed, AugmentLevel::Configuration, v, a);
    Rng rng(var.seed);
    Scene work = scene;
    for (const auto& id : req.task_object_ids) {
      detail::Subtree sub = detail::detach_subtree(work, id);
      Pose old_pose = sub.root.pose;
      PlacementRequest preq{sub.root, detail::anchor_constraints(sub.root_rel),
                            Quat::identity()};
      PlaceOutcome res = detail::place_seeded(work, preq, opts.placement, rng);
      if (!res.placed) {
        var.note = std::string(errc_name(res.reason)) + ": " + res.detail;
        return var;
      }
      // On-top children ride along rigidly, exactly like asset_move.
      const Pose& new_pose = work.get(id).pose;
      for (const auto& ch : sub.children) {
        SceneObject c = ch.obj;
        c.pose = detail::carry_pose(old_pose, new_pose, ch.obj.pose);
        work.insert_object(std::move(c), ch.rel);
      }
    }
    if (auto flaw = detail::variant_flaw(work, opts.placement.settle)) {
      var.note = *flaw;
      return var;
    }
    var.scene = std::move(work);
    var.ok = true;
    return var;
  };

  // Accepted variants must differ pairwise: distinct scene hash and at least
  // one task object displaced by a grid cell or more.
  auto conflicts = [&](const AugmentVariant& cand,
                       const std::vector<const AugmentVariant*>& accepted) {
    uint64_t h = scene_hash(cand.scene);
    for (const AugmentVariant* acc : accepted) {
      if (scene_hash(acc->scene) == h) return true;
      double moved = 0;
      for (const auto& id : req.task_object_ids)
        moved = std::max(moved, (cand.scene.get(id).pose.position -
                                 acc->scene.get(id).pose.position).norm());
      if (moved + 1e-9 < opts.placement.grid) return true;
    }
    return false;
  };

  out = detail::run_variant_batch(req.count, opts.reseed_attempts, jobs,
                                  compute, conflicts);
  for (auto& v : out)
    if (!v.ok) {
      v.scene = scene;
      v.note = "skipped: " + v.note;
    }
  return out;
}

// ---------------------------------------------------------------------------
// Category level: regenerate task-object assets, category and support intact

inline std::vector<AugmentVariant> augment_category(
    const Scene& scene, const AugmentationRequest& req,
    const AugmentOptions& opts = {}, int jobs = 1) {
  detail::check_request(scene, req, AugmentLevel::Category);

  auto compute = [&](int v, int a) {
    AugmentVariant var;
    var.seed = detail::variant_seed(req.seed, AugmentLevel::Category, v, a);
    Scene work = scene;
    std::vector<std::string> notes;
    for (const auto& id : req.task_object_ids) {
      const SceneObject& cur = work.get(id);
      require_category(cur.category);  // UnknownCategory propagates
      uint64_t oseed = hash_mix(var.seed, fnv1a64(id));
      PerturbResult pr =
          perturb_description(cur.description, oseed, opts.perturbations);
      if (!pr.changed) {
        // Nothing to vary at the text level: keep the object untouched
        // rather than passing off a reseeded mesh as a description variant.
        notes.push_back(id + ": " + pr.note);
        continue;
      }
      detail::Subtree sub = detail::detach_subtree(work, id);
      Asset asset =
          provide_asset({pr.text, sub.root.category, oseed}, opts.assets);
      double height = sample_category_height(sub.root.category, oseed);
      rescale_to_height(asset.mesh, height);
      SceneObject obj = sub.root;  // id, category, class, flags preserved
      obj.description = pr.text;
      obj.mesh = std::move(asset.mesh);
      obj.attrs =
          estimate_physical_attributes(obj.category, world_obb(obj), oseed);
      obj.attrs.height = height;
      PlacementRequest preq{obj, detail::anchor_constraints(sub.root_rel),
                            Quat::identity()};
      PlaceOutcome res = place_object(work, preq, opts.placement);
      if (!res.placed) {
        var.note = std::string(errc_name(res.reason)) + ": " + res.detail;
        return var;
      }
      // The parent's shape changed, so children are re-planned, not carried.
      std::vector<PlacementRequest> creqs;
      for (const auto& ch : sub.children)
        creqs.push_back(
            {ch.obj, detail::anchor_constraints(ch.rel), Quat::identity()});
      PlacementPlan cplan = plan_placements(work, creqs, opts.placement);
      if (!cplan.unplaced.empty()) {
        var.note = "child " + cplan.unplaced.front().object_id +
                   " did not fit: " + cplan.unplaced.front().detail;
        return var;
      }
      apply_plan(work, creqs, cplan);
    }
    if (auto flaw = detail::variant_flaw(work, opts.placement.settle)) {
      var.note = *flaw;
      return var;
    }
    var.scene = std::move(work);
    var.ok = true;
    var.note = detail::join_notes(notes);
    return var;
  };

  auto conflicts = [&](const AugmentVariant& cand,
                       const std::vector<const AugmentVariant*>& accepted) {
    uint64_t h = scene_hash(cand.scene);
    for (const AugmentVariant* acc : accepted)
      if (scene_hash(acc->scene) == h) return true;
    return false;
  };

  std::vector<AugmentVariant> out = detail::run_variant_batch(
      req.count, opts.reseed_attempts, jobs, compute, conflicts);
  for (auto& v : out)
    if (!v.ok) {
      v.scene = scene;
      v.note = "skipped: " + v.note;
    }
  return out;
}

// ---------------------------------------------------------------------------
// Layout level: regenerate the background, re-plan the kept objects into it

inline std::vector<AugmentVariant> augment_layout(
    const Scene& base, const TaskSpec& task,
    const std::vector<std::string>& keep_ids, uint64_t seed, int count,
    const AugmentOptions& opts = {}, int jobs = 1) {
  if (count < 1) fail(Errc::InvalidArgument, "variant count must be >= 1");
  std::set<std::string> keep(keep_ids.begin(), keep_ids.end());
  for (const auto& id : keep_ids) base.get(id);  // ObjectNotFound on bad ids

  // Kept objects in dependency order so on(parent) anchors resolve as the
  // plan inserts them.
  auto depth = [&](const std::string& id) {
    int d = 0;
    const SupportRelation* r = base.support_of(id);
    while (r && r->parent != kFloorParent && r->parent != kWallParent) {
      ++d;
      r = base.support_of(r->parent);
    }
    return d;
  };
  std::vector<std::string> ordered = keep_ids;
  std::stable_sort(ordered.begin(), ordered.end(),
                   [&](const std::string& a, const std::string& b) {
                     return depth(a) < depth(b);
                   });

  std::set<std::string> excluded;
  for (const auto& id : keep_ids) excluded.insert(base.get(id).category);
  bool all_kept = keep.size() == base.objects.size();

  auto compute = [&](int v, int a) {
    AugmentVariant var;
    var.seed = detail::variant_seed(seed, AugmentLevel::Layout, v, a);
    GenerationOptions gopts = opts.generation;
    gopts.seed = var.seed;
    gopts.exclude_categories.insert(excluded.begin(), excluded.end());
    // Keeping every object leaves nothing task-irrelevant to regenerate, so
    // the enrichment critic has no role: only the plan is redrawn.
    if (all_kept) gopts.use_visual_critic = false;
    GenerationResult gen = run_generation(task, gopts, opts.tools);
    if (!gen.satisfied) {
      var.note = "background generation: " + gen.reason;
      return var;
    }
    Scene work = std::move(gen.scene);
    for (const auto& id : keep_ids)
      if (work.find(id)) {
        var.note = "kept id collides with a generated object";
        return var;
      }

    std::vector<PlacementRequest> reqs;
    std::vector<std::string> notes;
    for (const auto& id : ordered) {
      PlacementRequest r;
      r.object = base.get(id);  // id, mesh, category, attrs reused as-is
      const SupportRelation* rel = base.support_of(id);
      if (rel && rel->parent != kFloorParent && rel->parent != kWallParent) {
        if (keep.count(rel->parent)) {
          r.constraints.push_back(
              {ConstraintKind::OnTopOf, rel->parent, 0, 1.0});
        } else {
          // The original anchor was regenerated: relax to its category if
          // the new background has one, else fall back to the floor.
          const std::string& cat = base.get(rel->parent).category;
          bool have = false;
          for (const auto& o : work.objects)
            if (o.category == cat) have = true;
          if (have) {
            r.constraints.push_back({ConstraintKind::OnTopOf, cat, 0, 1.0});
          } else {
            r.object.placement_class = PlacementClass::Floor;
            notes.push_back(id +
                            ": original support not kept; re-planned on the"
                            " floor");
          }
        }
      }
      reqs.push_back(std::move(r));
    }
    PlacementPlan plan = plan_placements(work, reqs, opts.placement);
    if (!plan.unplaced.empty()) {
      var.note = "kept object " + plan.unplaced.front().object_id +
                 " did not fit: " + plan.unplaced.front().detail;
      return var;
    }
    apply_plan(work, reqs, plan);
    if (auto flaw = detail::variant_flaw(work, opts.placement.settle)) {
      var.note = *flaw;
      return var;
    }
    var.scene = std::move(work);
    var.ok = true;
    var.note = detail::join_notes(notes);
    return var;
  };

  auto conflicts = [&](const AugmentVariant& cand,
                       const std::vector<const AugmentVariant*>& accepted) {
    uint64_t h = scene_hash(cand.scene);
    for (const AugmentVariant* acc : accepted)
      if (scene_hash(acc->scene) == h) return true;
    return false;
  };

  std::vector<AugmentVariant> out = detail::run_variant_batch(
      count, opts.reseed_attempts, jobs, compute, conflicts);
  for (auto& v : out)
    if (!v.ok) {
      v.scene = base;
      v.note = "skipped: " + v.note;
    }
  return out;
}

// ---------------------------------------------------------------------------
// Request dispatch and the batch manifest

inline std::vector<AugmentVariant> augment_scene(const Scene& scene,
                                                 const AugmentationRequest& req,
                                                 const AugmentOptions& opts = {},
                                                 int jobs = 1) {
  switch (req.level) {
    case AugmentLevel::Configuration:
      return augment_configuration(scene, req, opts, jobs);
    case AugmentLevel::Category:
      return augment_category(scene, req, opts, jobs);
    case AugmentLevel::Layout:
      detail::check_request(scene, req, AugmentLevel::Layout);
      return augment_layout(scene, scene.task, req.task_object_ids, req.seed,
                            req.count, opts, jobs);
  }
  fail(Errc::InvalidArgument, "unknown augmentation level");
}

inline nlohmann::ordered_json augment_manifest(
    const Scene& base, AugmentLevel level,
    const std::vector<AugmentVariant>& variants,
    const std::vector<std::string>& files) {
  nlohmann::ordered_json j;
  j["level"] = augment_level_name(level);
  j["parent_scene_hash"] = hex64(scene_hash(base));
  nlohmann::ordered_json arr = nlohmann::ordered_json::array();
  for (size_t i = 0; i < variants.size(); ++i) {
    nlohmann::ordered_json e;
    e["index"] = variants[i].index;
    e["seed"] = variants[i].seed;
    e["ok"] = variants[i].ok;
    e["file"] = i < files.size() ? files[i] : std::string();
    if (!variants[i].note.empty()) e["note"] = variants[i].note;
    arr.push_back(std::move(e));
  }
  j["variants"] = std::move(arr);
  return j;
}

struct AugmentBatchResult {
  std::vector<AugmentVariant> variants;
  nlohmann::ordered_json manifest;
};

// Runs a batch, writes each accepted variant (scene JSON plus mesh sidecars)
// under `dir`, and drops a manifest.json next to them.
inline AugmentBatchResult augment_to_dir(const Scene& base,
                                         const AugmentationRequest& req,
                                         const std::filesystem::path& dir,
                                         const AugmentOptions& opts = {},
                                         int jobs = 1) {
  namespace fs = std::filesystem;
  AugmentBatchResult out;
  out.variants = augment_scene(base, req, opts, jobs);
  fs::create_directories(dir);
  std::vector<std::string> files(out.variants.size());
  for (auto& v : out.variants) {
    if (!v.ok) continue;
    std::string name = std::string(augment_level_name(req.level)) + "_" +
                       std::to_string(v.index) + ".scene.json";
    save_scene(v.scene, dir / name);
    files[size_t(v.index)] = name;
  }
  out.manifest = augment_manifest(base, req.level, out.variants, files);
  write_file_atomic(dir / "manifest.json", out.manifest.dump(2) + "\n");
  return out;
}

}  // namespace sageforge
