#include <catch2/catch_amalgamated.hpp>

#include <filesystem>
#include <set>
#include <string>
#include <vector>

#include "sageforge/augment.hpp"
#include "test_util.hpp"

using namespace sageforge;
using namespace sageforge::testutil;
using Catch::Approx;
using json = nlohmann::ordered_json;
namespace fs = std::filesystem;

namespace {

fs::path temp_dir(const std::string& name) {
  fs::path p = fs::temp_directory_path() / ("sageforge_test_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

TaskSpec office_task() {
  TaskSpec t;
  t.prompt = "an office with a mug on the nightstand";
  t.room_types = {"office"};
  t.required_objects = {{"a nightstand", "nightstand", ""},
                        {"a mug", "mug", "on(nightstand)"}};
  return t;
}

// One generated office reused by every case: nightstand and mug are the task
// objects, the mug sits on the nightstand.
const Scene& base_scene() {
  static Scene s = [] {
    GenerationOptions opts;
    opts.seed = 11;
    opts.use_visual_critic = false;
    GenerationResult res = run_generation(office_task(), opts);
    REQUIRE(res.satisfied);
    return res.scene;
  }();
  return s;
}

std::string the(const Scene& s, const std::string& category) {
  for (const auto& o : s.objects)
    if (o.category == category) return o.id;
  FAIL("no object of category " + category);
  return "";
}

void check_sim_ready(const Scene& s) {
  CHECK(validate_scene(s).ok());
  CHECK(scene_collision_ratio(s).collision_ratio == 0.0);
  CHECK(scene_stability_report(s).stability_ratio == 1.0);
}

// Everything outside `augmented` must be byte-identical to the base.
void check_background_untouched(const Scene& base, const Scene& var,
                                const std::set<std::string>& augmented) {
  REQUIRE(var.objects.size() == base.objects.size());
  for (const auto& o : base.objects) {
    if (augmented.count(o.id)) continue;
    const SceneObject& v = var.get(o.id);
    CHECK(to_json(v.pose) == to_json(o.pose));
    CHECK(mesh_content_hash(v.mesh) == mesh_content_hash(o.mesh));
    CHECK(v.description == o.description);
    CHECK(var.support_of(o.id)->parent == base.support_of(o.id)->parent);
  }
}

template <typename F>
Errc thrown_errc(F&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  throw std::runtime_error("expected a sageforge::Error");
}

}  // namespace

TEST_CASE("augmentation level names round-trip", "[augment]") {
  for (auto lvl : {AugmentLevel::Configuration, AugmentLevel::Category,
                   AugmentLevel::Layout})
    CHECK(augment_level_from_name(augment_level_name(lvl)) == lvl);
  CHECK(augment_level_from_name(" Layout ") == AugmentLevel::Layout);
  CHECK_THROWS_AS(augment_level_from_name("texture"), Error);
  CHECK(thrown_errc([] { augment_level_from_name("texture"); }) ==
        Errc::ParseError);
}

TEST_CASE("configuration variants resample the task object on its support",
          "[augment]") {
  const Scene& base = base_scene();
  std::string mug = the(base, "mug");
  std::string night = the(base, "nightstand");
  AugmentationRequest req{AugmentLevel::Configuration, {mug}, 7, 5};

  std::vector<AugmentVariant> vars = augment_configuration(base, req);
  REQUIRE(vars.size() == 5);
  for (const auto& v : vars) {
    REQUIRE(v.ok);
    CHECK(v.scene.support_of(mug)->parent == night);
    // The asset itself is untouched; only the pose moved.
    CHECK(mesh_content_hash(v.scene.get(mug).mesh) ==
          mesh_content_hash(base.get(mug).mesh));
    check_background_untouched(base, v.scene, {mug});
    check_sim_ready(v.scene);
  }
  // Pairwise distinct by at least one grid cell.
  PlacementOptions defaults;
  for (size_t i = 0; i < vars.size(); ++i)
    for (size_t j = i + 1; j < vars.size(); ++j)
      CHECK((vars[i].scene.get(mug).pose.position -
             vars[j].scene.get(mug).pose.position).norm() >=
            defaults.grid - 1e-9);

  // Deterministic in (scene, seed).
  std::vector<AugmentVariant> again = augment_configuration(base, req);
  for (size_t i = 0; i < vars.size(); ++i) {
    CHECK(again[i].seed == vars[i].seed);
    CHECK(scene_to_json(again[i].scene) == scene_to_json(vars[i].scene));
  }
}

TEST_CASE("configuration carries on-top children when the parent moves",
          "[augment]") {
  const Scene& base = base_scene();
  std::string mug = the(base, "mug");
  std::string night = the(base, "nightstand");
  AugmentationRequest req{AugmentLevel::Configuration, {night, mug}, 13, 2};

  std::vector<AugmentVariant> vars = augment_configuration(base, req);
  REQUIRE(vars.size() == 2);
  for (const auto& v : vars) {
    REQUIRE(v.ok);
    CHECK(v.scene.support_of(mug)->parent == night);
    // The mug still rests on the nightstand's top surface.
    double top = world_obb(v.scene.get(night)).top();
    CHECK(v.scene.get(mug).pose.position.z == Approx(top).margin(1e-6));
    check_sim_ready(v.scene);
  }
  CHECK(scene_to_json(vars[0].scene) != scene_to_json(vars[1].scene));
}

TEST_CASE("configuration identity copies and request validation", "[augment]") {
  const Scene& base = base_scene();
  std::string mug = the(base, "mug");
  std::string desk = the(base, "desk");  // present but not task-relevant

  AugmentationRequest empty{AugmentLevel::Configuration, {}, 3, 4};
  std::vector<AugmentVariant> vars = augment_configuration(base, empty);
  REQUIRE(vars.size() == 4);
  for (const auto& v : vars) {
    CHECK(v.ok);
    CHECK(v.note == "no task objects; identity copy");
    CHECK(scene_to_json(v.scene) == scene_to_json(base));
  }

  CHECK(thrown_errc([&] {
          augment_configuration(
              base, {AugmentLevel::Configuration, {"deadbeef"}, 1, 1});
        }) == Errc::ObjectNotFound);
  CHECK(thrown_errc([&] {
          augment_configuration(base,
                                {AugmentLevel::Configuration, {desk}, 1, 1});
        }) == Errc::InvalidArgument);
  CHECK(thrown_errc([&] {
          augment_configuration(base, {AugmentLevel::Category, {mug}, 1, 1});
        }) == Errc::InvalidArgument);
  CHECK(thrown_errc([&] {
          augment_configuration(base,
                                {AugmentLevel::Configuration, {mug}, 1, 0});
        }) == Errc::InvalidArgument);
}

TEST_CASE("category variants regenerate the asset, preserving category and support",
          "[augment]") {
  const Scene& base = base_scene();
  std::string mug = the(base, "mug");
  std::string night = the(base, "nightstand");
  AugmentationRequest req{AugmentLevel::Category, {mug}, 3, 5};

  std::vector<AugmentVariant> vars = augment_category(base, req);
  REQUIRE(vars.size() == 5);
  const CategorySpec& spec = require_category("mug");
  for (const auto& v : vars) {
    REQUIRE(v.ok);
    const SceneObject& m = v.scene.get(mug);
    CHECK(m.category == "mug");
    CHECK(v.scene.support_of(mug)->parent == night);
    CHECK(m.description != base.get(mug).description);
    CHECK(mesh_content_hash(m.mesh) != mesh_content_hash(base.get(mug).mesh));
    double h = m.mesh.aabb().size().z;
    CHECK(h >= spec.h_min - 1e-9);
    CHECK(h <= spec.h_max + 1e-9);
    check_background_untouched(base, v.scene, {mug});
    check_sim_ready(v.scene);
  }

  std::vector<AugmentVariant> again = augment_category(base, req);
  for (size_t i = 0; i < vars.size(); ++i)
    CHECK(scene_to_json(again[i].scene) == scene_to_json(vars[i].scene));
}

TEST_CASE("category identity on an empty perturbation table and unknown categories",
          "[augment]") {
  const Scene& base = base_scene();
  std::string mug = the(base, "mug");

  AugmentOptions opts;
  opts.perturbations.adjectives.clear();
  AugmentationRequest req{AugmentLevel::Category, {mug}, 3, 1};
  std::vector<AugmentVariant> vars = augment_category(base, req, opts);
  REQUIRE(vars.size() == 1);
  CHECK(vars[0].ok);
  CHECK(vars[0].note.find("unchanged") != std::string::npos);
  CHECK(scene_to_json(vars[0].scene) == scene_to_json(base));

  Scene tampered = base;
  tampered.get(mug).category = "gizmo";
  CHECK(thrown_errc([&] { augment_category(tampered, req); }) ==
        Errc::UnknownCategory);
}

TEST_CASE("layout variants regenerate the background around kept objects",
          "[augment]") {
  const Scene& base = base_scene();
  std::string mug = the(base, "mug");
  std::string night = the(base, "nightstand");
  std::string desk = the(base, "desk");
  std::vector<std::string> keep{desk, night, mug};

  std::vector<AugmentVariant> vars =
      augment_layout(base, office_task(), keep, 5, 3);
  REQUIRE(vars.size() == 3);
  for (const auto& v : vars) {
    REQUIRE(v.ok);
    // Kept assets are reused byte-for-byte under their original ids.
    for (const auto& id : keep) {
      REQUIRE(v.scene.find(id) != nullptr);
      CHECK(v.scene.get(id).category == base.get(id).category);
      CHECK(mesh_content_hash(v.scene.get(id).mesh) ==
            mesh_content_hash(base.get(id).mesh));
    }
    CHECK(v.scene.support_of(mug)->parent == night);
    // The exclusion stage keeps the background from duplicating kept
    // categories.
    int mugs = 0, nights = 0, desks = 0;
    for (const auto& o : v.scene.objects) {
      mugs += o.category == "mug";
      nights += o.category == "nightstand";
      desks += o.category == "desk";
    }
    CHECK(mugs == 1);
    CHECK(nights == 1);
    CHECK(desks == 1);
    CHECK(v.scene.objects.size() >= 10);  // template + critic enrichment
    check_sim_ready(v.scene);
  }
  CHECK(scene_hash(vars[0].scene) != scene_hash(vars[1].scene));
  CHECK(scene_hash(vars[1].scene) != scene_hash(vars[2].scene));
  CHECK(scene_hash(vars[0].scene) != scene_hash(vars[2].scene));

  std::vector<AugmentVariant> again =
      augment_layout(base, office_task(), keep, 5, 3);
  std::vector<AugmentVariant> sharded =
      augment_layout(base, office_task(), keep, 5, 3, {}, 3);
  for (size_t i = 0; i < vars.size(); ++i) {
    CHECK(scene_to_json(again[i].scene) == scene_to_json(vars[i].scene));
    CHECK(scene_to_json(sharded[i].scene) == scene_to_json(vars[i].scene));
  }
}

TEST_CASE("layout keep-all redraws only the floor plan", "[augment]") {
  const Scene& base = base_scene();
  std::vector<std::string> all;
  for (const auto& o : base.objects) all.push_back(o.id);

  std::vector<AugmentVariant> vars =
      augment_layout(base, office_task(), all, 9, 2);
  REQUIRE(vars.size() == 2);
  for (const auto& v : vars) {
    REQUIRE(v.ok);
    REQUIRE(v.scene.objects.size() == base.objects.size());
    for (const auto& o : base.objects) {
      REQUIRE(v.scene.find(o.id) != nullptr);
      CHECK(v.scene.get(o.id).category == o.category);
      CHECK(mesh_content_hash(v.scene.get(o.id).mesh) ==
            mesh_content_hash(o.mesh));
    }
    CHECK(to_json(v.scene.plan) != to_json(base.plan));
    check_sim_ready(v.scene);
  }
}

TEST_CASE("layout relaxes anchors when the original support is not kept",
          "[augment]") {
  const Scene& base = base_scene();
  std::string mug = the(base, "mug");
  std::string night = the(base, "nightstand");

  // The task still demands a nightstand, so the fresh background grows one
  // and the kept mug re-anchors onto it by category.
  std::vector<AugmentVariant> relaxed =
      augment_layout(base, office_task(), {mug}, 4, 1);
  REQUIRE(relaxed.size() == 1);
  REQUIRE(relaxed[0].ok);
  const Scene& rs = relaxed[0].scene;
  CHECK(rs.find(night) == nullptr);
  std::string parent = rs.support_of(mug)->parent;
  REQUIRE(rs.find(parent) != nullptr);
  CHECK(rs.get(parent).category == "nightstand");
  CHECK(parent != night);

  // Without a nightstand anywhere, the mug falls back to the floor.
  TaskSpec bare;
  bare.prompt = "an office";
  bare.room_types = {"office"};
  std::vector<AugmentVariant> floored = augment_layout(base, bare, {mug}, 4, 1);
  REQUIRE(floored.size() == 1);
  REQUIRE(floored[0].ok);
  CHECK(floored[0].scene.support_of(mug)->parent == kFloorParent);
  CHECK(floored[0].note.find("floor") != std::string::npos);
  check_sim_ready(floored[0].scene);
}

TEST_CASE("augment_scene dispatches on the request level", "[augment]") {
  const Scene& base = base_scene();
  std::string mug = the(base, "mug");
  std::string night = the(base, "nightstand");
  std::string desk = the(base, "desk");

  AugmentationRequest req{AugmentLevel::Layout, {night, mug}, 2, 1};
  std::vector<AugmentVariant> vars = augment_scene(base, req);
  REQUIRE(vars.size() == 1);
  REQUIRE(vars[0].ok);
  CHECK(vars[0].scene.support_of(mug)->parent == night);

  // The request path enforces task relevance; the desk is background.
  CHECK(thrown_errc([&] {
          augment_scene(base, {AugmentLevel::Layout, {desk}, 2, 1});
        }) == Errc::InvalidArgument);
}

TEST_CASE("batch directory output writes variants and a manifest", "[augment]") {
  const Scene& base = base_scene();
  std::string mug = the(base, "mug");
  fs::path dir = temp_dir("augment_batch");

  AugmentationRequest req{AugmentLevel::Configuration, {mug}, 7, 3};
  AugmentBatchResult batch = augment_to_dir(base, req, dir);
  REQUIRE(batch.variants.size() == 3);

  const json& man = batch.manifest;
  CHECK(man.at("level") == "configuration");
  CHECK(man.at("parent_scene_hash") == hex64(scene_hash(base)));
  REQUIRE(man.at("variants").size() == 3);
  for (size_t i = 0; i < 3; ++i) {
    const json& e = man.at("variants").at(i);
    REQUIRE(e.at("ok").get<bool>());
    std::string file = e.at("file");
    CHECK(file == "configuration_" + std::to_string(i) + ".scene.json");
    Scene loaded = load_scene(dir / file);
    CHECK(scene_hash(loaded) == scene_hash(batch.variants[i].scene));
  }
  json on_disk = json::parse(read_file(dir / "manifest.json"));
  CHECK(on_disk == man);
  fs::remove_all(dir);
}

TEST_CASE("variant batch driver retries, deduplicates, and shards the same",
          "[augment]") {
  // Variant v succeeds only at attempt v, so the ladder is exercised per
  // variant; variant 5 runs out of attempts.
  auto ladder = [](int v, int a) {
    AugmentVariant var;
    var.seed = 100 + uint64_t(a);
    var.ok = a == v;
    if (!var.ok) var.note = "attempt " + std::to_string(a) + " failed";
    return var;
  };
  auto never_conflicts = [](const AugmentVariant&,
                    const std::vector<const AugmentVariant*>&) { return false; };
  std::vector<AugmentVariant> out =
      detail::run_variant_batch(6, 5, 1, ladder, never_conflicts);
  REQUIRE(out.size() == 6);
  for (int v = 0; v < 5; ++v) {
    CHECK(out[size_t(v)].ok);
    CHECK(out[size_t(v)].seed == 100 + uint64_t(v));
    CHECK(out[size_t(v)].index == v);
  }
  CHECK_FALSE(out[5].ok);
  CHECK(out[5].note == "attempt 4 failed");

  std::vector<AugmentVariant> sharded =
      detail::run_variant_batch(6, 5, 4, ladder, never_conflicts);
  for (size_t i = 0; i < out.size(); ++i) {
    CHECK(sharded[i].ok == out[i].ok);
    CHECK(sharded[i].seed == out[i].seed);
    CHECK(sharded[i].note == out[i].note);
  }

  // Every attempt "succeeds" with the same marker, so later variants must
  // walk forward past the duplicates and eventually give up.
  auto marker = [](int, int a) {
    AugmentVariant var;
    var.seed = uint64_t(a);
    var.ok = true;
    return var;
  };
  auto dup = [](const AugmentVariant& cand,
                const std::vector<const AugmentVariant*>& accepted) {
    for (const AugmentVariant* acc : accepted)
      if (acc->seed == cand.seed) return true;
    return false;
  };
  std::vector<AugmentVariant> dedup =
      detail::run_variant_batch(5, 3, 1, marker, dup);
  CHECK(dedup[0].seed == 0);
  CHECK(dedup[1].seed == 1);
  CHECK(dedup[2].seed == 2);
  CHECK(dedup[0].ok);
  CHECK(dedup[1].ok);
  CHECK(dedup[2].ok);
  CHECK_FALSE(dedup[3].ok);
  CHECK(dedup[3].note == "duplicates an earlier variant");
  CHECK_FALSE(dedup[4].ok);
}
