#include <filesystem>

#include <catch2/catch_amalgamated.hpp>

#include "sageforge/assets.hpp"
#include "sageforge/surfaces.hpp"

using namespace sageforge;
namespace fs = std::filesystem;

TEST_CASE("synthesis is deterministic and unit height", "[assets]") {
  AssetRequest req{"a dining table", "dining table", 11};
  Asset a = synthesize_asset(req);
  Asset b = synthesize_asset(req);
  CHECK(write_obj(a.mesh) == write_obj(b.mesh));
  Aabb box = a.mesh.aabb();
  CHECK(box.size().z == Catch::Approx(1.0).epsilon(1e-9));
  CHECK(box.min.z == Catch::Approx(0.0).margin(1e-9));
  // Different seeds change the proportions.
  Asset c = synthesize_asset({"a dining table", "dining table", 12});
  CHECK(write_obj(a.mesh) != write_obj(c.mesh));
}

TEST_CASE("dining table exposes a top surface at unit height", "[assets]") {
  Asset a = synthesize_asset({"a dining table", "dining table", 11});
  CHECK(a.mesh.watertight);
  auto surfaces = extract_support_surfaces(a.mesh);
  REQUIRE_FALSE(surfaces.empty());
  CHECK(surfaces.back().height == Catch::Approx(1.0).margin(1e-6));
}

TEST_CASE("every category synthesizes watertight at several seeds", "[assets]") {
  for (const auto& spec : attribute_table()) {
    for (uint64_t seed : {1ull, 7ull, 23ull}) {
      Asset a = synthesize_asset({"a " + spec.name, spec.name, seed});
      INFO(spec.name << " seed " << seed);
      CHECK(a.mesh.watertight);
      CHECK(a.mesh.aabb().size().z == Catch::Approx(1.0).epsilon(1e-9));
      CHECK_FALSE(a.mesh.triangles.empty());
    }
  }
}

TEST_CASE("unknown category is rejected", "[assets]") {
  CHECK_THROWS_AS(synthesize_asset({"a flux capacitor", "flux capacitor", 1}), Error);
  try {
    synthesize_asset({"x", "flux capacitor", 1});
  } catch (const Error& e) {
    CHECK(e.code() == Errc::UnknownCategory);
  }
}

TEST_CASE("category aliases normalize", "[assets]") {
  CHECK(normalize_category("Bookshelf") == "bookcase");
  CHECK(normalize_category("coke can") == "can");
  Asset a = synthesize_asset({"a coke can", "coke can", 3});
  CHECK(a.category == "can");
}

TEST_CASE("rescale_to_height", "[assets]") {
  Asset a = synthesize_asset({"a crate", "crate", 5});
  TriMesh m = a.mesh;
  rescale_to_height(m, 0.75);
  CHECK(m.aabb().max.z == Catch::Approx(0.75).epsilon(1e-9));
  // Proportions preserved.
  double w0 = a.mesh.aabb().size().x, w1 = m.aabb().size().x;
  CHECK(w1 / w0 == Catch::Approx(0.75).epsilon(1e-9));
  // Identity rescale leaves coordinates bit-exact up to one multiply by 1.0.
  TriMesh id = a.mesh;
  rescale_to_height(id, 1.0);
  CHECK(id.aabb().size().z == Catch::Approx(1.0).epsilon(1e-12));
  CHECK_THROWS_AS(rescale_to_height(m, 0.0), Error);
  CHECK_THROWS_AS(rescale_to_height(m, -1.0), Error);
}

TEST_CASE("attributes follow the table", "[assets]") {
  // crate: density 250, 0.4 m cube -> volume 0.064 m^3 -> 16 kg.
  Obb obb{{0, 0, 0.2}, {0.2, 0.2, 0.2}, Quat::identity()};
  PhysicalAttributes a = estimate_physical_attributes("crate", obb, 9);
  CHECK(a.mass == Catch::Approx(250 * 0.064));
  CHECK(a.height >= 0.30);
  CHECK(a.height <= 0.50);
  CHECK_FALSE(a.static_);
  // Same seed, same height.
  PhysicalAttributes b = estimate_physical_attributes("crate", obb, 9);
  CHECK(a.height == b.height);

  PhysicalAttributes p = estimate_physical_attributes(
      "painting", Obb{{0, 0, 0.5}, {0.3, 0.02, 0.35}, Quat::identity()}, 1);
  CHECK(p.static_);

  Obb degenerate{{0, 0, 0}, {0, 0.1, 0.1}, Quat::identity()};
  CHECK_THROWS_AS(estimate_physical_attributes("crate", degenerate, 1), Error);
  CHECK_THROWS_AS(estimate_physical_attributes("flux capacitor", obb, 1), Error);
}

TEST_CASE("mass is monotone in volume", "[assets]") {
  double last = 0;
  for (double s : {0.1, 0.2, 0.4, 0.8}) {
    Obb obb{{0, 0, s / 2}, {s / 2, s / 2, s / 2}, Quat::identity()};
    double m = estimate_physical_attributes("crate", obb, 1).mass;
    CHECK(m > last);
    last = m;
  }
}

TEST_CASE("surface extraction matches template structure", "[assets]") {
  SECTION("plain box: one top surface") {
    Asset a = synthesize_asset({"a nightstand", "nightstand", 2});
    auto s = extract_support_surfaces(a.mesh);
    REQUIRE(s.size() == 1);
    CHECK(s[0].height == Catch::Approx(1.0).margin(1e-6));
    CHECK(s[0].area > 0.004);
  }
  SECTION("two-shelf bookcase: at least three surfaces ascending") {
    CategorySpec spec = require_category("bookcase");
    spec.p0 = 2;  // two boards
    Rng rng(1);
    TriMesh m = build_template(spec, rng);
    repair_mesh(m);
    normalize_template(m);
    auto s = extract_support_surfaces(m);
    REQUIRE(s.size() >= 3);
    for (size_t i = 1; i < s.size(); ++i) CHECK(s[i].height > s[i - 1].height);
  }
  SECTION("unit sphere: no planar region above the area threshold") {
    CategorySpec spec = require_category("apple");
    spec.p0 = 0;  // no base flattening: a pure sphere
    Rng rng(1);
    TriMesh m = build_template(spec, rng);
    repair_mesh(m);
    normalize_template(m);
    CHECK(extract_support_surfaces(m).empty());
  }
  SECTION("bowl: inner floor below the rim") {
    Asset a = synthesize_asset({"a bowl", "bowl", 4});
    TriMesh m = a.mesh;
    rescale_to_height(m, 0.09);  // real-size bowl
    auto s = extract_support_surfaces(m);
    REQUIRE(s.size() >= 2);
    CHECK(s.front().height < s.back().height);
    // The rim ring must not claim material over the cavity.
    CHECK_FALSE(s.back().covers({0, 0}));
    CHECK(s.front().covers({0, 0}));
  }
}

TEST_CASE("catalog assets load by variant", "[assets]") {
  fs::path dir = fs::temp_directory_path() / "sageforge_catalog";
  fs::remove_all(dir);
  fs::create_directories(dir / "crate");
  Asset tpl = synthesize_asset({"a crate", "crate", 1});
  write_file_atomic(dir / "crate" / "a.obj", write_obj(tpl.mesh));
  write_file_atomic(dir / "crate" / "b.obj", write_obj(tpl.mesh));
  Asset a = load_catalog_asset(dir, {"a crate", "crate", 1});
  CHECK(a.mesh.aabb().size().z == Catch::Approx(1.0).epsilon(1e-9));
  CHECK_THROWS_AS(load_catalog_asset(dir, {"a mug", "mug", 1}), Error);
  // provide_asset falls back to templates for missing categories.
  AssetProviderOptions opt{dir.string()};
  Asset b = provide_asset({"a mug", "mug", 1}, opt);
  CHECK(b.category == "mug");
}

TEST_CASE("description perturbation is seeded and category preserving", "[assets]") {
  PerturbResult r1 = perturb_description("a mug", 1);
  PerturbResult r2 = perturb_description("a mug", 1);
  PerturbResult r3 = perturb_description("a mug", 2);
  CHECK(r1.text == r2.text);
  CHECK(r1.changed);
  CHECK(r1.text != "a mug");
  CHECK(r1.text.rfind("a ", 0) == 0);
  // Different seeds usually differ; at minimum they stay valid.
  CHECK(r3.changed);

  PerturbResult empty = perturb_description("a mug", 1, PerturbationTable{});
  CHECK_FALSE(empty.changed);
  CHECK(empty.text == "a mug");
  CHECK_FALSE(empty.note.empty());
}
