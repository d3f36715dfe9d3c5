#include <filesystem>

#include <catch2/catch_amalgamated.hpp>

#include "sageforge/scene_io.hpp"
#include "sageforge/validate.hpp"
#include "test_util.hpp"

using namespace sageforge;
using namespace sageforge::testutil;
namespace fs = std::filesystem;

namespace {

fs::path temp_dir(const std::string& name) {
  fs::path p = fs::temp_directory_path() / ("sageforge_test_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

}  // namespace

TEST_CASE("world obb of unit cube", "[scene]") {
  SceneObject o = make_object("00000abc", "box", box_mesh(1, 1, 1), Pose::at(0, 0, 0));
  Obb b = world_obb(o);
  CHECK(b.center.x == Catch::Approx(0).margin(1e-12));
  CHECK(b.center.y == Catch::Approx(0).margin(1e-12));
  CHECK(b.center.z == Catch::Approx(0.5));
  CHECK(b.half.x == Catch::Approx(0.5));
  CHECK(b.half.y == Catch::Approx(0.5));
  CHECK(b.half.z == Catch::Approx(0.5));

  // Yaw by 45 degrees: the footprint's x halfwidth grows to sqrt(2)/2.
  o.pose = Pose::at(0, 0, 0, kPi / 4);
  Polygon2 fp = world_obb(o).footprint();
  double maxx = -1e30;
  for (Vec2 p : fp) maxx = std::max(maxx, p.x);
  CHECK(maxx == Catch::Approx(std::sqrt(2.0) / 2));

  o.mesh = TriMesh{};
  CHECK_THROWS_AS(world_obb(o), Error);
}

TEST_CASE("world obb containment property", "[scene]") {
  Rng rng(11);
  for (int i = 0; i < 50; ++i) {
    SceneObject o = make_object(
        "00000abc", "box",
        box_mesh(rng.uniform(0.1, 2), rng.uniform(0.1, 2), rng.uniform(0.1, 2)),
        Pose{{rng.uniform(-2, 2), rng.uniform(-2, 2), rng.uniform(0, 1)},
             Quat::from_axis_angle({rng.uniform(-1, 1), rng.uniform(-1, 1), 1},
                                   rng.uniform(0, kPi))});
    Obb b = world_obb(o);
    Quat inv = b.orientation.conjugate();
    for (const Vec3& v : o.mesh.vertices) {
      Vec3 local = inv.rotate(o.pose.apply(v) - b.center);
      CHECK(std::abs(local.x) <= b.half.x + 1e-9);
      CHECK(std::abs(local.y) <= b.half.y + 1e-9);
      CHECK(std::abs(local.z) <= b.half.z + 1e-9);
    }
  }
}

TEST_CASE("validate_scene flags broken invariants", "[scene]") {
  Scene s = small_scene();
  CHECK(validate_scene(s).ok());

  SECTION("missing support") {
    std::erase_if(s.supports, [](const SupportRelation& r) { return r.child == "00000bbb"; });
    auto rep = validate_scene(s);
    REQUIRE_FALSE(rep.ok());
    CHECK(rep.violations[0].code == "MissingSupport");
    CHECK(rep.violations[0].subject == "00000bbb");
  }

  SECTION("wall object must be static") {
    SceneObject painting = make_object("00000ccc", "painting", box_mesh(0.6, 0.04, 0.8),
                                       Pose::at(2.0, 0.02, 1.4), PlacementClass::Wall);
    painting.attrs.static_ = false;
    s.insert_object(painting, {"", kWallParent, -1});
    auto rep = validate_scene(s);
    bool found = false;
    for (auto& v : rep.violations) found |= v.code == "WallNotStatic";
    CHECK(found);
  }

  SECTION("support cycle") {
    std::erase_if(s.supports, [](const SupportRelation& r) { return r.child == "00000aaa"; });
    s.supports.push_back({"00000aaa", "00000bbb", 0});
    std::sort(s.supports.begin(), s.supports.end(),
              [](auto& a, auto& b) { return a.child < b.child; });
    auto rep = validate_scene(s);
    bool found = false;
    for (auto& v : rep.violations) found |= v.code == "SupportCycle";
    CHECK(found);
  }

  SECTION("dangling parent") {
    std::erase_if(s.supports, [](const SupportRelation& r) { return r.child == "00000bbb"; });
    s.supports.push_back({"00000bbb", "deadbeef", 0});
    auto rep = validate_scene(s);
    bool found = false;
    for (auto& v : rep.violations) found |= v.code == "SupportParentMissing";
    CHECK(found);
  }
}

TEST_CASE("scene json round trip is byte stable and bit exact", "[scene]") {
  fs::path dir = temp_dir("roundtrip");
  Scene s = small_scene();
  // Give poses awkward float values to exercise exact round-tripping.
  s.get("00000aaa").pose.position = {0.1 + 0.2, 1.0 / 3.0, 0};
  s.get("00000aaa").pose.orientation = Quat::from_yaw(0.12345678901234567);
  s.task.prompt = "a bedroom with a crate";
  s.task.room_types = {"bedroom"};
  s.task.required_objects.push_back({"a crate", "crate", "middle"});

  fs::path file = dir / "scene.json";
  save_scene(s, file);
  Scene loaded = load_scene(file);
  REQUIRE(loaded.objects.size() == s.objects.size());
  for (size_t i = 0; i < s.objects.size(); ++i) {
    const auto& a = s.objects[i];
    const auto& b = loaded.objects[i];
    CHECK(a.id == b.id);
    CHECK(a.pose.position.x == b.pose.position.x);  // bit-exact floats
    CHECK(a.pose.position.y == b.pose.position.y);
    CHECK(a.pose.orientation.w == b.pose.orientation.w);
    CHECK(a.pose.orientation.z == b.pose.orientation.z);
    REQUIRE(a.mesh.vertices.size() == b.mesh.vertices.size());
    for (size_t k = 0; k < a.mesh.vertices.size(); ++k)
      CHECK(a.mesh.vertices[k].z == b.mesh.vertices[k].z);
  }
  CHECK(loaded.seed == s.seed);
  CHECK(loaded.task.required_objects.size() == 1);

  // Saving the loaded scene again must produce identical bytes.
  fs::path dir2 = dir / "again";
  fs::create_directories(dir2);
  fs::path file2 = dir2 / "scene.json";
  save_scene(loaded, file2);
  CHECK(read_file(file) == read_file(file2));
  CHECK(scene_hash(s) == scene_hash(loaded));
}

TEST_CASE("truncated scene file reports parse error with byte offset", "[scene]") {
  fs::path dir = temp_dir("truncated");
  Scene s = small_scene();
  fs::path file = dir / "scene.json";
  save_scene(s, file);
  std::string text = read_file(file);
  write_file_atomic(file, text.substr(0, text.size() / 2));
  try {
    parse_scene_string(read_file(file));
    FAIL("expected parse error");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::ParseError);
    CHECK(std::string(e.what()).find("byte") != std::string::npos);
  }
}

TEST_CASE("many object scene keeps ids and count through round trip", "[scene]") {
  fs::path dir = temp_dir("manyobjects");
  Scene s;
  s.seed = 99;
  s.plan.rooms.push_back(square_room("room0", 10.0));
  for (int i = 0; i < 48; ++i) {
    std::string id = s.new_id();
    double x = 0.5 + (i % 8), y = 0.5 + (i / 8);
    s.insert_object(make_object(id, "crate", box_mesh(0.4, 0.4, 0.4), Pose::at(x, y, 0)),
                    {"", kFloorParent, -1});
  }
  REQUIRE(s.objects.size() == 48);
  CHECK(validate_scene(s).ok());
  fs::path file = dir / "scene.json";
  save_scene(s, file);
  Scene loaded = load_scene(file);
  CHECK(loaded.objects.size() == 48);
  for (size_t i = 0; i < 48; ++i) CHECK(loaded.objects[i].id == s.objects[i].id);
}

TEST_CASE("ids are unique hex and deterministic per seed", "[scene]") {
  Scene a, b;
  a.seed = b.seed = 5;
  std::vector<std::string> ia, ib;
  for (int i = 0; i < 200; ++i) ia.push_back(a.new_id());
  for (int i = 0; i < 200; ++i) ib.push_back(b.new_id());
  CHECK(ia == ib);
  std::set<std::string> uniq(ia.begin(), ia.end());
  CHECK(uniq.size() == 200);
  for (const auto& id : ia) {
    CHECK(id.size() == 8);
    CHECK(id.find_first_not_of("0123456789abcdef") == std::string::npos);
  }
}
