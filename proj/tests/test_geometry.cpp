#include <catch2/catch_amalgamated.hpp>

#include "sageforge/geometry.hpp"
#include "sageforge/mesh_obj.hpp"

using namespace sageforge;

namespace {

TriMesh unit_cube() {
  // Axis-aligned unit cube with base at z=0, centered in x/y.
  TriMesh m;
  for (int zi : {0, 1})
    for (int yi : {-1, 1})
      for (int xi : {-1, 1})
        m.vertices.push_back({0.5 * xi, 0.5 * yi, double(zi)});
  auto quad = [&](int a, int b, int c, int d) {
    m.triangles.push_back({a, b, c});
    m.triangles.push_back({a, c, d});
  };
  quad(0, 2, 3, 1);  // bottom (z=0), outward -Z
  quad(4, 5, 7, 6);  // top
  quad(0, 1, 5, 4);  // y = -0.5
  quad(3, 2, 6, 7);  // y = +0.5
  quad(1, 3, 7, 5);  // x = +0.5
  quad(2, 0, 4, 6);  // x = -0.5
  return m;
}

// Monte-Carlo overlap oracle: sample points in box a, count how many fall in
// box b after inverse-transforming. Used only to sanity-check the SAT.
bool sampled_overlap(const Obb& a, const Obb& b, Rng& rng, int samples = 4000) {
  auto inside = [](const Obb& box, Vec3 p) {
    Vec3 d = p - box.center;
    Quat inv = box.orientation.conjugate();
    Vec3 local = inv.rotate(d);
    return std::abs(local.x) <= box.half.x && std::abs(local.y) <= box.half.y &&
           std::abs(local.z) <= box.half.z;
  };
  for (int i = 0; i < samples; ++i) {
    Vec3 local{rng.uniform(-a.half.x, a.half.x), rng.uniform(-a.half.y, a.half.y),
               rng.uniform(-a.half.z, a.half.z)};
    Vec3 p = a.center + a.orientation.rotate(local);
    if (inside(b, p)) return true;
  }
  return false;
}

}  // namespace

TEST_CASE("quaternion rotation basics", "[geometry]") {
  Quat q = Quat::from_yaw(kPi / 2);
  Vec3 v = q.rotate({1, 0, 0});
  CHECK(v.x == Catch::Approx(0).margin(1e-12));
  CHECK(v.y == Catch::Approx(1));
  CHECK(quat_angle_deg(Quat::identity(), q) == Catch::Approx(90));
  // Double cover: q and -q are the same rotation.
  Quat nq{-q.w, -q.x, -q.y, -q.z};
  CHECK(quat_angle_deg(q, nq) == Catch::Approx(0).margin(1e-9));
}

TEST_CASE("convex hull and signed distance", "[geometry]") {
  std::vector<Vec2> pts{{0, 0}, {2, 0}, {2, 2}, {0, 2}, {1, 1}, {0.5, 0.5}};
  Polygon2 hull = convex_hull(pts);
  REQUIRE(hull.size() == 4);
  CHECK(polygon_area(hull) == Catch::Approx(4));
  CHECK(signed_dist_inside(hull, {1, 1}) == Catch::Approx(1));
  CHECK(signed_dist_inside(hull, {3, 1}) == Catch::Approx(-1));
  CHECK(point_in_convex(hull, {0.1, 0.1}));
  CHECK_FALSE(point_in_convex(hull, {-0.1, 0.1}));
}

TEST_CASE("convex clip", "[geometry]") {
  Polygon2 a{{0, 0}, {2, 0}, {2, 2}, {0, 2}};
  Polygon2 b{{1, 1}, {3, 1}, {3, 3}, {1, 3}};
  Polygon2 c = convex_clip(a, b);
  CHECK(polygon_area(convex_hull(c)) == Catch::Approx(1));
  Polygon2 far{{5, 5}, {6, 5}, {6, 6}, {5, 6}};
  CHECK(convex_clip(a, far).empty());
}

TEST_CASE("2D SAT overlap depth", "[geometry]") {
  Polygon2 a{{0, 0}, {2, 0}, {2, 2}, {0, 2}};
  Polygon2 b{{1.9, 0}, {3.9, 0}, {3.9, 2}, {1.9, 2}};
  CHECK(convex_overlap_depth(a, b) == Catch::Approx(0.1));
  CHECK(convex_overlap(a, b, 0.05));
  CHECK_FALSE(convex_overlap(a, b, 0.15));
  Polygon2 c{{2.1, 0}, {3, 0}, {3, 1}, {2.1, 1}};
  CHECK_FALSE(convex_overlap(a, c, 0.0));
}

TEST_CASE("obb overlap agrees with sampling oracle", "[geometry]") {
  Rng rng(42);
  int checked = 0;
  for (int i = 0; i < 300; ++i) {
    Obb a{{rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1)},
          {rng.uniform(0.1, 0.8), rng.uniform(0.1, 0.8), rng.uniform(0.1, 0.8)},
          Quat::from_axis_angle({rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1)},
                                rng.uniform(0, kPi))};
    Obb b{{rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1)},
          {rng.uniform(0.1, 0.8), rng.uniform(0.1, 0.8), rng.uniform(0.1, 0.8)},
          Quat::from_axis_angle({rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1)},
                                rng.uniform(0, kPi))};
    bool sat = obb_overlap(a, b, 0);
    bool sampled = sampled_overlap(a, b, rng);
    // The sampler can miss slivers; it must never contradict a SAT "no".
    if (sampled) CHECK(sat);
    if (sat && !sampled) continue;  // sliver overlap, fine
    ++checked;
    CHECK(sat == sampled);
  }
  CHECK(checked > 200);  // most cases are non-marginal
}

TEST_CASE("obb overlap respects penetration tolerance", "[geometry]") {
  Obb a{{0, 0, 0.5}, {0.5, 0.5, 0.5}, Quat::identity()};
  Obb b{{0.998, 0, 0.5}, {0.5, 0.5, 0.5}, Quat::identity()};  // 2 mm deep
  CHECK(obb_overlap(a, b, 0.0));
  CHECK_FALSE(obb_overlap(a, b, 0.005));  // within resting tolerance
  Obb c{{0.99, 0, 0.5}, {0.5, 0.5, 0.5}, Quat::identity()};   // 10 mm deep
  CHECK(obb_overlap(a, c, 0.005));
}

TEST_CASE("mesh volume centroid of cube", "[geometry]") {
  TriMesh cube = unit_cube();
  auto [vol, c] = mesh_volume_centroid(cube);
  CHECK(vol == Catch::Approx(1.0));
  CHECK(c.x == Catch::Approx(0).margin(1e-12));
  CHECK(c.y == Catch::Approx(0).margin(1e-12));
  CHECK(c.z == Catch::Approx(0.5));
  CHECK(check_watertight(cube));
}

TEST_CASE("weld and repair", "[geometry]") {
  TriMesh m = unit_cube();
  // Duplicate every vertex so triangles reference distinct copies.
  TriMesh dup;
  for (auto& t : m.triangles) {
    int base = int(dup.vertices.size());
    for (int k : t) dup.vertices.push_back(m.vertices[size_t(k)]);
    dup.triangles.push_back({base, base + 1, base + 2});
  }
  REQUIRE(dup.vertices.size() == 36);
  repair_mesh(dup);
  CHECK(dup.vertices.size() == 8);
  CHECK(dup.watertight);
}

TEST_CASE("obj round trip is byte stable and bit exact", "[geometry]") {
  Rng rng(7);
  TriMesh m = unit_cube();
  for (Vec3& v : m.vertices)
    v = v + Vec3{rng.uniform(-0.3, 0.3), rng.uniform(-0.3, 0.3), rng.uniform(0, 0.3)};
  std::string text = write_obj(m);
  TriMesh back = read_obj(text);
  REQUIRE(back.vertices.size() == m.vertices.size());
  for (size_t i = 0; i < m.vertices.size(); ++i) {
    CHECK(back.vertices[i].x == m.vertices[i].x);  // bit-exact
    CHECK(back.vertices[i].y == m.vertices[i].y);
    CHECK(back.vertices[i].z == m.vertices[i].z);
  }
  CHECK(write_obj(back) == text);
  CHECK_THROWS_AS(read_obj("v 1 2\n"), Error);
  CHECK_THROWS_AS(read_obj("f 1 2 9\nv 0 0 0\n"), Error);
}

TEST_CASE("rng determinism", "[geometry]") {
  Rng a(123), b(123);
  for (int i = 0; i < 100; ++i) REQUIRE(a.next() == b.next());
  Rng c(124);
  CHECK(a.next() != c.next());
}
