#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <set>

#include "sageforge/assets.hpp"
#include "sageforge/placement.hpp"
#include "sageforge/validate.hpp"
#include "test_util.hpp"

using namespace sageforge;
using namespace sageforge::testutil;
using Catch::Approx;

namespace {

Errc code_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected a sageforge::Error");
  return Errc::InvalidArgument;
}

CandidatePlacement cand_at(double x, double y, double yaw = 0,
                           const std::string& parent = kFloorParent) {
  CandidatePlacement c;
  c.object_id = "self";
  c.pose.position = {x, y, 0};
  c.pose.orientation = Quat::from_yaw(yaw);
  c.support = {"self", parent, parent == kFloorParent ? -1 : 0};
  return c;
}

}  // namespace

TEST_CASE("constraint grammar parses and round-trips", "[placement]") {
  SECTION("full grammar") {
    auto cs = parse_constraints("near(table, 1.5), facing(table), edge, on(desk)");
    REQUIRE(cs.size() == 4);
    CHECK(cs[0].kind == ConstraintKind::NearObject);
    CHECK(cs[0].anchor == "table");
    CHECK(cs[0].param == Approx(1.5));
    CHECK(cs[1].kind == ConstraintKind::Facing);
    CHECK(cs[1].param == Approx(kPi / 12));  // default 15 degree tolerance
    CHECK(cs[2].kind == ConstraintKind::GlobalEdge);
    CHECK(cs[3].kind == ConstraintKind::OnTopOf);
    CHECK(cs[3].anchor == "desk");
  }
  SECTION("angles are given in degrees") {
    auto cs = parse_constraints("aligned(desk, 10), facing(sofa, 30)");
    REQUIRE(cs.size() == 2);
    CHECK(cs[0].param == Approx(deg2rad(10)));
    CHECK(cs[1].param == Approx(deg2rad(30)));
  }
  SECTION("far, middle, corner") {
    auto cs = parse_constraints("far(sofa, 2), middle, corner");
    REQUIRE(cs.size() == 3);
    CHECK(cs[0].kind == ConstraintKind::FarFrom);
    CHECK(cs[0].param == Approx(2.0));
    CHECK(cs[1].kind == ConstraintKind::GlobalMiddle);
    CHECK(cs[2].kind == ConstraintKind::GlobalCorner);
  }
  SECTION("empty text parses to no constraints") {
    CHECK(parse_constraints("").empty());
    CHECK(parse_constraints("   ").empty());
  }
  SECTION("print then parse is the identity") {
    auto cs = parse_constraints("near(table, 1.5), aligned(desk, 10), on(bed), corner");
    auto back = parse_constraints(constraints_to_string(cs));
    REQUIRE(back.size() == cs.size());
    for (size_t i = 0; i < cs.size(); ++i) {
      CHECK(back[i].kind == cs[i].kind);
      CHECK(back[i].anchor == cs[i].anchor);
      CHECK(back[i].param == Approx(cs[i].param).margin(1e-9));
    }
  }
  SECTION("malformed inputs raise ParseError") {
    for (const char* bad : {"near(table)", "blah(x)", "near(table, -1)",
                            "near(table, abc)", "facing()", "near(table, 1",
                            "edge(0.5)", "on()", "near(, 1)"}) {
      INFO(bad);
      CHECK(code_of([&] { parse_constraints(bad); }) == Errc::ParseError);
    }
  }
}

TEST_CASE("descriptions classify into floor, wall and on-top", "[placement]") {
  CHECK(classify_placement("a framed painting hung above the sofa") == PlacementClass::Wall);
  CHECK(classify_placement("a wall clock") == PlacementClass::Wall);
  CHECK(classify_placement("a round mirror") == PlacementClass::Wall);
  CHECK(classify_placement("a queen bed") == PlacementClass::Floor);
  CHECK(classify_placement("a mug", "on(nightstand)") == PlacementClass::OnTop);
  CHECK(classify_placement("a mug") == PlacementClass::OnTop);
  CHECK(classify_placement("a book atop the dresser") == PlacementClass::OnTop);
  CHECK(classify_placement("a floor lamp") == PlacementClass::Floor);
  CHECK(classify_placement("a desk lamp") == PlacementClass::OnTop);
  CHECK(classify_placement("a potted plant") == PlacementClass::Floor);
  CHECK(classify_placement("a widget") == PlacementClass::Floor);  // default
  ClassifyResult r = classify_placement_explain("a floor lamp", "");
  CHECK(r.rule == "floor lamp");
}

TEST_CASE("anchor references resolve to the nearest match", "[placement]") {
  Scene s;
  s.plan.rooms.push_back(square_room("r0", 6.0));
  s.insert_object(make_object("n1", "nightstand", box_mesh(0.4, 0.4, 0.55), Pose::at(1, 1, 0)),
                  {"", kFloorParent, -1});
  SceneObject n2 = make_object("n2", "nightstand", box_mesh(0.4, 0.4, 0.55), Pose::at(5, 5, 0));
  n2.description = "a walnut nightstand";
  s.insert_object(n2, {"", kFloorParent, -1});

  CHECK(resolve_anchor(s, "nightstand", {0.8, 1.0}, "")->id == "n1");
  CHECK(resolve_anchor(s, "nightstand", {4.5, 4.5}, "")->id == "n2");
  CHECK(resolve_anchor(s, "n2", {0, 0}, "")->id == "n2");       // exact id wins
  CHECK(resolve_anchor(s, "walnut", {0, 0}, "")->id == "n2");   // description substring
  CHECK(resolve_anchor(s, "nightstand", {0.8, 1.0}, "n1")->id == "n2");  // self excluded
  CHECK(resolve_anchor(s, "wardrobe", {0, 0}, "") == nullptr);
}

TEST_CASE("constraint satisfactions follow the documented ramps", "[placement]") {
  Scene s;
  s.plan.rooms.push_back(square_room("r0", 4.0));
  s.insert_object(make_object("tbl", "table", box_mesh(1, 1, 0.75), Pose::at(2, 2, 0)),
                  {"", kFloorParent, -1});

  auto sat = [&](const char* text, const CandidatePlacement& c) {
    auto cs = parse_constraints(text);
    REQUIRE(cs.size() == 1);
    return constraint_satisfaction(cs[0], s, c, "self");
  };

  SECTION("near: 1 inside the radius, linear to 0 at twice the radius") {
    CHECK(sat("near(table, 1)", cand_at(2.5, 2)) == 1.0);
    CHECK(sat("near(table, 1)", cand_at(1.0, 2)) == 1.0);   // d = 1.0 boundary
    CHECK(sat("near(table, 1)", cand_at(0.5, 2)) == Approx(0.5));
    CHECK(sat("near(table, 1)", cand_at(0.0, 2)) == 0.0);   // d = 2.0
  }
  SECTION("far mirrors near") {
    CHECK(sat("far(table, 2)", cand_at(1.5, 2)) == 0.0);    // d = 0.5 < r/2
    CHECK(sat("far(table, 2)", cand_at(0.5, 2)) == Approx(0.5));
    CHECK(sat("far(table, 2)", cand_at(0.0, 2)) == 1.0);    // d = 2.0
  }
  SECTION("facing ramps on angular deviation") {
    CHECK(sat("facing(table)", cand_at(1, 2, 0)) == 1.0);             // dead on
    CHECK(sat("facing(table)", cand_at(1, 2, deg2rad(15))) == 1.0);   // at tol
    CHECK(sat("facing(table)", cand_at(1, 2, deg2rad(22.5))) == Approx(0.5));
    CHECK(sat("facing(table)", cand_at(1, 2, deg2rad(30))) == 0.0);
  }
  SECTION("aligned is modulo 90 degrees") {
    CHECK(sat("aligned(table, 10)", cand_at(1, 1, deg2rad(90))) == 1.0);
    CHECK(sat("aligned(table, 10)", cand_at(1, 1, deg2rad(180))) == 1.0);
    CHECK(sat("aligned(table, 10)", cand_at(1, 1, deg2rad(45))) == 0.0);
    CHECK(sat("aligned(table, 10)", cand_at(1, 1, deg2rad(15))) == Approx(0.5));
  }
  SECTION("edge, middle, corner scale by room geometry") {
    CHECK(sat("edge", cand_at(0.55, 2)) == Approx(1 - 0.55 / 2.0));
    CHECK(sat("middle", cand_at(2, 2)) == 1.0);
    CHECK(sat("middle", cand_at(1, 2)) == Approx(0.5));
    CHECK(sat("corner", cand_at(0, 0)) == 1.0);
    double diag = std::sqrt(8.0);
    CHECK(sat("corner", cand_at(0.3, 0.3)) ==
          Approx(1 - std::sqrt(0.18) / diag));
  }
  SECTION("on(x): 1 when supported by a matching parent") {
    CHECK(sat("on(table)", cand_at(2, 2, 0, "tbl")) == 1.0);
    CHECK(sat("on(table)", cand_at(2, 2)) == 0.0);  // floor-supported
  }
  SECTION("missing anchors raise DanglingAnchor") {
    auto cs = parse_constraints("near(ghost, 1)");
    CHECK(code_of([&] { constraint_satisfaction(cs[0], s, cand_at(1, 1), "self"); }) ==
          Errc::DanglingAnchor);
  }
  SECTION("score is the weighted sum; empty set scores zero") {
    auto cs = parse_constraints("near(table, 1), middle");
    cs[0].weight = 2.0;
    CandidatePlacement c = cand_at(1.0, 2);
    double want = 2.0 * 1.0 + (1 - 1.0 / 2.0);
    CHECK(score_candidate(c, cs, s) == Approx(want));
    CHECK(score_candidate(c, {}, s) == 0.0);
  }
}

TEST_CASE("floor sampling fills an empty room deterministically", "[placement]") {
  Scene s;
  s.plan.rooms.push_back(square_room("r0", 4.0));
  SceneObject table = make_object("t1", "table", box_mesh(1, 1, 0.75), Pose{});

  auto cands = sample_candidates(s, table, PlacementClass::Floor, {});
  REQUIRE(cands.size() == 50);  // cap
  for (const auto& c : cands) {
    CHECK(c.pose.position.z == 0.0);
    CHECK(c.collision_free);
    CHECK(c.support.parent == kFloorParent);
    CHECK(c.support.child == "t1");
    // Entire footprint inside the room polygon.
    SceneObject probe = table;
    probe.pose = c.pose;
    for (const Vec2& p : world_obb(probe).footprint())
      CHECK(signed_dist_inside(s.plan.rooms[0].polygon, p) >= -1e-9);
  }
  // With no constraints every score is 0 and the tie-breaks order by distance
  // to the room center.
  for (size_t i = 1; i < cands.size(); ++i)
    CHECK(cands[i - 1].dist_center <= cands[i].dist_center + 1e-12);

  auto again = sample_candidates(s, table, PlacementClass::Floor, {});
  REQUIRE(again.size() == cands.size());
  for (size_t i = 0; i < cands.size(); ++i) {
    CHECK(again[i].pose.position.x == cands[i].pose.position.x);
    CHECK(again[i].pose.position.y == cands[i].pose.position.y);
    CHECK(again[i].grid_index == cands[i].grid_index);
  }
}

TEST_CASE("a packed room has no free space", "[placement]") {
  Scene s;
  s.plan.rooms.push_back(square_room("r0", 4.0));
  s.insert_object(make_object("big", "wardrobe", box_mesh(3.8, 3.8, 0.5), Pose::at(2, 2, 0)),
                  {"", kFloorParent, -1});
  SceneObject table = make_object("t1", "table", box_mesh(1, 1, 0.75), Pose{});
  CHECK(code_of([&] { sample_candidates(s, table, PlacementClass::Floor, {}); }) ==
        Errc::NoFreeSpace);
}

TEST_CASE("collision flags are honest and the exact gate filters them", "[placement]") {
  Scene s;
  s.plan.rooms.push_back(square_room("r0", 4.0));
  // Obstacle placed so grid cells at x = 1.45 produce a 1 cm footprint
  // overlap: past the 5 mm OBB tolerance but under the 15 mm broad margin.
  s.insert_object(make_object("obs", "crate", box_mesh(1, 1, 0.5), Pose::at(2.44, 2, 0)),
                  {"", kFloorParent, -1});
  SceneObject box = make_object("t1", "box", box_mesh(1, 1, 0.75), Pose{});
  Obb obs_box = world_obb(s.get("obs"));

  auto verify_flags = [&](const std::vector<CandidatePlacement>& cands) {
    for (const auto& c : cands) {
      SceneObject probe = box;
      probe.pose = c.pose;
      bool clear = !obb_overlap(world_obb(probe), obs_box, kCollisionTol);
      CHECK(c.collision_free == clear);
    }
  };

  PlacementOptions loose;
  loose.exact_gate = false;
  auto with_flags = sample_candidates(s, box, PlacementClass::Floor, {}, loose);
  verify_flags(with_flags);
  CHECK(std::any_of(with_flags.begin(), with_flags.end(),
                    [](const CandidatePlacement& c) { return !c.collision_free; }));

  auto gated = sample_candidates(s, box, PlacementClass::Floor, {});
  verify_flags(gated);
  CHECK(std::all_of(gated.begin(), gated.end(),
                    [](const CandidatePlacement& c) { return c.collision_free; }));
}

TEST_CASE("wall sampling hugs the walls at category height", "[placement]") {
  Scene s;
  s.plan.rooms.push_back(square_room("r0", 4.0));
  Asset art = synthesize_asset({"a framed painting", "painting", 3});
  TriMesh m = art.mesh;
  rescale_to_height(m, 0.5);
  SceneObject painting = make_object("art", "painting", m, Pose{}, PlacementClass::Wall);

  auto cands = sample_candidates(s, painting, PlacementClass::Wall, {});
  REQUIRE(!cands.empty());
  const CategorySpec& spec = require_category("painting");
  double zc = (spec.wall_lo + spec.wall_hi) / 2;
  for (const auto& c : cands) {
    CHECK(c.support.parent == kWallParent);
    // Mount-center height inside the category band.
    SceneObject probe = painting;
    probe.pose = c.pose;
    Obb box = world_obb(probe);
    CHECK((box.bottom() + box.top()) / 2 == Approx(zc).margin(1e-6));
    // Flush against one of the four walls: nearest wall distance is the
    // painting's half depth plus the 5 mm gap.
    Vec2 p = c.pose.position.xy();
    double wall_d = std::min({p.x, p.y, 4 - p.x, 4 - p.y});
    double depth = box.half.y * 2;
    CHECK(wall_d == Approx(depth / 2 + 0.005).margin(1e-6));
    // Faces into the room: local +Y rotated by the pose points inward.
    Vec3 fwd = c.pose.orientation.rotate({0, 1, 0});
    Vec2 inward = (Vec2{2, 2} - p).normalized();
    CHECK(fwd.x * inward.x + fwd.y * inward.y > 0.7);
  }
}

TEST_CASE("on-top sampling spreads across matching parents and shelves", "[placement]") {
  Scene s;
  s.plan.rooms.push_back(square_room("r0", 4.0));
  CategorySpec spec = require_category("bookcase");
  spec.p0 = 2;  // two boards
  Rng rng(1);
  TriMesh shelf = build_template(spec, rng);
  repair_mesh(shelf);
  normalize_template(shelf);
  rescale_to_height(shelf, 1.6);
  s.insert_object(make_object("bk", "bookcase", shelf, Pose::at(1, 1, 0)),
                  {"", kFloorParent, -1});

  SceneObject mug = make_object("mug", "mug", box_mesh(0.08, 0.08, 0.1), Pose{},
                                PlacementClass::OnTop);
  auto cs = parse_constraints("on(bookcase)");
  auto cands = sample_candidates(s, mug, PlacementClass::OnTop, cs);
  REQUIRE(!cands.empty());
  std::set<int> surfaces;
  for (const auto& c : cands) {
    CHECK(c.support.parent == "bk");
    CHECK(c.score == 1.0);  // on(bookcase) satisfied
    surfaces.insert(c.support.surface);
  }
  CHECK(surfaces.size() >= 2);  // boards and top are all usable

  SECTION("a dangling on(...) anchor throws") {
    auto ghost = parse_constraints("on(spaceship)");
    CHECK(code_of([&] { sample_candidates(s, mug, PlacementClass::OnTop, ghost); }) ==
          Errc::DanglingAnchor);
    CHECK(code_of([&] { sample_candidates(s, mug, PlacementClass::OnTop, {}); }) ==
          Errc::DanglingAnchor);
  }
}

TEST_CASE("accepted floor placement matches an exhaustive grid oracle", "[placement]") {
  Scene s;
  s.plan.rooms.push_back(square_room("r0", 4.0));
  s.insert_object(make_object("tbl", "table", box_mesh(1, 1, 0.75), Pose::at(2.8, 2, 0)),
                  {"", kFloorParent, -1});

  PlacementRequest req;
  req.object = make_object("ch", "chair", box_mesh(0.45, 0.45, 0.9), Pose{});
  req.constraints = parse_constraints("near(tbl, 1), facing(tbl)");
  PlacementPlan plan = plan_placements(s, {req});
  REQUIRE(plan.placed.size() == 1);
  REQUIRE(plan.unplaced.empty());
  const CandidatePlacement& got = plan.placed[0].second;

  // Independent oracle: rescore every grid cell and yaw with the documented
  // formulas, keeping only candidates whose footprint fits the room and whose
  // OBB clears the table by the 5 mm tolerance.
  Obb table_box = world_obb(s.get("tbl"));
  double best = -1;
  for (double y = 0.05; y < 4.0; y += 0.1)
    for (double x = 0.05; x < 4.0; x += 0.1)
      for (int k = 0; k < 8; ++k) {
        double yaw = 2 * kPi * k / 8;
        SceneObject probe = req.object;
        probe.pose.position = {x, y, 0};
        probe.pose.orientation = Quat::from_yaw(yaw);
        Obb box = world_obb(probe);
        bool inside = true;
        for (const Vec2& p : box.footprint())
          if (signed_dist_inside(s.plan.rooms[0].polygon, p) < 0) inside = false;
        if (!inside) continue;
        if (obb_overlap(box, table_box, kCollisionTol)) continue;
        double d = (Vec2{2.8, 2} - Vec2{x, y}).norm();
        double near_s = d <= 1 ? 1.0 : d >= 2 ? 0.0 : 2 - d;
        double dev = std::abs(wrap_angle(std::atan2(2 - y, 2.8 - x) - yaw));
        double lo = kPi / 12, hi = kPi / 6;
        double face_s = dev <= lo ? 1.0 : dev >= hi ? 0.0 : (hi - dev) / (hi - lo);
        best = std::max(best, near_s + face_s);
      }
  CHECK(got.score == Approx(best).margin(1e-9));
  // The winner is close to the table and facing it.
  double d = (Vec2{2.8, 2} - got.pose.position.xy()).norm();
  CHECK(d <= 2.0);
  double dev = std::abs(wrap_angle(
      std::atan2(2 - got.pose.position.y, 2.8 - got.pose.position.x) -
      got.pose.orientation.yaw()));
  CHECK(dev <= kPi / 6);
}

TEST_CASE("plans place floor objects before their on-top dependents", "[placement]") {
  Scene s;
  s.plan.rooms.push_back(square_room("r0", 4.0));

  Asset ns = synthesize_asset({"a nightstand", "nightstand", 2});
  TriMesh nm = ns.mesh;
  rescale_to_height(nm, 0.55);

  PlacementRequest mug_req;
  mug_req.object = make_object("00000b0b", "mug", box_mesh(0.08, 0.08, 0.1), Pose{},
                               PlacementClass::OnTop);
  mug_req.constraints = parse_constraints("on(nightstand)");
  PlacementRequest ns_req;
  ns_req.object = make_object("00000a0a", "nightstand", nm, Pose{});
  ns_req.constraints = parse_constraints("edge");

  // On-top request listed first; the plan must still place the nightstand first.
  PlacementPlan plan = plan_placements(s, {mug_req, ns_req});
  REQUIRE(plan.placed.size() == 2);
  CHECK(plan.unplaced.empty());
  CHECK(plan.placed[0].first == "00000a0a");
  CHECK(plan.placed[1].first == "00000b0b");
  CHECK(plan.placed[1].second.support.parent == "00000a0a");

  apply_plan(s, {mug_req, ns_req}, plan);
  REQUIRE(s.objects.size() == 2);
  CHECK(s.support_of("00000b0b")->parent == "00000a0a");
  // The mug rests on the nightstand top.
  CHECK(s.get("00000b0b").pose.position.z == Approx(0.55).margin(0.02));
  CHECK(validate_scene(s).ok());
}

TEST_CASE("impossible requests surface as unplaced failures", "[placement]") {
  Scene s;
  s.plan.rooms.push_back(square_room("r0", 4.0));
  PlacementRequest w1, w2;
  w1.object = make_object("w1", "wardrobe", box_mesh(3, 3, 2), Pose{});
  w2.object = make_object("w2", "wardrobe", box_mesh(3, 3, 2), Pose{});

  PlacementPlan plan = plan_placements(s, {w1, w2});
  REQUIRE(plan.placed.size() == 1);
  CHECK(plan.placed[0].first == "w1");
  REQUIRE(plan.unplaced.size() == 1);
  CHECK(plan.unplaced[0].object_id == "w2");
  CHECK(plan.unplaced[0].reason == Errc::NoFreeSpace);
}

TEST_CASE("plans are deterministic", "[placement]") {
  Scene s;
  s.plan.rooms.push_back(square_room("r0", 4.0));
  s.insert_object(make_object("tbl", "table", box_mesh(1, 1, 0.75), Pose::at(2.8, 2, 0)),
                  {"", kFloorParent, -1});

  auto build_requests = [] {
    PlacementRequest chair, lamp;
    chair.object = make_object("ch", "chair", box_mesh(0.45, 0.45, 0.9), Pose{});
    chair.constraints = parse_constraints("near(tbl, 1), facing(tbl)");
    lamp.object = make_object("lp", "floor lamp", box_mesh(0.3, 0.3, 1.5), Pose{});
    lamp.constraints = parse_constraints("corner");
    return std::vector<PlacementRequest>{chair, lamp};
  };

  PlacementPlan a = plan_placements(s, build_requests());
  PlacementPlan b = plan_placements(s, build_requests());
  REQUIRE(a.placed.size() == 2);
  REQUIRE(a.placed.size() == b.placed.size());
  for (size_t i = 0; i < a.placed.size(); ++i) {
    CHECK(a.placed[i].first == b.placed[i].first);
    CHECK(a.placed[i].second.pose.position.x == b.placed[i].second.pose.position.x);
    CHECK(a.placed[i].second.pose.position.y == b.placed[i].second.pose.position.y);
    CHECK(a.placed[i].second.pose.position.z == b.placed[i].second.pose.position.z);
    CHECK(a.placed[i].second.score == b.placed[i].second.score);
  }
}

TEST_CASE("styled candidates stand on their rotated base", "[placement]") {
  Scene s;
  s.plan.rooms.push_back(square_room("r0", 4.0));
  SceneObject pillow = make_object("pil", "pillow", box_mesh(0.5, 0.4, 0.12), Pose{},
                                   PlacementClass::OnTop);
  Quat lean = Quat::from_axis_angle({1, 0, 0}, deg2rad(70));

  PlacementOptions opts;
  opts.use_physics = false;  // inspect the raw styled pose
  auto cands = sample_candidates(s, pillow, PlacementClass::Floor, {}, opts, lean);
  REQUIRE(!cands.empty());
  for (const auto& c : cands) {
    TriMesh world = transform_mesh(pillow.mesh, c.pose);
    Aabb box = world.aabb();
    CHECK(box.min.z == Approx(0.0).margin(1e-9));   // base on the floor
    CHECK(box.size().z > 0.3);                      // leaning, not flat
  }
}

TEST_CASE("place_object inserts the winning candidate", "[placement]") {
  Scene s;
  s.plan.rooms.push_back(square_room("r0", 4.0));
  PlacementRequest req;
  req.object = make_object("crate", "crate", box_mesh(0.5, 0.5, 0.5), Pose{});
  req.constraints = parse_constraints("middle");

  PlaceOutcome out = place_object(s, req);
  REQUIRE(out.placed);
  CHECK(s.objects.size() == 1);
  CHECK(s.find("crate") != nullptr);
  // "middle" pulls it to the room center cell.
  CHECK((out.candidate.pose.position.xy() - Vec2{2, 2}).norm() < 0.1);

  PlacementRequest ghost;
  ghost.object = make_object("mug", "mug", box_mesh(0.08, 0.08, 0.1), Pose{},
                             PlacementClass::OnTop);
  ghost.constraints = parse_constraints("on(spaceship)");
  PlaceOutcome miss = place_object(s, ghost);
  CHECK_FALSE(miss.placed);
  CHECK(miss.reason == Errc::DanglingAnchor);
  CHECK(s.objects.size() == 1);
}
