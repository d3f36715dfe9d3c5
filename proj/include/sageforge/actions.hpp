#pragma once
// Robot demonstration synthesis on generated scenes: occupancy-grid
// rasterization, bidirectional RRT navigation with shortcut smoothing, a
// top-center grasp heuristic, staged pick-and-place, failure filtering, and
// episode serialization. The robot model is a disc base with a free-flying
// end effector tethered to a horizontal reach radius; there is no articulated
// arm, so collision and reachability semantics carry the physical meaning.

#include <algorithm>
#include <climits>
#include <cstdint>
#include <filesystem>
#include <future>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "sageforge/physics.hpp"
#include "sageforge/scene_io.hpp"
#include "sageforge/surfaces.hpp"

namespace sageforge {

// ---------------------------------------------------------------------------
// Options

struct RrtParams {
  int step_cells = 3;          // max steering length per extension
  double goal_bias = 0.1;      // chance of sampling the opposite tree's root
  int max_iters = 5000;
  int shortcut_attempts = 100;
};

struct ActionOptions {
  double resolution = 0.05;       // occupancy cell size, meters
  double robot_radius = 0.25;     // object footprints inflate by this
  double clearance_height = 1.2;  // objects at or above this are flown under
  double max_opening = 0.08;      // gripper opening limit
  double grasp_clearance = 0.02;  // grasp point above the top surface
  double approach_offset = 0.10;  // hover height above the grasp point
  double lift_offset = 0.15;      // lift travel after closing
  double drop_offset = 0.15;      // release height above the place point
  double reach_radius = 0.85;     // horizontal end-effector tether
  double stand_margin = 0.10;     // stand cells keep this much reach in hand
  double home_height = 1.0;       // end-effector cruise height over the base
  double timestep = 0.05;         // seconds between waypoints
  double ee_step = 0.05;          // max end-effector travel per waypoint
  double ee_radius = 0.03;        // effector collision proxy (cube half size)
  double place_tolerance = 0.10;  // filter: max |settled - target| distance
  double place_clearance = 0.01;  // free-spot search margin around neighbors
  int grip_steps = 5;             // waypoints spent closing or opening
  RrtParams rrt;
  SettleParams settle;
};

// ---------------------------------------------------------------------------
// Occupancy grid

struct GridCell {
  int x = 0;
  int y = 0;
  bool operator==(const GridCell&) const = default;
};

struct OccupancyGrid {
  double resolution = 0.05;
  Vec2 origin;                  // world position of cell (0,0)'s min corner
  int width = 0;
  int height = 0;
  std::vector<uint8_t> cells;   // row-major, 1 = occupied

  bool in_bounds(GridCell c) const {
    return c.x >= 0 && c.y >= 0 && c.x < width && c.y < height;
  }
  size_t index(GridCell c) const {
    return size_t(c.y) * size_t(width) + size_t(c.x);
  }
  // Everything outside the grid counts as occupied.
  bool occupied(GridCell c) const {
    return !in_bounds(c) || cells[index(c)] != 0;
  }
  void set(GridCell c, bool occ) {
    if (in_bounds(c)) cells[index(c)] = occ ? 1 : 0;
  }
  Vec2 center(GridCell c) const {
    return {origin.x + (c.x + 0.5) * resolution,
            origin.y + (c.y + 0.5) * resolution};
  }
  GridCell cell_at(Vec2 p) const {
    return {int(std::floor((p.x - origin.x) / resolution)),
            int(std::floor((p.y - origin.y) / resolution))};
  }
  int count_free() const {
    int n = 0;
    for (uint8_t c : cells) n += (c == 0);
    return n;
  }
};

// Free cells in scan order (y, then x).
inline std::vector<GridCell> free_cells(const OccupancyGrid& g) {
  std::vector<GridCell> out;
  for (int y = 0; y < g.height; ++y)
    for (int x = 0; x < g.width; ++x)
      if (!g.occupied({x, y})) out.push_back({x, y});
  return out;
}

namespace detail {

// Collinear overlap between one edge of each room: the shared wall pieces.
// v1 floor plans are axis-aligned rectangles in a row, but the test is
// generic over vertical/horizontal edges.
inline std::vector<std::pair<Vec2, Vec2>> shared_wall_segments(const Room& ra,
                                                               const Room& rb) {
  auto edges = [](const Room& r) {
    std::vector<std::pair<Vec2, Vec2>> e;
    for (size_t i = 0; i < r.polygon.size(); ++i)
      e.emplace_back(r.polygon[i], r.polygon[(i + 1) % r.polygon.size()]);
    return e;
  };
  std::vector<std::pair<Vec2, Vec2>> out;
  for (auto [a0, a1] : edges(ra))
    for (auto [b0, b1] : edges(rb)) {
      bool va = std::abs(a0.x - a1.x) < 1e-9, vb = std::abs(b0.x - b1.x) < 1e-9;
      bool ha = std::abs(a0.y - a1.y) < 1e-9, hb = std::abs(b0.y - b1.y) < 1e-9;
      if (va && vb && std::abs(a0.x - b0.x) < 1e-9) {
        double lo = std::max(std::min(a0.y, a1.y), std::min(b0.y, b1.y));
        double hi = std::min(std::max(a0.y, a1.y), std::max(b0.y, b1.y));
        if (hi - lo > 1e-9) out.push_back({{a0.x, lo}, {a0.x, hi}});
      } else if (ha && hb && std::abs(a0.y - b0.y) < 1e-9) {
        double lo = std::max(std::min(a0.x, a1.x), std::min(b0.x, b1.x));
        double hi = std::min(std::max(a0.x, a1.x), std::max(b0.x, b1.x));
        if (hi - lo > 1e-9) out.push_back({{lo, a0.y}, {hi, a0.y}});
      }
    }
  return out;
}

}  // namespace detail

// Rasterize the scene to a 2D occupancy grid: cells outside every room are
// occupied (this forms the outer wall ring, one padding cell wide), interior
// walls between rooms are occupied except across door spans, and object
// footprints below the clearance height are inflated by the robot radius.
// Walls themselves are not inflated so an empty room's full interior is free.
inline OccupancyGrid rasterize_occupancy(const Scene& scene, double resolution,
                                         double robot_radius,
                                         double clearance_height) {
  if (resolution <= 0) fail(Errc::InvalidArgument, "resolution must be positive");
  if (scene.plan.rooms.empty())
    fail(Errc::InvalidArgument, "cannot rasterize a scene without rooms");
  Aabb2 bounds;
  for (const Room& r : scene.plan.rooms)
    for (Vec2 p : r.polygon) bounds.expand(p);

  OccupancyGrid g;
  g.resolution = resolution;
  g.origin = {bounds.min.x - resolution, bounds.min.y - resolution};
  g.width = int(std::ceil((bounds.max.x - bounds.min.x) / resolution - 1e-9)) + 2;
  g.height = int(std::ceil((bounds.max.y - bounds.min.y) / resolution - 1e-9)) + 2;
  g.cells.assign(size_t(g.width) * size_t(g.height), 1);

  for (int y = 0; y < g.height; ++y)
    for (int x = 0; x < g.width; ++x)
      if (scene.room_at(g.center({x, y}))) g.set({x, y}, false);

  // Interior walls: the band of cells flanking each shared room boundary.
  double band = resolution * 0.5 + 1e-9;
  auto mark_segment = [&](Vec2 a, Vec2 b, bool occ) {
    Aabb2 bb;
    bb.expand(a);
    bb.expand(b);
    GridCell lo = g.cell_at({bb.min.x - resolution, bb.min.y - resolution});
    GridCell hi = g.cell_at({bb.max.x + resolution, bb.max.y + resolution});
    for (int y = std::max(0, lo.y); y <= std::min(g.height - 1, hi.y); ++y)
      for (int x = std::max(0, lo.x); x <= std::min(g.width - 1, hi.x); ++x) {
        GridCell c{x, y};
        if (occ == (g.cells[g.index(c)] != 0)) continue;
        if (dist_point_segment(g.center(c), a, b) <= band) g.set(c, occ);
      }
  };
  for (size_t i = 0; i < scene.plan.rooms.size(); ++i)
    for (size_t j = i + 1; j < scene.plan.rooms.size(); ++j)
      for (auto [a, b] : detail::shared_wall_segments(scene.plan.rooms[i],
                                                      scene.plan.rooms[j]))
        mark_segment(a, b, true);
  for (const Door& d : scene.plan.doors) mark_segment(d.p0, d.p1, false);

  // Object footprints, inflated.
  for (const SceneObject& o : scene.objects) {
    if (o.mesh.empty()) continue;
    Obb box = world_obb(o);
    if (box.bottom() >= clearance_height - 1e-9) continue;
    Polygon2 fp = box.footprint();
    Aabb2 bb = Aabb2::of(fp);
    GridCell lo = g.cell_at({bb.min.x - robot_radius - resolution,
                             bb.min.y - robot_radius - resolution});
    GridCell hi = g.cell_at({bb.max.x + robot_radius + resolution,
                             bb.max.y + robot_radius + resolution});
    for (int y = std::max(0, lo.y); y <= std::min(g.height - 1, hi.y); ++y)
      for (int x = std::max(0, lo.x); x <= std::min(g.width - 1, hi.x); ++x) {
        GridCell c{x, y};
        if (g.cells[g.index(c)]) continue;
        if (signed_dist_inside(fp, g.center(c)) >= -robot_radius) g.set(c, true);
      }
  }
  return g;
}

inline OccupancyGrid rasterize_occupancy(const Scene& scene,
                                         const ActionOptions& opts = {}) {
  return rasterize_occupancy(scene, opts.resolution, opts.robot_radius,
                             opts.clearance_height);
}

// ---------------------------------------------------------------------------
// Grid lines. The supercover of a segment between two cell centers is every
// cell the segment touches (both flanking cells at exact corner crossings),
// so a free supercover implies a free 4-connected walk and no cut corners.

inline std::vector<GridCell> supercover_cells(GridCell a, GridCell b) {
  std::vector<GridCell> out{a};
  int dx = b.x - a.x, dy = b.y - a.y;
  int nx = std::abs(dx), ny = std::abs(dy);
  int sx = dx > 0 ? 1 : -1, sy = dy > 0 ? 1 : -1;
  int x = a.x, y = a.y, ix = 0, iy = 0;
  while (ix < nx || iy < ny) {
    long long tx = (1ll + 2 * ix) * ny, ty = (1ll + 2 * iy) * nx;
    if (tx == ty) {
      out.push_back({x + sx, y});
      out.push_back({x, y + sy});
      x += sx;
      y += sy;
      ++ix;
      ++iy;
    } else if (tx < ty) {
      x += sx;
      ++ix;
    } else {
      y += sy;
      ++iy;
    }
    out.push_back({x, y});
  }
  return out;
}

// 4-connected walk along the segment (x steps first on corner ties); every
// visited cell lies in the supercover.
inline std::vector<GridCell> line_walk(GridCell a, GridCell b) {
  std::vector<GridCell> out{a};
  int dx = b.x - a.x, dy = b.y - a.y;
  int nx = std::abs(dx), ny = std::abs(dy);
  int sx = dx > 0 ? 1 : -1, sy = dy > 0 ? 1 : -1;
  int x = a.x, y = a.y, ix = 0, iy = 0;
  while (ix < nx || iy < ny) {
    long long tx = (1ll + 2 * ix) * ny, ty = (1ll + 2 * iy) * nx;
    if (tx == ty) {
      x += sx;
      ++ix;
      out.push_back({x, y});
      y += sy;
      ++iy;
      out.push_back({x, y});
    } else if (tx < ty) {
      x += sx;
      ++ix;
      out.push_back({x, y});
    } else {
      y += sy;
      ++iy;
      out.push_back({x, y});
    }
  }
  return out;
}

inline bool line_free(const OccupancyGrid& g, GridCell a, GridCell b) {
  for (GridCell c : supercover_cells(a, b))
    if (g.occupied(c)) return false;
  return true;
}

// ---------------------------------------------------------------------------
// BFS (4-connected): the independent connectivity oracle and spawn-component
// queries. Neighbor order is fixed, so shortest paths are deterministic.

inline std::vector<uint8_t> bfs_reachable(const OccupancyGrid& g, GridCell from) {
  std::vector<uint8_t> seen(g.cells.size(), 0);
  if (g.occupied(from)) return seen;
  std::vector<GridCell> queue{from};
  seen[g.index(from)] = 1;
  for (size_t head = 0; head < queue.size(); ++head) {
    GridCell c = queue[head];
    for (GridCell n : {GridCell{c.x + 1, c.y}, GridCell{c.x - 1, c.y},
                       GridCell{c.x, c.y + 1}, GridCell{c.x, c.y - 1}}) {
      if (g.occupied(n) || seen[g.index(n)]) continue;
      seen[g.index(n)] = 1;
      queue.push_back(n);
    }
  }
  return seen;
}

inline std::optional<std::vector<GridCell>> bfs_shortest_path(
    const OccupancyGrid& g, GridCell start, GridCell goal) {
  if (g.occupied(start) || g.occupied(goal)) return std::nullopt;
  if (start == goal) return std::vector<GridCell>{start};
  std::vector<int> prev(g.cells.size(), -1);
  std::vector<GridCell> queue{start};
  prev[g.index(start)] = int(g.index(start));
  for (size_t head = 0; head < queue.size(); ++head) {
    GridCell c = queue[head];
    for (GridCell n : {GridCell{c.x + 1, c.y}, GridCell{c.x - 1, c.y},
                       GridCell{c.x, c.y + 1}, GridCell{c.x, c.y - 1}}) {
      if (g.occupied(n) || prev[g.index(n)] >= 0) continue;
      prev[g.index(n)] = int(g.index(c));
      if (n == goal) {
        std::vector<GridCell> path{goal};
        size_t at = g.index(goal);
        while (int(at) != prev[at]) {
          at = size_t(prev[at]);
          path.push_back({int(at % size_t(g.width)), int(at / size_t(g.width))});
        }
        std::reverse(path.begin(), path.end());
        return path;
      }
      queue.push_back(n);
    }
  }
  return std::nullopt;
}

// Free cells of the largest connected region, scan order. Episode spawns are
// drawn from here so a furniture-pinched pocket cannot strand the robot.
inline std::vector<GridCell> largest_free_component(const OccupancyGrid& g) {
  std::vector<uint8_t> done(g.cells.size(), 0);
  std::vector<GridCell> best;
  for (GridCell c : free_cells(g)) {
    if (done[g.index(c)]) continue;
    std::vector<uint8_t> seen = bfs_reachable(g, c);
    std::vector<GridCell> comp;
    for (GridCell f : free_cells(g))
      if (seen[g.index(f)]) {
        comp.push_back(f);
        done[g.index(f)] = 1;
      }
    if (comp.size() > best.size()) best = std::move(comp);
  }
  return best;
}

// ---------------------------------------------------------------------------
// Bidirectional RRT with straight-line steering and shortcut smoothing.

struct PathResult {
  bool found = false;
  std::vector<GridCell> cells;  // dense 4-connected path, start..goal, all free
  std::string error;            // "NoPath" when not found
  int iterations = 0;
};

namespace detail {

struct RrtTree {
  std::vector<GridCell> cells;
  std::vector<int> parent;
  std::map<std::pair<int, int>, int> index;

  explicit RrtTree(GridCell root) { add(root, -1); }

  int add(GridCell c, int par) {
    auto [it, fresh] = index.try_emplace(std::pair{c.x, c.y}, int(cells.size()));
    if (!fresh) return it->second;
    cells.push_back(c);
    parent.push_back(par);
    return int(cells.size()) - 1;
  }

  int nearest(GridCell c) const {
    int best = 0;
    long long bd = LLONG_MAX;
    for (size_t i = 0; i < cells.size(); ++i) {
      long long dx = cells[i].x - c.x, dy = cells[i].y - c.y;
      long long d = dx * dx + dy * dy;
      if (d < bd) {
        bd = d;
        best = int(i);
      }
    }
    return best;
  }

  std::vector<GridCell> chain_to_root(int node) const {
    std::vector<GridCell> out;
    for (int at = node; at >= 0; at = parent[size_t(at)])
      out.push_back(cells[size_t(at)]);
    return out;
  }
};

// Steer from node `from` toward `target`, clipped to `step` cells, stopping
// before the first occupied cell. Returns the node reached (-1: no progress).
inline int rrt_extend(RrtTree& t, const OccupancyGrid& g, int from,
                      GridCell target, int step) {
  GridCell q = t.cells[size_t(from)];
  int dx = target.x - q.x, dy = target.y - q.y;
  int m = std::max(std::abs(dx), std::abs(dy));
  if (m == 0) return from;
  if (m > step) {
    double s = double(step) / m;
    target = {q.x + int(std::lround(dx * s)), q.y + int(std::lround(dy * s))};
    if (target == q) return -1;
  }
  int at = from;
  auto walk = line_walk(q, target);
  for (size_t i = 1; i < walk.size(); ++i) {
    if (g.occupied(walk[i])) break;
    at = t.add(walk[i], at);
  }
  return at == from ? -1 : at;
}

}  // namespace detail

inline PathResult plan_path_rrt(const OccupancyGrid& grid, GridCell start,
                                GridCell goal, uint64_t seed,
                                const RrtParams& params = {}) {
  if (grid.occupied(start)) fail(Errc::StartOccupied, "start cell is occupied");
  if (grid.occupied(goal)) fail(Errc::GoalOccupied, "goal cell is occupied");
  PathResult out;
  if (start == goal) {
    out.found = true;
    out.cells = {start};
    return out;
  }

  Rng rng(hash_mix(seed, fnv1a64("rrt")));
  detail::RrtTree a(start), b(goal);
  detail::RrtTree* grow = &a;
  detail::RrtTree* meet = &b;
  int join_grow = -1, join_meet = -1;

  for (int iter = 1; iter <= params.max_iters; ++iter) {
    out.iterations = iter;
    GridCell sample;
    if (rng.uniform() < params.goal_bias) {
      sample = meet->cells[0];
    } else {
      sample = {int(rng.uniform_int(0, grid.width - 1)),
                int(rng.uniform_int(0, grid.height - 1))};
    }
    int na = detail::rrt_extend(*grow, grid, grow->nearest(sample), sample,
                                params.step_cells);
    if (na >= 0) {
      GridCell reach = grow->cells[size_t(na)];
      int nb = meet->nearest(reach);
      for (int guard = 0; guard < 1024; ++guard) {
        int nxt = detail::rrt_extend(*meet, grid, nb, reach, params.step_cells);
        if (nxt < 0 || nxt == nb) break;
        nb = nxt;
        if (meet->cells[size_t(nb)] == reach) break;
      }
      if (meet->cells[size_t(nb)] == reach) {
        join_grow = na;
        join_meet = nb;
        break;
      }
    }
    std::swap(grow, meet);
  }
  if (join_grow < 0) {
    out.error = "NoPath";
    return out;
  }

  // Stitch start-side and goal-side chains into one start->goal path.
  std::vector<GridCell> path;
  {
    std::vector<GridCell> gs = grow->chain_to_root(join_grow);   // reach..root
    std::vector<GridCell> ms = meet->chain_to_root(join_meet);   // reach..root
    if (grow == &a) {
      std::reverse(gs.begin(), gs.end());  // start..reach
      path = std::move(gs);
      path.insert(path.end(), ms.begin() + 1, ms.end());  // ..goal
    } else {
      std::reverse(ms.begin(), ms.end());  // start..reach
      path = std::move(ms);
      path.insert(path.end(), gs.begin() + 1, gs.end());  // ..goal
    }
  }

  // Shortcut smoothing: draw two indices, splice a straight walk when the
  // supercover between them is free.
  for (int attempt = 0; attempt < params.shortcut_attempts; ++attempt) {
    if (path.size() < 3) break;
    int i = int(rng.uniform_int(0, int64_t(path.size()) - 1));
    int j = int(rng.uniform_int(0, int64_t(path.size()) - 1));
    if (i > j) std::swap(i, j);
    if (j - i < 2) continue;
    if (!line_free(grid, path[size_t(i)], path[size_t(j)])) continue;
    std::vector<GridCell> mid = line_walk(path[size_t(i)], path[size_t(j)]);
    std::vector<GridCell> next(path.begin(), path.begin() + i);
    next.insert(next.end(), mid.begin(), mid.end());
    next.insert(next.end(), path.begin() + j + 1, path.end());
    path = std::move(next);
  }

  out.found = true;
  out.cells = std::move(path);
  return out;
}

// ---------------------------------------------------------------------------
// Grasping: top-surface centroid, straight-down approach.

struct GraspPose {
  Vec3 position;
  Vec3 approach{0, 0, -1};  // top-down in v1
  double width = 0;
};

inline GraspPose propose_grasp(const SceneObject& obj,
                               const ActionOptions& opts = {}) {
  if (obj.mesh.empty())
    fail(Errc::NoTopSurface, "object " + obj.id + " has no mesh");
  SurfaceExtractionParams sp;
  sp.min_area = 1e-4;  // grasp targets are far smaller than support surfaces
  auto surfaces = extract_support_surfaces(transform_mesh(obj.mesh, obj.pose), sp);
  if (surfaces.empty())
    fail(Errc::NoTopSurface, "no horizontal face to grasp on " + obj.id);
  const SupportSurface& top = surfaces.back();  // highest

  Obb box = world_obb(obj);
  double min_extent = 2.0 * std::min(box.half.x, box.half.y);
  if (min_extent > opts.max_opening + 1e-9)
    fail(Errc::TooWide, "object " + obj.id + " spans " + std::to_string(min_extent) +
                            " m against a " + std::to_string(opts.max_opening) +
                            " m opening");
  GraspPose g;
  Vec2 c = polygon_centroid(top.hull);
  g.position = {c.x, c.y, top.height + opts.grasp_clearance};
  g.width = std::min(min_extent + 0.01, opts.max_opening);
  return g;
}

// ---------------------------------------------------------------------------
// Demonstrations

enum class StageKind { Navigate, Approach, Descend, Close, Lift, Transport, Drop };

inline const char* stage_kind_name(StageKind k) {
  switch (k) {
    case StageKind::Navigate: return "navigate";
    case StageKind::Approach: return "approach";
    case StageKind::Descend: return "descend";
    case StageKind::Close: return "close";
    case StageKind::Lift: return "lift";
    case StageKind::Transport: return "transport";
    case StageKind::Drop: return "drop";
  }
  return "?";
}

inline StageKind stage_kind_from_name(const std::string& s) {
  for (int i = 0; i <= int(StageKind::Drop); ++i)
    if (s == stage_kind_name(StageKind(i))) return StageKind(i);
  fail(Errc::ParseError, "unknown stage kind: " + s);
}

struct BasePose {
  Vec2 position;
  double heading = 0;  // radians
};

struct Waypoint {
  double t = 0;        // seconds; strictly increasing across a demonstration
  Vec2 base;
  double heading = 0;
  Vec3 ee;             // end-effector position
  double gripper = 1;  // open fraction: 1 fully open, 0 closed
};

struct Stage {
  StageKind kind = StageKind::Navigate;
  std::string macro;   // pipeline phase: navigate/_to_pick/_to_place, pick, place
  std::vector<Waypoint> waypoints;
};

struct Demonstration {
  std::vector<Stage> stages;
  bool success = false;
  std::string failure_reason;  // empty on success
  bool mobile = false;
  std::string pick_id;
  double grasp_width = 0;
  Vec3 target;                 // intended resting position
  Pose final_object_pose;      // settled pose after the drop
};

// Distinct macro labels in stage order.
inline std::vector<std::string> macro_blocks(const Demonstration& d) {
  std::vector<std::string> out;
  for (const Stage& s : d.stages)
    if (out.empty() || out.back() != s.macro) out.push_back(s.macro);
  return out;
}

// Fixed stage sequence (mobile runs insert a second Navigate before
// Transport) with non-empty stages and strictly increasing timestamps.
inline bool stage_structure_ok(const Demonstration& d) {
  using K = StageKind;
  static const std::vector<K> kFixed{K::Navigate, K::Approach, K::Descend,
                                     K::Close,    K::Lift,     K::Transport,
                                     K::Drop};
  static const std::vector<K> kMobile{K::Navigate, K::Approach, K::Descend,
                                      K::Close,    K::Lift,     K::Navigate,
                                      K::Transport, K::Drop};
  const auto& want = d.mobile ? kMobile : kFixed;
  if (d.stages.size() != want.size()) return false;
  for (size_t i = 0; i < want.size(); ++i)
    if (d.stages[i].kind != want[i] || d.stages[i].waypoints.empty()) return false;
  double last = -1e30;
  for (const Stage& s : d.stages)
    for (const Waypoint& w : s.waypoints) {
      if (w.t <= last) return false;
      last = w.t;
    }
  return true;
}

namespace detail {

// Incremental demonstration assembly. Tracks robot state, appends timestamped
// waypoints, and records the first tether breach or scene collision; building
// continues kinematically so failed runs still carry their full trajectory.
class DemoBuilder {
 public:
  DemoBuilder(const Scene& scene, const ActionOptions& opts, BasePose spawn,
              std::string pick_id)
      : scene_(scene), opts_(opts), pick_id_(std::move(pick_id)) {
    base_ = spawn.position;
    heading_ = spawn.heading;
    ee_ = {base_.x, base_.y, opts.home_height};
    demo_.pick_id = pick_id_;
    for (const SceneObject& o : scene.objects) {
      if (o.mesh.empty()) continue;
      ids_.push_back(o.id);
      boxes_.push_back(world_obb(o));
    }
  }

  Demonstration& demo() { return demo_; }
  Vec3 ee() const { return ee_; }
  const std::string& flaw() const { return flaw_; }

  void begin_stage(StageKind k, std::string macro) {
    demo_.stages.push_back({k, std::move(macro), {}});
  }

  void face(Vec2 at) {
    Vec2 d = at - base_;
    if (d.norm() > 1e-12) heading_ = std::atan2(d.y, d.x);
  }

  void add_waypoint() {
    Waypoint w{t_, base_, heading_, ee_, grip_};
    t_ += opts_.timestep;
    check(w);
    demo_.stages.back().waypoints.push_back(w);
  }

  // Straight end-effector move, subdivided to the waypoint pitch.
  void move_ee(Vec3 to) {
    Vec3 from = ee_;
    double len = (to - from).norm();
    int steps = std::max(1, int(std::ceil(len / opts_.ee_step - 1e-9)));
    for (int i = 1; i <= steps; ++i) {
      ee_ = from + (to - from) * (double(i) / steps);
      add_waypoint();
    }
  }

  // Drive the base along a cell path; the end effector rides above it at its
  // current height.
  void follow(const OccupancyGrid& grid, const std::vector<GridCell>& cells) {
    for (size_t i = 1; i < cells.size(); ++i) {
      Vec2 next = grid.center(cells[i]);
      face(next);
      base_ = next;
      ee_.x = base_.x;
      ee_.y = base_.y;
      add_waypoint();
    }
  }

  void set_grip(double target) {
    double from = grip_;
    for (int i = 1; i <= opts_.grip_steps; ++i) {
      grip_ = from + (target - from) * (double(i) / opts_.grip_steps);
      add_waypoint();
    }
  }

  void attach(const SceneObject& obj) {
    carried_id_ = obj.id;
    carried_box_ = world_obb(obj);
    carried_pos_ = obj.pose.position;
    carry_offset_ = obj.pose.position - ee_;
  }

  void detach() { carried_id_.clear(); }

  Vec3 carry_offset() const { return carry_offset_; }

  // Mark the run failed without touching the waypoint record.
  void abort(const std::string& reason) {
    if (flaw_.empty()) flaw_ = reason;
  }

  Demonstration finish() {
    demo_.success = flaw_.empty();
    demo_.failure_reason = flaw_;
    return std::move(demo_);
  }

 private:
  void check(const Waypoint& w) {
    if (!flaw_.empty()) return;  // first failure wins
    if ((Vec2{w.ee.x, w.ee.y} - w.base).norm() > opts_.reach_radius + 1e-9) {
      flaw_ = "Unreachable";
      return;
    }
    Obb ee_box{w.ee, {opts_.ee_radius, opts_.ee_radius, opts_.ee_radius}, {}};
    for (size_t i = 0; i < boxes_.size(); ++i) {
      if (ids_[i] == pick_id_) continue;  // the gripper straddles its target
      if (obb_overlap(ee_box, boxes_[i], kCollisionTol)) {
        flaw_ = "TrajectoryCollision";
        return;
      }
    }
    if (!carried_id_.empty()) {
      Obb box = carried_box_;
      box.center = carried_box_.center + (w.ee + carry_offset_ - carried_pos_);
      for (size_t i = 0; i < boxes_.size(); ++i) {
        if (ids_[i] == carried_id_) continue;
        if (obb_overlap(box, boxes_[i], kCollisionTol)) {
          flaw_ = "TrajectoryCollision";
          return;
        }
      }
    }
  }

  const Scene& scene_;
  const ActionOptions& opts_;
  std::string pick_id_;
  Demonstration demo_;
  std::vector<std::string> ids_;
  std::vector<Obb> boxes_;
  double t_ = 0;
  Vec2 base_;
  double heading_ = 0;
  Vec3 ee_;
  double grip_ = 1.0;
  std::string carried_id_;
  Obb carried_box_;
  Vec3 carried_pos_;
  Vec3 carry_offset_;
  std::string flaw_;
};

// Settle the released object from the drop point; the scene copy of the
// object is excluded so it cannot support itself.
inline Pose settle_drop(const Scene& scene, const SceneObject& obj,
                        const Pose& release, const ActionOptions& opts,
                        bool& landed) {
  SettleWorld world(scene, opts.settle);
  std::set<std::string> exclude{obj.id};
  for (const auto& d : scene.descendants_of(obj.id)) exclude.insert(d);
  try {
    SettleResult res = world.settle_pose(obj, release, exclude);
    landed = true;
    return res.post_pose;
  } catch (const Error& e) {
    if (e.code() != Errc::NoSupportBelow) throw;
    landed = false;
    return release;
  }
}

// Shared arm phase: approach above the grasp, descend, close, lift. Leaves
// the builder carrying the object with the end effector at the lift point.
inline void build_pick_stages(DemoBuilder& b, const SceneObject& obj,
                              const GraspPose& grasp, const ActionOptions& opts,
                              const std::string& macro) {
  b.face(grasp.position.xy());
  b.begin_stage(StageKind::Approach, macro);
  b.move_ee(grasp.position + Vec3{0, 0, opts.approach_offset});
  b.begin_stage(StageKind::Descend, macro);
  b.move_ee(grasp.position);
  b.begin_stage(StageKind::Close, macro);
  b.set_grip(grasp.width / opts.max_opening);
  b.attach(obj);
  b.begin_stage(StageKind::Lift, macro);
  b.move_ee(grasp.position + Vec3{0, 0, opts.lift_offset});
}

// Shared place phase: transport to above the target, release, settle.
inline void build_place_stages(DemoBuilder& b, const Scene& scene,
                               const SceneObject& obj, Vec3 target,
                               const ActionOptions& opts,
                               const std::string& macro) {
  Vec3 release = target + Vec3{0, 0, opts.drop_offset};
  b.face(target.xy());
  b.begin_stage(StageKind::Transport, macro);
  b.move_ee(release);
  Pose release_pose{release + b.carry_offset(), obj.pose.orientation};
  b.detach();
  b.begin_stage(StageKind::Drop, macro);
  b.set_grip(1.0);
  bool landed = false;
  b.demo().final_object_pose = settle_drop(scene, obj, release_pose, opts, landed);
  if (!landed) b.abort("MissedTarget");
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Pick-and-place from a fixed base. Soft failures (Unreachable,
// TrajectoryCollision, MissedTarget) come back as unsuccessful demonstrations
// so the filter stage can count and reject them; a missing pick object or an
// ungraspable one still throws.

inline Demonstration synthesize_pick_place(const Scene& scene,
                                           const std::string& pick_id,
                                           Vec3 place_target, BasePose spawn,
                                           const ActionOptions& opts = {}) {
  const SceneObject& obj = scene.get(pick_id);
  GraspPose grasp = propose_grasp(obj, opts);

  detail::DemoBuilder b(scene, opts, spawn, pick_id);
  b.demo().target = place_target;
  b.demo().grasp_width = grasp.width;
  if ((grasp.position.xy() - spawn.position).norm() > opts.reach_radius ||
      (place_target.xy() - spawn.position).norm() > opts.reach_radius) {
    b.abort("Unreachable");
    return b.finish();
  }

  b.begin_stage(StageKind::Navigate, "navigate");
  b.add_waypoint();
  detail::build_pick_stages(b, obj, grasp, opts, "pick");
  detail::build_place_stages(b, scene, obj, place_target, opts, "place");
  return b.finish();
}

// ---------------------------------------------------------------------------
// Free-spot search on a support object's top surface for the carried object.

inline std::optional<Vec3> find_place_point(const Scene& scene,
                                            const std::string& place_id,
                                            const SceneObject& carried,
                                            const ActionOptions& opts = {}) {
  const SceneObject& surface_obj = scene.get(place_id);
  if (surface_obj.mesh.empty()) return std::nullopt;
  auto surfaces =
      extract_support_surfaces(transform_mesh(surface_obj.mesh, surface_obj.pose));
  if (surfaces.empty()) return std::nullopt;
  const SupportSurface& top = surfaces.back();

  Obb cbox = world_obb(carried);
  double need = std::max(cbox.half.x, cbox.half.y) + opts.place_clearance;
  Vec2 centroid = polygon_centroid(top.hull);
  Aabb2 bb = Aabb2::of(top.hull);

  std::vector<Vec2> cands;
  for (double y = bb.min.y; y <= bb.max.y + 1e-9; y += opts.resolution)
    for (double x = bb.min.x; x <= bb.max.x + 1e-9; x += opts.resolution) {
      Vec2 p{x, y};
      if (signed_dist_inside(top.hull, p) >= need) cands.push_back(p);
    }
  std::sort(cands.begin(), cands.end(), [&](Vec2 a, Vec2 b2) {
    double da = (a - centroid).norm(), db = (b2 - centroid).norm();
    if (da != db) return da < db;
    if (a.x != b2.x) return a.x < b2.x;
    return a.y < b2.y;
  });

  for (Vec2 p : cands) {
    Obb box = cbox;
    box.center = cbox.center +
                 (Vec3{p.x, p.y, top.height} - carried.pose.position);
    bool clear = true;
    for (const SceneObject& o : scene.objects) {
      if (o.id == carried.id || o.id == place_id || o.mesh.empty()) continue;
      if (obb_overlap(box, world_obb(o), -opts.place_clearance)) {
        clear = false;
        break;
      }
    }
    if (clear) return Vec3{p.x, p.y, top.height};
  }
  return std::nullopt;
}

// Free cell within reach of `at`, nearest first; prefers the spawn-connected
// component but falls back to any qualifying cell so an unreachable goal
// surfaces as NoPath from the planner rather than a missing stand.
inline std::optional<GridCell> find_stand_cell(
    const OccupancyGrid& grid, Vec2 at, double max_dist,
    const std::vector<uint8_t>& reachable) {
  std::optional<GridCell> best, fallback;
  double bd = 1e30, fd = 1e30;
  for (int y = 0; y < grid.height; ++y)
    for (int x = 0; x < grid.width; ++x) {
      GridCell c{x, y};
      if (grid.occupied(c)) continue;
      double d = (grid.center(c) - at).norm();
      if (d > max_dist) continue;
      if (d < fd) {
        fd = d;
        fallback = c;
      }
      if (!reachable.empty() && reachable[grid.index(c)] && d < bd) {
        bd = d;
        best = c;
      }
    }
  return best ? best : fallback;
}

// ---------------------------------------------------------------------------
// Mobile manipulation: navigate to the pick surface, grasp, navigate to the
// place surface, release. Four macro phases over eight stages.

inline Demonstration synthesize_mobile_manip(const Scene& scene,
                                             const std::string& pick_id,
                                             const std::string& place_id,
                                             BasePose spawn, uint64_t seed,
                                             const ActionOptions& opts = {}) {
  const SceneObject& obj = scene.get(pick_id);
  scene.get(place_id);  // existence check
  GraspPose grasp = propose_grasp(obj, opts);

  OccupancyGrid grid = rasterize_occupancy(scene, opts);
  GridCell start = grid.cell_at(spawn.position);
  if (grid.occupied(start)) fail(Errc::StartOccupied, "spawn cell is occupied");

  detail::DemoBuilder b(scene, opts, spawn, pick_id);
  b.demo().mobile = true;
  b.demo().grasp_width = grasp.width;

  auto place = find_place_point(scene, place_id, obj, opts);
  if (!place) {
    b.abort("NoFreeSpace");
    return b.finish();
  }
  b.demo().target = *place;

  std::vector<uint8_t> reachable = bfs_reachable(grid, start);
  double stand_reach = opts.reach_radius - opts.stand_margin;
  auto stand1 = find_stand_cell(grid, grasp.position.xy(), stand_reach, reachable);
  auto stand2 = find_stand_cell(grid, place->xy(), stand_reach, reachable);
  if (!stand1 || !stand2) {
    b.abort("Unreachable");
    return b.finish();
  }

  b.begin_stage(StageKind::Navigate, "navigate_to_pick");
  b.add_waypoint();
  PathResult p1 =
      plan_path_rrt(grid, start, *stand1, hash_mix(seed, fnv1a64("nav_pick")), opts.rrt);
  if (!p1.found) {
    b.abort("NoPath");
    return b.finish();
  }
  b.follow(grid, p1.cells);

  detail::build_pick_stages(b, obj, grasp, opts, "pick");

  b.begin_stage(StageKind::Navigate, "navigate_to_place");
  b.add_waypoint();
  PathResult p2 = plan_path_rrt(grid, *stand1, *stand2,
                                hash_mix(seed, fnv1a64("nav_place")), opts.rrt);
  if (!p2.found) {
    b.abort("NoPath");
    return b.finish();
  }
  b.follow(grid, p2.cells);

  detail::build_place_stages(b, scene, obj, *place, opts, "place");
  return b.finish();
}

// ---------------------------------------------------------------------------
// Failure filter: independent replay of every waypoint plus the final-position
// check. Construction and filtering share the collision predicate but the
// filter re-derives carried poses and the settled drop from the record alone.

struct FilterResult {
  std::vector<size_t> passed;                           // indices, input order
  std::vector<std::pair<size_t, std::string>> rejected;  // index, reason
  std::map<std::string, int> reject_counts;
};

namespace detail {

inline std::string verify_demonstration(const Scene& scene,
                                        const OccupancyGrid& grid,
                                        const Demonstration& demo,
                                        const ActionOptions& opts) {
  if (!demo.success)
    return demo.failure_reason.empty() ? "Failed" : demo.failure_reason;
  if (!stage_structure_ok(demo)) return "MalformedStages";
  const SceneObject* obj = scene.find(demo.pick_id);
  if (!obj) return "ObjectNotFound";

  // Carry interval: after Close, before Drop.
  size_t close_idx = demo.mobile ? 3 : 3;
  size_t drop_idx = demo.stages.size() - 1;
  Vec3 grasp_ee = demo.stages[close_idx].waypoints.back().ee;
  Vec3 offset = obj->pose.position - grasp_ee;
  Obb cbox = world_obb(*obj);

  std::vector<const SceneObject*> others;
  std::vector<Obb> boxes;
  for (const SceneObject& o : scene.objects) {
    if (o.mesh.empty()) continue;
    others.push_back(&o);
    boxes.push_back(world_obb(o));
  }

  for (size_t si = 0; si < demo.stages.size(); ++si) {
    const Stage& st = demo.stages[si];
    bool carried = si > close_idx && si < drop_idx;
    for (const Waypoint& w : st.waypoints) {
      if ((Vec2{w.ee.x, w.ee.y} - w.base).norm() > opts.reach_radius + 1e-6)
        return "Unreachable";
      if (demo.mobile && grid.occupied(grid.cell_at(w.base)))
        return "TrajectoryCollision";
      Obb ee_box{w.ee, {opts.ee_radius, opts.ee_radius, opts.ee_radius}, {}};
      for (size_t i = 0; i < boxes.size(); ++i) {
        if (others[i]->id == demo.pick_id) continue;
        if (obb_overlap(ee_box, boxes[i], kCollisionTol))
          return "TrajectoryCollision";
      }
      if (carried) {
        Obb box = cbox;
        box.center = cbox.center + (w.ee + offset - obj->pose.position);
        for (size_t i = 0; i < boxes.size(); ++i) {
          if (others[i]->id == demo.pick_id) continue;
          if (obb_overlap(box, boxes[i], kCollisionTol))
            return "TrajectoryCollision";
        }
      }
    }
  }

  // Re-derive the drop from the last transport waypoint and demand the object
  // comes to rest within tolerance of the target.
  Vec3 release_ee = demo.stages[drop_idx - 1].waypoints.back().ee;
  Pose release{release_ee + offset, obj->pose.orientation};
  bool landed = false;
  Pose final_pose = settle_drop(scene, *obj, release, opts, landed);
  if (!landed) return "MissedTarget";
  if ((final_pose.position - demo.target).norm() > opts.place_tolerance)
    return "MissedTarget";
  return "";
}

}  // namespace detail

inline FilterResult filter_failures(const Scene& scene,
                                    const std::vector<Demonstration>& demos,
                                    const ActionOptions& opts = {}) {
  OccupancyGrid grid = rasterize_occupancy(scene, opts);
  FilterResult out;
  for (size_t i = 0; i < demos.size(); ++i) {
    std::string reason = detail::verify_demonstration(scene, grid, demos[i], opts);
    if (reason.empty()) {
      out.passed.push_back(i);
    } else {
      out.rejected.emplace_back(i, reason);
      out.reject_counts[reason] += 1;
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Episodes: one dataset record per synthesized demonstration.

struct Episode {
  std::string scene_hash;  // hex64 of scene_hash() for the scene used
  uint64_t seed = 0;
  BasePose spawn;
  std::string pick_id;
  std::string place_id;
  Demonstration demo;
};

inline json demonstration_to_json(const Demonstration& d) {
  json stages = json::array();
  for (const Stage& s : d.stages) {
    json wps = json::array();
    for (const Waypoint& w : s.waypoints)
      wps.push_back(json::array(
          {w.t, w.base.x, w.base.y, w.heading, w.ee.x, w.ee.y, w.ee.z, w.gripper}));
    stages.push_back(
        {{"kind", stage_kind_name(s.kind)}, {"macro", s.macro}, {"waypoints", wps}});
  }
  json out{{"success", d.success},
           {"mobile", d.mobile},
           {"pick_id", d.pick_id},
           {"grasp_width", d.grasp_width},
           {"target", to_json(d.target)},
           {"final_object_pose", to_json(d.final_object_pose)},
           {"stages", stages}};
  if (!d.failure_reason.empty()) out["failure_reason"] = d.failure_reason;
  return out;
}

inline Demonstration demonstration_from_json(const json& j) {
  Demonstration d;
  d.success = j.at("success").get<bool>();
  d.mobile = j.at("mobile").get<bool>();
  d.pick_id = j.at("pick_id").get<std::string>();
  d.grasp_width = j.at("grasp_width").get<double>();
  d.target = vec3_from(j.at("target"));
  d.final_object_pose = pose_from(j.at("final_object_pose"));
  if (j.contains("failure_reason"))
    d.failure_reason = j.at("failure_reason").get<std::string>();
  for (const json& sj : j.at("stages")) {
    Stage s;
    s.kind = stage_kind_from_name(sj.at("kind").get<std::string>());
    s.macro = sj.at("macro").get<std::string>();
    for (const json& wj : sj.at("waypoints")) {
      Waypoint w;
      w.t = wj.at(0);
      w.base = {wj.at(1), wj.at(2)};
      w.heading = wj.at(3);
      w.ee = {wj.at(4), wj.at(5), wj.at(6)};
      w.gripper = wj.at(7);
      s.waypoints.push_back(w);
    }
    d.stages.push_back(std::move(s));
  }
  return d;
}

inline json episode_to_json(const Episode& e) {
  return json{{"scene", e.scene_hash},
              {"seed", e.seed},
              {"spawn", json::array({e.spawn.position.x, e.spawn.position.y,
                                     e.spawn.heading})},
              {"pick", e.pick_id},
              {"place", e.place_id},
              {"demo", demonstration_to_json(e.demo)}};
}

inline Episode episode_from_json(const json& j) {
  Episode e;
  e.scene_hash = j.at("scene").get<std::string>();
  e.seed = j.at("seed").get<uint64_t>();
  e.spawn.position = {j.at("spawn").at(0), j.at("spawn").at(1)};
  e.spawn.heading = j.at("spawn").at(2);
  e.pick_id = j.at("pick").get<std::string>();
  e.place_id = j.at("place").get<std::string>();
  e.demo = demonstration_from_json(j.at("demo"));
  return e;
}

// JSONL dataset: one compact episode per line.
inline void write_episodes_jsonl(const std::filesystem::path& path,
                                 const std::vector<Episode>& episodes) {
  std::string out;
  for (const Episode& e : episodes) {
    out += episode_to_json(e).dump();
    out += '\n';
  }
  write_file_atomic(path, out);
}

inline std::vector<Episode> read_episodes_jsonl(const std::filesystem::path& path) {
  std::vector<Episode> out;
  std::string text = read_file(path);
  size_t pos = 0;
  while (pos < text.size()) {
    size_t end = text.find('\n', pos);
    if (end == std::string::npos) end = text.size();
    std::string line = text.substr(pos, end - pos);
    pos = end + 1;
    if (trim(line).empty()) continue;
    try {
      out.push_back(episode_from_json(json::parse(line)));
    } catch (const json::exception& e) {
      fail(Errc::ParseError, std::string("bad episode line: ") + e.what());
    }
  }
  return out;
}

// Pass/reject tally for a dataset manifest.
inline json episodes_manifest(size_t total, const FilterResult& f) {
  json rejected = json::object();
  for (const auto& [reason, count] : f.reject_counts) rejected[reason] = count;
  return json{{"episodes", total},
              {"passed", f.passed.size()},
              {"rejected", rejected}};
}

struct ReplayResult {
  bool success = false;
  std::string reason;
};

// Re-run the filter checks on a stored episode against the given scene.
inline ReplayResult replay_episode(const Scene& scene, const Episode& episode,
                                   const ActionOptions& opts = {}) {
  if (episode.scene_hash != hex64(scene_hash(scene)))
    return {false, "SceneHashMismatch"};
  OccupancyGrid grid = rasterize_occupancy(scene, opts);
  std::string reason =
      detail::verify_demonstration(scene, grid, episode.demo, opts);
  return {reason.empty(), reason};
}

// ---------------------------------------------------------------------------
// Episode batches. Each episode is a pure function of (scene, ids, seed,
// index), so shards across threads reproduce the serial output exactly.

inline Episode synthesize_episode(const Scene& scene, const std::string& pick_id,
                                  const std::string& place_id, uint64_t seed,
                                  const ActionOptions& opts = {}) {
  OccupancyGrid grid = rasterize_occupancy(scene, opts);
  std::vector<GridCell> spawnable = largest_free_component(grid);
  if (spawnable.empty()) fail(Errc::NoFreeSpace, "no free cells to spawn in");
  Rng rng(hash_mix(seed, fnv1a64("spawn")));
  GridCell cell = spawnable[size_t(rng.uniform_int(0, int64_t(spawnable.size()) - 1))];

  Episode e;
  e.scene_hash = hex64(scene_hash(scene));
  e.seed = seed;
  e.spawn = {grid.center(cell), 0.0};
  e.pick_id = pick_id;
  e.place_id = place_id;
  e.demo = synthesize_mobile_manip(scene, pick_id, place_id, e.spawn, seed, opts);
  return e;
}

inline std::vector<Episode> generate_episodes(const Scene& scene,
                                              const std::string& pick_id,
                                              const std::string& place_id,
                                              uint64_t seed, int count,
                                              const ActionOptions& opts = {},
                                              int jobs = 1) {
  if (count < 1) fail(Errc::InvalidArgument, "episode count must be positive");
  uint64_t base = hash_mix(seed, fnv1a64("episode"));
  std::vector<Episode> out(size_t(count));
  auto run = [&](int i) {
    out[size_t(i)] = synthesize_episode(scene, pick_id, place_id,
                                        hash_mix(base, uint64_t(i)), opts);
  };
  int shards = std::max(1, std::min(jobs, count));
  if (shards == 1) {
    for (int i = 0; i < count; ++i) run(i);
  } else {
    std::vector<std::future<void>> work;
    for (int t = 0; t < shards; ++t)
      work.push_back(std::async(std::launch::async, [&, t] {
        for (int i = t; i < count; i += shards) run(i);
      }));
    for (auto& w : work) w.get();
  }
  return out;
}

}  // namespace sageforge
