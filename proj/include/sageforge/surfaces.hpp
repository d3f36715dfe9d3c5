#pragma once
// Horizontal support-surface extraction. Upward faces (normal within 15 deg
// of +Z) are clustered by height into planar regions; small regions are
// discarded. Surfaces keep their material triangles so contact queries can
// tell a ring-shaped rim from its convex hull.

#include "sageforge/geometry.hpp"

namespace sageforge {

struct SupportSurface {
  Polygon2 hull;    // convex hull of the region (projected)
  double height = 0;
  double area = 0;  // true projected area of the material, not the hull
  std::vector<std::array<Vec2, 3>> tris;

  bool covers(Vec2 p, double eps = 1e-9) const {
    for (const auto& t : tris) {
      double d0 = (t[1] - t[0]).cross(p - t[0]);
      double d1 = (t[2] - t[1]).cross(p - t[1]);
      double d2 = (t[0] - t[2]).cross(p - t[2]);
      bool neg = d0 < -eps || d1 < -eps || d2 < -eps;
      bool pos = d0 > eps || d1 > eps || d2 > eps;
      if (!(neg && pos)) return true;
    }
    return false;
  }
};

struct SurfaceExtractionParams {
  double max_tilt_deg = 15.0;
  double cluster_tol = 0.01;   // height clustering tolerance, meters
  double min_area = 0.0025;    // 25 cm^2
};

// Surfaces are returned sorted by ascending height. The mesh is taken as-is,
// so pass a world-transformed mesh for world-frame surfaces.
inline std::vector<SupportSurface> extract_support_surfaces(
    const TriMesh& mesh, const SurfaceExtractionParams& params = {}) {
  struct Face {
    double z;      // plane height (mean vertex z)
    double area;   // projected area
    std::array<Vec2, 3> tri;
    std::array<Vec3, 3> verts;
  };
  std::vector<Face> faces;
  const double cos_tilt = std::cos(deg2rad(params.max_tilt_deg));
  for (const auto& t : mesh.triangles) {
    Vec3 a = mesh.vertices[size_t(t[0])], b = mesh.vertices[size_t(t[1])],
         c = mesh.vertices[size_t(t[2])];
    Vec3 n = (b - a).cross(c - a);
    double len = n.norm();
    if (len < 1e-12 || n.z / len < cos_tilt) continue;
    double projected = 0.5 * std::abs((b - a).xy().cross((c - a).xy()));
    faces.push_back({(a.z + b.z + c.z) / 3.0, projected,
                     {a.xy(), b.xy(), c.xy()},
                     {a, b, c}});
  }
  std::sort(faces.begin(), faces.end(), [](const Face& x, const Face& y) {
    return x.z < y.z;
  });

  std::vector<SupportSurface> out;
  size_t i = 0;
  while (i < faces.size()) {
    size_t j = i;
    while (j < faces.size() && faces[j].z - faces[i].z <= params.cluster_tol) ++j;
    SupportSurface s;
    std::vector<Vec2> pts;
    double zw = 0;
    for (size_t k = i; k < j; ++k) {
      s.area += faces[k].area;
      zw += faces[k].z * faces[k].area;
      s.tris.push_back(faces[k].tri);
      for (const Vec3& v : faces[k].verts) pts.push_back(v.xy());
    }
    if (s.area >= params.min_area) {
      s.height = s.area > 0 ? zw / s.area : faces[i].z;
      s.hull = convex_hull(pts);
      if (s.hull.size() >= 3) out.push_back(std::move(s));
    }
    i = j;
  }
  return out;
}

}  // namespace sageforge
