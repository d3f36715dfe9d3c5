#pragma once
// Wavefront OBJ read/write for TriMesh. The writer emits shortest
// round-trippable decimal floats (std::to_chars) so that save -> load -> save
// is byte-stable and vertex coordinates survive bit-exactly.

#include <charconv>
#include <cstdlib>
#include <string>
#include <string_view>

#include "sageforge/geometry.hpp"

namespace sageforge {

inline std::string format_double(double v) {
  if (v == 0.0) v = 0.0;  // normalize -0
  char buf[32];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

inline std::string write_obj(const TriMesh& mesh) {
  std::string out;
  out.reserve(mesh.vertices.size() * 24 + mesh.triangles.size() * 16);
  for (const Vec3& v : mesh.vertices) {
    out += "v ";
    out += format_double(v.x);
    out += ' ';
    out += format_double(v.y);
    out += ' ';
    out += format_double(v.z);
    out += '\n';
  }
  for (const auto& t : mesh.triangles) {
    out += "f ";
    out += std::to_string(t[0] + 1);
    out += ' ';
    out += std::to_string(t[1] + 1);
    out += ' ';
    out += std::to_string(t[2] + 1);
    out += '\n';
  }
  return out;
}

// Minimal OBJ subset: v and f lines, triangles only, 1-based indices
// (negative indices and vt/vn references are tolerated and ignored).
inline TriMesh read_obj(std::string_view text) {
  TriMesh mesh;
  size_t pos = 0;
  int lineno = 0;
  while (pos < text.size()) {
    size_t eol = text.find('\n', pos);
    if (eol == std::string_view::npos) eol = text.size();
    std::string_view line = text.substr(pos, eol - pos);
    pos = eol + 1;
    ++lineno;
    if (line.size() < 2) continue;
    if (line[0] == 'v' && line[1] == ' ') {
      double xyz[3];
      const char* p = line.data() + 2;
      const char* end = line.data() + line.size();
      for (double& coord : xyz) {
        while (p < end && *p == ' ') ++p;
        auto res = std::from_chars(p, end, coord);
        if (res.ec != std::errc()) {
          fail(Errc::ParseError,
               "bad vertex on OBJ line " + std::to_string(lineno));
        }
        p = res.ptr;
      }
      mesh.vertices.push_back({xyz[0], xyz[1], xyz[2]});
    } else if (line[0] == 'f' && (line[1] == ' ' || line[1] == '\t')) {
      std::array<int, 3> idx{};
      const char* p = line.data() + 2;
      const char* end = line.data() + line.size();
      int got = 0;
      while (p < end && got < 3) {
        while (p < end && *p == ' ') ++p;
        int v = 0;
        auto res = std::from_chars(p, end, v);
        if (res.ec != std::errc()) break;
        p = res.ptr;
        while (p < end && *p != ' ') ++p;  // skip /vt/vn suffix
        int n = int(mesh.vertices.size());
        if (v < 0) v = n + v + 1;
        if (v < 1 || v > n) {
          fail(Errc::ParseError,
               "face index out of range on OBJ line " + std::to_string(lineno));
        }
        idx[size_t(got++)] = v - 1;
      }
      if (got != 3) {
        fail(Errc::ParseError,
             "expected triangle on OBJ line " + std::to_string(lineno));
      }
      mesh.triangles.push_back(idx);
    }
  }
  return mesh;
}

inline uint64_t mesh_content_hash(const TriMesh& m) {
  std::string bytes = write_obj(m);
  return fnv1a64(bytes);
}

}  // namespace sageforge
