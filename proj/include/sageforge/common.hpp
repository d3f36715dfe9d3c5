#pragma once
// Shared plumbing: error codes, deterministic RNG, FNV hashing, id strings,
// and atomic file IO. Everything here is header-only and dependency-free.

#include <array>
#include <cstdint>
#include <cstdio>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace sageforge {

// ---------------------------------------------------------------------------
// Errors

enum class Errc {
  EmptyMesh,
  ParseError,
  UnknownCategory,
  NonPositiveHeight,
  DegenerateVolume,
  NoFreeSpace,
  DanglingAnchor,
  NoSupportBelow,
  ObjectNotFound,
  MoveFailed,
  DuplicateName,
  BindFailure,
  UnknownRoomType,
  Unreachable,
  TooWide,
  NoTopSurface,
  StartOccupied,
  GoalOccupied,
  NoPath,
  TrajectoryCollision,
  InvalidArgument,
};

inline const char* errc_name(Errc c) {
  switch (c) {
    case Errc::EmptyMesh: return "EmptyMesh";
    case Errc::ParseError: return "ParseError";
    case Errc::UnknownCategory: return "UnknownCategory";
    case Errc::NonPositiveHeight: return "NonPositiveHeight";
    case Errc::DegenerateVolume: return "DegenerateVolume";
    case Errc::NoFreeSpace: return "NoFreeSpace";
    case Errc::DanglingAnchor: return "DanglingAnchor";
    case Errc::NoSupportBelow: return "NoSupportBelow";
    case Errc::ObjectNotFound: return "ObjectNotFound";
    case Errc::MoveFailed: return "MoveFailed";
    case Errc::DuplicateName: return "DuplicateName";
    case Errc::BindFailure: return "BindFailure";
    case Errc::UnknownRoomType: return "UnknownRoomType";
    case Errc::Unreachable: return "Unreachable";
    case Errc::TooWide: return "TooWide";
    case Errc::NoTopSurface: return "NoTopSurface";
    case Errc::StartOccupied: return "StartOccupied";
    case Errc::GoalOccupied: return "GoalOccupied";
    case Errc::NoPath: return "NoPath";
    case Errc::TrajectoryCollision: return "TrajectoryCollision";
    case Errc::InvalidArgument: return "InvalidArgument";
  }
  return "Unknown";
}

// Reverse of errc_name; unknown names map to InvalidArgument.
inline Errc errc_from_name(const std::string& name) {
  for (int i = 0; i <= int(Errc::InvalidArgument); ++i)
    if (name == errc_name(Errc(i))) return Errc(i);
  return Errc::InvalidArgument;
}

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& msg)
      : std::runtime_error(std::string(errc_name(code)) + ": " + msg),
        code_(code) {}
  Errc code() const { return code_; }

 private:
  Errc code_;
};

[[noreturn]] inline void fail(Errc c, const std::string& msg) {
  throw Error(c, msg);
}

// ---------------------------------------------------------------------------
// Hashing (FNV-1a, 64 bit). Used for content hashes and id derivation; not
// cryptographic and not meant to be.

inline uint64_t fnv1a64(std::string_view bytes, uint64_t seed = 0xcbf29ce484222325ull) {
  uint64_t h = seed;
  for (unsigned char b : bytes) {
    h ^= b;
    h *= 0x100000001b3ull;
  }
  return h;
}

inline uint64_t hash_mix(uint64_t a, uint64_t b) {
  // splitmix64 finalizer over the xor; good avalanche for composing hashes.
  uint64_t z = a ^ (b + 0x9e3779b97f4a7c15ull + (a << 6) + (a >> 2));
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

inline std::string hex64(uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
  return std::string(buf);
}

// Eight lowercase hex chars; the scene keeps ids unique by re-rolling on the
// rare 32-bit collision.
inline std::string hex_id(uint64_t v) {
  char buf[9];
  std::snprintf(buf, sizeof(buf), "%08x", static_cast<unsigned>(v & 0xffffffffull));
  return std::string(buf);
}

// ---------------------------------------------------------------------------
// Deterministic RNG. splitmix64 core with hand-rolled uniforms so streams are
// stable across platforms and standard-library versions.

class Rng {
 public:
  explicit Rng(uint64_t seed = 0) : state_(seed) {}

  uint64_t next() {
    state_ += 0x9e3779b97f4a7c15ull;
    uint64_t z = state_;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
  }

  // Uniform in [0, 1).
  double uniform() { return double(next() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Uniform integer in [lo, hi] inclusive.
  int64_t uniform_int(int64_t lo, int64_t hi) {
    if (hi <= lo) return lo;
    uint64_t span = uint64_t(hi - lo) + 1;
    return lo + int64_t(next() % span);
  }

  template <typename T>
  const T& pick(const std::vector<T>& v) {
    if (v.empty()) fail(Errc::InvalidArgument, "Rng::pick on empty vector");
    return v[size_t(uniform_int(0, int64_t(v.size()) - 1))];
  }

  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (size_t i = v.size(); i > 1; --i) {
      size_t j = size_t(uniform_int(0, int64_t(i) - 1));
      std::swap(v[i - 1], v[j]);
    }
  }

 private:
  uint64_t state_;
};

// ---------------------------------------------------------------------------
// File IO

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(Errc::ParseError, "cannot open file: " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Write to a sibling temp file and rename so readers never observe a partial
// file and repeated runs are byte-stable.
inline void write_file_atomic(const std::filesystem::path& path,
                              std::string_view bytes) {
  namespace fs = std::filesystem;
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) fail(Errc::InvalidArgument, "cannot write file: " + tmp.string());
    out.write(bytes.data(), std::streamsize(bytes.size()));
  }
  fs::rename(tmp, path);
}

constexpr double kPi = 3.14159265358979323846;

inline double deg2rad(double d) { return d * kPi / 180.0; }
inline double rad2deg(double r) { return r * 180.0 / kPi; }

// Normalize an angle to (-pi, pi].
inline double wrap_angle(double a) {
  while (a > kPi) a -= 2 * kPi;
  while (a <= -kPi) a += 2 * kPi;
  return a;
}

inline std::string lowercase(std::string_view s) {
  std::string out(s);
  for (char& c : out)
    if (c >= 'A' && c <= 'Z') c = char(c - 'A' + 'a');
  return out;
}

inline std::string trim(std::string_view s) {
  size_t a = 0, b = s.size();
  while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
  while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
  return std::string(s.substr(a, b - a));
}

}  // namespace sageforge
