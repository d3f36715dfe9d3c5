#pragma once

// Textual placement-constraint mini-language:
//   constraints := item (',' item)*
//   item        := 'near' '(' ref ',' meters ')'
//                | 'far' '(' ref ',' meters ')'
//                | 'facing' '(' ref [',' degrees] ')'
//                | 'aligned' '(' ref [',' degrees] ')'
//                | 'on' '(' ref ')'
//                | 'edge' | 'middle' | 'corner'
//   ref         := object id or free-text category (spaces allowed)
// Angular tolerances are written in degrees, stored in radians.

#include <charconv>
#include <cstdlib>
#include <string>
#include <vector>

#include "sageforge/common.hpp"

namespace sageforge {

enum class ConstraintKind {
  GlobalEdge,
  GlobalMiddle,
  GlobalCorner,
  NearObject,
  FarFrom,
  Facing,
  AlignedWith,
  OnTopOf,
};

struct Constraint {
  ConstraintKind kind{};
  std::string anchor;  // empty for the global kinds
  double param = 0;    // meters (near/far) or radians (facing/aligned)
  double weight = 1.0;
};

inline constexpr double kDefaultFacingTol = kPi / 12;    // 15 degrees
inline constexpr double kDefaultAlignedTol = kPi / 18;   // 10 degrees

inline const char* constraint_kind_name(ConstraintKind k) {
  switch (k) {
    case ConstraintKind::GlobalEdge: return "edge";
    case ConstraintKind::GlobalMiddle: return "middle";
    case ConstraintKind::GlobalCorner: return "corner";
    case ConstraintKind::NearObject: return "near";
    case ConstraintKind::FarFrom: return "far";
    case ConstraintKind::Facing: return "facing";
    case ConstraintKind::AlignedWith: return "aligned";
    case ConstraintKind::OnTopOf: return "on";
  }
  return "?";
}

namespace detail {

inline double parse_number(const std::string& s, const std::string& ctx) {
  std::string t = trim(s);
  if (t.empty()) fail(Errc::ParseError, "missing number in constraint '" + ctx + "'");
  const char* b = t.c_str();
  char* e = nullptr;
  double v = std::strtod(b, &e);
  if (e != b + t.size())
    fail(Errc::ParseError, "bad number '" + t + "' in constraint '" + ctx + "'");
  return v;
}

// Split on top-level commas (there is no nesting, so every comma outside
// parentheses is a separator).
inline std::vector<std::string> split_items(const std::string& text) {
  std::vector<std::string> items;
  std::string cur;
  int depth = 0;
  for (char ch : text) {
    if (ch == '(') ++depth;
    if (ch == ')') --depth;
    if (ch == ',' && depth == 0) {
      items.push_back(cur);
      cur.clear();
    } else {
      cur += ch;
    }
  }
  items.push_back(cur);
  return items;
}

}  // namespace detail

inline std::vector<Constraint> parse_constraints(const std::string& text) {
  std::vector<Constraint> out;
  if (trim(text).empty()) return out;
  for (const std::string& raw : detail::split_items(text)) {
    std::string item = trim(raw);
    if (item.empty()) fail(Errc::ParseError, "empty constraint item");
    size_t open = item.find('(');
    std::string head = lowercase(trim(open == std::string::npos ? item : item.substr(0, open)));
    std::vector<std::string> args;
    if (open != std::string::npos) {
      if (item.back() != ')')
        fail(Errc::ParseError, "missing ')' in constraint '" + item + "'");
      std::string inner = item.substr(open + 1, item.size() - open - 2);
      for (const std::string& a : detail::split_items(inner)) args.push_back(trim(a));
      if (args.size() == 1 && args[0].empty()) args.clear();
    }
    auto want = [&](size_t lo, size_t hi) {
      if (args.size() < lo || args.size() > hi)
        fail(Errc::ParseError, "wrong argument count in constraint '" + item + "'");
    };
    Constraint c;
    if (head == "edge" || head == "middle" || head == "corner") {
      want(0, 0);
      c.kind = head == "edge" ? ConstraintKind::GlobalEdge
               : head == "middle" ? ConstraintKind::GlobalMiddle
                                  : ConstraintKind::GlobalCorner;
    } else if (head == "near" || head == "far") {
      want(2, 2);
      c.kind = head == "near" ? ConstraintKind::NearObject : ConstraintKind::FarFrom;
      c.anchor = args[0];
      c.param = detail::parse_number(args[1], item);
      if (c.param <= 0) fail(Errc::ParseError, "distance must be > 0 in '" + item + "'");
    } else if (head == "facing" || head == "aligned") {
      want(1, 2);
      c.kind = head == "facing" ? ConstraintKind::Facing : ConstraintKind::AlignedWith;
      c.anchor = args[0];
      c.param = args.size() == 2 ? deg2rad(detail::parse_number(args[1], item))
               : head == "facing" ? kDefaultFacingTol
                                  : kDefaultAlignedTol;
      if (c.param <= 0) fail(Errc::ParseError, "tolerance must be > 0 in '" + item + "'");
    } else if (head == "on") {
      want(1, 1);
      c.kind = ConstraintKind::OnTopOf;
      c.anchor = args[0];
    } else {
      fail(Errc::ParseError, "unknown constraint '" + head + "'");
    }
    if (c.kind != ConstraintKind::GlobalEdge && c.kind != ConstraintKind::GlobalMiddle &&
        c.kind != ConstraintKind::GlobalCorner && c.anchor.empty())
      fail(Errc::ParseError, "missing anchor in constraint '" + item + "'");
    out.push_back(std::move(c));
  }
  return out;
}

inline std::string format_constraint_number(double v) {
  char buf[32];
  auto [p, ec] = std::to_chars(buf, buf + sizeof buf, v);
  (void)ec;
  return std::string(buf, p);
}

inline std::string constraint_to_string(const Constraint& c) {
  using K = ConstraintKind;
  std::string s = constraint_kind_name(c.kind);
  switch (c.kind) {
    case K::GlobalEdge:
    case K::GlobalMiddle:
    case K::GlobalCorner:
      return s;
    case K::NearObject:
    case K::FarFrom:
      return s + "(" + c.anchor + ", " + format_constraint_number(c.param) + ")";
    case K::Facing:
    case K::AlignedWith:
      return s + "(" + c.anchor + ", " + format_constraint_number(rad2deg(c.param)) + ")";
    case K::OnTopOf:
      return s + "(" + c.anchor + ")";
  }
  return s;
}

inline std::string constraints_to_string(const std::vector<Constraint>& cs) {
  std::string s;
  for (size_t i = 0; i < cs.size(); ++i) {
    if (i) s += ", ";
    s += constraint_to_string(cs[i]);
  }
  return s;
}

}  // namespace sageforge
