#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace stentflow {

struct Point {
  double x = 0.0;
  double y = 0.0;

  friend Point operator+(Point a, Point b) { return {a.x + b.x, a.y + b.y}; }
  friend Point operator-(Point a, Point b) { return {a.x - b.x, a.y - b.y}; }
  friend Point operator*(double s, Point a) { return {s * a.x, s * a.y}; }
  friend bool operator==(Point a, Point b) = default;
};

using Vec2 = Point;

inline double dot(Vec2 a, Vec2 b) { return a.x * b.x + a.y * b.y; }
inline double norm(Vec2 a) { return std::hypot(a.x, a.y); }
inline double distance(Point a, Point b) { return norm(a - b); }

/// Boundary and interface markers carried by mesh edges.
enum class BoundaryTag : std::uint8_t {
  GammaIn,
  GammaOut1,
  GammaOut2,
  Gamma1,    // top wall x2 = 1
  Gamma2,    // lateral walls of the lower channel (and its bottom in the sac case)
  GammaEps,  // obstacle boundaries
  Gamma0,    // fictitious interface x2 = 0
  StripLeft,
  StripRight,
  StripTop,
  StripBottom,
  Sigma,     // strip interface y2 = 0
};

inline constexpr std::array<BoundaryTag, 12> kAllTags = {
    BoundaryTag::GammaIn,   BoundaryTag::GammaOut1, BoundaryTag::GammaOut2,
    BoundaryTag::Gamma1,    BoundaryTag::Gamma2,    BoundaryTag::GammaEps,
    BoundaryTag::Gamma0,    BoundaryTag::StripLeft, BoundaryTag::StripRight,
    BoundaryTag::StripTop,  BoundaryTag::StripBottom, BoundaryTag::Sigma};

std::string_view to_string(BoundaryTag tag);
std::optional<BoundaryTag> tag_from_string(std::string_view name);

/// Interface tags mark interior mesh lines, never the domain boundary.
inline bool is_interface_tag(BoundaryTag t) {
  return t == BoundaryTag::Gamma0 || t == BoundaryTag::Sigma;
}

enum class FlowCase : std::uint8_t { Collateral, Aneurysm };

std::string_view to_string(FlowCase c);
std::optional<FlowCase> flow_case_from_string(std::string_view name);

/// Base class of every error the core throws; `kind()` is a stable identifier.
class Error : public std::runtime_error {
 public:
  Error(std::string kind, const std::string& what)
      : std::runtime_error(what), kind_(std::move(kind)) {}
  const std::string& kind() const { return kind_; }

 private:
  std::string kind_;
};

/// Bad inputs detected before any numerics run.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Failures of the numerical pipeline (meshing, solving, point location).
class NumericalError : public Error {
 public:
  using Error::Error;
};

}  // namespace stentflow
