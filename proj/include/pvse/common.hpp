#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace pvse {

/// Error categories used across the library. Each maps to one failure mode
/// named in the public API contracts.
enum class ErrorCode {
  EmptyMask,
  NoInterface,
  DimensionMismatch,
  StepTooLarge,
  KindMismatch,
  DegenerateRegion,
  EmptyBand,
  Diverged,
  InsufficientSnapshots,
  InsufficientCrossings,
  EmptySet,
  BothEmpty,
  EmptyList,
  UsageError,
  ConfigError,
  IoError,
};

inline const char* error_code_name(ErrorCode c) {
  switch (c) {
    case ErrorCode::EmptyMask: return "EmptyMask";
    case ErrorCode::NoInterface: return "NoInterface";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::StepTooLarge: return "StepTooLarge";
    case ErrorCode::KindMismatch: return "KindMismatch";
    case ErrorCode::DegenerateRegion: return "DegenerateRegion";
    case ErrorCode::EmptyBand: return "EmptyBand";
    case ErrorCode::Diverged: return "Diverged";
    case ErrorCode::InsufficientSnapshots: return "InsufficientSnapshots";
    case ErrorCode::InsufficientCrossings: return "InsufficientCrossings";
    case ErrorCode::EmptySet: return "EmptySet";
    case ErrorCode::BothEmpty: return "BothEmpty";
    case ErrorCode::EmptyList: return "EmptyList";
    case ErrorCode::UsageError: return "UsageError";
    case ErrorCode::ConfigError: return "ConfigError";
    case ErrorCode::IoError: return "IoError";
  }
  return "Unknown";
}

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(error_code_name(code)) + ": " + what),
        code_(code) {}
  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

struct Vec2 {
  double x = 0.0;
  double y = 0.0;

  Vec2() = default;
  Vec2(double x_, double y_) : x(x_), y(y_) {}

  Vec2 operator+(const Vec2& o) const { return {x + o.x, y + o.y}; }
  Vec2 operator-(const Vec2& o) const { return {x - o.x, y - o.y}; }
  Vec2 operator*(double s) const { return {x * s, y * s}; }
  Vec2 operator/(double s) const { return {x / s, y / s}; }
  Vec2& operator+=(const Vec2& o) { x += o.x; y += o.y; return *this; }
  Vec2& operator-=(const Vec2& o) { x -= o.x; y -= o.y; return *this; }

  double dot(const Vec2& o) const { return x * o.x + y * o.y; }
  double norm() const { return std::hypot(x, y); }
  double norm2() const { return x * x + y * y; }
  /// Rotation by +90 degrees (counter-clockwise with y up).
  Vec2 perp() const { return {-y, x}; }
};

inline Vec2 operator*(double s, const Vec2& v) { return {s * v.x, s * v.y}; }

/// Row-major 2x2 matrix.
struct Mat2 {
  double a = 1.0, b = 0.0;
  double c = 0.0, d = 1.0;

  Mat2() = default;
  Mat2(double a_, double b_, double c_, double d_) : a(a_), b(b_), c(c_), d(d_) {}

  static Mat2 identity() { return {1, 0, 0, 1}; }
  static Mat2 rotation(double angle) {
    const double co = std::cos(angle), si = std::sin(angle);
    return {co, -si, si, co};
  }
  static Mat2 diag(double sx, double sy) { return {sx, 0, 0, sy}; }

  Vec2 apply(const Vec2& v) const { return {a * v.x + b * v.y, c * v.x + d * v.y}; }
  Mat2 mul(const Mat2& o) const {
    return {a * o.a + b * o.c, a * o.b + b * o.d,
            c * o.a + d * o.c, c * o.b + d * o.d};
  }
  double det() const { return a * d - b * c; }
  Mat2 inverse() const {
    const double dt = det();
    return {d / dt, -b / dt, -c / dt, a / dt};
  }
  Mat2 transpose() const { return {a, c, b, d}; }
};

/// Affine map x -> A x + t. Used for world<->normalized coordinate changes
/// and for shape alignment transforms.
struct AffineMap2 {
  Mat2 linear;
  Vec2 offset;

  static AffineMap2 identity() { return {Mat2::identity(), {0, 0}}; }

  Vec2 apply(const Vec2& v) const { return linear.apply(v) + offset; }
  AffineMap2 inverse() const {
    const Mat2 inv = linear.inverse();
    return {inv, inv.apply(offset) * -1.0};
  }
  /// this ∘ other (apply other first).
  AffineMap2 compose(const AffineMap2& other) const {
    return {linear.mul(other.linear), linear.apply(other.offset) + offset};
  }
};

constexpr double kPi = 3.14159265358979323846;

}  // namespace pvse
