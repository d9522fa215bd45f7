#pragma once

#include <Eigen/Core>
#include <stdexcept>
#include <string>

namespace wulff2d {

using Index = Eigen::Index;

template <typename Scalar> using Vec2   = Eigen::Matrix<Scalar, 2, 1>;
template <typename Scalar> using VecX   = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
template <typename Scalar> using Mat2   = Eigen::Matrix<Scalar, 2, 2>;
template <typename Scalar> using MatX   = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
// One vertex per row, x in column 0, y in column 1.
template <typename Scalar> using Points = Eigen::Matrix<Scalar, Eigen::Dynamic, 2, Eigen::RowMajor>;

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct DegenerateLoop : Error { using Error::Error; };
struct SelfIntersection : Error { using Error::Error; };
struct OverlappingComponents : Error { using Error::Error; };
struct NonUnitNormal : Error { using Error::Error; };
struct NonSmoothAnisotropy : Error { using Error::Error; };
struct NonConvexSample : Error { using Error::Error; };
struct DimensionMismatch : Error { using Error::Error; };
struct SolverFailure : Error { using Error::Error; };
struct StepTooLarge : Error { using Error::Error; };

// Rotate by -90 degrees: maps the unit tangent of a ccw loop to the outward normal.
template <typename Scalar>
inline Vec2<Scalar> rot_cw(const Vec2<Scalar>& v) {
  return Vec2<Scalar>(v.y(), -v.x());
}

// Rotate by +90 degrees.
template <typename Scalar>
inline Vec2<Scalar> rot_ccw(const Vec2<Scalar>& v) {
  return Vec2<Scalar>(-v.y(), v.x());
}

template <typename Scalar>
inline Scalar cross2(const Vec2<Scalar>& a, const Vec2<Scalar>& b) {
  return a.x() * b.y() - a.y() * b.x();
}

// Portable uniform double in [0,1) from any 64-bit engine; the standard
// distributions are implementation-defined, this is not.
template <typename Rng>
inline double runif(Rng& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

}  // namespace wulff2d
