#pragma once

#include <array>
#include <cstdint>
#include <utility>
#include <vector>

#include "tsv/tracer.hpp"
#include "tsv/vec3.hpp"

namespace tsv {

/// Orthonormal right-handed frame (n, b, t) at one PSL point.
struct Frame {
  Vec3 n{};
  Vec3 b{};
  Vec3 t{};
};

using FrameSeries = std::vector<Frame>;

/// Frames whose normal follows the projected `align` eigenvector of each
/// sample, sign-aligned with the previous normal. Falls back to parallel
/// transport where the eigenvector is (nearly) tangent. Throws DomainError
/// for PSLs with fewer than two points.
FrameSeries compute_frames(const Psl& psl, PslType align);

/// Ribbon alignment used when none is requested: medium directions for major
/// and minor lines, major directions for medium lines.
PslType default_alignment(PslType traced);

struct EllipticCrossSection {
  Vec3 center{};
  Frame frame{};
  double radius = 1.0;
  double dilation = 1.0;  // w in (0, 1]

  /// x + r * (w cos(phi) n + sin(phi) b)
  Vec3 point(double phi) const;
};

/// Per-point scalar attributes carried into the tessellation.
struct PointAttrs {
  double sigma1 = 0.0;
  double sigma2 = 0.0;
  double sigma3 = 0.0;
  double deg = 0.0;
  double von_mises = 0.0;
};

PointAttrs point_attrs(const PslSample& s);

struct TubeMesh {
  std::vector<Vec3> vertices;
  std::vector<Vec3> normals;
  std::vector<double> phi;  // ring angle; -1 for cap centres
  std::vector<double> arc;  // arc length along the PSL
  std::vector<PointAttrs> attrs;
  std::vector<std::array<std::uint32_t, 3>> triangles;
};

inline constexpr int kLineSides = 16;
inline constexpr int kRibbonSides = 24;
inline constexpr double kMinBandThickness = 0.15;

/// Closed elliptic tube: one ring of n_sides vertices per PSL point, side
/// triangles between consecutive rings and flat fan caps at both ends.
/// Throws std::invalid_argument for n_sides < 3, r <= 0, or w outside (0, 1].
TubeMesh tessellate_tube(const Psl& psl, const FrameSeries& frames, double r, double w,
                         int n_sides);

using Vec2 = std::array<double, 2>;

/// Camera position in normalized cross-section coordinates: relative to the
/// ellipse centre, tangent component removed, scaled by 1/r so the ellipse is
/// x^2/w^2 + y^2 = 1 with x along n and y along b.
Vec2 project_camera(const Vec3& camera_world, const Vec3& center, const Frame& frame,
                    double radius = 1.0);

/// The two points of the ellipse x^2/w^2 + y^2 = 1 touched by tangents through
/// the camera `c`, obtained by intersecting the polar of c with the conic.
/// Throws DomainError when c is inside or on the ellipse.
std::pair<Vec2, Vec2> silhouette_tangent_points(const Vec2& c, double w);

/// |2 * |p' - p_max| / |p'_max - p_max| - 1| where p' is the intersection of
/// the polar with the line through c and p. Throws DomainError when p == c.
double silhouette_position(const Vec2& c, double w, const Vec2& p);

}  // namespace tsv
