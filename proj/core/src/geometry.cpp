#include "tsv/geometry.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "tsv/errors.hpp"

namespace tsv {
namespace {

constexpr double kAlignmentFloor = 1e-8;

Vec3 any_perpendicular(const Vec3& t) {
  const Vec3 axis = std::fabs(t.x) < 0.9 ? Vec3{1, 0, 0} : Vec3{0, 1, 0};
  return normalized(axis - dot(axis, t) * t);
}

using Hom = std::array<double, 3>;
using Mat3 = std::array<std::array<double, 3>, 3>;

Hom hcross(const Hom& a, const Hom& b) {
  return {a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]};
}

double hnorm(const Hom& a) { return std::sqrt(a[0] * a[0] + a[1] * a[1] + a[2] * a[2]); }

Vec2 dehomogenize(const Hom& p) { return {p[0] / p[2], p[1] / p[2]}; }

double dist2d(const Vec2& a, const Vec2& b) { return std::hypot(a[0] - b[0], a[1] - b[1]); }

}  // namespace

PslType default_alignment(PslType traced) {
  return traced == PslType::medium ? PslType::major : PslType::medium;
}

FrameSeries compute_frames(const Psl& psl, PslType align) {
  const std::size_t n = psl.points.size();
  if (n < 2) throw DomainError("frames need a PSL with at least two points");
  if (psl.samples.size() != n) throw std::invalid_argument("PSL samples do not match points");
  FrameSeries frames(n);
  const auto& x = psl.points;
  Vec3 prev_t{};
  for (std::size_t i = 0; i < n; ++i) {
    const Vec3 diff = i == 0 ? x[1] - x[0] : (i + 1 == n ? x[i] - x[i - 1] : x[i + 1] - x[i - 1]);
    Vec3 t = normalized(diff);
    if (norm(t) == 0.0) t = i > 0 ? prev_t : Vec3{1, 0, 0};
    prev_t = t;

    const Vec3 a = psl.samples[i].principal.e[index_of(align)];
    const Vec3 projected = a - dot(a, t) * t;
    Vec3 normal;
    if (norm(projected) >= kAlignmentFloor) {
      normal = normalized(projected);
      if (i > 0 && dot(normal, frames[i - 1].n) < 0.0) normal = -normal;
    } else if (i > 0) {
      const Vec3& pn = frames[i - 1].n;
      normal = pn - dot(pn, t) * t;
      normal = norm(normal) >= kAlignmentFloor ? normalized(normal) : any_perpendicular(t);
    } else {
      normal = any_perpendicular(t);
    }
    frames[i] = {normal, cross(t, normal), t};
  }
  return frames;
}

Vec3 EllipticCrossSection::point(double phi) const {
  return center + radius * (dilation * std::cos(phi) * frame.n + std::sin(phi) * frame.b);
}

PointAttrs point_attrs(const PslSample& s) {
  return {s.principal.sigma[0], s.principal.sigma[1], s.principal.sigma[2], s.deg, s.von_mises};
}

TubeMesh tessellate_tube(const Psl& psl, const FrameSeries& frames, double r, double w,
                         int n_sides) {
  if (n_sides < 3) throw std::invalid_argument("a tube needs at least 3 sides");
  if (!(r > 0.0)) throw std::invalid_argument("tube radius must be positive");
  if (!(w > 0.0 && w <= 1.0)) throw std::invalid_argument("dilation must lie in (0, 1]");
  if (frames.size() != psl.points.size() || psl.points.size() < 2) {
    throw std::invalid_argument("frames must match a PSL with at least two points");
  }
  const std::size_t rings = psl.points.size();
  const auto sides = static_cast<std::size_t>(n_sides);
  TubeMesh mesh;
  const std::size_t nv = rings * sides + 2;
  mesh.vertices.reserve(nv);
  mesh.normals.reserve(nv);
  mesh.phi.reserve(nv);
  mesh.arc.reserve(nv);
  mesh.attrs.reserve(nv);

  std::vector<double> cos_phi(sides), sin_phi(sides), phi(sides);
  for (std::size_t k = 0; k < sides; ++k) {
    phi[k] = 2.0 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(sides);
    cos_phi[k] = std::cos(phi[k]);
    sin_phi[k] = std::sin(phi[k]);
  }

  double arc = 0.0;
  for (std::size_t i = 0; i < rings; ++i) {
    if (i > 0) arc += distance(psl.points[i - 1], psl.points[i]);
    const Frame& f = frames[i];
    const PointAttrs attrs = point_attrs(psl.samples[i]);
    for (std::size_t k = 0; k < sides; ++k) {
      mesh.vertices.push_back(psl.points[i] + r * (w * cos_phi[k] * f.n + sin_phi[k] * f.b));
      // Gradient of x^2/w^2 + y^2 at (w cos, sin), expressed in the frame.
      mesh.normals.push_back(normalized((cos_phi[k] / w) * f.n + sin_phi[k] * f.b));
      mesh.phi.push_back(phi[k]);
      mesh.arc.push_back(arc);
      mesh.attrs.push_back(attrs);
    }
  }
  const auto start_cap = static_cast<std::uint32_t>(rings * sides);
  const auto end_cap = start_cap + 1;
  mesh.vertices.push_back(psl.points.front());
  mesh.normals.push_back(-frames.front().t);
  mesh.phi.push_back(-1.0);
  mesh.arc.push_back(0.0);
  mesh.attrs.push_back(point_attrs(psl.samples.front()));
  mesh.vertices.push_back(psl.points.back());
  mesh.normals.push_back(frames.back().t);
  mesh.phi.push_back(-1.0);
  mesh.arc.push_back(arc);
  mesh.attrs.push_back(point_attrs(psl.samples.back()));

  auto vid = [&](std::size_t ring, std::size_t k) {
    return static_cast<std::uint32_t>(ring * sides + (k % sides));
  };
  mesh.triangles.reserve(2 * (rings - 1) * sides + 2 * sides);
  for (std::size_t i = 0; i + 1 < rings; ++i) {
    for (std::size_t k = 0; k < sides; ++k) {
      const auto a = vid(i, k), b = vid(i, k + 1), c = vid(i + 1, k), d = vid(i + 1, k + 1);
      mesh.triangles.push_back({a, b, c});
      mesh.triangles.push_back({b, d, c});
    }
  }
  for (std::size_t k = 0; k < sides; ++k) {
    mesh.triangles.push_back({start_cap, vid(0, k + 1), vid(0, k)});
    mesh.triangles.push_back({end_cap, vid(rings - 1, k), vid(rings - 1, k + 1)});
  }
  return mesh;
}

Vec2 project_camera(const Vec3& camera_world, const Vec3& center, const Frame& frame,
                    double radius) {
  Vec3 c = camera_world - center;
  c -= dot(c, frame.t) * frame.t;
  return {dot(c, frame.n) / radius, dot(c, frame.b) / radius};
}

std::pair<Vec2, Vec2> silhouette_tangent_points(const Vec2& c, double w) {
  if (!(w > 0.0)) throw std::invalid_argument("dilation must be positive");
  const double inv_w2 = 1.0 / (w * w);
  if (c[0] * c[0] * inv_w2 + c[1] * c[1] <= 1.0) {
    throw DomainError("camera lies inside the cross-section; silhouette undefined");
  }
  const std::array<double, 3> a_diag = {inv_w2, 1.0, -1.0};
  // Polar line of the camera.
  const Hom l = {inv_w2 * c[0], c[1], -1.0};
  const Mat3 ml = {{{0.0, l[2], -l[1]}, {-l[2], 0.0, l[0]}, {l[1], -l[0], 0.0}}};

  Mat3 b{};
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) {
      double s = 0.0;
      for (int k = 0; k < 3; ++k) s += ml[k][i] * a_diag[k] * ml[k][j];
      b[i][j] = s;
    }

  // tau: largest-magnitude entry of l, paired with the minor of B that omits
  // the same row and column.
  int k = 0;
  for (int i = 1; i < 3; ++i) {
    if (std::fabs(l[i]) > std::fabs(l[k])) k = i;
  }
  const int i0 = k == 0 ? 1 : 0;
  const int i1 = k == 2 ? 1 : 2;
  const double minor = b[i0][i0] * b[i1][i1] - b[i0][i1] * b[i1][i0];
  const double alpha = std::sqrt(std::max(0.0, -minor)) / l[k];

  Mat3 cm{};
  int bi = 0, bj = 0;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) {
      cm[i][j] = b[i][j] + alpha * ml[i][j];
      if (std::fabs(cm[i][j]) > std::fabs(cm[bi][bj])) {
        bi = i;
        bj = j;
      }
    }
  const Hom p = {cm[bi][0], cm[bi][1], cm[bi][2]};
  const Hom q = {cm[0][bj], cm[1][bj], cm[2][bj]};
  return {dehomogenize(p), dehomogenize(q)};
}

double silhouette_position(const Vec2& c, double w, const Vec2& p) {
  const auto [pmax, pmax2] = silhouette_tangent_points(c, w);
  if (dist2d(c, p) <= 1e-14 * (1.0 + std::hypot(c[0], c[1]))) {
    throw DomainError("surface point coincides with the camera");
  }
  const Hom ch = {c[0], c[1], 1.0};
  const Hom ph = {p[0], p[1], 1.0};
  const Hom l = {c[0] / (w * w), c[1], -1.0};
  const Hom meet = hcross(l, hcross(ch, ph));
  if (std::fabs(meet[2]) <= 1e-14 * hnorm(meet)) return 1.0;
  const Vec2 proj = dehomogenize(meet);
  const double pos = std::fabs(dist2d(proj, pmax) / dist2d(pmax2, pmax) * 2.0 - 1.0);
  return std::min(pos, 1.0);
}

}  // namespace tsv
