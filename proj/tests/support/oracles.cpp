#include "tsv_testing/oracles.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace tsv::testing {
namespace {

using Real = long double;

struct Cubic {
  Real i1, i2, i3;  // x^3 - i1 x^2 + i2 x - i3
  Real operator()(Real x) const { return ((x - i1) * x + i2) * x - i3; }
};

Real bisect(const Cubic& p, Real lo, Real hi) {
  Real flo = p(lo);
  for (int it = 0; it < 200; ++it) {
    const Real mid = 0.5L * (lo + hi);
    const Real fm = p(mid);
    if (fm == 0) return mid;
    if ((fm < 0) == (flo < 0)) {
      lo = mid;
      flo = fm;
    } else {
      hi = mid;
    }
  }
  return 0.5L * (lo + hi);
}

}  // namespace

std::array<double, 3> characteristic_roots(const StressTensor& t) {
  const Real a = t.sxx, b = t.syy, c = t.szz, d = t.txy, e = t.tyz, f = t.txz;
  Cubic p{a + b + c, a * b + b * c + a * c - d * d - e * e - f * f,
          a * b * c + 2 * d * e * f - a * e * e - b * f * f - c * d * d};
  // Gershgorin bound on all roots.
  const Real bound = 1 + std::max({std::fabs(a) + std::fabs(d) + std::fabs(f),
                                   std::fabs(b) + std::fabs(d) + std::fabs(e),
                                   std::fabs(c) + std::fabs(e) + std::fabs(f)});
  // Critical points of the cubic: 3x^2 - 2 i1 x + i2 = 0.
  const Real disc = std::max<Real>(0, p.i1 * p.i1 - 3 * p.i2);
  const Real s = std::sqrt(disc);
  const Real x1 = (p.i1 - s) / 3;
  const Real x2 = (p.i1 + s) / 3;
  std::array<Real, 3> roots;
  // Largest root in [x2, bound], smallest in [-bound, x1], middle in [x1, x2].
  roots[0] = p(x2) >= 0 ? x2 : bisect(p, x2, bound);
  roots[2] = p(x1) <= 0 ? x1 : bisect(p, -bound, x1);
  if (x2 - x1 <= 0) {
    roots[1] = x1;
  } else {
    const Real f1 = p(x1), f2 = p(x2);
    if (f1 <= 0) {
      roots[1] = x1;
    } else if (f2 >= 0) {
      roots[1] = x2;
    } else {
      roots[1] = bisect(p, x1, x2);
    }
  }
  std::array<double, 3> out{static_cast<double>(roots[0]), static_cast<double>(roots[1]),
                            static_cast<double>(roots[2])};
  std::sort(out.begin(), out.end(), std::greater<>());
  return out;
}

double trilinear_reference(const std::array<double, 8>& values, double u, double v, double w) {
  // Interpolate along x, then y, then z.
  auto lerp = [](double a, double b, double s) { return a + s * (b - a); };
  const double c00 = lerp(values[0], values[1], u);
  const double c10 = lerp(values[2], values[3], u);
  const double c01 = lerp(values[4], values[5], u);
  const double c11 = lerp(values[6], values[7], u);
  return lerp(lerp(c00, c10, v), lerp(c01, c11, v), w);
}

std::pair<Vec2, Vec2> tangency_by_scan(const Vec2& c, double w) {
  // Viewing angle of p(phi) relative to the direction from c to the origin;
  // the tangency points are its maximum and minimum.
  const double base = std::atan2(-c[1], -c[0]);
  auto view = [&](double phi) {
    const double x = w * std::cos(phi) - c[0];
    const double y = std::sin(phi) - c[1];
    double a = std::atan2(y, x) - base;
    while (a > std::numbers::pi) a -= 2 * std::numbers::pi;
    while (a < -std::numbers::pi) a += 2 * std::numbers::pi;
    return a;
  };
  constexpr int kSamples = 20000;
  int imax = 0, imin = 0;
  double vmax = -1e300, vmin = 1e300;
  for (int i = 0; i < kSamples; ++i) {
    const double phi = 2 * std::numbers::pi * i / kSamples;
    const double v = view(phi);
    if (v > vmax) {
      vmax = v;
      imax = i;
    }
    if (v < vmin) {
      vmin = v;
      imin = i;
    }
  }
  auto refine = [&](int i, double sign) {
    double lo = 2 * std::numbers::pi * (i - 1) / kSamples;
    double hi = 2 * std::numbers::pi * (i + 1) / kSamples;
    for (int it = 0; it < 200; ++it) {
      const double m1 = lo + (hi - lo) / 3;
      const double m2 = hi - (hi - lo) / 3;
      if (sign * view(m1) < sign * view(m2)) {
        lo = m1;
      } else {
        hi = m2;
      }
    }
    const double phi = 0.5 * (lo + hi);
    return Vec2{w * std::cos(phi), std::sin(phi)};
  };
  return {refine(imax, 1.0), refine(imin, -1.0)};
}

StressTensor random_tensor(std::mt19937_64& rng, double scale) {
  std::uniform_real_distribution<double> u(-scale, scale);
  return {u(rng), u(rng), u(rng), u(rng), u(rng), u(rng)};
}

std::array<Vec3, 3> random_rotation(std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  // Random unit quaternion.
  double q[4];
  double n = 0;
  for (double& x : q) {
    x = g(rng);
    n += x * x;
  }
  n = std::sqrt(n);
  for (double& x : q) x /= n;
  const double w = q[0], x = q[1], y = q[2], z = q[3];
  return {Vec3{1 - 2 * (y * y + z * z), 2 * (x * y - z * w), 2 * (x * z + y * w)},
          Vec3{2 * (x * y + z * w), 1 - 2 * (x * x + z * z), 2 * (y * z - x * w)},
          Vec3{2 * (x * z - y * w), 2 * (y * z + x * w), 1 - 2 * (x * x + y * y)}};
}

StressTensor rotate(const StressTensor& t, const std::array<Vec3, 3>& r) {
  // R T R^T
  const auto m = t.matrix();
  double out[3][3];
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) {
      double s = 0;
      for (int k = 0; k < 3; ++k)
        for (int l = 0; l < 3; ++l) s += r[i][k] * m[k][l] * r[j][l];
      out[i][j] = s;
    }
  return {out[0][0], out[1][1], out[2][2], out[0][1], out[1][2], out[0][2]};
}

std::size_t spacing_violations(const PslSet& set) {
  std::size_t bad = 0;
  for (std::size_t i = 0; i < set.seeds.size(); ++i) {
    const SeedEvent& ev = set.seeds[i];
    if (ev.initial) continue;
    const int t = index_of(ev.type);
    const double eps = set.thresholds[static_cast<std::size_t>(ev.level - 1)][t];
    double closest = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < i; ++j) {
      const Psl& prior = set.psls[static_cast<std::size_t>(set.extraction_order[j])];
      if (prior.type != ev.type) continue;
      for (const Vec3& q : prior.points) closest = std::min(closest, distance(q, ev.position));
    }
    if (closest < eps) ++bad;
  }
  return bad;
}

std::vector<int> ids_up_to_level(const PslSet& set, int k) {
  std::vector<int> out;
  for (const Psl& p : set.psls) {
    if (p.level <= k) out.push_back(p.id);
  }
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace tsv::testing
