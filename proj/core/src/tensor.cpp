#include "tsv/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

#include "tsv/errors.hpp"

namespace tsv {
namespace {

using Mat3 = std::array<std::array<double, 3>, 3>;

Vec3 row(const Mat3& m, int i) { return {m[i][0], m[i][1], m[i][2]}; }

Vec3 mul(const Mat3& m, const Vec3& v) {
  return {dot(row(m, 0), v), dot(row(m, 1), v), dot(row(m, 2), v)};
}

// Unit eigenvector for a simple eigenvalue: the null space of (A - lambda I)
// is spanned by the longest cross product of two of its rows.
Vec3 null_vector_from_rows(const Mat3& a, double lambda) {
  const Vec3 r0{a[0][0] - lambda, a[0][1], a[0][2]};
  const Vec3 r1{a[1][0], a[1][1] - lambda, a[1][2]};
  const Vec3 r2{a[2][0], a[2][1], a[2][2] - lambda};
  const Vec3 c01 = cross(r0, r1);
  const Vec3 c02 = cross(r0, r2);
  const Vec3 c12 = cross(r1, r2);
  const double d01 = squared_norm(c01);
  const double d02 = squared_norm(c02);
  const double d12 = squared_norm(c12);
  Vec3 best = c01;
  double dmax = d01;
  if (d02 > dmax) {
    best = c02;
    dmax = d02;
  }
  if (d12 > dmax) {
    best = c12;
    dmax = d12;
  }
  if (dmax <= 0.0) return {1.0, 0.0, 0.0};
  return best / std::sqrt(dmax);
}

void orthogonal_complement(const Vec3& w, Vec3& u, Vec3& v) {
  if (std::fabs(w.x) > std::fabs(w.y)) {
    const double inv = 1.0 / std::sqrt(w.x * w.x + w.z * w.z);
    u = {-w.z * inv, 0.0, w.x * inv};
  } else {
    const double inv = 1.0 / std::sqrt(w.y * w.y + w.z * w.z);
    u = {0.0, w.z * inv, -w.y * inv};
  }
  v = cross(w, u);
}

// Eigenvector for `lambda` restricted to the plane orthogonal to a known
// eigenvector `v0`. Solves the 2x2 projected problem.
Vec3 eigenvector_in_complement(const Mat3& a, const Vec3& v0, double lambda) {
  Vec3 u;
  Vec3 v;
  orthogonal_complement(v0, u, v);
  const Vec3 au = mul(a, u);
  const Vec3 av = mul(a, v);
  double m00 = dot(u, au) - lambda;
  double m01 = dot(u, av);
  double m11 = dot(v, av) - lambda;
  const double a00 = std::fabs(m00);
  const double a01 = std::fabs(m01);
  const double a11 = std::fabs(m11);
  if (a00 >= a11) {
    if (std::max(a00, a01) <= 0.0) return u;
    if (a00 >= a01) {
      m01 /= m00;
      m00 = 1.0 / std::sqrt(1.0 + m01 * m01);
      m01 *= m00;
    } else {
      m00 /= m01;
      m01 = 1.0 / std::sqrt(1.0 + m00 * m00);
      m00 *= m01;
    }
    return normalized(m01 * u - m00 * v);
  }
  if (std::max(a11, a01) <= 0.0) return u;
  if (a11 >= a01) {
    m01 /= m11;
    m11 = 1.0 / std::sqrt(1.0 + m01 * m01);
    m01 *= m11;
  } else {
    m11 /= m01;
    m01 = 1.0 / std::sqrt(1.0 + m11 * m11);
    m11 *= m01;
  }
  return normalized(m11 * u - m01 * v);
}

struct RawEigen {
  std::array<double, 3> values;
  std::array<Vec3, 3> vectors;
};

RawEigen identity_eigen(double value) {
  return {{value, value, value}, {Vec3{1, 0, 0}, Vec3{0, 1, 0}, Vec3{0, 0, 1}}};
}

// Trigonometric solution of the characteristic cubic followed by the
// cross-product / projected 2x2 eigenvector construction.
RawEigen closed_form(const Mat3& a) {
  const double q = (a[0][0] + a[1][1] + a[2][2]) / 3.0;
  const double b00 = a[0][0] - q;
  const double b11 = a[1][1] - q;
  const double b22 = a[2][2] - q;
  const double b01 = a[0][1];
  const double b02 = a[0][2];
  const double b12 = a[1][2];
  const double p2 =
      (b00 * b00 + b11 * b11 + b22 * b22 + 2.0 * (b01 * b01 + b02 * b02 + b12 * b12)) / 6.0;
  if (p2 <= 1e-300) return identity_eigen(q);
  const double p = std::sqrt(p2);
  const double c00 = b00 / p, c11 = b11 / p, c22 = b22 / p;
  const double c01 = b01 / p, c02 = b02 / p, c12 = b12 / p;
  const double det = c00 * (c11 * c22 - c12 * c12) - c01 * (c01 * c22 - c12 * c02) +
                     c02 * (c01 * c12 - c11 * c02);
  const double half_det = std::clamp(0.5 * det, -1.0, 1.0);
  const double phi = std::acos(half_det) / 3.0;
  const double lmax = q + 2.0 * p * std::cos(phi);
  const double lmin = q + 2.0 * p * std::cos(phi + 2.0 * std::numbers::pi / 3.0);
  const double lmid = 3.0 * q - lmax - lmin;

  RawEigen out;
  if (half_det >= 0.0) {
    const Vec3 vmax = null_vector_from_rows(a, lmax);
    const Vec3 vmid = eigenvector_in_complement(a, vmax, lmid);
    out.vectors = {vmax, vmid, normalized(cross(vmax, vmid))};
  } else {
    const Vec3 vmin = null_vector_from_rows(a, lmin);
    const Vec3 vmid = eigenvector_in_complement(a, vmin, lmid);
    out.vectors = {normalized(cross(vmid, vmin)), vmid, vmin};
  }
  for (int k = 0; k < 3; ++k) out.values[k] = dot(out.vectors[k], mul(a, out.vectors[k]));
  return out;
}

bool acceptable(const Mat3& a, const RawEigen& r) {
  constexpr double kResidualTol = 1e-11;
  constexpr double kOrthoTol = 1e-12;
  for (int k = 0; k < 3; ++k) {
    const Vec3& v = r.vectors[k];
    if (!std::isfinite(v.x) || !std::isfinite(v.y) || !std::isfinite(v.z)) return false;
    if (std::fabs(norm(v) - 1.0) > kOrthoTol) return false;
    if (norm(mul(a, v) - r.values[k] * v) > kResidualTol) return false;
    for (int j = k + 1; j < 3; ++j) {
      if (std::fabs(dot(v, r.vectors[j])) > kOrthoTol) return false;
    }
  }
  return true;
}

RawEigen jacobi(Mat3 a) {
  Mat3 v{{{1, 0, 0}, {0, 1, 0}, {0, 0, 1}}};
  for (int sweep = 0; sweep < 64; ++sweep) {
    const double off = a[0][1] * a[0][1] + a[0][2] * a[0][2] + a[1][2] * a[1][2];
    if (off == 0.0) break;
    for (int p = 0; p < 2; ++p) {
      for (int q = p + 1; q < 3; ++q) {
        if (a[p][q] == 0.0) continue;
        const double theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
        const double t = (theta >= 0.0 ? 1.0 : -1.0) /
                         (std::fabs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (int k = 0; k < 3; ++k) {
          const double akp = a[k][p];
          const double akq = a[k][q];
          a[k][p] = c * akp - s * akq;
          a[k][q] = s * akp + c * akq;
        }
        for (int k = 0; k < 3; ++k) {
          const double apk = a[p][k];
          const double aqk = a[q][k];
          a[p][k] = c * apk - s * aqk;
          a[q][k] = s * apk + c * aqk;
        }
        for (int k = 0; k < 3; ++k) {
          const double vkp = v[k][p];
          const double vkq = v[k][q];
          v[k][p] = c * vkp - s * vkq;
          v[k][q] = s * vkp + c * vkq;
        }
      }
    }
  }
  RawEigen out;
  for (int k = 0; k < 3; ++k) {
    out.values[k] = a[k][k];
    out.vectors[k] = normalized(Vec3{v[0][k], v[1][k], v[2][k]});
  }
  return out;
}

void canonicalize_sign(Vec3& v) {
  int imax = 0;
  for (int i = 1; i < 3; ++i) {
    if (std::fabs(v[i]) > std::fabs(v[imax])) imax = i;
  }
  if (v[imax] < 0.0) v = -v;
}

PrincipalDecomposition finish(RawEigen raw, double scale) {
  std::array<int, 3> order{0, 1, 2};
  std::stable_sort(order.begin(), order.end(),
                   [&](int i, int j) { return raw.values[i] > raw.values[j]; });
  PrincipalDecomposition d;
  for (int k = 0; k < 3; ++k) {
    d.sigma[k] = raw.values[order[k]] * scale;
    d.e[k] = raw.vectors[order[k]];
    canonicalize_sign(d.e[k]);
  }
  d.deg12 = degeneracy(d.sigma[0], d.sigma[1]);
  d.deg23 = degeneracy(d.sigma[1], d.sigma[2]);
  return d;
}

double check_and_scale(const StressTensor& t, Mat3& scaled) {
  double scale = 0.0;
  for (double c : t.components()) {
    if (!std::isfinite(c)) throw NumericError("stress tensor has a non-finite component");
    scale = std::max(scale, std::fabs(c));
  }
  scaled = t.matrix();
  if (scale > 0.0) {
    for (auto& r : scaled) {
      for (double& x : r) x /= scale;
    }
  }
  return scale;
}

}  // namespace

double frobenius_norm(const StressTensor& t) {
  return std::sqrt(t.sxx * t.sxx + t.syy * t.syy + t.szz * t.szz +
                   2.0 * (t.txy * t.txy + t.tyz * t.tyz + t.txz * t.txz));
}

PrincipalDecomposition decompose(const StressTensor& t) {
  Mat3 a;
  const double scale = check_and_scale(t, a);
  if (scale == 0.0) return finish(identity_eigen(0.0), 1.0);
  RawEigen raw = closed_form(a);
  if (!acceptable(a, raw)) raw = jacobi(a);
  return finish(raw, scale);
}

PrincipalDecomposition decompose_jacobi(const StressTensor& t) {
  Mat3 a;
  const double scale = check_and_scale(t, a);
  if (scale == 0.0) return finish(identity_eigen(0.0), 1.0);
  return finish(jacobi(a), scale);
}

double degeneracy(double sigma_i, double sigma_j) {
  constexpr double kRelativeFloor = 1e-12;
  constexpr double kAbsoluteFloor = 1e-300;
  const double denom = std::max(std::fabs(sigma_i + sigma_j),
                                kRelativeFloor * (std::fabs(sigma_i) + std::fabs(sigma_j) +
                                                  kAbsoluteFloor));
  const double num = 0.5 * std::fabs(sigma_i - sigma_j);
  return num == 0.0 ? 0.0 : num / denom;
}

double von_mises(const StressTensor& t) {
  const double dxy = t.sxx - t.syy;
  const double dyz = t.syy - t.szz;
  const double dzx = t.szz - t.sxx;
  return std::sqrt(0.5 * (dxy * dxy + dyz * dyz + dzx * dzx) +
                   3.0 * (t.txy * t.txy + t.tyz * t.tyz + t.txz * t.txz));
}

ScalarSelector parse_scalar_selector(std::string_view name) {
  if (name == "sigma1") return ScalarSelector::sigma1;
  if (name == "sigma2") return ScalarSelector::sigma2;
  if (name == "sigma3") return ScalarSelector::sigma3;
  if (name == "von_mises" || name == "vonMises" || name == "vonmises")
    return ScalarSelector::von_mises;
  if (name == "sxx") return ScalarSelector::sxx;
  if (name == "syy") return ScalarSelector::syy;
  if (name == "szz") return ScalarSelector::szz;
  if (name == "txy") return ScalarSelector::txy;
  if (name == "tyz") return ScalarSelector::tyz;
  if (name == "txz") return ScalarSelector::txz;
  throw std::invalid_argument("unknown scalar selector '" + std::string(name) + "'");
}

std::string_view to_string(ScalarSelector selector) {
  switch (selector) {
    case ScalarSelector::sigma1: return "sigma1";
    case ScalarSelector::sigma2: return "sigma2";
    case ScalarSelector::sigma3: return "sigma3";
    case ScalarSelector::von_mises: return "von_mises";
    case ScalarSelector::sxx: return "sxx";
    case ScalarSelector::syy: return "syy";
    case ScalarSelector::szz: return "szz";
    case ScalarSelector::txy: return "txy";
    case ScalarSelector::tyz: return "tyz";
    case ScalarSelector::txz: return "txz";
  }
  throw std::invalid_argument("unknown scalar selector");
}

double scalar_field(const StressTensor& t, const PrincipalDecomposition& d,
                    ScalarSelector which) {
  switch (which) {
    case ScalarSelector::sigma1: return d.sigma[0];
    case ScalarSelector::sigma2: return d.sigma[1];
    case ScalarSelector::sigma3: return d.sigma[2];
    case ScalarSelector::von_mises: return von_mises(t);
    case ScalarSelector::sxx: return t.sxx;
    case ScalarSelector::syy: return t.syy;
    case ScalarSelector::szz: return t.szz;
    case ScalarSelector::txy: return t.txy;
    case ScalarSelector::tyz: return t.tyz;
    case ScalarSelector::txz: return t.txz;
  }
  throw std::invalid_argument("unknown scalar selector");
}

double scalar_field(const StressTensor& t, ScalarSelector which) {
  switch (which) {
    case ScalarSelector::sigma1:
    case ScalarSelector::sigma2:
    case ScalarSelector::sigma3:
      return scalar_field(t, decompose(t), which);
    default:
      return scalar_field(t, PrincipalDecomposition{}, which);
  }
}

}  // namespace tsv
