#pragma once

#include <array>
#include <string_view>

#include "tsv/vec3.hpp"

namespace tsv {

/// Symmetric second-order stress tensor; off-diagonal terms are stored once.
struct StressTensor {
  double sxx = 0.0;
  double syy = 0.0;
  double szz = 0.0;
  double txy = 0.0;
  double tyz = 0.0;
  double txz = 0.0;

  static constexpr std::size_t kComponents = 6;

  static constexpr StressTensor diagonal(double a, double b, double c) {
    return {a, b, c, 0.0, 0.0, 0.0};
  }

  /// Row-major 3x3 matrix view.
  constexpr std::array<std::array<double, 3>, 3> matrix() const {
    return {{{sxx, txy, txz}, {txy, syy, tyz}, {txz, tyz, szz}}};
  }

  constexpr std::array<double, kComponents> components() const {
    return {sxx, syy, szz, txy, tyz, txz};
  }

  static constexpr StressTensor from_components(const std::array<double, kComponents>& c) {
    return {c[0], c[1], c[2], c[3], c[4], c[5]};
  }

  /// Matrix-vector product.
  constexpr Vec3 apply(const Vec3& v) const {
    return {sxx * v.x + txy * v.y + txz * v.z, txy * v.x + syy * v.y + tyz * v.z,
            txz * v.x + tyz * v.y + szz * v.z};
  }

  constexpr StressTensor& operator+=(const StressTensor& o) {
    sxx += o.sxx;
    syy += o.syy;
    szz += o.szz;
    txy += o.txy;
    tyz += o.tyz;
    txz += o.txz;
    return *this;
  }
  constexpr StressTensor& operator*=(double s) {
    sxx *= s;
    syy *= s;
    szz *= s;
    txy *= s;
    tyz *= s;
    txz *= s;
    return *this;
  }

  friend constexpr bool operator==(const StressTensor&, const StressTensor&) = default;
};

constexpr StressTensor operator+(StressTensor a, const StressTensor& b) { return a += b; }
constexpr StressTensor operator*(StressTensor a, double s) { return a *= s; }
constexpr StressTensor operator*(double s, StressTensor a) { return a *= s; }

/// Frobenius norm of the full (symmetric) matrix.
double frobenius_norm(const StressTensor& t);

/// Ordered principal stresses sigma[0] >= sigma[1] >= sigma[2] with unit
/// eigenvectors e[k]. Each e[k] has its largest-magnitude component positive.
struct PrincipalDecomposition {
  std::array<double, 3> sigma{};
  std::array<Vec3, 3> e{};
  double deg12 = 0.0;
  double deg23 = 0.0;
};

/// Eigen-analysis of a symmetric 3x3 tensor. Closed-form trigonometric
/// solution with a cyclic Jacobi fallback when the closed form loses accuracy.
/// Throws NumericError on non-finite input.
PrincipalDecomposition decompose(const StressTensor& t);

/// Cyclic Jacobi eigen-solver; exposed for testing the fallback path.
PrincipalDecomposition decompose_jacobi(const StressTensor& t);

/// Threshold below which two principal stresses count as degenerate.
inline constexpr double kDegeneracyThreshold = 1e-6;

/// deg = |si - sj| / (2 |si + sj|), with a clamped denominator so that an
/// equal-magnitude tension/compression pair yields a large (non-degenerate)
/// value instead of a division by zero.
double degeneracy(double sigma_i, double sigma_j);

inline bool is_degenerate(double deg) { return deg < kDegeneracyThreshold; }

double von_mises(const StressTensor& t);

enum class ScalarSelector {
  sigma1,
  sigma2,
  sigma3,
  von_mises,
  sxx,
  syy,
  szz,
  txy,
  tyz,
  txz,
};

/// Parses names such as "sigma1", "von_mises" (alias "vonMises"), "sxx".
/// Throws std::invalid_argument for anything else.
ScalarSelector parse_scalar_selector(std::string_view name);
std::string_view to_string(ScalarSelector selector);

double scalar_field(const StressTensor& t, ScalarSelector which);
/// Same as above, reusing an existing decomposition of t.
double scalar_field(const StressTensor& t, const PrincipalDecomposition& d, ScalarSelector which);

}  // namespace tsv
