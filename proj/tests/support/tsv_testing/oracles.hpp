#pragma once

#include <array>
#include <random>

#include "tsv/geometry.hpp"
#include "tsv/seeding.hpp"
#include "tsv/tensor.hpp"

namespace tsv::testing {

/// Roots of det(T - x I) = 0 in descending order, found by bracketing
/// between the critical points of the cubic and bisecting in long double.
std::array<double, 3> characteristic_roots(const StressTensor& t);

/// Independent per-component trilinear evaluation over the cube [0,1]^3 with
/// corner values in lexicographic (i, j, k) order: values[i + 2j + 4k].
double trilinear_reference(const std::array<double, 8>& values, double u, double v, double w);

/// The two points of x^2/w^2 + y^2 = 1 whose tangent passes through c, found
/// by scanning phi densely for extreme viewing angles and refining.
std::pair<Vec2, Vec2> tangency_by_scan(const Vec2& c, double w);

StressTensor random_tensor(std::mt19937_64& rng, double scale = 1.0);

/// Uniformly random rotation matrix (rows).
std::array<Vec3, 3> random_rotation(std::mt19937_64& rng);
StressTensor rotate(const StressTensor& t, const std::array<Vec3, 3>& r);

/// Replays the extraction order and counts non-initial seeds lying closer
/// than the threshold of their level to an earlier PSL of the same type
/// (distance to integration points, brute force).
std::size_t spacing_violations(const PslSet& set);

/// Ids of the PSLs with level <= k, sorted.
std::vector<int> ids_up_to_level(const PslSet& set, int k);

}  // namespace tsv::testing
