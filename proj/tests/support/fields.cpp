#include "tsv_testing/fields.hpp"

#include <cmath>
#include <random>

namespace tsv::testing {

HexMesh sample_cartesian(std::array<int, 3> n, Vec3 origin, Vec3 extent, const TensorField& f) {
  CartesianLayout layout;
  layout.dims = n;
  layout.origin = origin;
  for (int a = 0; a < 3; ++a) layout.spacing[a] = extent[a] / (n[a] - 1);
  std::vector<StressTensor> tensors;
  tensors.reserve(static_cast<std::size_t>(n[0]) * n[1] * n[2]);
  for (int k = 0; k < n[2]; ++k)
    for (int j = 0; j < n[1]; ++j)
      for (int i = 0; i < n[0]; ++i) {
        tensors.push_back(f({origin.x + i * layout.spacing.x, origin.y + j * layout.spacing.y,
                             origin.z + k * layout.spacing.z}));
      }
  return HexMesh::cartesian(layout, std::move(tensors));
}

namespace {

HexMesh grid_as_unstructured(std::array<int, 3> n, Vec3 extent,
                             const std::function<bool(int, int, int)>& keep_cell,
                             const std::function<Vec3(int, int, int, Vec3)>& place,
                             const TensorField& f) {
  const Vec3 h{extent.x / (n[0] - 1), extent.y / (n[1] - 1), extent.z / (n[2] - 1)};
  auto vid = [&](int i, int j, int k) { return i + n[0] * (j + n[1] * k); };
  std::vector<int> remap(static_cast<std::size_t>(n[0]) * n[1] * n[2], -1);
  std::vector<HexCell> cells;
  for (int k = 0; k + 1 < n[2]; ++k)
    for (int j = 0; j + 1 < n[1]; ++j)
      for (int i = 0; i + 1 < n[0]; ++i) {
        if (!keep_cell(i, j, k)) continue;
        HexCell c{vid(i, j, k),         vid(i + 1, j, k),         vid(i + 1, j + 1, k),
                  vid(i, j + 1, k),     vid(i, j, k + 1),         vid(i + 1, j, k + 1),
                  vid(i + 1, j + 1, k + 1), vid(i, j + 1, k + 1)};
        for (auto& v : c) remap[static_cast<std::size_t>(v)] = 0;
        cells.push_back(c);
      }
  std::vector<Vec3> vertices;
  std::vector<StressTensor> tensors;
  for (int k = 0; k < n[2]; ++k)
    for (int j = 0; j < n[1]; ++j)
      for (int i = 0; i < n[0]; ++i) {
        auto& slot = remap[static_cast<std::size_t>(vid(i, j, k))];
        if (slot < 0) continue;
        slot = static_cast<int>(vertices.size());
        const Vec3 p = place(i, j, k, Vec3{i * h.x, j * h.y, k * h.z});
        vertices.push_back(p);
        tensors.push_back(f(p));
      }
  for (auto& c : cells)
    for (auto& v : c) v = remap[static_cast<std::size_t>(v)];
  return HexMesh::unstructured(std::move(vertices), std::move(cells), std::move(tensors));
}

}  // namespace

HexMesh perturbed_grid(std::array<int, 3> n, Vec3 extent, double amplitude, std::uint64_t seed,
                       const TensorField& f) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  const Vec3 h{extent.x / (n[0] - 1), extent.y / (n[1] - 1), extent.z / (n[2] - 1)};
  return grid_as_unstructured(
      n, extent, [](int, int, int) { return true; },
      [&](int i, int j, int k, Vec3 p) {
        const std::array<int, 3> idx{i, j, k};
        for (int a = 0; a < 3; ++a) {
          const double r = u(rng);
          if (idx[a] > 0 && idx[a] + 1 < n[a]) p[a] += amplitude * h[a] * r;
        }
        return p;
      },
      f);
}

HexMesh l_shaped(int cells_per_unit, const TensorField& f) {
  const int m = cells_per_unit;
  return grid_as_unstructured(
      {2 * m + 1, 2 * m + 1, m + 1}, {2.0, 2.0, 1.0},
      [m](int i, int j, int) { return !(i >= m && j >= m); },
      [](int, int, int, Vec3 p) { return p; }, f);
}

std::optional<CellId> brute_force_locate(const HexMesh& mesh, const Vec3& p) {
  for (std::size_t c = 0; c < mesh.cell_count(); ++c) {
    if (inside_relaxed(cell_faces(mesh, static_cast<CellId>(c)), p)) return static_cast<CellId>(c);
  }
  return std::nullopt;
}

StressTensor constant_field(const Vec3&) { return StressTensor::diagonal(3.0, 2.0, 1.0); }

StressTensor hydrostatic_field(const Vec3&) { return StressTensor::diagonal(2.0, 2.0, 2.0); }

StressTensor linear_field(const Vec3& p) {
  return {4.0 + 0.5 * p.x, 1.0 - 0.3 * p.y, -2.0 + 0.4 * p.z,
          0.6 * p.y + 0.4 * p.z, 0.2 + 0.3 * p.x, 0.5 * p.x - 0.2 * p.y};
}

TensorField bending_field(double length, double height) {
  const double inertia = height * height * height / 12.0;
  const double load = 1.0 / 6.0;
  return [=](const Vec3& p) {
    const double yc = p.y - 0.5 * height;
    StressTensor t{};
    t.sxx = load * (length - p.x) * yc / inertia;
    t.txy = load / (2.0 * inertia) * (0.25 * height * height - yc * yc);
    t.szz = -5.0;
    return t;
  };
}

TensorField circular_field(double cx, double cy) {
  return [=](const Vec3& p) {
    const double dx = p.x - cx;
    const double dy = p.y - cy;
    const double r = std::hypot(dx, dy);
    const double c = r > 0.0 ? dx / r : 1.0;
    const double s = r > 0.0 ? dy / r : 0.0;
    constexpr double radial = 1.0;
    constexpr double hoop = -2.0;
    StressTensor t{};
    t.sxx = radial * c * c + hoop * s * s;
    t.syy = radial * s * s + hoop * c * c;
    t.txy = (radial - hoop) * c * s;
    t.szz = 0.0;
    return t;
  };
}

TensorField twisting_field(double length, double total_angle) {
  return [=](const Vec3& p) {
    const double a = total_angle * p.x / length;
    const double c = std::cos(a);
    const double s = std::sin(a);
    constexpr double medium = 2.0;
    constexpr double minor = 1.0;
    StressTensor t{};
    t.sxx = 5.0;
    t.syy = medium * c * c + minor * s * s;
    t.szz = medium * s * s + minor * c * c;
    t.tyz = (medium - minor) * c * s;
    return t;
  };
}

}  // namespace tsv::testing
