#include "tsv/locator.hpp"

#include <algorithm>
#include <cmath>

namespace tsv {
namespace {

// Cell boxes are inflated so that points accepted by the relaxed in-out test
// just outside a face still map to a bucket listing that cell.
constexpr double kInflation = 0.05;
// Bucket edge relative to the mean cell extent along the same axis.
constexpr double kBucketScale = 0.5;
constexpr std::size_t kMaxBuckets = std::size_t{1} << 26;

Aabb cell_box(const HexMesh& mesh, CellId cell) {
  const auto corners = mesh.cell_corners(cell);
  Aabb box{corners[0], corners[0]};
  for (const Vec3& c : corners) {
    box.min = min_components(box.min, c);
    box.max = max_components(box.max, c);
  }
  const double pad = kInflation * norm(box.extent());
  box.min -= Vec3{pad, pad, pad};
  box.max += Vec3{pad, pad, pad};
  return box;
}

}  // namespace

CellLocator::CellLocator(const HexMesh& mesh) : mesh_(&mesh) {
  const std::size_t n = mesh.cell_count();
  faces_.reserve(n);
  std::vector<Aabb> boxes;
  boxes.reserve(n);
  Vec3 mean_extent{};
  grid_box_ = {mesh.bbox().max, mesh.bbox().min};
  for (std::size_t c = 0; c < n; ++c) {
    const auto id = static_cast<CellId>(c);
    faces_.push_back(cell_faces(mesh, id));
    boxes.push_back(cell_box(mesh, id));
    mean_extent += boxes.back().extent();
    grid_box_.min = min_components(grid_box_.min, boxes.back().min);
    grid_box_.max = max_components(grid_box_.max, boxes.back().max);
  }
  mean_extent = mean_extent / static_cast<double>(n);

  const Vec3 ext = grid_box_.extent();
  double scale = kBucketScale;
  for (;;) {
    std::size_t total = 1;
    for (int a = 0; a < 3; ++a) {
      const double size = std::max(mean_extent[a] * scale, 1e-300);
      dims_[a] = std::max(1, static_cast<int>(std::ceil(ext[a] / size)));
      total *= static_cast<std::size_t>(dims_[a]);
    }
    if (total <= kMaxBuckets) break;
    scale *= 1.25;
  }
  for (int a = 0; a < 3; ++a) bucket_size_[a] = ext[a] / dims_[a];

  auto index_range = [&](const Aabb& box, int a) {
    const double inv = bucket_size_[a] > 0.0 ? 1.0 / bucket_size_[a] : 0.0;
    const int lo = static_cast<int>(std::floor((box.min[a] - grid_box_.min[a]) * inv));
    const int hi = static_cast<int>(std::floor((box.max[a] - grid_box_.min[a]) * inv));
    return std::pair{std::clamp(lo, 0, dims_[a] - 1), std::clamp(hi, 0, dims_[a] - 1)};
  };
  auto flat = [&](int i, int j, int k) {
    return static_cast<std::size_t>(i) +
           static_cast<std::size_t>(dims_[0]) *
               (static_cast<std::size_t>(j) + static_cast<std::size_t>(dims_[1]) * k);
  };
  auto for_each_bucket = [&](const Aabb& box, auto&& fn) {
    const auto [i0, i1] = index_range(box, 0);
    const auto [j0, j1] = index_range(box, 1);
    const auto [k0, k1] = index_range(box, 2);
    for (int k = k0; k <= k1; ++k)
      for (int j = j0; j <= j1; ++j)
        for (int i = i0; i <= i1; ++i) fn(flat(i, j, k));
  };

  const std::size_t buckets =
      static_cast<std::size_t>(dims_[0]) * dims_[1] * static_cast<std::size_t>(dims_[2]);
  offsets_.assign(buckets + 1, 0);
  for (const Aabb& box : boxes) for_each_bucket(box, [&](std::size_t b) { ++offsets_[b + 1]; });
  for (std::size_t b = 0; b < buckets; ++b) offsets_[b + 1] += offsets_[b];
  entries_.resize(offsets_.back());
  std::vector<std::size_t> cursor(offsets_.begin(), offsets_.end() - 1);
  for (std::size_t c = 0; c < n; ++c) {
    for_each_bucket(boxes[c], [&](std::size_t b) { entries_[cursor[b]++] = static_cast<CellId>(c); });
  }
}

std::optional<std::size_t> CellLocator::bucket_of(const Vec3& p) const {
  if (!grid_box_.contains(p)) return std::nullopt;
  std::array<int, 3> idx{};
  for (int a = 0; a < 3; ++a) {
    const double rel = bucket_size_[a] > 0.0 ? (p[a] - grid_box_.min[a]) / bucket_size_[a] : 0.0;
    idx[a] = std::clamp(static_cast<int>(std::floor(rel)), 0, dims_[a] - 1);
  }
  return static_cast<std::size_t>(idx[0]) +
         static_cast<std::size_t>(dims_[0]) *
             (static_cast<std::size_t>(idx[1]) + static_cast<std::size_t>(dims_[1]) * idx[2]);
}

std::span<const CellId> CellLocator::candidates(const Vec3& point) const {
  const auto b = bucket_of(point);
  if (!b) return {};
  return std::span<const CellId>(entries_.data() + offsets_[*b], offsets_[*b + 1] - offsets_[*b]);
}

std::optional<CellId> CellLocator::locate(const Vec3& point) const {
  for (CellId c : candidates(point)) {
    if (inside_relaxed(faces_[static_cast<std::size_t>(c)], point)) return c;
  }
  return std::nullopt;
}

double CellLocator::mean_bucket_occupancy() const {
  return static_cast<double>(entries_.size()) / static_cast<double>(bucket_count());
}

}  // namespace tsv
