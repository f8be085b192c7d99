#pragma once

#include <array>
#include <optional>
#include <span>
#include <vector>

#include "tsv/mesh.hpp"

namespace tsv {

/// Two-step point location: a uniform bucket grid over inflated cell bounding
/// boxes yields candidates, the relaxed in-out test picks the cell.
///
/// The locator keeps a reference to the mesh; the mesh must outlive it.
class CellLocator {
 public:
  explicit CellLocator(const HexMesh& mesh);

  const HexMesh& mesh() const { return *mesh_; }

  /// Candidate cells (ascending ids) whose inflated box overlaps the bucket of
  /// `point`. Empty outside the indexed region.
  std::span<const CellId> candidates(const Vec3& point) const;

  /// Smallest cell id among the candidates that passes the in-out test.
  std::optional<CellId> locate(const Vec3& point) const;

  const HexCellFaces& faces(CellId cell) const { return faces_.at(static_cast<std::size_t>(cell)); }

  std::array<int, 3> bucket_dims() const { return dims_; }
  std::size_t bucket_count() const { return offsets_.size() - 1; }
  /// Average number of cells stored per bucket.
  double mean_bucket_occupancy() const;

 private:
  std::optional<std::size_t> bucket_of(const Vec3& point) const;

  const HexMesh* mesh_;
  std::vector<HexCellFaces> faces_;
  Aabb grid_box_{};
  Vec3 bucket_size_{};
  std::array<int, 3> dims_{1, 1, 1};
  std::vector<std::size_t> offsets_;
  std::vector<CellId> entries_;
};

inline std::optional<CellId> locate_cell(const CellLocator& locator, const Vec3& point) {
  return locator.locate(point);
}

}  // namespace tsv
