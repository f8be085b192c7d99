#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <vector>

#include "tsv/tensor.hpp"
#include "tsv/vec3.hpp"

namespace tsv {

using CellId = std::int32_t;
using VertexId = std::int32_t;
inline constexpr CellId kNoCell = -1;

/// Local corner order of a hex cell: bottom face counter-clockwise seen
/// from +w, then the top face in matching order.
///
///        7-------6
///       /|      /|
///      4-------5 |
///      | 3-----|-2
///      |/      |/
///      0-------1
using HexCell = std::array<VertexId, 8>;

/// Local faces as corner quadruples, counter-clockwise seen from outside.
/// Face f and face kOppositeFace[f] are parallel in a regular cell.
inline constexpr std::array<std::array<int, 4>, 6> kHexFaces = {{
    {0, 3, 2, 1},  // w = 0
    {4, 5, 6, 7},  // w = 1
    {0, 1, 5, 4},  // v = 0
    {1, 2, 6, 5},  // u = 1
    {2, 3, 7, 6},  // v = 1
    {3, 0, 4, 7},  // u = 0
}};
inline constexpr std::array<int, 6> kOppositeFace = {1, 0, 4, 5, 2, 3};

enum class MeshKind { cartesian, unstructured };

struct CartesianLayout {
  std::array<int, 3> dims{};  // vertex counts per axis
  Vec3 origin{};
  Vec3 spacing{};
};

struct FaceRef {
  CellId cell = kNoCell;
  int face = 0;
  friend bool operator==(const FaceRef&, const FaceRef&) = default;
};

/// Hexahedral mesh with per-vertex stress tensors. Immutable once built.
class HexMesh {
 public:
  /// Regular grid; vertices are origin + index * spacing in x-fastest order.
  static HexMesh cartesian(const CartesianLayout& layout, std::vector<StressTensor> tensors);
  static HexMesh unstructured(std::vector<Vec3> vertices, std::vector<HexCell> cells,
                              std::vector<StressTensor> tensors);

  MeshKind kind() const { return kind_; }
  /// Only meaningful for MeshKind::cartesian.
  const CartesianLayout& layout() const { return layout_; }

  const std::vector<Vec3>& vertices() const { return vertices_; }
  const std::vector<HexCell>& cells() const { return cells_; }
  const std::vector<StressTensor>& tensors() const { return tensors_; }
  std::size_t vertex_count() const { return vertices_.size(); }
  std::size_t cell_count() const { return cells_.size(); }

  /// Neighbour across each local face, or kNoCell on the boundary.
  const std::vector<std::array<CellId, 6>>& face_adjacency() const { return adjacency_; }
  const std::vector<FaceRef>& boundary_faces() const { return boundary_faces_; }

  const Aabb& bbox() const { return bbox_; }
  /// Length of the shortest bounding-box dimension.
  double d0() const { return d0_; }
  double min_edge_length() const { return min_edge_; }

  /// Sorted, unique vertex ids touching a boundary face.
  std::vector<VertexId> boundary_vertices() const;

  /// Optional vertex subsets carried by the input file (load / support sites).
  const std::vector<VertexId>& loaded_vertices() const { return loaded_; }
  const std::vector<VertexId>& fixed_vertices() const { return fixed_; }
  void set_loaded_vertices(std::vector<VertexId> ids);
  void set_fixed_vertices(std::vector<VertexId> ids);

  std::array<Vec3, 8> cell_corners(CellId cell) const;

 private:
  HexMesh() = default;
  void finalize();
  void build_adjacency();
  void check_vertex_subset(const std::vector<VertexId>& ids) const;

  MeshKind kind_ = MeshKind::unstructured;
  CartesianLayout layout_{};
  std::vector<Vec3> vertices_;
  std::vector<HexCell> cells_;
  std::vector<StressTensor> tensors_;
  std::vector<std::array<CellId, 6>> adjacency_;
  std::vector<FaceRef> boundary_faces_;
  std::vector<VertexId> loaded_;
  std::vector<VertexId> fixed_;
  Aabb bbox_{};
  double d0_ = 0.0;
  double min_edge_ = 0.0;
};

/// Face centres C_i and outward unit normals V_i of one cell. Normals come
/// from the cross product of the two face diagonals, so warped faces still
/// get a well-defined direction.
struct HexCellFaces {
  std::array<Vec3, 6> centers{};
  std::array<Vec3, 6> normals{};
};

HexCellFaces cell_faces(const HexMesh& mesh, CellId cell);

/// Relaxed point-in-hex test: the angle between the vector from the point to
/// each face centre and that face's outward normal must not exceed 91 degrees.
bool inside_relaxed(const HexCellFaces& faces, const Vec3& point);

/// Trilinear weights of the 8 corners of a Cartesian cell (local coordinates
/// clamped to the unit cube).
std::array<double, 8> trilinear_weights(const HexMesh& mesh, CellId cell, const Vec3& point);

/// Shepard inverse-distance weights (power 2) of the 8 corners; a point within
/// 1e-12 * D0 of a corner gets that corner's weight 1.
std::array<double, 8> idw_weights(const HexMesh& mesh, CellId cell, const Vec3& point);

/// Component-wise tensor interpolation: trilinear on Cartesian meshes, inverse
/// distance weighting otherwise. Throws std::out_of_range for a bad cell id.
StressTensor interpolate_tensor(const HexMesh& mesh, CellId cell, const Vec3& point);

enum class MeshFormat { automatic, cartesian, unstructured };

/// Reads a mesh in the CARTESIAN or HEX text format. Throws ParseError for
/// grammar violations and SchemaError for inconsistent content.
HexMesh load_mesh(std::istream& in, MeshFormat format = MeshFormat::automatic);
HexMesh load_mesh_file(const std::filesystem::path& path,
                       MeshFormat format = MeshFormat::automatic);

/// Writes the mesh in its native text format (CARTESIAN or HEX).
void write_mesh(std::ostream& out, const HexMesh& mesh);
/// Writes any mesh explicitly in the HEX format.
void write_unstructured(std::ostream& out, const HexMesh& mesh);

}  // namespace tsv
