#include "tsv/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>
#include <unordered_map>

#include "tsv/errors.hpp"

namespace tsv {
namespace {

constexpr std::array<std::array<int, 2>, 12> kHexEdges = {{
    {0, 1}, {1, 2}, {2, 3}, {3, 0}, {4, 5}, {5, 6}, {6, 7}, {7, 4},
    {0, 4}, {1, 5}, {2, 6}, {3, 7},
}};

// Unit-cube coordinates of the local corners.
constexpr std::array<std::array<int, 3>, 8> kCornerOffsets = {{
    {0, 0, 0}, {1, 0, 0}, {1, 1, 0}, {0, 1, 0}, {0, 0, 1}, {1, 0, 1}, {1, 1, 1}, {0, 1, 1},
}};

void check_cell_range(const HexMesh& mesh, CellId cell) {
  if (cell < 0 || static_cast<std::size_t>(cell) >= mesh.cell_count()) {
    throw std::out_of_range("cell id " + std::to_string(cell) + " out of range");
  }
}

struct FaceKey {
  std::array<VertexId, 4> ids;
  bool operator==(const FaceKey&) const = default;
};

struct FaceKeyHash {
  std::size_t operator()(const FaceKey& k) const noexcept {
    std::size_t h = 1469598103934665603ull;
    for (VertexId v : k.ids) {
      h ^= static_cast<std::size_t>(static_cast<std::uint32_t>(v));
      h *= 1099511628211ull;
    }
    return h;
  }
};

}  // namespace

HexMesh HexMesh::cartesian(const CartesianLayout& layout, std::vector<StressTensor> tensors) {
  for (int a = 0; a < 3; ++a) {
    if (layout.dims[a] < 2) {
      throw SchemaError("cartesian grid needs at least 2 vertices per axis");
    }
    if (!(layout.spacing[a] > 0.0) || !std::isfinite(layout.spacing[a])) {
      throw SchemaError("cartesian spacing must be positive");
    }
  }
  const auto [nx, ny, nz] = layout.dims;
  const std::size_t nv = static_cast<std::size_t>(nx) * ny * nz;
  if (nv > static_cast<std::size_t>(std::numeric_limits<VertexId>::max())) {
    throw SchemaError("cartesian grid too large");
  }
  if (tensors.size() != nv) {
    throw SchemaError("expected " + std::to_string(nv) + " tensors, got " +
                      std::to_string(tensors.size()));
  }
  HexMesh mesh;
  mesh.kind_ = MeshKind::cartesian;
  mesh.layout_ = layout;
  mesh.tensors_ = std::move(tensors);
  mesh.vertices_.reserve(nv);
  for (int k = 0; k < nz; ++k) {
    for (int j = 0; j < ny; ++j) {
      for (int i = 0; i < nx; ++i) {
        mesh.vertices_.push_back({layout.origin.x + i * layout.spacing.x,
                                  layout.origin.y + j * layout.spacing.y,
                                  layout.origin.z + k * layout.spacing.z});
      }
    }
  }
  auto vid = [&](int i, int j, int k) { return static_cast<VertexId>(i + nx * (j + ny * k)); };
  mesh.cells_.reserve(static_cast<std::size_t>(nx - 1) * (ny - 1) * (nz - 1));
  for (int k = 0; k + 1 < nz; ++k) {
    for (int j = 0; j + 1 < ny; ++j) {
      for (int i = 0; i + 1 < nx; ++i) {
        HexCell c;
        for (int corner = 0; corner < 8; ++corner) {
          const auto& o = kCornerOffsets[corner];
          c[corner] = vid(i + o[0], j + o[1], k + o[2]);
        }
        mesh.cells_.push_back(c);
      }
    }
  }
  mesh.finalize();
  return mesh;
}

HexMesh HexMesh::unstructured(std::vector<Vec3> vertices, std::vector<HexCell> cells,
                              std::vector<StressTensor> tensors) {
  if (tensors.size() != vertices.size()) {
    throw SchemaError("expected " + std::to_string(vertices.size()) + " tensors, got " +
                      std::to_string(tensors.size()));
  }
  if (vertices.empty() || cells.empty()) throw SchemaError("mesh has no cells");
  const auto nv = static_cast<VertexId>(vertices.size());
  for (std::size_t c = 0; c < cells.size(); ++c) {
    HexCell sorted = cells[c];
    for (VertexId v : sorted) {
      if (v < 0 || v >= nv) {
        throw SchemaError("cell " + std::to_string(c) + " references vertex " +
                          std::to_string(v) + " out of range");
      }
    }
    std::sort(sorted.begin(), sorted.end());
    if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) {
      throw SchemaError("cell " + std::to_string(c) + " repeats a vertex");
    }
  }
  for (const Vec3& v : vertices) {
    if (!std::isfinite(v.x) || !std::isfinite(v.y) || !std::isfinite(v.z)) {
      throw SchemaError("non-finite vertex coordinate");
    }
  }
  HexMesh mesh;
  mesh.kind_ = MeshKind::unstructured;
  mesh.vertices_ = std::move(vertices);
  mesh.cells_ = std::move(cells);
  mesh.tensors_ = std::move(tensors);
  mesh.finalize();
  return mesh;
}

void HexMesh::finalize() {
  for (const StressTensor& t : tensors_) {
    for (double c : t.components()) {
      if (!std::isfinite(c)) throw SchemaError("non-finite stress component");
    }
  }
  bbox_.min = bbox_.max = vertices_.front();
  for (const Vec3& v : vertices_) {
    bbox_.min = min_components(bbox_.min, v);
    bbox_.max = max_components(bbox_.max, v);
  }
  const Vec3 ext = bbox_.extent();
  d0_ = std::min({ext.x, ext.y, ext.z});

  min_edge_ = std::numeric_limits<double>::infinity();
  for (const HexCell& c : cells_) {
    for (const auto& e : kHexEdges) {
      min_edge_ = std::min(min_edge_, distance(vertices_[c[e[0]]], vertices_[c[e[1]]]));
    }
  }
  build_adjacency();
}

void HexMesh::build_adjacency() {
  adjacency_.assign(cells_.size(), {kNoCell, kNoCell, kNoCell, kNoCell, kNoCell, kNoCell});
  boundary_faces_.clear();

  if (kind_ == MeshKind::cartesian) {
    const int cx = layout_.dims[0] - 1;
    const int cy = layout_.dims[1] - 1;
    const int cz = layout_.dims[2] - 1;
    auto cid = [&](int i, int j, int k) { return static_cast<CellId>(i + cx * (j + cy * k)); };
    for (int k = 0; k < cz; ++k) {
      for (int j = 0; j < cy; ++j) {
        for (int i = 0; i < cx; ++i) {
          auto& adj = adjacency_[static_cast<std::size_t>(cid(i, j, k))];
          if (k > 0) adj[0] = cid(i, j, k - 1);
          if (k + 1 < cz) adj[1] = cid(i, j, k + 1);
          if (j > 0) adj[2] = cid(i, j - 1, k);
          if (i + 1 < cx) adj[3] = cid(i + 1, j, k);
          if (j + 1 < cy) adj[4] = cid(i, j + 1, k);
          if (i > 0) adj[5] = cid(i - 1, j, k);
        }
      }
    }
  } else {
    std::unordered_map<FaceKey, FaceRef, FaceKeyHash> open;
    open.reserve(cells_.size() * 3);
    for (std::size_t c = 0; c < cells_.size(); ++c) {
      for (int f = 0; f < 6; ++f) {
        FaceKey key;
        for (int i = 0; i < 4; ++i) key.ids[i] = cells_[c][kHexFaces[f][i]];
        std::sort(key.ids.begin(), key.ids.end());
        const FaceRef here{static_cast<CellId>(c), f};
        auto [it, inserted] = open.try_emplace(key, here);
        if (inserted) continue;
        const FaceRef other = it->second;
        if (other.cell == kNoCell) {
          throw SchemaError("face shared by more than two cells near cell " + std::to_string(c));
        }
        adjacency_[c][f] = other.cell;
        adjacency_[static_cast<std::size_t>(other.cell)][other.face] = here.cell;
        it->second = FaceRef{kNoCell, 0};
      }
    }
  }
  for (std::size_t c = 0; c < cells_.size(); ++c) {
    for (int f = 0; f < 6; ++f) {
      if (adjacency_[c][f] == kNoCell) boundary_faces_.push_back({static_cast<CellId>(c), f});
    }
  }
}

std::vector<VertexId> HexMesh::boundary_vertices() const {
  std::vector<VertexId> out;
  out.reserve(boundary_faces_.size() * 4);
  for (const FaceRef& f : boundary_faces_) {
    for (int i = 0; i < 4; ++i) {
      out.push_back(cells_[static_cast<std::size_t>(f.cell)][kHexFaces[f.face][i]]);
    }
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

void HexMesh::check_vertex_subset(const std::vector<VertexId>& ids) const {
  for (VertexId v : ids) {
    if (v < 0 || static_cast<std::size_t>(v) >= vertices_.size()) {
      throw SchemaError("vertex subset references vertex " + std::to_string(v) +
                        " out of range");
    }
  }
}

void HexMesh::set_loaded_vertices(std::vector<VertexId> ids) {
  check_vertex_subset(ids);
  std::sort(ids.begin(), ids.end());
  ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
  loaded_ = std::move(ids);
}

void HexMesh::set_fixed_vertices(std::vector<VertexId> ids) {
  check_vertex_subset(ids);
  std::sort(ids.begin(), ids.end());
  ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
  fixed_ = std::move(ids);
}

std::array<Vec3, 8> HexMesh::cell_corners(CellId cell) const {
  check_cell_range(*this, cell);
  const HexCell& c = cells_[static_cast<std::size_t>(cell)];
  std::array<Vec3, 8> out;
  for (int i = 0; i < 8; ++i) out[i] = vertices_[static_cast<std::size_t>(c[i])];
  return out;
}

HexCellFaces cell_faces(const HexMesh& mesh, CellId cell) {
  const auto corners = mesh.cell_corners(cell);
  HexCellFaces out;
  for (int f = 0; f < 6; ++f) {
    const Vec3& a = corners[kHexFaces[f][0]];
    const Vec3& b = corners[kHexFaces[f][1]];
    const Vec3& c = corners[kHexFaces[f][2]];
    const Vec3& d = corners[kHexFaces[f][3]];
    out.centers[f] = 0.25 * (a + b + c + d);
    out.normals[f] = normalized(cross(c - a, d - b));
  }
  return out;
}

bool inside_relaxed(const HexCellFaces& faces, const Vec3& point) {
  // angle(C_i - B, V_i) <= 91 deg  <=>  dot(B - C_i, V_i) <= |B - C_i| * sin(1 deg)
  static const double kSlack = std::sin(std::numbers::pi / 180.0);
  for (int f = 0; f < 6; ++f) {
    const Vec3 d = point - faces.centers[f];
    if (dot(d, faces.normals[f]) > norm(d) * kSlack) return false;
  }
  return true;
}

std::array<double, 8> trilinear_weights(const HexMesh& mesh, CellId cell, const Vec3& point) {
  check_cell_range(mesh, cell);
  const Vec3 base = mesh.vertices()[static_cast<std::size_t>(mesh.cells()[cell][0])];
  const Vec3& h = mesh.layout().spacing;
  const double u = std::clamp((point.x - base.x) / h.x, 0.0, 1.0);
  const double v = std::clamp((point.y - base.y) / h.y, 0.0, 1.0);
  const double w = std::clamp((point.z - base.z) / h.z, 0.0, 1.0);
  std::array<double, 8> out;
  for (int i = 0; i < 8; ++i) {
    const auto& o = kCornerOffsets[i];
    out[i] = (o[0] ? u : 1.0 - u) * (o[1] ? v : 1.0 - v) * (o[2] ? w : 1.0 - w);
  }
  return out;
}

std::array<double, 8> idw_weights(const HexMesh& mesh, CellId cell, const Vec3& point) {
  const auto corners = mesh.cell_corners(cell);
  const double snap = 1e-12 * mesh.d0();
  std::array<double, 8> out{};
  double total = 0.0;
  for (int i = 0; i < 8; ++i) {
    const double d2 = squared_distance(point, corners[i]);
    if (std::sqrt(d2) < snap) {
      out.fill(0.0);
      out[i] = 1.0;
      return out;
    }
    out[i] = 1.0 / d2;
    total += out[i];
  }
  for (double& w : out) w /= total;
  return out;
}

namespace {

// Cartesian cell that actually contains `point` (clamped to the grid). The
// relaxed in-out test may report a neighbour for points near a face.
CellId cartesian_cell_of(const HexMesh& mesh, const Vec3& point) {
  const CartesianLayout& l = mesh.layout();
  std::array<int, 3> idx{};
  for (int a = 0; a < 3; ++a) {
    const double t = std::floor((point[a] - l.origin[a]) / l.spacing[a]);
    idx[a] = static_cast<int>(std::clamp(t, 0.0, static_cast<double>(l.dims[a] - 2)));
  }
  return static_cast<CellId>(idx[0] + (l.dims[0] - 1) * (idx[1] + (l.dims[1] - 1) * idx[2]));
}

}  // namespace

StressTensor interpolate_tensor(const HexMesh& mesh, CellId cell, const Vec3& point) {
  check_cell_range(mesh, cell);
  if (mesh.kind() == MeshKind::cartesian) cell = cartesian_cell_of(mesh, point);
  const auto weights = mesh.kind() == MeshKind::cartesian ? trilinear_weights(mesh, cell, point)
                                                          : idw_weights(mesh, cell, point);
  const HexCell& c = mesh.cells()[static_cast<std::size_t>(cell)];
  StressTensor out{};
  for (int i = 0; i < 8; ++i) {
    if (weights[i] == 0.0) continue;
    out += weights[i] * mesh.tensors()[static_cast<std::size_t>(c[i])];
  }
  return out;
}

}  // namespace tsv
