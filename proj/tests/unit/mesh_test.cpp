#include <gtest/gtest.h>

#include <random>
#include <set>
#include <sstream>

#include "tsv/errors.hpp"
#include "tsv/mesh.hpp"
#include "tsv_testing/fields.hpp"
#include "tsv_testing/oracles.hpp"

namespace {

using tsv::HexMesh;
using tsv::StressTensor;
using tsv::Vec3;
namespace tt = tsv::testing;

HexMesh unit_cube(const std::vector<StressTensor>& tensors) {
  std::vector<Vec3> v{{0, 0, 0}, {1, 0, 0}, {1, 1, 0}, {0, 1, 0},
                      {0, 0, 1}, {1, 0, 1}, {1, 1, 1}, {0, 1, 1}};
  return HexMesh::unstructured(v, {{0, 1, 2, 3, 4, 5, 6, 7}}, tensors);
}

TEST(HexMesh, CartesianVertexOrderIsXFastest) {
  const auto m = tt::sample_cartesian({3, 2, 2}, {1, 2, 3}, {2, 1, 1}, tt::constant_field);
  ASSERT_EQ(m.vertex_count(), 12u);
  ASSERT_EQ(m.cell_count(), 2u);
  EXPECT_EQ(m.vertices()[1], (Vec3{2, 2, 3}));
  EXPECT_EQ(m.vertices()[3], (Vec3{1, 3, 3}));
  EXPECT_EQ(m.vertices()[6], (Vec3{1, 2, 4}));
  const auto corners = m.cell_corners(1);
  EXPECT_EQ(corners[0], (Vec3{2, 2, 3}));
  EXPECT_EQ(corners[6], (Vec3{3, 3, 4}));
  EXPECT_DOUBLE_EQ(m.d0(), 1.0);
  EXPECT_DOUBLE_EQ(m.min_edge_length(), 1.0);
}

TEST(HexMesh, CartesianAdjacencyMatchesUnstructuredCopy) {
  const auto c = tt::sample_cartesian({4, 3, 3}, {0, 0, 0}, {3, 2, 2}, tt::linear_field);
  std::vector<Vec3> verts = c.vertices();
  std::vector<tsv::HexCell> cells = c.cells();
  const auto u = HexMesh::unstructured(verts, cells, c.tensors());
  EXPECT_EQ(c.face_adjacency(), u.face_adjacency());
  EXPECT_EQ(c.boundary_faces().size(), u.boundary_faces().size());
  // 3x2x2 cells: boundary faces = 2(2*2 + 3*2 + 3*2) = 32.
  EXPECT_EQ(c.boundary_faces().size(), 32u);
}

TEST(HexMesh, AdjacencyIsSymmetricAcrossOppositeFaces) {
  const auto m = tt::perturbed_grid({5, 4, 3}, {4, 3, 2}, 0.2, 1, tt::linear_field);
  const auto& adj = m.face_adjacency();
  for (std::size_t c = 0; c < adj.size(); ++c) {
    for (int f = 0; f < 6; ++f) {
      const auto n = adj[c][f];
      if (n == tsv::kNoCell) continue;
      EXPECT_EQ(adj[n][tsv::kOppositeFace[f]], static_cast<tsv::CellId>(c));
    }
  }
}

TEST(HexMesh, BoundaryVertices) {
  const auto m = tt::sample_cartesian({4, 4, 4}, {0, 0, 0}, {1, 1, 1}, tt::constant_field);
  EXPECT_EQ(m.boundary_vertices().size(), 64u - 8u);
}

TEST(HexMesh, RejectsInvalidInput) {
  const std::vector<StressTensor> eight(8);
  EXPECT_THROW(unit_cube(std::vector<StressTensor>(7)), tsv::SchemaError);
  std::vector<Vec3> v(8);
  EXPECT_THROW(HexMesh::unstructured(v, {{0, 1, 2, 3, 4, 5, 6, 8}}, eight), tsv::SchemaError);
  EXPECT_THROW(HexMesh::unstructured(v, {{0, 1, 2, 3, 4, 5, 6, 6}}, eight), tsv::SchemaError);
  EXPECT_THROW(HexMesh::unstructured(v, {}, eight), tsv::SchemaError);
  tsv::CartesianLayout bad{{1, 2, 2}, {}, {1, 1, 1}};
  EXPECT_THROW(HexMesh::cartesian(bad, std::vector<StressTensor>(4)), tsv::SchemaError);
  tsv::CartesianLayout neg{{2, 2, 2}, {}, {1, -1, 1}};
  EXPECT_THROW(HexMesh::cartesian(neg, eight), tsv::SchemaError);
}

TEST(HexMesh, RejectsFaceSharedByThreeCells) {
  // Three copies of the same cube share every face.
  std::vector<Vec3> v{{0, 0, 0}, {1, 0, 0}, {1, 1, 0}, {0, 1, 0},
                      {0, 0, 1}, {1, 0, 1}, {1, 1, 1}, {0, 1, 1}};
  tsv::HexCell c{0, 1, 2, 3, 4, 5, 6, 7};
  EXPECT_THROW(HexMesh::unstructured(v, {c, c, c}, std::vector<StressTensor>(8)),
               tsv::SchemaError);
}

TEST(InsideRelaxed, UnitCube) {
  const auto m = unit_cube(std::vector<StressTensor>(8));
  const auto faces = tsv::cell_faces(m, 0);
  EXPECT_TRUE(tsv::inside_relaxed(faces, {0.5, 0.5, 0.5}));
  EXPECT_TRUE(tsv::inside_relaxed(faces, {0.0, 0.3, 0.7}));   // on a face
  EXPECT_TRUE(tsv::inside_relaxed(faces, {1.0, 1.0, 1.0}));   // corner
  EXPECT_FALSE(tsv::inside_relaxed(faces, {1.2, 0.5, 0.5}));
  EXPECT_FALSE(tsv::inside_relaxed(faces, {-0.1, -0.1, 0.5}));
  // The one-degree slack admits points slightly outside a face but away
  // from its centre.
  EXPECT_TRUE(tsv::inside_relaxed(faces, {1.005, 0.02, 0.5}));
  EXPECT_FALSE(tsv::inside_relaxed(faces, {1.005, 0.5, 0.5}));
  EXPECT_FALSE(tsv::inside_relaxed(faces, {1.02, 0.5, 0.5}));
  for (int f = 0; f < 6; ++f) EXPECT_NEAR(tsv::norm(faces.normals[f]), 1.0, 1e-15);
  EXPECT_NEAR(faces.normals[0].z, -1.0, 1e-15);
  EXPECT_NEAR(faces.normals[3].x, 1.0, 1e-15);
}

TEST(Interpolation, TrilinearMatchesReference) {
  const auto m = tt::sample_cartesian({2, 2, 2}, {0, 0, 0}, {1, 1, 1}, [](const Vec3& p) {
    return StressTensor{1 + p.x + 2 * p.y * p.z, p.x * p.y, -p.z, 3 * p.x * p.y * p.z, 0.5, p.y};
  });
  std::array<double, 8> sxx;
  for (int k = 0; k < 2; ++k)
    for (int j = 0; j < 2; ++j)
      for (int i = 0; i < 2; ++i) sxx[i + 2 * j + 4 * k] = 1 + i + 2 * j * k;
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(0, 1);
  for (int n = 0; n < 200; ++n) {
    const Vec3 p{u(rng), u(rng), u(rng)};
    const auto t = tsv::interpolate_tensor(m, 0, p);
    EXPECT_NEAR(t.sxx, tt::trilinear_reference(sxx, p.x, p.y, p.z), 1e-14);
    // Trilinear reproduces multilinear fields exactly.
    EXPECT_NEAR(t.txy, 3 * p.x * p.y * p.z, 1e-14);
    EXPECT_NEAR(t.syy, p.x * p.y, 1e-14);
  }
}

TEST(Interpolation, TrilinearWeightsClampOutsideCell) {
  const auto m = tt::sample_cartesian({2, 2, 2}, {0, 0, 0}, {1, 1, 1}, tt::linear_field);
  const auto inside = tsv::trilinear_weights(m, 0, {1, 0.25, 0.5});
  const auto outside = tsv::trilinear_weights(m, 0, {1.3, 0.25, 0.5});
  EXPECT_EQ(inside, outside);
  double sum = 0;
  for (double w : inside) sum += w;
  EXPECT_NEAR(sum, 1.0, 1e-15);
}

TEST(Interpolation, CartesianNearFaceUsesContainingCell) {
  const auto m = tt::sample_cartesian({3, 2, 2}, {0, 0, 0}, {2, 1, 1}, [](const Vec3& p) {
    return StressTensor{p.x * p.x, p.y, p.z, 0, 0, 0};
  });
  // Inside cell 1 but within the relaxed slack of cell 0.
  const Vec3 p{1.004, 0.01, 0.5};
  ASSERT_TRUE(tsv::inside_relaxed(tsv::cell_faces(m, 0), p));
  EXPECT_EQ(tsv::interpolate_tensor(m, 0, p), tsv::interpolate_tensor(m, 1, p));
  EXPECT_NEAR(tsv::interpolate_tensor(m, 0, p).sxx, 1.0 + 3.0 * 0.004, 1e-12);
}

TEST(Interpolation, IdwSnapsAtCornersAndSumsToOne) {
  std::vector<StressTensor> t(8);
  for (int i = 0; i < 8; ++i) t[i] = StressTensor::diagonal(i, 0, 0);
  const auto m = unit_cube(t);
  for (int i = 0; i < 8; ++i) {
    const Vec3 c = m.vertices()[i];
    EXPECT_EQ(tsv::interpolate_tensor(m, 0, c).sxx, i);
    EXPECT_EQ(tsv::interpolate_tensor(m, 0, c + Vec3{1e-13, 0, 0}).sxx, i);
  }
  const auto w = tsv::idw_weights(m, 0, {0.5, 0.5, 0.5});
  for (double x : w) EXPECT_NEAR(x, 0.125, 1e-15);
  const auto w2 = tsv::idw_weights(m, 0, {0.1, 0.2, 0.3});
  double sum = 0;
  for (double x : w2) sum += x;
  EXPECT_NEAR(sum, 1.0, 1e-15);
  // Closest corner carries the biggest weight.
  EXPECT_EQ(std::max_element(w2.begin(), w2.end()) - w2.begin(), 0);
}

TEST(Interpolation, BadCellThrows) {
  const auto m = unit_cube(std::vector<StressTensor>(8));
  EXPECT_THROW(tsv::interpolate_tensor(m, 1, {0, 0, 0}), std::out_of_range);
  EXPECT_THROW(tsv::interpolate_tensor(m, -1, {0, 0, 0}), std::out_of_range);
}

TEST(MeshIo, ParsesCartesian) {
  std::istringstream in(
      "# comment line\n"
      "CARTESIAN 2 2 2 0 0 0 1 1 1   # trailing comment\n"
      "1 0 0 0 0 0\n2 0 0 0 0 0\n3 0 0 0 0 0\n4 0 0 0 0 0\n"
      "\n"
      "5 0 0 0 0 0\n6 0 0 0 0 0\n7 0 0 0 0 0\n8 0 0 0 0 0.5\n");
  const auto m = tsv::load_mesh(in);
  EXPECT_EQ(m.kind(), tsv::MeshKind::cartesian);
  EXPECT_EQ(m.tensors()[7].txz, 0.5);
  EXPECT_EQ(m.vertices()[7], (Vec3{1, 1, 1}));
}

TEST(MeshIo, ParsesUnstructuredWithSubsets) {
  std::ostringstream text;
  text << "HEX 8 1\n0 0 0\n1 0 0\n1 1 0\n0 1 0\n0 0 1\n1 0 1\n1 1 1\n0 1 1\n0 1 2 3 4 5 6 7\n";
  for (int i = 0; i < 8; ++i) text << "1 2 3 0 0 0\n";
  text << "LOADED 2\n6 7\nFIXED 4\n0 1\n2 3\n";
  std::istringstream in(text.str());
  const auto m = tsv::load_mesh(in);
  EXPECT_EQ(m.kind(), tsv::MeshKind::unstructured);
  EXPECT_EQ(m.loaded_vertices(), (std::vector<tsv::VertexId>{6, 7}));
  EXPECT_EQ(m.fixed_vertices().size(), 4u);
}

TEST(MeshIo, ReportsLineNumbers) {
  std::istringstream in("HEX 8 1\n0 0 0\n1 0 0\n1 1 0\n0 1 0\n0 0 1\n1 0 1\n1 1 1\n0 1 1\n0 1 2 3 4 5 6\n");
  try {
    tsv::load_mesh(in);
    FAIL() << "expected ParseError";
  } catch (const tsv::ParseError& e) {
    EXPECT_EQ(e.line(), 10u);
    EXPECT_NE(std::string(e.what()).find("expected 8 values, got 7"), std::string::npos);
  }
  std::istringstream bad_number("CARTESIAN 2 2 2 0 0 0 1 1 x\n");
  EXPECT_THROW(tsv::load_mesh(bad_number), tsv::ParseError);
  std::istringstream truncated("CARTESIAN 2 2 2 0 0 0 1 1 1\n1 0 0 0 0 0\n");
  EXPECT_THROW(tsv::load_mesh(truncated), tsv::ParseError);
  std::istringstream unknown("TET 4 1\n");
  EXPECT_THROW(tsv::load_mesh(unknown), tsv::ParseError);
  std::istringstream empty("# nothing\n\n");
  EXPECT_THROW(tsv::load_mesh(empty), tsv::ParseError);
  std::istringstream wrong_kind("CARTESIAN 2 2 2 0 0 0 1 1 1\n");
  EXPECT_THROW(tsv::load_mesh(wrong_kind, tsv::MeshFormat::unstructured), tsv::ParseError);
}

TEST(MeshIo, SchemaErrorsForBadContent) {
  std::ostringstream text;
  text << "HEX 8 1\n0 0 0\n1 0 0\n1 1 0\n0 1 0\n0 0 1\n1 0 1\n1 1 1\n0 1 1\n0 1 2 3 4 5 6 9\n";
  for (int i = 0; i < 8; ++i) text << "1 2 3 0 0 0\n";
  std::istringstream in(text.str());
  EXPECT_THROW(tsv::load_mesh(in), tsv::SchemaError);
  std::istringstream zero("CARTESIAN 2 2 2 0 0 0 1 0 1\n");
  EXPECT_THROW(tsv::load_mesh(zero), tsv::SchemaError);
}

TEST(MeshIo, RoundTripIsExact) {
  const auto a = tt::perturbed_grid({4, 3, 3}, {1.5, 1, 1}, 0.2, 42, tt::linear_field);
  std::stringstream buf;
  tsv::write_mesh(buf, a);
  const auto b = tsv::load_mesh(buf);
  EXPECT_EQ(a.vertices(), b.vertices());
  EXPECT_EQ(a.cells(), b.cells());
  EXPECT_EQ(a.tensors(), b.tensors());

  const auto c = tt::sample_cartesian({3, 3, 4}, {0.1, 0.2, 0.3}, {1, 1, 1.7}, tt::linear_field);
  std::stringstream buf2;
  tsv::write_mesh(buf2, c);
  const auto d = tsv::load_mesh(buf2);
  EXPECT_EQ(d.kind(), tsv::MeshKind::cartesian);
  EXPECT_EQ(c.tensors(), d.tensors());
  EXPECT_EQ(c.vertices(), d.vertices());
}

}  // namespace
