#include "tsv/validate.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace tsv {
namespace {

constexpr std::array<std::array<int, 3>, 8> kOffsets = {{
    {0, 0, 0}, {1, 0, 0}, {1, 1, 0}, {0, 1, 0}, {0, 0, 1}, {1, 0, 1}, {1, 1, 1}, {0, 1, 1},
}};

int corner_at(int u, int v, int w) {
  for (int c = 0; c < 8; ++c) {
    if (kOffsets[c][0] == u && kOffsets[c][1] == v && kOffsets[c][2] == w) return c;
  }
  return -1;
}

// Smallest corner Jacobian of the trilinear map, relative to the cube of the
// longest incident edge.
double min_corner_jacobian(const std::array<Vec3, 8>& p) {
  double worst = std::numeric_limits<double>::infinity();
  for (int c = 0; c < 8; ++c) {
    const auto& o = kOffsets[c];
    std::array<Vec3, 3> e;
    for (int a = 0; a < 3; ++a) {
      auto n = o;
      n[a] = 1 - n[a];
      const double sign = o[a] == 0 ? 1.0 : -1.0;
      e[a] = (p[corner_at(n[0], n[1], n[2])] - p[c]) * sign;
    }
    const double scale = std::max({norm(e[0]), norm(e[1]), norm(e[2])});
    const double det = dot(e[0], cross(e[1], e[2]));
    worst = std::min(worst, scale > 0.0 ? det / (scale * scale * scale) : -1.0);
  }
  return worst;
}

std::string join_first(const std::vector<std::size_t>& ids, const char* what) {
  std::ostringstream out;
  out << ids.size() << ' ' << what;
  if (!ids.empty()) {
    out << " (first: ";
    for (std::size_t i = 0; i < std::min<std::size_t>(ids.size(), 5); ++i) out << (i ? ", " : "") << ids[i];
    out << ')';
  }
  return out.str();
}

ValidationCheck check_orientation(const HexMesh& m) {
  std::vector<std::size_t> bad;
  for (std::size_t c = 0; c < m.cell_count(); ++c) {
    if (!(min_corner_jacobian(m.cell_corners(static_cast<CellId>(c))) > 1e-12)) bad.push_back(c);
  }
  return {"cell orientation", bad.empty(), join_first(bad, "inverted or collapsed cells")};
}

ValidationCheck check_adjacency(const HexMesh& m) {
  std::vector<std::size_t> bad;
  const auto& adj = m.face_adjacency();
  std::size_t open = 0;
  for (std::size_t c = 0; c < adj.size(); ++c) {
    for (CellId n : adj[c]) {
      if (n == kNoCell) {
        ++open;
        continue;
      }
      const auto& back = adj[static_cast<std::size_t>(n)];
      if (std::find(back.begin(), back.end(), static_cast<CellId>(c)) == back.end()) {
        bad.push_back(c);
        break;
      }
    }
  }
  const bool ok = bad.empty() && open == m.boundary_faces().size();
  std::string detail = join_first(bad, "cells with one-sided neighbours");
  detail += ", " + std::to_string(open) + " open faces";
  return {"face adjacency", ok, detail};
}

ValidationCheck check_locator(const LoadedMesh& lm) {
  const HexMesh& m = lm.mesh;
  std::vector<std::size_t> bad;
  for (std::size_t c = 0; c < m.cell_count(); ++c) {
    const auto corners = m.cell_corners(static_cast<CellId>(c));
    Vec3 centroid{};
    for (const Vec3& p : corners) centroid += p;
    centroid = centroid / 8.0;
    const auto found = lm.locator.locate(centroid);
    if (!found || *found != static_cast<CellId>(c)) bad.push_back(c);
  }
  return {"point location", bad.empty(), join_first(bad, "cell centroids not located in their cell")};
}

ValidationCheck check_eigen(const HexMesh& m) {
  std::vector<std::size_t> bad;
  double worst = 0.0;
  for (std::size_t v = 0; v < m.tensors().size(); ++v) {
    const StressTensor& t = m.tensors()[v];
    const double scale = frobenius_norm(t);
    if (!std::isfinite(scale)) {
      bad.push_back(v);
      continue;
    }
    if (scale == 0.0) continue;
    const PrincipalDecomposition d = decompose(t);
    const auto a = t.matrix();
    double residual = 0.0;
    for (int i = 0; i < 3; ++i) {
      for (int j = 0; j < 3; ++j) {
        double r = a[i][j];
        for (int k = 0; k < 3; ++k) r -= d.sigma[k] * d.e[k][i] * d.e[k][j];
        residual = std::max(residual, std::abs(r) / scale);
      }
    }
    for (int k = 0; k < 3; ++k) {
      for (int l = 0; l < 3; ++l) {
        residual = std::max(residual, std::abs(dot(d.e[k], d.e[l]) - (k == l ? 1.0 : 0.0)));
      }
    }
    worst = std::max(worst, residual);
    if (!(residual < 1e-8)) bad.push_back(v);
  }
  std::ostringstream detail;
  detail << join_first(bad, "vertex tensors failing reconstruction") << ", worst relative residual "
         << worst;
  return {"eigen-analysis", bad.empty(), detail.str()};
}

void check_extraction(const LoadedMesh& lm, const ExtractionRequest& req,
                      std::vector<ValidationCheck>& out) {
  PslSet set;
  try {
    set = build_lod(lm.locator, make_seeding_config(lm.mesh, req));
  } catch (const std::exception& e) {
    out.push_back({"extraction", false, e.what()});
    return;
  }
  out.push_back({"extraction", !set.psls.empty(), std::to_string(set.psls.size()) + " lines"});

  const std::size_t violations = count_spacing_violations(set);
  out.push_back({"seed spacing", violations == 0,
                 std::to_string(violations) + " seeds closer than their threshold"});

  std::size_t unsnapped = 0;
  std::size_t open = 0;
  for (const SeedPoint& s : set.final_candidates) {
    for (int t = 0; t < 3; ++t) {
      if (req.enabled[t] && !s.valence[t]) ++open;
    }
    if (s.snapped_to < 0) continue;
    const auto& pts = set.psls[static_cast<std::size_t>(s.snapped_to)].points;
    if (std::find(pts.begin(), pts.end(), s.pos) == pts.end()) ++unsnapped;
  }
  out.push_back({"seed snapping", unsnapped == 0,
                 std::to_string(unsnapped) + " snapped seeds off their line"});
  out.push_back({"coverage", open == 0, std::to_string(open) + " unresolved seed valences"});
}

}  // namespace

std::size_t count_spacing_violations(const PslSet& set) {
  std::size_t violations = 0;
  for (std::size_t i = 0; i < set.seeds.size(); ++i) {
    const SeedEvent& ev = set.seeds[i];
    if (ev.initial) continue;
    const int t = index_of(ev.type);
    const double limit = set.thresholds[static_cast<std::size_t>(ev.level - 1)][static_cast<std::size_t>(t)];
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < i; ++j) {
      const Psl& earlier = set.psls[static_cast<std::size_t>(set.extraction_order[j])];
      if (earlier.type != ev.type) continue;
      for (const Vec3& p : earlier.points) best = std::min(best, distance(p, ev.position));
    }
    if (best < limit * (1.0 - 1e-12)) ++violations;
  }
  return violations;
}

std::vector<ValidationCheck> validate_mesh(const LoadedMesh& mesh, const ValidationOptions& options) {
  std::vector<ValidationCheck> out;
  out.push_back(check_orientation(mesh.mesh));
  out.push_back(check_adjacency(mesh.mesh));
  out.push_back(check_locator(mesh));
  out.push_back(check_eigen(mesh.mesh));
  if (options.extraction) check_extraction(mesh, *options.extraction, out);
  return out;
}

}  // namespace tsv
