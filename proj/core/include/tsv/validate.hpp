#pragma once

#include <optional>
#include <string>
#include <vector>

#include "tsv/service.hpp"

namespace tsv {

struct ValidationCheck {
  std::string name;
  bool ok = true;
  std::string detail;
};

struct ValidationOptions {
  /// When set, also seeds the mesh with this request and checks the result.
  std::optional<ExtractionRequest> extraction;
};

/// Structural and numerical self-checks of a loaded mesh: cell orientation,
/// adjacency symmetry, locator consistency, eigen-analysis accuracy at every
/// vertex and, optionally, seeding invariants of one extraction.
std::vector<ValidationCheck> validate_mesh(const LoadedMesh& mesh, const ValidationOptions& options = {});

/// Distance-replay of a seeding run: the number of non-initial seeds that were
/// closer than their level's threshold to an earlier line of the same type.
std::size_t count_spacing_violations(const PslSet& set);

}  // namespace tsv
