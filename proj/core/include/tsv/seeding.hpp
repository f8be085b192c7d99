#pragma once

#include <array>
#include <optional>
#include <vector>

#include "tsv/locator.hpp"
#include "tsv/tracer.hpp"

namespace tsv {

enum class SeedStrategy { volume, boundary, loaded_fixed };
std::string_view to_string(SeedStrategy s);
/// Accepts "volume", "boundary", "loaded" (alias "loaded_fixed").
SeedStrategy parse_strategy(std::string_view name);

/// Candidate seed with its valence bits (one per PSL type). Bits only go 0 -> 1.
struct SeedPoint {
  Vec3 home{};
  Vec3 pos{};
  std::array<bool, 3> valence{false, false, false};
  int snapped_to = -1;  // PSL id the candidate was first snapped onto

  bool solid() const { return valence[0] && valence[1] && valence[2]; }
};

struct SeedingConfig {
  /// Per-type merging thresholds relative to D0 (major, medium, minor).
  std::array<double, 3> eps_rel{0.2, 0.2, 0.2};
  /// Absolute spacing of the volume seed grid; defaults to half the smallest
  /// absolute threshold.
  std::optional<double> seed_grid_spacing;
  /// Explicit initial seed position; the nearest candidate is used. Defaults
  /// to the candidate nearest the bounding-box centre.
  std::optional<Vec3> initial_seed;
  SeedStrategy strategy = SeedStrategy::volume;
  TraceConfig trace{};
  int levels = 1;
  std::array<bool, 3> enabled{true, true, true};

  std::array<double, 3> eps_abs(const HexMesh& mesh) const;
  double grid_spacing(const HexMesh& mesh) const;
  /// Throws ConfigError when thresholds, level count or grid spacing are invalid.
  void validate(const HexMesh& mesh) const;
};

/// Absolute thresholds of level k (1 = coarsest): 2^(M-k) * eps.
std::array<double, 3> level_thresholds(const std::array<double, 3>& eps, int levels, int k);

/// Record of the seed that spawned one PSL, for replaying the extraction.
struct SeedEvent {
  int psl_id = -1;
  int candidate = -1;
  PslType type = PslType::major;
  Vec3 position{};
  int level = 1;
  bool initial = false;
};

struct PslSet {
  std::vector<Psl> psls;  // psls[i].id == i
  std::vector<int> extraction_order;
  std::vector<std::array<double, 3>> thresholds;  // absolute, per level (index level - 1)
  std::vector<std::array<int, 3>> tallies;        // PSL count per level and type
  std::vector<SeedEvent> seeds;                   // parallel to extraction_order
  int initial_candidate = -1;
  Vec3 initial_seed{};
  std::size_t candidate_count = 0;
  std::vector<SeedPoint> final_candidates;

  int levels() const { return static_cast<int>(thresholds.size()); }
};

/// Ids of the PSLs visible at a per-type level selection, in extraction order.
struct PslSliceView {
  const PslSet* set = nullptr;
  std::vector<int> ids;

  std::size_t size() const { return ids.size(); }
  const Psl& operator[](std::size_t i) const { return set->psls[static_cast<std::size_t>(ids[i])]; }
};

/// Candidate seeds for the configured strategy, all with empty valence.
/// Throws ConfigError when no candidate exists.
std::vector<SeedPoint> init_candidates(const CellLocator& locator, const SeedingConfig& cfg);

/// Single-level valence-driven seeding at the configured thresholds.
PslSet run_seeding(const CellLocator& locator, const SeedingConfig& cfg);

/// Nested hierarchy of cfg.levels levels with thresholds 2^(M-k) * eps, each
/// level growing out of the PSLs of the coarser ones.
PslSet build_lod(const CellLocator& locator, const SeedingConfig& cfg);

/// PSLs with level <= levels[type]; 0 hides a type. Throws std::out_of_range
/// for levels outside [0, M].
PslSliceView lod_slice(const PslSet& set, const std::array<int, 3>& levels);

}  // namespace tsv
