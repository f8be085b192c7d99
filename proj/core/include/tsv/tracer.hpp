#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string_view>
#include <vector>

#include "tsv/locator.hpp"
#include "tsv/tensor.hpp"

namespace tsv {

enum class PslType : std::uint8_t { major = 0, medium = 1, minor = 2 };
inline constexpr std::array<PslType, 3> kPslTypes = {PslType::major, PslType::medium,
                                                     PslType::minor};

constexpr int index_of(PslType t) { return static_cast<int>(t); }
std::string_view to_string(PslType t);
/// Throws std::invalid_argument for names other than major/medium/minor.
PslType parse_psl_type(std::string_view name);

enum class StopReason : std::uint8_t { none, boundary, degenerate, loop, max_steps, zero_length };
std::string_view to_string(StopReason r);

enum class IntegrationScheme : std::uint8_t { euler, rk2, rk4 };
std::string_view to_string(IntegrationScheme s);
IntegrationScheme parse_scheme(std::string_view name);

struct TraceConfig {
  IntegrationScheme scheme = IntegrationScheme::rk2;
  double step = 0.0;         // integration step length delta
  int max_steps = 1000;      // per direction
  double loop_tol = 0.0;     // must be < step
  double angle_limit = 1.0471975511965976;  // pi / 3
  double deg_threshold = kDegeneracyThreshold;

  /// Throws ConfigError when the invariants do not hold.
  void validate() const;
};

/// Defaults derived from the mesh: step = 0.5 * min edge, loop_tol = 0.45 * step,
/// max_steps enough to cross the bounding-box diagonal five times.
TraceConfig default_trace_config(const HexMesh& mesh, double step_rel = 0.5);

/// Field state recorded at one integration point.
struct PslSample {
  StressTensor tensor{};
  PrincipalDecomposition principal{};
  double deg = 0.0;  // degeneracy of the traced eigenvalue pair
  double von_mises = 0.0;
};

/// A principal stress line: an ordered polyline with per-point field samples.
struct Psl {
  int id = -1;
  PslType type = PslType::major;
  std::vector<Vec3> points;
  std::vector<PslSample> samples;
  int seed_index = -1;    // candidate index that spawned the line, -1 if none
  std::size_t seed_point = 0;  // index into points of the seed position
  int level = 0;
  StopReason stop_backward = StopReason::none;
  StopReason stop_forward = StopReason::none;

  std::size_t size() const { return points.size(); }
  double length() const;
};

/// Result of evaluating the oriented principal direction at a point.
struct DirectionSample {
  StopReason stop = StopReason::none;  // none, boundary or degenerate
  Vec3 dir{};
  CellId cell = kNoCell;
  PslSample sample{};

  bool ok() const { return stop == StopReason::none; }
};

/// Degeneracy of the eigenvalue pair relevant to tracing `type`.
double traced_pair_degeneracy(const PrincipalDecomposition& d, PslType type);

/// Locates, interpolates and decomposes at `point`, then returns the
/// eigenvector of `type` oriented to agree with `prev_dir` (if any). Signals
/// `boundary` outside the mesh and `degenerate` when the traced pair is
/// degenerate and the turn from `prev_dir` exceeds the angle limit.
DirectionSample eigdir_at(const CellLocator& locator, const Vec3& point, PslType type,
                          const std::optional<Vec3>& prev_dir, const TraceConfig& cfg);

/// Bidirectional fixed-step trace from `seed`. Throws DomainError when the seed
/// is outside the mesh.
Psl trace_psl(const CellLocator& locator, const Vec3& seed, PslType type, const TraceConfig& cfg);

}  // namespace tsv
