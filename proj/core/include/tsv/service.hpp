#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <mutex>
#include <nlohmann/json_fwd.hpp>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "tsv/errors.hpp"
#include "tsv/exchange.hpp"
#include "tsv/locator.hpp"
#include "tsv/seeding.hpp"

namespace tsv {

/// Invalid request parameter; `field()` names the offending key.
class ParamError : public Error {
 public:
  ParamError(std::string field, const std::string& what)
      : Error(field + ": " + what), field_(std::move(field)) {}
  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

/// Everything needed to run one extraction. Thresholds are relative to D0 and
/// the step is relative to the shortest cell edge.
struct ExtractionRequest {
  std::string mesh;
  std::array<double, 3> eps{0.2, 0.2, 0.2};
  int levels = 1;
  std::array<bool, 3> enabled{true, true, true};
  SeedStrategy strategy = SeedStrategy::volume;
  IntegrationScheme scheme = IntegrationScheme::rk2;
  double step_rel = 0.5;
  std::optional<Vec3> seed;
  /// Per-type level selection of the exported PSLs; all levels by default.
  std::optional<std::array<int, 3>> slice;
  ScalarSelector scalar = ScalarSelector::von_mises;
  bool frames = false;
};

/// Summary of a mesh: kind, counts, D0, minimum edge, bbox, boundary and
/// load-case vertex counts.
nlohmann::json mesh_info(const HexMesh& mesh);

/// Builds and validates the seeding configuration. Throws ParamError.
SeedingConfig make_seeding_config(const HexMesh& mesh, const ExtractionRequest& req);

struct ExtractionStats {
  std::vector<std::array<int, 3>> per_level;  // PSL count per level and type
  std::size_t psl_count = 0;
  std::size_t exported = 0;
  std::size_t candidates = 0;
  double wall_time = 0.0;  // seconds
  std::uint64_t job_id = 0;
  std::int64_t started_ns = 0;
  std::int64_t finished_ns = 0;
  bool cached = false;
};

struct ExtractionResult {
  ExchangeDocument document;
  ExtractionStats stats;
};

/// Seeds, traces and exports in one call. Throws ParamError for invalid
/// parameters.
ExtractionResult run_extraction(const CellLocator& locator, const ExtractionRequest& req);

/// A loaded mesh with its point locator.
struct LoadedMesh {
  explicit LoadedMesh(HexMesh m) : mesh(std::move(m)), locator(mesh) {}
  LoadedMesh(const LoadedMesh&) = delete;
  LoadedMesh& operator=(const LoadedMesh&) = delete;

  HexMesh mesh;
  CellLocator locator;
};

/// Named, immutable meshes shared between connections.
class MeshCatalog {
 public:
  void add(const std::string& name, HexMesh mesh);
  /// Loads a mesh file under `name`. Throws on I/O or parse errors.
  void add_file(const std::string& name, const std::filesystem::path& path);
  std::shared_ptr<const LoadedMesh> find(const std::string& name) const;
  std::vector<std::string> names() const;

 private:
  mutable std::mutex mutex_;
  std::vector<std::pair<std::string, std::shared_ptr<const LoadedMesh>>> entries_;
};

struct ServiceOptions {
  /// Treat unknown mesh names as file paths and load them on demand.
  bool load_paths = true;
};

/// Request dispatcher shared by the TCP and browser endpoints. Extractions
/// are executed one at a time on a dedicated worker thread, in arrival order.
class ExtractionService {
 public:
  explicit ExtractionService(MeshCatalog& catalog, ServiceOptions options = {});
  ~ExtractionService();
  ExtractionService(const ExtractionService&) = delete;
  ExtractionService& operator=(const ExtractionService&) = delete;

  /// Answers one request message with one reply message (JSON text). Never
  /// throws; failures become error replies.
  std::string handle(std::string_view message);

  /// Error reply for a frame that could not be read as a request.
  static std::string bad_frame_reply(const std::string& message);

  std::uint64_t jobs_started() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

/// Parses a request object's extraction parameters. Throws ParamError.
ExtractionRequest parse_extraction_request(std::string_view json_text);

}  // namespace tsv
