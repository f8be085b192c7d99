#pragma once

#include <array>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "tsv/geometry.hpp"
#include "tsv/seeding.hpp"
#include "tsv/tensor.hpp"

namespace tsv {

inline constexpr int kExchangeVersion = 1;

/// Per-vertex attribute arrays of one exported PSL.
struct ExchangeAttrs {
  std::vector<double> sigma1;
  std::vector<double> sigma2;
  std::vector<double> sigma3;
  std::vector<double> deg;
  std::vector<double> scalar;

  friend bool operator==(const ExchangeAttrs&, const ExchangeAttrs&) = default;
};

struct ExchangePsl {
  int id = -1;
  PslType type = PslType::major;
  int level = 1;
  int seed_index = -1;
  std::vector<Vec3> points;
  ExchangeAttrs attrs;
  /// Optional per-point (n, b) frame vectors.
  std::optional<std::vector<std::array<double, 6>>> frames;

  friend bool operator==(const ExchangePsl&, const ExchangePsl&) = default;
};

/// In-memory form of the PSL exchange document read by the viewer.
struct ExchangeDocument {
  int version = kExchangeVersion;
  double d0 = 0.0;
  Aabb bbox{};
  std::vector<ExchangePsl> psls;

  friend bool operator==(const ExchangeDocument& a, const ExchangeDocument& b) {
    return a.version == b.version && a.d0 == b.d0 && a.bbox.min == b.bbox.min &&
           a.bbox.max == b.bbox.max && a.psls == b.psls;
  }
};

/// Converts the PSLs of `slice` (in extraction order) into an exchange
/// document. The scalar attribute is evaluated with `scalar`; frames are
/// attached when requested, aligned as in default_alignment.
ExchangeDocument export_psls(const HexMesh& mesh, const PslSliceView& slice,
                             ScalarSelector scalar, bool with_frames = false);

/// Compact JSON text. Numbers are written in shortest round-trip form, so
/// parse_exchange(to_json(doc)) == doc.
std::string to_json(const ExchangeDocument& doc);

/// Throws SchemaError when `text` is not a valid exchange document.
ExchangeDocument parse_exchange(std::string_view text);

}  // namespace tsv
