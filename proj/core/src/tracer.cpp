#include "tsv/tracer.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>
#include <unordered_map>

#include "tsv/errors.hpp"

namespace tsv {
namespace {

// Points closer than this many steps along the trajectory never count as a loop.
constexpr int kLoopMinSeparation = 10;

// Spatial hash over trajectory points keyed by signed trajectory position
// (forward samples positive, backward samples negative).
class TrajectoryHash {
 public:
  explicit TrajectoryHash(double cell) : inv_(cell > 0.0 ? 1.0 / cell : 0.0), radius_(cell) {}

  void insert(const Vec3& p, int position) { cells_[key(cell_of(p))].push_back({p, position}); }

  bool loops(const Vec3& p, int position) const {
    if (radius_ <= 0.0) return false;
    const auto c = cell_of(p);
    const double r2 = radius_ * radius_;
    for (int dz = -1; dz <= 1; ++dz)
      for (int dy = -1; dy <= 1; ++dy)
        for (int dx = -1; dx <= 1; ++dx) {
          const auto it = cells_.find(key({c[0] + dx, c[1] + dy, c[2] + dz}));
          if (it == cells_.end()) continue;
          for (const Entry& e : it->second) {
            if (std::abs(e.position - position) < kLoopMinSeparation) continue;
            if (squared_distance(e.point, p) < r2) return true;
          }
        }
    return false;
  }

 private:
  struct Entry {
    Vec3 point;
    int position;
  };

  std::array<std::int64_t, 3> cell_of(const Vec3& p) const {
    return {static_cast<std::int64_t>(std::floor(p.x * inv_)),
            static_cast<std::int64_t>(std::floor(p.y * inv_)),
            static_cast<std::int64_t>(std::floor(p.z * inv_))};
  }
  static std::uint64_t key(const std::array<std::int64_t, 3>& c) {
    const auto mix = [](std::int64_t v) { return static_cast<std::uint64_t>(v) & 0x1fffff; };
    return mix(c[0]) | (mix(c[1]) << 21) | (mix(c[2]) << 42);
  }

  double inv_;
  double radius_;
  std::unordered_map<std::uint64_t, std::vector<Entry>> cells_;
};

struct HalfTrace {
  std::vector<Vec3> points;
  std::vector<PslSample> samples;
  StopReason stop = StopReason::none;
};

HalfTrace integrate(const CellLocator& locator, const DirectionSample& start, const Vec3& seed,
                    double sign, PslType type, const TraceConfig& cfg, TrajectoryHash& hash) {
  HalfTrace out;
  Vec3 x = seed;
  Vec3 dir = sign * start.dir;
  const double h = cfg.step;
  const int orient = sign > 0.0 ? 1 : -1;

  auto stage = [&](const Vec3& p, const Vec3& prev, Vec3& k) {
    const DirectionSample s = eigdir_at(locator, p, type, prev, cfg);
    if (!s.ok()) {
      out.stop = s.stop;
      return false;
    }
    k = s.dir;
    return true;
  };

  for (int step = 0; step < cfg.max_steps; ++step) {
    Vec3 next;
    switch (cfg.scheme) {
      case IntegrationScheme::euler:
        next = x + h * dir;
        break;
      case IntegrationScheme::rk2: {
        Vec3 k2;
        if (!stage(x + 0.5 * h * dir, dir, k2)) return out;
        next = x + h * k2;
        break;
      }
      case IntegrationScheme::rk4: {
        Vec3 k2, k3, k4;
        if (!stage(x + 0.5 * h * dir, dir, k2)) return out;
        if (!stage(x + 0.5 * h * k2, dir, k3)) return out;
        if (!stage(x + h * k3, dir, k4)) return out;
        next = x + (h / 6.0) * (dir + 2.0 * k2 + 2.0 * k3 + k4);
        break;
      }
    }
    if (norm(next - x) < 1e-9 * h) {
      out.stop = StopReason::zero_length;
      return out;
    }
    const DirectionSample s = eigdir_at(locator, next, type, dir, cfg);
    if (!s.ok()) {
      out.stop = s.stop;
      return out;
    }
    const int position = orient * (step + 1);
    out.points.push_back(next);
    out.samples.push_back(s.sample);
    if (hash.loops(next, position)) {
      out.stop = StopReason::loop;
      return out;
    }
    hash.insert(next, position);
    x = next;
    dir = s.dir;
  }
  out.stop = StopReason::max_steps;
  return out;
}

}  // namespace

std::string_view to_string(PslType t) {
  switch (t) {
    case PslType::major: return "major";
    case PslType::medium: return "medium";
    case PslType::minor: return "minor";
  }
  return "?";
}

PslType parse_psl_type(std::string_view name) {
  if (name == "major") return PslType::major;
  if (name == "medium") return PslType::medium;
  if (name == "minor") return PslType::minor;
  throw std::invalid_argument("unknown PSL type '" + std::string(name) + "'");
}

std::string_view to_string(StopReason r) {
  switch (r) {
    case StopReason::none: return "none";
    case StopReason::boundary: return "boundary";
    case StopReason::degenerate: return "degenerate";
    case StopReason::loop: return "loop";
    case StopReason::max_steps: return "max_steps";
    case StopReason::zero_length: return "zero_length";
  }
  return "?";
}

std::string_view to_string(IntegrationScheme s) {
  switch (s) {
    case IntegrationScheme::euler: return "euler";
    case IntegrationScheme::rk2: return "rk2";
    case IntegrationScheme::rk4: return "rk4";
  }
  return "?";
}

IntegrationScheme parse_scheme(std::string_view name) {
  if (name == "euler") return IntegrationScheme::euler;
  if (name == "rk2") return IntegrationScheme::rk2;
  if (name == "rk4") return IntegrationScheme::rk4;
  throw std::invalid_argument("unknown integration scheme '" + std::string(name) + "'");
}

void TraceConfig::validate() const {
  if (!(step > 0.0) || !std::isfinite(step)) throw ConfigError("trace step must be positive");
  if (max_steps < 1) throw ConfigError("max_steps must be at least 1");
  if (!(loop_tol < step) || loop_tol < 0.0) {
    throw ConfigError("loop tolerance must be non-negative and smaller than the step");
  }
  if (!(angle_limit > 0.0)) throw ConfigError("angle limit must be positive");
}

TraceConfig default_trace_config(const HexMesh& mesh, double step_rel) {
  TraceConfig cfg;
  cfg.step = step_rel * mesh.min_edge_length();
  cfg.loop_tol = 0.45 * cfg.step;
  cfg.angle_limit = std::numbers::pi / 3.0;
  const double diag = norm(mesh.bbox().extent());
  cfg.max_steps = std::max(1, static_cast<int>(std::ceil(5.0 * diag / cfg.step)));
  return cfg;
}

double Psl::length() const {
  double len = 0.0;
  for (std::size_t i = 1; i < points.size(); ++i) len += distance(points[i - 1], points[i]);
  return len;
}

double traced_pair_degeneracy(const PrincipalDecomposition& d, PslType type) {
  switch (type) {
    case PslType::major: return d.deg12;
    case PslType::medium: return std::min(d.deg12, d.deg23);
    case PslType::minor: return d.deg23;
  }
  return 0.0;
}

DirectionSample eigdir_at(const CellLocator& locator, const Vec3& point, PslType type,
                          const std::optional<Vec3>& prev_dir, const TraceConfig& cfg) {
  DirectionSample out;
  const auto cell = locator.locate(point);
  if (!cell) {
    out.stop = StopReason::boundary;
    return out;
  }
  out.cell = *cell;
  PslSample& s = out.sample;
  s.tensor = interpolate_tensor(locator.mesh(), *cell, point);
  s.principal = decompose(s.tensor);
  s.deg = traced_pair_degeneracy(s.principal, type);
  s.von_mises = von_mises(s.tensor);
  out.dir = s.principal.e[index_of(type)];
  if (prev_dir) {
    if (dot(out.dir, *prev_dir) < 0.0) out.dir = -out.dir;
    if (s.deg < cfg.deg_threshold && angle_between(out.dir, *prev_dir) > cfg.angle_limit) {
      out.stop = StopReason::degenerate;
    }
  }
  return out;
}

Psl trace_psl(const CellLocator& locator, const Vec3& seed, PslType type, const TraceConfig& cfg) {
  cfg.validate();
  const DirectionSample start = eigdir_at(locator, seed, type, std::nullopt, cfg);
  if (!start.ok()) throw DomainError("trace seed lies outside the mesh");

  TrajectoryHash hash(cfg.loop_tol);
  hash.insert(seed, 0);
  HalfTrace fwd = integrate(locator, start, seed, 1.0, type, cfg, hash);
  HalfTrace bwd = integrate(locator, start, seed, -1.0, type, cfg, hash);

  Psl psl;
  psl.type = type;
  psl.stop_forward = fwd.stop;
  psl.stop_backward = bwd.stop;
  const std::size_t n = bwd.points.size() + 1 + fwd.points.size();
  psl.points.reserve(n);
  psl.samples.reserve(n);
  for (std::size_t i = bwd.points.size(); i-- > 0;) {
    psl.points.push_back(bwd.points[i]);
    psl.samples.push_back(bwd.samples[i]);
  }
  psl.seed_point = psl.points.size();
  psl.points.push_back(seed);
  psl.samples.push_back(start.sample);
  psl.points.insert(psl.points.end(), fwd.points.begin(), fwd.points.end());
  psl.samples.insert(psl.samples.end(), fwd.samples.begin(), fwd.samples.end());
  return psl;
}

}  // namespace tsv
