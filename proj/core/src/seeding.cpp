#include "tsv/seeding.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>
#include <unordered_map>

#include "tsv/errors.hpp"

namespace tsv {
namespace {

using CellKey = std::array<std::int64_t, 3>;

CellKey cell_key(const Vec3& p, double inv) {
  return {static_cast<std::int64_t>(std::floor(p.x * inv)),
          static_cast<std::int64_t>(std::floor(p.y * inv)),
          static_cast<std::int64_t>(std::floor(p.z * inv))};
}

std::uint64_t pack(const CellKey& c) {
  const auto mix = [](std::int64_t v) { return static_cast<std::uint64_t>(v) & 0x1fffff; };
  return mix(c[0]) | (mix(c[1]) << 21) | (mix(c[2]) << 42);
}

// All integration points of one PSL type, hashed on a grid whose cell size
// equals the query radius.
class PointIndex {
 public:
  void reset(double radius) {
    radius_ = radius;
    inv_ = 1.0 / radius;
    cells_.clear();
  }

  void insert(const Psl& psl) {
    for (const Vec3& p : psl.points) cells_[pack(cell_key(p, inv_))].push_back(p);
  }

  bool any_within(const Vec3& p) const {
    const CellKey c = cell_key(p, inv_);
    const double r2 = radius_ * radius_;
    for (int dz = -1; dz <= 1; ++dz)
      for (int dy = -1; dy <= 1; ++dy)
        for (int dx = -1; dx <= 1; ++dx) {
          const auto it = cells_.find(pack({c[0] + dx, c[1] + dy, c[2] + dz}));
          if (it == cells_.end()) continue;
          for (const Vec3& q : it->second) {
            if (squared_distance(p, q) < r2) return true;
          }
        }
    return false;
  }

 private:
  double radius_ = 1.0;
  double inv_ = 1.0;
  std::unordered_map<std::uint64_t, std::vector<Vec3>> cells_;
};

// Candidates bucketed by their current position so that the closest
// candidates of a new PSL can be gathered from its integration points.
class CandidateGrid {
 public:
  void reset(const std::vector<SeedPoint>& candidates, double cell) {
    inv_ = 1.0 / cell;
    cells_.clear();
    for (std::size_t i = 0; i < candidates.size(); ++i) {
      cells_[pack(cell_key(candidates[i].pos, inv_))].push_back(static_cast<int>(i));
    }
  }

  void move(int id, const Vec3& from, const Vec3& to) {
    const std::uint64_t a = pack(cell_key(from, inv_));
    const std::uint64_t b = pack(cell_key(to, inv_));
    if (a == b) return;
    auto& src = cells_[a];
    src.erase(std::find(src.begin(), src.end(), id));
    cells_[b].push_back(id);
  }

  template <typename Fn>
  void for_each_near(const Vec3& p, double radius, Fn&& fn) const {
    const CellKey lo = cell_key(p - Vec3{radius, radius, radius}, inv_);
    const CellKey hi = cell_key(p + Vec3{radius, radius, radius}, inv_);
    for (std::int64_t z = lo[2]; z <= hi[2]; ++z)
      for (std::int64_t y = lo[1]; y <= hi[1]; ++y)
        for (std::int64_t x = lo[0]; x <= hi[0]; ++x) {
          const auto it = cells_.find(pack({x, y, z}));
          if (it == cells_.end()) continue;
          for (int id : it->second) fn(id);
        }
  }

 private:
  double inv_ = 1.0;
  std::unordered_map<std::uint64_t, std::vector<int>> cells_;
};

class Seeder {
 public:
  Seeder(const CellLocator& locator, const SeedingConfig& cfg)
      : locator_(locator), cfg_(cfg), eps_(cfg.eps_abs(locator.mesh())) {
    cfg_.validate(locator.mesh());
    candidates_ = init_candidates(locator, cfg_);
    best_.assign(candidates_.size(), {std::numeric_limits<double>::infinity(), 0});
  }

  PslSet run() {
    const int levels = cfg_.levels;
    for (int k = 1; k <= levels; ++k) {
      thresholds_ = level_thresholds(eps_, levels, k);
      set_.thresholds.push_back(thresholds_);
      set_.tallies.push_back({0, 0, 0});
      level_ = k;
      reset_level();
      if (k == 1) {
        seed_initial();
      } else {
        for (int id : set_.extraction_order) classify(set_.psls[static_cast<std::size_t>(id)]);
      }
      grow();
    }
    set_.candidate_count = candidates_.size();
    set_.final_candidates = candidates_;
    return std::move(set_);
  }

 private:
  void reset_level() {
    for (SeedPoint& s : candidates_) {
      s.pos = s.home;
      s.snapped_to = -1;
      for (int t = 0; t < 3; ++t) s.valence[t] = !cfg_.enabled[t];
    }
    const double cell = std::max({thresholds_[0], thresholds_[1], thresholds_[2]});
    grid_.reset(candidates_, cell);
    for (int t = 0; t < 3; ++t) {
      index_[t].reset(thresholds_[t]);
      for (const Psl& p : set_.psls) {
        if (index_of(p.type) == t) index_[t].insert(p);
      }
    }
  }

  void seed_initial() {
    const Vec3 target = cfg_.initial_seed.value_or(locator_.mesh().bbox().center());
    int best = 0;
    double best_d = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < candidates_.size(); ++i) {
      const double d = squared_distance(candidates_[i].home, target);
      if (d < best_d) {
        best_d = d;
        best = static_cast<int>(i);
      }
    }
    set_.initial_candidate = best;
    set_.initial_seed = candidates_[static_cast<std::size_t>(best)].home;
    for (PslType t : kPslTypes) {
      if (!cfg_.enabled[index_of(t)]) continue;
      extract(best, t, /*initial=*/true);
    }
    candidates_[static_cast<std::size_t>(best)].valence = {true, true, true};
  }

  // Alternates over PSL types until every candidate is solid.
  void grow() {
    int last = 2;
    for (;;) {
      int type = -1;
      int seed = -1;
      for (int step = 1; step <= 3 && seed < 0; ++step) {
        const int t = (last + step) % 3;
        if (!cfg_.enabled[t]) continue;
        seed = pick_seed(t);
        if (seed >= 0) type = t;
      }
      if (seed < 0) return;
      extract(seed, kPslTypes[static_cast<std::size_t>(type)], /*initial=*/false);
      last = type;
    }
  }

  // Candidate with bit t unset closest to the initial seed. Candidates already
  // lying on some PSL (other bits set) are preferred so that new lines start on
  // existing ones.
  int pick_seed(int t) const {
    int best_semi = -1;
    int best_empty = -1;
    double d_semi = std::numeric_limits<double>::infinity();
    double d_empty = d_semi;
    for (std::size_t i = 0; i < candidates_.size(); ++i) {
      const SeedPoint& s = candidates_[i];
      if (s.valence[t]) continue;
      bool semi = false;
      for (int u = 0; u < 3; ++u) semi = semi || (u != t && cfg_.enabled[u] && s.valence[u]);
      const double d = squared_distance(s.pos, set_.initial_seed);
      if (semi) {
        if (d < d_semi) {
          d_semi = d;
          best_semi = static_cast<int>(i);
        }
      } else if (d < d_empty) {
        d_empty = d;
        best_empty = static_cast<int>(i);
      }
    }
    return best_semi >= 0 ? best_semi : best_empty;
  }

  void extract(int candidate, PslType type, bool initial) {
    SeedPoint& seed = candidates_[static_cast<std::size_t>(candidate)];
    const Vec3 at = seed.pos;
    Psl psl;
    try {
      psl = trace_psl(locator_, at, type, cfg_.trace);
    } catch (const DomainError&) {
      seed.valence[index_of(type)] = true;
      return;
    }
    psl.id = static_cast<int>(set_.psls.size());
    psl.seed_index = candidate;
    psl.level = level_;
    set_.psls.push_back(std::move(psl));
    set_.extraction_order.push_back(set_.psls.back().id);
    set_.seeds.push_back({set_.psls.back().id, candidate, type, at, level_, initial});
    ++set_.tallies.back()[index_of(type)];
    const Psl& added = set_.psls.back();
    index_[index_of(type)].insert(added);
    classify(added);
    seed.valence[index_of(type)] = true;
  }

  // Sets bit t of every candidate closer than eps_t to `psl`, snaps those not
  // yet snapped onto the closest integration point and re-checks the moved
  // candidates against the other PSL types.
  void classify(const Psl& psl) {
    const int t = index_of(psl.type);
    const double eps = thresholds_[t];
    const double eps2 = eps * eps;
    touched_.clear();
    for (std::size_t j = 0; j < psl.points.size(); ++j) {
      const Vec3& p = psl.points[j];
      grid_.for_each_near(p, eps, [&](int id) {
        const SeedPoint& s = candidates_[static_cast<std::size_t>(id)];
        if (s.valence[t]) return;
        const double d2 = squared_distance(s.pos, p);
        if (d2 >= eps2) return;
        auto& b = best_[static_cast<std::size_t>(id)];
        if (b.first == std::numeric_limits<double>::infinity()) touched_.push_back(id);
        if (d2 < b.first) b = {d2, j};
      });
    }
    std::sort(touched_.begin(), touched_.end());
    for (int id : touched_) {
      SeedPoint& s = candidates_[static_cast<std::size_t>(id)];
      auto& b = best_[static_cast<std::size_t>(id)];
      s.valence[t] = true;
      if (s.snapped_to < 0) {
        const Vec3 to = psl.points[b.second];
        grid_.move(id, s.pos, to);
        s.pos = to;
        s.snapped_to = psl.id;
      }
      b = {std::numeric_limits<double>::infinity(), 0};
    }
    for (int id : touched_) {
      SeedPoint& s = candidates_[static_cast<std::size_t>(id)];
      for (int u = 0; u < 3; ++u) {
        if (u == t || s.valence[u]) continue;
        if (index_[u].any_within(s.pos)) s.valence[u] = true;
      }
    }
  }

  const CellLocator& locator_;
  SeedingConfig cfg_;
  std::array<double, 3> eps_;
  std::array<double, 3> thresholds_{};
  int level_ = 1;
  std::vector<SeedPoint> candidates_;
  std::vector<std::pair<double, std::size_t>> best_;
  std::vector<int> touched_;
  CandidateGrid grid_;
  std::array<PointIndex, 3> index_;
  PslSet set_;
};

}  // namespace

std::string_view to_string(SeedStrategy s) {
  switch (s) {
    case SeedStrategy::volume: return "volume";
    case SeedStrategy::boundary: return "boundary";
    case SeedStrategy::loaded_fixed: return "loaded";
  }
  return "?";
}

SeedStrategy parse_strategy(std::string_view name) {
  if (name == "volume") return SeedStrategy::volume;
  if (name == "boundary") return SeedStrategy::boundary;
  if (name == "loaded" || name == "loaded_fixed") return SeedStrategy::loaded_fixed;
  throw std::invalid_argument("unknown seeding strategy '" + std::string(name) + "'");
}

std::array<double, 3> SeedingConfig::eps_abs(const HexMesh& mesh) const {
  return {eps_rel[0] * mesh.d0(), eps_rel[1] * mesh.d0(), eps_rel[2] * mesh.d0()};
}

double SeedingConfig::grid_spacing(const HexMesh& mesh) const {
  if (seed_grid_spacing) return *seed_grid_spacing;
  const auto eps = eps_abs(mesh);
  double smallest = std::numeric_limits<double>::infinity();
  for (int t = 0; t < 3; ++t) {
    if (enabled[t]) smallest = std::min(smallest, eps[t]);
  }
  return 0.5 * smallest;
}

void SeedingConfig::validate(const HexMesh& mesh) const {
  if (levels < 1) throw ConfigError("number of levels must be at least 1");
  if (levels > 30) throw ConfigError("number of levels must be at most 30");
  if (!enabled[0] && !enabled[1] && !enabled[2]) throw ConfigError("no PSL type enabled");
  for (int t = 0; t < 3; ++t) {
    if (!(eps_rel[t] > 0.0) || !std::isfinite(eps_rel[t])) {
      throw ConfigError("merging threshold for " + std::string(to_string(kPslTypes[t])) +
                        " must be positive");
    }
  }
  const auto eps = eps_abs(mesh);
  double smallest = std::numeric_limits<double>::infinity();
  for (int t = 0; t < 3; ++t) {
    if (enabled[t]) smallest = std::min(smallest, eps[t]);
  }
  const double spacing = grid_spacing(mesh);
  if (!(spacing > 0.0)) throw ConfigError("seed grid spacing must be positive");
  if (spacing > smallest * (1.0 + 1e-12)) {
    throw ConfigError("seed grid spacing must not exceed the smallest merging threshold");
  }
  trace.validate();
}

std::array<double, 3> level_thresholds(const std::array<double, 3>& eps, int levels, int k) {
  if (k < 1 || k > levels) throw std::out_of_range("level out of range");
  const double factor = std::ldexp(1.0, levels - k);
  return {factor * eps[0], factor * eps[1], factor * eps[2]};
}

std::vector<SeedPoint> init_candidates(const CellLocator& locator, const SeedingConfig& cfg) {
  const HexMesh& mesh = locator.mesh();
  std::vector<Vec3> positions;
  switch (cfg.strategy) {
    case SeedStrategy::volume: {
      const double h = cfg.grid_spacing(mesh);
      const Aabb& box = mesh.bbox();
      const Vec3 ext = box.extent();
      std::array<long long, 3> n{};
      Vec3 start;
      for (int a = 0; a < 3; ++a) {
        n[a] = static_cast<long long>(std::floor(ext[a] / h + 1e-9)) + 1;
        start[a] = box.min[a] + 0.5 * (ext[a] - static_cast<double>(n[a] - 1) * h);
      }
      if (n[0] * n[1] * n[2] > (1ll << 27)) throw ConfigError("seed grid too fine");
      for (long long k = 0; k < n[2]; ++k)
        for (long long j = 0; j < n[1]; ++j)
          for (long long i = 0; i < n[0]; ++i) {
            const Vec3 p{start.x + static_cast<double>(i) * h, start.y + static_cast<double>(j) * h,
                         start.z + static_cast<double>(k) * h};
            if (locator.locate(p)) positions.push_back(p);
          }
      break;
    }
    case SeedStrategy::boundary:
      for (VertexId v : mesh.boundary_vertices()) {
        positions.push_back(mesh.vertices()[static_cast<std::size_t>(v)]);
      }
      break;
    case SeedStrategy::loaded_fixed: {
      std::vector<VertexId> ids = mesh.loaded_vertices();
      ids.insert(ids.end(), mesh.fixed_vertices().begin(), mesh.fixed_vertices().end());
      std::sort(ids.begin(), ids.end());
      ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
      for (VertexId v : ids) positions.push_back(mesh.vertices()[static_cast<std::size_t>(v)]);
      break;
    }
  }
  if (positions.empty()) {
    throw ConfigError("seeding strategy '" + std::string(to_string(cfg.strategy)) +
                      "' produced no candidate seeds");
  }
  std::vector<SeedPoint> out;
  out.reserve(positions.size());
  for (const Vec3& p : positions) out.push_back({p, p, {false, false, false}, -1});
  return out;
}

PslSet run_seeding(const CellLocator& locator, const SeedingConfig& cfg) {
  SeedingConfig single = cfg;
  single.levels = 1;
  return Seeder(locator, single).run();
}

PslSet build_lod(const CellLocator& locator, const SeedingConfig& cfg) {
  return Seeder(locator, cfg).run();
}

PslSliceView lod_slice(const PslSet& set, const std::array<int, 3>& levels) {
  for (int l : levels) {
    if (l < 0 || l > set.levels()) throw std::out_of_range("requested LoD level out of range");
  }
  PslSliceView view{&set, {}};
  for (int id : set.extraction_order) {
    const Psl& p = set.psls[static_cast<std::size_t>(id)];
    const int want = levels[static_cast<std::size_t>(index_of(p.type))];
    if (want > 0 && p.level <= want) view.ids.push_back(id);
  }
  return view;
}

}  // namespace tsv
