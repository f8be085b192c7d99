#include <gtest/gtest.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numbers>

#include "tsv/errors.hpp"
#include "tsv/seeding.hpp"
#include "tsv_testing/fields.hpp"
#include "tsv_testing/oracles.hpp"

namespace {

using tsv::PslType;
using tsv::SeedingConfig;
using tsv::Vec3;
namespace tt = tsv::testing;

SeedingConfig config_for(const tsv::HexMesh& m, double eps_rel, int levels = 1) {
  SeedingConfig cfg;
  cfg.eps_rel = {eps_rel, eps_rel, eps_rel};
  cfg.trace = tsv::default_trace_config(m);
  cfg.levels = levels;
  return cfg;
}

TEST(LevelThresholds, PowersOfTwo) {
  const std::array<double, 3> eps{0.1, 0.3, 0.7};
  const auto l1 = tsv::level_thresholds(eps, 3, 1);
  const auto l2 = tsv::level_thresholds(eps, 3, 2);
  const auto l3 = tsv::level_thresholds(eps, 3, 3);
  for (int t = 0; t < 3; ++t) {
    EXPECT_EQ(l1[t], 4 * eps[t]);
    EXPECT_EQ(l2[t], 2 * eps[t]);
    EXPECT_EQ(l3[t], eps[t]);
  }
  EXPECT_THROW(tsv::level_thresholds(eps, 3, 0), std::out_of_range);
  EXPECT_THROW(tsv::level_thresholds(eps, 3, 4), std::out_of_range);
}

TEST(SeedingConfig, Validation) {
  const auto m = tt::sample_cartesian({5, 5, 5}, {0, 0, 0}, {1, 1, 1}, tt::constant_field);
  auto cfg = config_for(m, 0.2);
  EXPECT_NO_THROW(cfg.validate(m));
  EXPECT_DOUBLE_EQ(cfg.grid_spacing(m), 0.1);
  cfg.eps_rel[1] = 0.0;
  EXPECT_THROW(cfg.validate(m), tsv::ConfigError);
  cfg = config_for(m, 0.2);
  cfg.levels = 0;
  EXPECT_THROW(cfg.validate(m), tsv::ConfigError);
  cfg = config_for(m, 0.2);
  cfg.seed_grid_spacing = 0.3;
  EXPECT_THROW(cfg.validate(m), tsv::ConfigError);
  cfg = config_for(m, 0.2);
  cfg.enabled = {false, false, false};
  EXPECT_THROW(cfg.validate(m), tsv::ConfigError);
}

TEST(SeedStrategy, Names) {
  EXPECT_EQ(tsv::parse_strategy("volume"), tsv::SeedStrategy::volume);
  EXPECT_EQ(tsv::parse_strategy("boundary"), tsv::SeedStrategy::boundary);
  EXPECT_EQ(tsv::parse_strategy("loaded"), tsv::SeedStrategy::loaded_fixed);
  EXPECT_EQ(tsv::parse_strategy("loaded_fixed"), tsv::SeedStrategy::loaded_fixed);
  EXPECT_THROW(tsv::parse_strategy("random"), std::invalid_argument);
}

TEST(InitCandidates, VolumeGridIsCentredAndInside) {
  const auto m = tt::sample_cartesian({5, 5, 5}, {0, 0, 0}, {1, 1, 1}, tt::constant_field);
  const tsv::CellLocator loc(m);
  auto cfg = config_for(m, 0.2);
  cfg.seed_grid_spacing = 0.3;
  const auto c = tsv::init_candidates(loc, cfg);
  // floor(1 / 0.3) + 1 = 4 points per axis, centred: 0.05, 0.35, 0.65, 0.95.
  ASSERT_EQ(c.size(), 64u);
  EXPECT_NEAR(c.front().home.x, 0.05, 1e-12);
  EXPECT_NEAR(c.back().home.z, 0.95, 1e-12);
  for (const auto& s : c) {
    EXPECT_EQ(s.home, s.pos);
    EXPECT_FALSE(s.valence[0] || s.valence[1] || s.valence[2]);
    EXPECT_EQ(s.snapped_to, -1);
  }
}

TEST(InitCandidates, HugeSpacingStillYieldsOneCandidate) {
  const auto m = tt::sample_cartesian({3, 3, 3}, {0, 0, 0}, {1, 1, 1}, tt::constant_field);
  const tsv::CellLocator loc(m);
  auto cfg = config_for(m, 10.0);
  cfg.seed_grid_spacing = 10.0;
  const auto c = tsv::init_candidates(loc, cfg);
  ASSERT_EQ(c.size(), 1u);
  EXPECT_EQ(c[0].home, (Vec3{0.5, 0.5, 0.5}));
}

TEST(InitCandidates, VolumeSkipsHoles) {
  const auto m = tt::l_shaped(2, tt::constant_field);
  const tsv::CellLocator loc(m);
  auto cfg = config_for(m, 0.5);
  cfg.seed_grid_spacing = 0.25;
  for (const auto& s : tsv::init_candidates(loc, cfg)) {
    EXPECT_FALSE(s.home.x > 1.01 && s.home.y > 1.01);
  }
}

TEST(InitCandidates, BoundaryAndLoadedStrategies) {
  auto m = tt::sample_cartesian({4, 4, 4}, {0, 0, 0}, {1, 1, 1}, tt::constant_field);
  const tsv::CellLocator loc(m);
  auto cfg = config_for(m, 0.2);
  cfg.strategy = tsv::SeedStrategy::boundary;
  EXPECT_EQ(tsv::init_candidates(loc, cfg).size(), 56u);
  cfg.strategy = tsv::SeedStrategy::loaded_fixed;
  EXPECT_THROW(tsv::init_candidates(loc, cfg), tsv::ConfigError);
  m.set_loaded_vertices({1, 2});
  m.set_fixed_vertices({2, 40});
  EXPECT_EQ(tsv::init_candidates(loc, cfg).size(), 3u);
}

TEST(RunSeeding, ConstantFieldGivesAxisParallelLines) {
  const auto m = tt::sample_cartesian({16, 16, 16}, {0, 0, 0}, {1, 1, 1}, tt::constant_field);
  const tsv::CellLocator loc(m);
  const auto set = tsv::run_seeding(loc, config_for(m, 0.2));
  ASSERT_FALSE(set.psls.empty());
  for (const auto& psl : set.psls) {
    const int axis = tsv::index_of(psl.type);  // diag(3,2,1): major x, medium y, minor z
    const Vec3 s = psl.points[psl.seed_point];
    for (const Vec3& p : psl.points) {
      for (int a = 0; a < 3; ++a) {
        if (a != axis) { EXPECT_LT(std::fabs(p[a] - s[a]), 1e-8); }
      }
    }
  }
  for (const auto& c : set.final_candidates) EXPECT_TRUE(c.solid());
  EXPECT_EQ(tt::spacing_violations(set), 0u);
}

TEST(RunSeeding, ValenceAndSnapInvariants) {
  const auto m = tt::sample_cartesian({11, 11, 11}, {0, 0, 0}, {2, 1, 1}, tt::bending_field(2, 1));
  const tsv::CellLocator loc(m);
  const auto cfg = config_for(m, 0.25);
  const auto set = tsv::run_seeding(loc, cfg);
  const auto eps = cfg.eps_abs(m);
  const double eps_max = *std::max_element(eps.begin(), eps.end());
  for (const auto& c : set.final_candidates) {
    EXPECT_TRUE(c.solid());
    if (c.snapped_to >= 0) {
      const auto& pts = set.psls[static_cast<std::size_t>(c.snapped_to)].points;
      EXPECT_TRUE(std::find(pts.begin(), pts.end(), c.pos) != pts.end());
      EXPECT_LT(tsv::distance(c.pos, c.home), eps_max);
    } else {
      EXPECT_EQ(c.pos, c.home);
    }
  }
  // Space filling: every candidate home lies near a PSL of each type.
  for (const auto& c : set.final_candidates) {
    for (int t = 0; t < 3; ++t) {
      double best = 1e300;
      for (const auto& psl : set.psls) {
        if (tsv::index_of(psl.type) != t) continue;
        for (const Vec3& p : psl.points) best = std::min(best, tsv::distance(p, c.home));
      }
      EXPECT_LT(best, eps[t] + eps_max);
    }
  }
  EXPECT_EQ(tt::spacing_violations(set), 0u);
  ASSERT_EQ(set.seeds.size(), set.psls.size());
  EXPECT_EQ(set.seeds.front().candidate, set.initial_candidate);
  EXPECT_TRUE(set.seeds.front().initial);
  for (std::size_t i = 0; i < set.psls.size(); ++i) EXPECT_EQ(set.psls[i].id, static_cast<int>(i));
}

TEST(RunSeeding, TypesAlternate) {
  const auto m = tt::sample_cartesian({11, 11, 11}, {0, 0, 0}, {2, 1, 1}, tt::bending_field(2, 1));
  const tsv::CellLocator loc(m);
  const auto set = tsv::run_seeding(loc, config_for(m, 0.25));
  // The initial seed spawns one line per type in order major, medium, minor.
  ASSERT_GE(set.seeds.size(), 3u);
  EXPECT_EQ(set.seeds[0].type, PslType::major);
  EXPECT_EQ(set.seeds[1].type, PslType::medium);
  EXPECT_EQ(set.seeds[2].type, PslType::minor);
  // Afterwards a type repeats only once another type has run out of seeds.
  std::array<bool, 3> exhausted{false, false, false};
  for (std::size_t i = 4; i < set.seeds.size(); ++i) {
    const int prev = tsv::index_of(set.seeds[i - 1].type);
    const int cur = tsv::index_of(set.seeds[i].type);
    for (int t = (prev + 1) % 3; t != cur; t = (t + 1) % 3) exhausted[t] = true;
    EXPECT_FALSE(exhausted[cur]);
  }
}

TEST(RunSeeding, DisabledTypesAreNeverTraced) {
  const auto m = tt::sample_cartesian({9, 9, 9}, {0, 0, 0}, {1, 1, 1}, tt::linear_field);
  const tsv::CellLocator loc(m);
  auto cfg = config_for(m, 0.25);
  cfg.enabled = {true, false, true};
  const auto set = tsv::run_seeding(loc, cfg);
  for (const auto& p : set.psls) EXPECT_NE(p.type, PslType::medium);
  EXPECT_EQ(set.tallies[0][1], 0);
  for (const auto& c : set.final_candidates) EXPECT_TRUE(c.solid());
}

TEST(RunSeeding, ExplicitInitialSeedUsesNearestCandidate) {
  const auto m = tt::sample_cartesian({9, 9, 9}, {0, 0, 0}, {1, 1, 1}, tt::linear_field);
  const tsv::CellLocator loc(m);
  auto cfg = config_for(m, 0.25);
  cfg.initial_seed = Vec3{0.1, 0.1, 0.1};
  const auto set = tsv::run_seeding(loc, cfg);
  const auto cands = tsv::init_candidates(loc, cfg);
  double best = 1e300;
  for (const auto& c : cands) best = std::min(best, tsv::distance(c.home, *cfg.initial_seed));
  EXPECT_DOUBLE_EQ(tsv::distance(set.initial_seed, *cfg.initial_seed), best);
}

TEST(RunSeeding, Deterministic) {
  const auto m = tt::perturbed_grid({7, 7, 7}, {1, 1, 1}, 0.15, 4, tt::linear_field);
  const tsv::CellLocator loc(m);
  const auto a = tsv::run_seeding(loc, config_for(m, 0.3));
  const auto b = tsv::run_seeding(loc, config_for(m, 0.3));
  ASSERT_EQ(a.psls.size(), b.psls.size());
  for (std::size_t i = 0; i < a.psls.size(); ++i) EXPECT_EQ(a.psls[i].points, b.psls[i].points);
}

TEST(RunSeeding, SmallerThresholdGivesMoreLines) {
  const auto m = tt::sample_cartesian({11, 11, 11}, {0, 0, 0}, {2, 1, 1}, tt::bending_field(2, 1));
  const tsv::CellLocator loc(m);
  const auto coarse = tsv::run_seeding(loc, config_for(m, 0.4));
  const auto fine = tsv::run_seeding(loc, config_for(m, 0.2));
  EXPECT_LT(coarse.psls.size(), fine.psls.size());
}

void expect_nested(const tsv::PslSet& set, int levels) {
  ASSERT_EQ(set.levels(), levels);
  std::vector<int> prev;
  for (int k = 1; k <= levels; ++k) {
    const auto ids = tt::ids_up_to_level(set, k);
    EXPECT_TRUE(std::includes(ids.begin(), ids.end(), prev.begin(), prev.end()));
    EXPECT_GT(ids.size(), prev.size()) << "level " << k;
    prev = ids;
  }
  EXPECT_EQ(prev.size(), set.psls.size());
}

TEST(BuildLod, NestedLevelsOnTwoFields) {
  {
    const auto m = tt::sample_cartesian({13, 13, 13}, {0, 0, 0}, {2, 1, 1}, tt::bending_field(2, 1));
    const tsv::CellLocator loc(m);
    const auto cfg = config_for(m, 0.1, 3);
    const auto set = tsv::build_lod(loc, cfg);
    expect_nested(set, 3);
    const auto eps = cfg.eps_abs(m);
    for (int t = 0; t < 3; ++t) {
      EXPECT_EQ(set.thresholds[0][t], 4 * eps[t]);
      EXPECT_EQ(set.thresholds[1][t], 2 * eps[t]);
      EXPECT_EQ(set.thresholds[2][t], eps[t]);
    }
    EXPECT_EQ(tt::spacing_violations(set), 0u);
  }
  {
    const auto m = tt::sample_cartesian({13, 9, 9}, {0, 0, 0}, {2, 1, 1},
                                        tt::twisting_field(2, std::numbers::pi / 2));
    const tsv::CellLocator loc(m);
    const auto set = tsv::build_lod(loc, config_for(m, 0.1, 3));
    expect_nested(set, 3);
    EXPECT_EQ(tt::spacing_violations(set), 0u);
  }
}

TEST(BuildLod, CoarsestLevelMatchesSingleLevelRun) {
  const auto m = tt::sample_cartesian({11, 11, 11}, {0, 0, 0}, {2, 1, 1}, tt::bending_field(2, 1));
  const tsv::CellLocator loc(m);
  auto lod_cfg = config_for(m, 0.1, 2);
  lod_cfg.seed_grid_spacing = 0.05;
  const auto lod = tsv::build_lod(loc, lod_cfg);
  auto single_cfg = config_for(m, 0.2, 1);
  single_cfg.seed_grid_spacing = 0.05;
  const auto single = tsv::run_seeding(loc, single_cfg);
  const auto coarse = tt::ids_up_to_level(lod, 1);
  ASSERT_EQ(coarse.size(), single.psls.size());
  for (int id : coarse) EXPECT_EQ(lod.psls[id].points, single.psls[id].points);
}

TEST(LodSlice, SelectsPerTypeLevels) {
  const auto m = tt::sample_cartesian({11, 11, 11}, {0, 0, 0}, {2, 1, 1}, tt::bending_field(2, 1));
  const tsv::CellLocator loc(m);
  const auto set = tsv::build_lod(loc, config_for(m, 0.1, 2));
  const auto all = tsv::lod_slice(set, {2, 2, 2});
  EXPECT_EQ(all.size(), set.psls.size());
  const auto majors = tsv::lod_slice(set, {2, 0, 0});
  for (std::size_t i = 0; i < majors.size(); ++i) EXPECT_EQ(majors[i].type, PslType::major);
  EXPECT_EQ(static_cast<int>(majors.size()), set.tallies[0][0] + set.tallies[1][0]);
  const auto mixed = tsv::lod_slice(set, {1, 2, 0});
  EXPECT_EQ(static_cast<int>(mixed.size()), set.tallies[0][0] + set.tallies[0][1] + set.tallies[1][1]);
  // Slices keep extraction order.
  for (std::size_t i = 1; i < all.size(); ++i) {
    const auto pos = [&](int id) {
      return std::find(set.extraction_order.begin(), set.extraction_order.end(), id);
    };
    EXPECT_LT(pos(all.ids[i - 1]), pos(all.ids[i]));
  }
  EXPECT_EQ(tsv::lod_slice(set, {0, 0, 0}).size(), 0u);
  EXPECT_THROW(tsv::lod_slice(set, {3, 1, 1}), std::out_of_range);
  EXPECT_THROW(tsv::lod_slice(set, {-1, 1, 1}), std::out_of_range);
}

}  // namespace
