#include <gtest/gtest.h>

#include <filesystem>
#include <queue>
#include <set>

#include "oracles.hpp"
#include "treecrf/errors.hpp"
#include "treecrf/regions.hpp"

using namespace treecrf;

namespace {

Raster random_landscape(oracle::Gen& g, int h, int w, bool smooth) {
  Raster r(h, w, 1);
  for (auto& v : r.values()) v = static_cast<float>(g.uniform());
  if (!smooth) return r;
  Raster s(h, w, 1);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      double sum = 0;
      int n = 0;
      for (int dy = -1; dy <= 1; ++dy) {
        for (int dx = -1; dx <= 1; ++dx) {
          if (y + dy < 0 || x + dx < 0 || y + dy >= h || x + dx >= w) continue;
          sum += r.at(y + dy, x + dx);
          ++n;
        }
      }
      s.at(y, x) = static_cast<float>(sum / n);
    }
  }
  return s;
}

// Independent totality and 4-connectivity check by flood fill.
void expect_valid_partition(const RegionPartition& p) {
  const int h = p.height();
  const int w = p.width();
  ASSERT_EQ(p.map.ids.size(), static_cast<std::size_t>(h) * w);
  std::vector<int> area(p.region_count, 0);
  for (auto id : p.map.ids) {
    ASSERT_LT(id, static_cast<std::uint32_t>(p.region_count));
    ++area[id];
  }
  int total = 0;
  for (int r = 0; r < p.region_count; ++r) {
    EXPECT_GT(area[r], 0) << "id " << r << " unused";
    total += area[r];
  }
  EXPECT_EQ(total, h * w);
  std::vector<char> seen(p.map.ids.size(), 0);
  std::set<std::uint32_t> started;
  for (std::size_t s = 0; s < p.map.ids.size(); ++s) {
    if (seen[s]) continue;
    const auto id = p.map.ids[s];
    EXPECT_TRUE(started.insert(id).second) << "region " << id << " is not 4-connected";
    std::queue<std::size_t> q;
    q.push(s);
    seen[s] = 1;
    while (!q.empty()) {
      const auto c = q.front();
      q.pop();
      const int y = static_cast<int>(c / w);
      const int x = static_cast<int>(c % w);
      const int dy[4] = {-1, 1, 0, 0};
      const int dx[4] = {0, 0, -1, 1};
      for (int k = 0; k < 4; ++k) {
        const int yy = y + dy[k];
        const int xx = x + dx[k];
        if (yy < 0 || xx < 0 || yy >= h || xx >= w) continue;
        const auto n = static_cast<std::size_t>(yy) * w + xx;
        if (!seen[n] && p.map.ids[n] == id) {
          seen[n] = 1;
          q.push(n);
        }
      }
    }
  }
}

RegionPartition from_rows(int h, int w, std::vector<std::uint32_t> ids) {
  return partition_from_ids(IdMap{h, w, std::move(ids)});
}

}  // namespace

TEST(Fuse, PerPixelMaximum) {
  Raster b(1, 1, 3, std::vector<float>{0.2f, 0.7f, 0.4f});
  EXPECT_FLOAT_EQ(fuse_boundaries(b).at(0, 0), 0.7f);
  EXPECT_EQ(fuse_boundaries(Raster(3, 3, 4, 0.0f)), Raster(3, 3, 1, 0.0f));
  oracle::Gen g(1);
  const auto single = random_landscape(g, 6, 5, false);
  EXPECT_EQ(fuse_boundaries(single), single);
  EXPECT_EQ(fuse_boundaries(fuse_boundaries(single)), fuse_boundaries(single));
  EXPECT_THROW(fuse_boundaries(Raster(2, 2, 0)), ValidationError);
}

TEST(Watershed, ConstantLandscapeIsOneRegion) {
  const auto p = watershed(Raster(7, 9, 1, 0.3f), RunConfig{});
  EXPECT_EQ(p.region_count, 1);
  expect_valid_partition(p);
}

TEST(Watershed, TwoBasinsSplitAtRidge) {
  Raster g(5, 5, 1, 0.0f);
  for (int r = 0; r < 5; ++r) g.at(r, 2) = 1.0f;
  const auto p = watershed(g, RunConfig{});
  ASSERT_EQ(p.region_count, 2);
  for (int r = 0; r < 5; ++r) {
    EXPECT_EQ(p.id(r, 0), p.id(0, 0));
    EXPECT_EQ(p.id(r, 1), p.id(0, 0));
    EXPECT_EQ(p.id(r, 3), p.id(0, 4));
    EXPECT_EQ(p.id(r, 4), p.id(0, 4));
  }
  EXPECT_NE(p.id(0, 0), p.id(0, 4));
  // The border between the two regions lies on the ridge column.
  for (int r = 0; r < 5; ++r) {
    EXPECT_TRUE(p.id(r, 2) != p.id(r, 1) || p.id(r, 2) != p.id(r, 3));
  }
}

TEST(Watershed, TotalityOnRandomInputs) {
  oracle::Gen g(2);
  for (int trial = 0; trial < 50; ++trial) {
    RunConfig c;
    c.min_region_px = g.integer(1, 10);
    const int h = g.integer(1, 24);
    const int w = g.integer(1, 24);
    const auto p = watershed(random_landscape(g, h, w, g.coin()), c);
    expect_valid_partition(p);
    EXPECT_TRUE(check_partition(p));
    if (h * w >= c.min_region_px) {
      for (const auto& s : p.stats) EXPECT_GE(s.area, c.min_region_px);
    }
  }
}

TEST(Watershed, FiveByFiveIdsAreDense) {
  oracle::Gen g(3);
  for (int trial = 0; trial < 20; ++trial) {
    RunConfig c;
    c.min_region_px = 1;
    const auto p = watershed(random_landscape(g, 5, 5, false), c);
    double area = 0;
    for (const auto& s : p.stats) area += s.area;
    EXPECT_EQ(area, 25.0);
    expect_valid_partition(p);
  }
}

TEST(Watershed, Deterministic) {
  oracle::Gen g(4);
  const auto land = random_landscape(g, 30, 30, true);
  const auto a = watershed(land, RunConfig{});
  const auto b = watershed(land, RunConfig{});
  EXPECT_EQ(a.map.ids, b.map.ids);
}

TEST(Rag, SingleRegionHasNoEdges) {
  const auto p = from_rows(2, 2, {0, 0, 0, 0});
  EXPECT_TRUE(build_rag(p, Raster(2, 2, 1, 0.5f)).edges.empty());
}

TEST(Rag, StrengthIsMeanOverBothSides) {
  const auto p = from_rows(2, 2, {0, 0, 1, 1});
  const Raster g(2, 2, 1, std::vector<float>{0.2f, 0.4f, 0.6f, 0.8f});
  const auto rag = build_rag(p, g);
  ASSERT_EQ(rag.edges.size(), 1u);
  EXPECT_EQ(rag.edges[0].boundary_pixels.size(), 4u);
  EXPECT_NEAR(rag.edges[0].strength, 0.5, 1e-7);
}

TEST(Rag, ThreeInARowHasTwoEdges) {
  const auto p = from_rows(1, 6, {0, 0, 1, 1, 2, 2});
  const auto rag = build_rag(p, Raster(1, 6, 1, 0.0f));
  ASSERT_EQ(rag.edges.size(), 2u);
  EXPECT_EQ(rag.find_edge(0, 1), 0);
  EXPECT_EQ(rag.find_edge(2, 1), 1);
  EXPECT_EQ(rag.find_edge(0, 2), -1);
}

TEST(Ucm, SingleEdge) {
  Rag rag;
  rag.region_count = 2;
  rag.edges.push_back(RagEdge{0, 1, {0, 1}, 0.5});
  EXPECT_DOUBLE_EQ(build_ucm(rag).edge_score[0], 0.5);
}

TEST(Ucm, ChainTrace) {
  Rag rag;
  rag.region_count = 3;
  rag.edges.push_back(RagEdge{0, 1, {0, 1}, 0.1});
  rag.edges.push_back(RagEdge{1, 2, {1, 2}, 0.9});
  const auto u = build_ucm(rag);
  EXPECT_DOUBLE_EQ(u.edge_score[0], 0.1);
  EXPECT_DOUBLE_EQ(u.edge_score[1], 0.9);
  EXPECT_DOUBLE_EQ(u.merge_height(0, 2), 0.9);
}

TEST(Ucm, EqualStrengthsGiveEqualScores) {
  const auto p = from_rows(3, 3, {0, 0, 1, 2, 3, 1, 2, 3, 3});
  const auto u = build_ucm(build_rag(p, Raster(3, 3, 1, 0.4f)));
  for (double s : u.edge_score) EXPECT_NEAR(s, 0.4, 1e-7);
}

TEST(Ucm, DisconnectedComponentsMeetAtOne) {
  Rag rag;
  rag.region_count = 4;
  rag.edges.push_back(RagEdge{0, 1, {0, 1}, 0.2});
  rag.edges.push_back(RagEdge{2, 3, {2, 3}, 0.3});
  const auto u = build_ucm(rag);
  EXPECT_DOUBLE_EQ(u.merge_height(0, 3), kDisconnectedUcmScore);
}

TEST(Ucm, UltrametricOnRandomLandscapes) {
  oracle::Gen g(5);
  int violations = 0;
  for (int trial = 0; trial < 50; ++trial) {
    RunConfig c;
    c.min_region_px = 2;
    const auto land = random_landscape(g, g.integer(6, 20), g.integer(6, 20), true);
    const auto p = watershed(land, c);
    const auto rag = build_rag(p, land);
    const auto u = build_ucm(rag);
    for (std::size_t e = 0; e < rag.edges.size(); ++e) {
      EXPECT_DOUBLE_EQ(u.edge_score[e], u.merge_height(rag.edges[e].a, rag.edges[e].b));
    }
    const int r = p.region_count;
    for (int i = 0; i < r; ++i) {
      for (int j = 0; j < r; ++j) {
        for (int k = 0; k < r; ++k) {
          if (u.merge_height(i, k) > std::max(u.merge_height(i, j), u.merge_height(j, k))) ++violations;
        }
      }
    }
  }
  EXPECT_EQ(violations, 0);
}

TEST(Regions, StatsAreMeans) {
  auto p = from_rows(1, 4, {0, 0, 1, 1});
  const Raster lik(1, 4, 2, std::vector<float>{1, 0, 0.5f, 0.5f, 0, 1, 0.25f, 0.75f});
  const Raster elev(1, 4, 1, std::vector<float>{1, 3, 10, 20});
  compute_region_stats(p, RegionInputs{&lik, nullptr, &elev});
  ASSERT_EQ(p.stats.size(), 2u);
  EXPECT_DOUBLE_EQ(p.stats[0].area, 2);
  EXPECT_DOUBLE_EQ(p.stats[0].centroid_col, 0.5);
  EXPECT_DOUBLE_EQ(p.stats[1].elevation, 15);
  EXPECT_DOUBLE_EQ(p.stats[0].likelihood[0], 0.75);
  EXPECT_DOUBLE_EQ(p.stats[1].likelihood[1], 0.875);
}

TEST(Regions, PartitionFileRoundTrip) {
  oracle::Gen g(6);
  auto p = watershed(random_landscape(g, 12, 10, true), RunConfig{});
  const auto stem = std::filesystem::temp_directory_path() / "treecrf_regions_partition";
  write_partition(p, stem);
  const auto back = read_partition(stem.string() + ".ftn");
  EXPECT_EQ(back.map.ids, p.map.ids);
  EXPECT_EQ(back.region_count, p.region_count);
}
