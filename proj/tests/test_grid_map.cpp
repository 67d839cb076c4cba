#include <gtest/gtest.h>

#include <random>
#include <thread>

#include "lllg/grid_map.hpp"
#include "oracles.hpp"

using namespace lllg;

TEST(GridMap, ParsesMovingAiHeader) {
  const auto map = GridMap::parse("type octile\nheight 2\nwidth 3\nmap\n.@.\n..G\n");
  EXPECT_EQ(map.width(), 3);
  EXPECT_EQ(map.height(), 2);
  EXPECT_EQ(map.num_vertices(), 5u);
  EXPECT_EQ(map.vertex_at(0, 1), kNoVertex);
  EXPECT_TRUE(map.passable(1, 2));
  EXPECT_EQ(map.cell_of(map.vertex_at(1, 2)), (Cell{1, 2}));
}

TEST(GridMap, AcceptsCrlfAndTreesAsObstacles) {
  const auto map = GridMap::parse("type octile\r\nheight 1\r\nwidth 3\r\nmap\r\n.T.\r\n");
  EXPECT_EQ(map.num_vertices(), 2u);
  EXPECT_TRUE(map.neighbors(0).empty());
}

TEST(GridMap, RejectsMalformedInput) {
  EXPECT_THROW(GridMap::parse("type octile\nheight 2\nwidth 2\nmap\n..\n"), MapError);
  EXPECT_THROW(GridMap::parse("type octile\nheight 1\nwidth 2\nmap\n...\n"), MapError);
  EXPECT_THROW(GridMap::parse("type octile\nheight x\nwidth 2\nmap\n..\n"), MapError);
  EXPECT_THROW(GridMap::parse("type octile\nheight 1\nwidth 2\nmap\n.?\n"), MapError);
  EXPECT_THROW(GridMap::parse("height 1\nwidth 2\nmap\n..\n"), MapError);
  EXPECT_THROW(GridMap::load("/nonexistent/file.map"), MapError);
}

TEST(GridMap, NeighborsAreFourConnectedInIdOrder) {
  const auto map = oracle::grid({"...", "...", "..."});
  const auto c = map.vertex_at(1, 1);
  const auto nbs = map.neighbors(c);
  ASSERT_EQ(nbs.size(), 4u);
  EXPECT_EQ(nbs[0], map.vertex_at(0, 1));
  EXPECT_EQ(nbs[1], map.vertex_at(1, 0));
  EXPECT_EQ(nbs[2], map.vertex_at(1, 2));
  EXPECT_EQ(nbs[3], map.vertex_at(2, 1));
  EXPECT_TRUE(std::is_sorted(nbs.begin(), nbs.end()));
  EXPECT_EQ(map.neighbors(map.vertex_at(0, 0)).size(), 2u);
  EXPECT_THROW(map.neighbors(99), std::out_of_range);
  EXPECT_EQ(map.move_slot(c, c), GridMap::kWaitSlot);
  EXPECT_EQ(map.move_slot(c, map.vertex_at(0, 0)), -1);
}

TEST(GridMap, NeighborsMatchCellScanOnRandomMaps) {
  std::mt19937_64 rng(7);
  for (int rep = 0; rep < 50; ++rep) {
    const auto map = oracle::random_grid(rng, 1 + rep % 7, 1 + rep % 5, 0.3);
    for (std::size_t v = 0; v < map.num_vertices(); ++v) {
      auto expect = oracle::moves(map, static_cast<Vertex>(v));
      expect.erase(expect.begin());
      std::sort(expect.begin(), expect.end());
      const auto got = map.neighbors(static_cast<Vertex>(v));
      EXPECT_EQ(std::vector<Vertex>(got.begin(), got.end()), expect);
    }
  }
}

TEST(GridMap, SerializeRoundTrips) {
  std::mt19937_64 rng(11);
  for (int rep = 0; rep < 20; ++rep) {
    const auto map = oracle::random_grid(rng, 3 + rep % 5, 2 + rep % 6, 0.25);
    const auto again = GridMap::parse(map.serialize());
    EXPECT_EQ(map, again);
    EXPECT_EQ(again.serialize(), map.serialize());
  }
}

TEST(DistanceOracle, MatchesBfsAndIsLipschitz) {
  std::mt19937_64 rng(3);
  for (int rep = 0; rep < 10; ++rep) {
    const auto map = oracle::random_grid(rng, 6, 7, 0.25, 2);
    const DistanceOracle dist(map);
    for (std::size_t g = 0; g < map.num_vertices(); ++g) {
      for (std::size_t v = 0; v < map.num_vertices(); ++v) {
        const auto d = dist.dist(static_cast<Vertex>(v), static_cast<Vertex>(g));
        EXPECT_EQ(d, oracle::bfs_dist(map, static_cast<Vertex>(v), static_cast<Vertex>(g)));
        if (d == kUnreachable) continue;
        for (auto u : map.neighbors(static_cast<Vertex>(v))) {
          const auto du = dist.dist(u, static_cast<Vertex>(g));
          EXPECT_LE(du, d + 1);
          EXPECT_GE(du + 1, d);
        }
      }
    }
  }
}

TEST(DistanceOracle, BuildsTablesLazilyOncePerGoal) {
  const auto map = oracle::grid({"....", "....", "...."});
  const DistanceOracle dist(map);
  EXPECT_EQ(dist.table_count(), 0u);
  EXPECT_EQ(dist.dist(0, 11), 5u);
  EXPECT_EQ(dist.dist(3, 11), 2u);
  EXPECT_EQ(dist.table_count(), 1u);
  dist.dist(0, 0);
  EXPECT_EQ(dist.table_count(), 2u);
  EXPECT_THROW(dist.dist(0, 12), std::out_of_range);
}

TEST(DistanceOracle, UnreachableAcrossComponents) {
  const auto map = oracle::grid({".@."});
  const DistanceOracle dist(map);
  EXPECT_EQ(dist.dist(0, 1), kUnreachable);
  EXPECT_EQ(dist.dist(1, 1), 0u);
}

TEST(DistanceOracle, ConcurrentFirstQueriesAgree) {
  const auto map = oracle::grid({"........", "..@@@...", "........", "........"});
  const DistanceOracle dist(map);
  std::vector<std::thread> pool;
  std::vector<std::vector<Distance>> seen(4);
  for (int k = 0; k < 4; ++k) {
    pool.emplace_back([&, k] {
      for (std::size_t g = 0; g < map.num_vertices(); ++g) seen[k].push_back(dist.dist(0, static_cast<Vertex>(g)));
    });
  }
  for (auto& t : pool) t.join();
  for (int k = 1; k < 4; ++k) EXPECT_EQ(seen[k], seen[0]);
  EXPECT_EQ(dist.table_count(), map.num_vertices());
}
