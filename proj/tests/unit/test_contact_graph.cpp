#include <random>
#include <set>

#include <gtest/gtest.h>

#include "../oracles/cg_oracle.hpp"
#include "fixtures.hpp"
#include "hoi/contact_graph.hpp"
#include "hoi/error.hpp"

using namespace hoi;

using oracle::brute_force_cg;
using oracle::random_evidence;
using oracle::random_map;

TEST(EdgeIndex, Examples) {
  EXPECT_EQ(edge_index(0, 1, 3), 0);
  EXPECT_EQ(edge_index(0, 2, 3), 1);
  EXPECT_EQ(edge_index(1, 2, 3), 2);
}

TEST(EdgeIndex, BijectionForSixNodes) {
  std::set<int> seen;
  int expected = 0;
  for (int i = 0; i < 6; ++i) {
    for (int j = i + 1; j < 6; ++j) {
      const int idx = edge_index(i, j, 6);
      EXPECT_EQ(idx, expected++);
      EXPECT_EQ(edge_nodes(idx, 6), std::make_pair(i, j));
      seen.insert(idx);
    }
  }
  EXPECT_EQ(seen.size(), 15u);
  EXPECT_EQ(*seen.rbegin(), 14);
}

TEST(EdgeIndex, InvalidPairsRejected) {
  EXPECT_THROW(edge_index(1, 1, 3), Error);
  EXPECT_THROW(edge_index(2, 1, 3), Error);
  EXPECT_THROW(edge_index(0, 3, 3), Error);
  EXPECT_THROW(edge_index(-1, 1, 3), Error);
  EXPECT_THROW(edge_nodes(3, 3), Error);
}

TEST(ExtractCg, NoContactsAllZero) {
  const auto map = hoi::testing::toy_map();
  EXPECT_EQ(extract_cg({}, map).edges, (std::vector<std::uint8_t>{0, 0, 0}));
}

TEST(ExtractCg, FingertipTouchesBall) {
  const std::vector<std::string> hands{"left_tip", "right_tip"};
  const std::vector<std::string> rest{"torso", "head"};
  const auto map = AggregationMap::ball_play(hands, rest, "ball");
  ContactEvidence ev;
  ev.pairs = {{"right_tip", "ball"}};
  EXPECT_EQ(extract_cg(ev, map).edges, (std::vector<std::uint8_t>{1, 0, 0}));
}

TEST(ExtractCg, IntraNodeAndExcludedIgnored) {
  const auto map = hoi::testing::toy_map();
  ContactEvidence ev;
  ev.pairs = {{"torso", "forearm"}, {"ball", "ground"}, {"hand", "ground"}};
  EXPECT_EQ(extract_cg(ev, map).edges, (std::vector<std::uint8_t>{0, 0, 0}));
}

TEST(ExtractCg, UnknownEntityRejected) {
  const auto map = hoi::testing::toy_map();
  ContactEvidence ev;
  ev.pairs = {{"hand", "teapot"}};
  try {
    extract_cg(ev, map);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kUnknownEntity);
  }
}

TEST(ExtractCg, MatchesBruteForceOnRandomScenes) {
  std::mt19937_64 rng(21);
  for (int trial = 0; trial < 1000; ++trial) {
    const int k = 2 + trial % 5;
    const auto map = random_map(rng, 10, k);
    const auto ev = random_evidence(rng, 10);
    ASSERT_EQ(extract_cg(ev, map).edges, brute_force_cg(ev, map)) << "trial " << trial;
  }
}

TEST(ExtractCg, SymmetricInPairOrder) {
  std::mt19937_64 rng(22);
  for (int trial = 0; trial < 200; ++trial) {
    const auto map = random_map(rng, 10, 4);
    auto ev = random_evidence(rng, 10);
    auto swapped = ev;
    for (auto& p : swapped.pairs) std::swap(p.first, p.second);
    EXPECT_EQ(extract_cg(ev, map), extract_cg(swapped, map));
  }
}

TEST(ExtractCg, AddingContactNeverClearsEdge) {
  std::mt19937_64 rng(23);
  std::uniform_int_distribution<int> ent(0, 9);
  for (int trial = 0; trial < 200; ++trial) {
    const auto map = random_map(rng, 10, 4);
    auto ev = random_evidence(rng, 10);
    const auto before = extract_cg(ev, map).edges;
    ev.pairs.push_back({"e" + std::to_string(ent(rng)), "e" + std::to_string(ent(rng))});
    const auto after = extract_cg(ev, map).edges;
    for (std::size_t j = 0; j < before.size(); ++j) EXPECT_GE(after[j], before[j]);
  }
}

TEST(AggregationMap, PaperConfigurationsHaveThreeEdges) {
  const std::vector<std::string> bodies{"pelvis", "l_hand", "r_hand"};
  const auto grab = AggregationMap::grab(bodies, "mug", "table");
  EXPECT_EQ(grab.node_count(), 3);
  EXPECT_EQ(grab.edge_count(), 3);
  const std::vector<std::string> hands{"l_hand", "r_hand"}, rest{"pelvis"};
  const auto ball = AggregationMap::ball_play(hands, rest, "ball");
  EXPECT_EQ(ball.edge_count(), 3);
  EXPECT_EQ(ball.node_names[edge_nodes(0, 3).first], "hands");
  EXPECT_EQ(ball.node_names[edge_nodes(0, 3).second], "ball");
  EXPECT_EQ(grab.node_names[edge_nodes(2, 3).first], "object");
  EXPECT_EQ(grab.node_names[edge_nodes(2, 3).second], "table");
  EXPECT_NO_THROW(grab.validate(bodies, std::vector<std::string>{"mug"}));
}

TEST(AggregationMap, NeedsBodyAndObjectNodes) {
  AggregationMap map;
  map.node_names = {"a", "b"};
  map.assignment = {{"torso", 0}, {"hand", 1}};
  const std::vector<std::string> bodies{"torso", "hand"}, objects{"ball"};
  EXPECT_THROW(map.validate(bodies, objects), Error);
  map.node_names = {"only"};
  EXPECT_THROW(map.validate(), Error);
}

TEST(ForceRule, AllZeroForcesNoEdges) {
  const auto map = hoi::testing::toy_map();
  std::map<std::string, Eigen::VectorXd> f{{"ball", Eigen::Vector2d::Zero()},
                                           {"torso", Eigen::Vector2d::Zero()}};
  ForceEdgeRule rule{0, 1, {{"ball"}, {0}, 1.0}, {{"torso"}, {0}, 1.0}};
  const std::vector<ForceEdgeRule> rules{rule};
  EXPECT_EQ(extract_cg_from_forces(f, rules, map).edges, (std::vector<std::uint8_t>{0, 0, 0}));
}

TEST(ForceRule, ConjunctivePredicate) {
  const auto map = hoi::testing::toy_map();
  ForceEdgeRule rule{0, 1, {{"ball"}, {0}, 1.0}, {{"torso"}, {0}, 1.0}};
  const std::vector<ForceEdgeRule> rules{rule};
  std::map<std::string, Eigen::VectorXd> f{{"ball", Eigen::Vector2d(5.0, -3.0)},
                                           {"torso", Eigen::Vector2d(0.0, 50.0)}};
  EXPECT_EQ(extract_cg_from_forces(f, rules, map).edges, (std::vector<std::uint8_t>{1, 0, 0}));
  f["torso"] = Eigen::Vector2d(2.0, 0.0);
  EXPECT_EQ(extract_cg_from_forces(f, rules, map).edges, (std::vector<std::uint8_t>{0, 0, 0}));
  f["ball"] = Eigen::Vector2d(0.5, 100.0);
  f["torso"] = Eigen::Vector2d::Zero();
  EXPECT_EQ(extract_cg_from_forces(f, rules, map).edges, (std::vector<std::uint8_t>{0, 0, 0}));
}

TEST(ForceRule, MissingForceRejected) {
  const auto map = hoi::testing::toy_map();
  ForceEdgeRule rule{0, 1, {{"ball"}, {0}, 1.0}, {}};
  const std::vector<ForceEdgeRule> rules{rule};
  try {
    extract_cg_from_forces({}, rules, map);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kMissingForce);
  }
}

TEST(CgError, Examples) {
  const std::vector<std::uint8_t> a{1, 0, 0}, b{1, 0, 1}, c{0, 0, 1};
  EXPECT_EQ(cg_error(a, a), (std::vector<std::uint8_t>{0, 0, 0}));
  EXPECT_EQ(cg_error(b, c), (std::vector<std::uint8_t>{1, 0, 0}));
  EXPECT_THROW(cg_error(a, std::vector<std::uint8_t>{1, 0}), Error);
}

TEST(CgError, XorOracle) {
  std::mt19937_64 rng(24);
  std::bernoulli_distribution b(0.5);
  for (int trial = 0; trial < 1000; ++trial) {
    std::vector<std::uint8_t> x(15), y(15);
    for (int j = 0; j < 15; ++j) {
      x[j] = b(rng);
      y[j] = b(rng);
    }
    const auto e = cg_error(x, y);
    for (int j = 0; j < 15; ++j) ASSERT_EQ(e[j], x[j] ^ y[j]);
    EXPECT_EQ(cg_error(x, x), std::vector<std::uint8_t>(15, 0));
  }
}
