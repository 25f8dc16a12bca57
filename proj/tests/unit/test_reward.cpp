#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "../oracles/reward_oracle.hpp"
#include "fixtures.hpp"
#include "hoi/error.hpp"
#include "hoi/reward.hpp"

using namespace hoi;

TEST(ExpReward, Examples) {
  EXPECT_EQ(exp_reward(0.0, 50.0), 1.0);
  EXPECT_EQ(exp_reward(123.0, 0.0), 1.0);
  EXPECT_DOUBLE_EQ(exp_reward(0.01, 50.0), std::exp(-0.5));
  EXPECT_THROW(exp_reward(-1e-3, 1.0), Error);
}

TEST(Weights, BallPlayAndGrabPresets) {
  const auto b = RewardWeights::ball_play();
  EXPECT_EQ(b.p, 50.0);
  EXPECT_EQ(b.r, 20.0);
  EXPECT_EQ(b.pv, 0.01);
  EXPECT_EQ(b.rv, 0.01);
  EXPECT_EQ(b.op, 1.0);
  EXPECT_EQ(b.or_, 0.0);
  EXPECT_EQ(b.opv, 0.01);
  EXPECT_EQ(b.orv, 0.0);
  EXPECT_EQ(b.ig, 20.0);
  EXPECT_EQ(b.cg, (std::vector<double>{5, 5, 5}));
  const auto g = RewardWeights::grab();
  EXPECT_EQ(g.or_, 0.1);
  EXPECT_EQ(g.orv, 0.01);
  EXPECT_EQ(g.cg, (std::vector<double>{50, 5, 5}));
  EXPECT_TRUE(RewardWeights{} == b);
}

TEST(BodyReward, PerfectTracking) {
  std::mt19937_64 rng(1);
  const auto m = hoi::testing::random_motion(rng, 4);
  const auto c = body_reward(m, m, RewardWeights{});
  EXPECT_EQ(c.pos, 1.0);
  EXPECT_EQ(c.rot, 1.0);
  EXPECT_EQ(c.pos_vel, 1.0);
  EXPECT_EQ(c.rot_vel, 1.0);
  EXPECT_EQ(c.product, 1.0);
}

TEST(BodyReward, PositionOnlyDifference) {
  std::mt19937_64 rng(2);
  const auto m = hoi::testing::random_motion(rng, 4);
  auto s = m;
  s.pos.array() += 0.1;
  const auto c = body_reward(s, m, RewardWeights{});
  EXPECT_EQ(c.rot, 1.0);
  EXPECT_EQ(c.pos_vel, 1.0);
  EXPECT_EQ(c.rot_vel, 1.0);
  EXPECT_EQ(c.product, c.pos);
  EXPECT_NEAR(c.pos, std::exp(-50.0 * 0.01), 1e-15);
}

TEST(ObjectReward, BallPlayIgnoresRotation) {
  std::mt19937_64 rng(3);
  const auto a = hoi::testing::random_motion(rng, 1), b = hoi::testing::random_motion(rng, 1);
  const auto c = object_reward(a, b, RewardWeights::ball_play());
  EXPECT_EQ(c.rot, 1.0);
  EXPECT_EQ(c.rot_vel, 1.0);
}

TEST(IgReward, Examples) {
  InteractionGraphState a, b;
  a.vectors = Eigen::MatrixXd::Zero(2, 2);
  b.vectors = Eigen::MatrixXd::Constant(2, 2, std::sqrt(0.05));
  EXPECT_EQ(ig_reward(a, a, 20.0), 1.0);
  EXPECT_NEAR(ig_reward(a, b, 20.0), std::exp(-1.0), 1e-15);
  EXPECT_EQ(ig_reward(a, b, 20.0), ig_reward(b, a, 20.0));
  InteractionGraphState c;
  c.vectors = Eigen::MatrixXd::Zero(1, 2);
  EXPECT_THROW(ig_reward(a, c, 20.0), Error);
}

TEST(CgReward, Examples) {
  const std::vector<double> ball{5, 5, 5}, grab{50, 5, 5};
  EXPECT_EQ(cg_reward(std::vector<std::uint8_t>{0, 0, 0}, ball), 1.0);
  EXPECT_DOUBLE_EQ(cg_reward(std::vector<std::uint8_t>{1, 0, 0}, ball), std::exp(-5.0));
  EXPECT_DOUBLE_EQ(cg_reward(std::vector<std::uint8_t>{1, 1, 1}, grab), std::exp(-60.0));
  EXPECT_THROW(cg_reward(std::vector<std::uint8_t>{1, 0}, ball), Error);
}

TEST(TotalReward, PerfectTrackingEveryMode) {
  std::mt19937_64 rng(4);
  const auto s = hoi::testing::random_state(rng);
  for (auto mode : {RewardMode::kMultiplicative, RewardMode::kKinematicOnly,
                    RewardMode::kKinematicNoIg, RewardMode::kDeepMimicAdditive}) {
    EXPECT_EQ(total_reward(s, s, RewardWeights{}, mode).r_total, 1.0);
  }
}

TEST(TotalReward, ContactOnlyError) {
  std::mt19937_64 rng(5);
  const auto s = hoi::testing::random_state(rng);
  auto ref = s;
  ref.cg_edges[0] ^= 1;
  EXPECT_DOUBLE_EQ(total_reward(s, ref, RewardWeights{}, RewardMode::kMultiplicative).r_total,
                   std::exp(-5.0));
  const auto k = total_reward(s, ref, RewardWeights{}, RewardMode::kKinematicOnly);
  EXPECT_EQ(k.r_total, 1.0);
  EXPECT_DOUBLE_EQ(k.r_cg, std::exp(-5.0));
}

TEST(TotalReward, MultiplicativeCollapsesAdditiveDoesNot) {
  std::mt19937_64 rng(6);
  const auto s = hoi::testing::random_state(rng);
  auto ref = s;
  ref.body.pos.array() += 10.0;
  const auto m = total_reward(s, ref, RewardWeights{}, RewardMode::kMultiplicative);
  const auto a = total_reward(s, ref, RewardWeights{}, RewardMode::kDeepMimicAdditive);
  EXPECT_LT(m.r_total, 1e-100);
  EXPECT_GE(a.r_total, 7.0 / 8.0 - 1e-12);
}

TEST(TotalReward, MatchesOracleAllModes) {
  std::mt19937_64 rng(7);
  for (int i = 0; i < 1000; ++i) {
    const auto s = hoi::testing::random_state(rng), r = hoi::testing::random_state(rng);
    for (auto mode : {RewardMode::kMultiplicative, RewardMode::kKinematicOnly,
                      RewardMode::kKinematicNoIg, RewardMode::kDeepMimicAdditive}) {
      const auto got = total_reward(s, r, RewardWeights::grab(), mode);
      const auto want = oracle::reward(s, r, RewardWeights::grab(), mode);
      ASSERT_LE(oracle::rel(got.r_total, want.total), 1e-12);
      ASSERT_LE(oracle::rel(got.r_b, want.b), 1e-12);
      ASSERT_LE(oracle::rel(got.r_o, want.o), 1e-12);
      ASSERT_LE(oracle::rel(got.r_ig, want.ig), 1e-12);
      ASSERT_LE(oracle::rel(got.r_cg, want.cg), 1e-12);
    }
  }
}

TEST(TotalReward, BoundedAndGated) {
  std::mt19937_64 rng(8);
  for (int i = 0; i < 500; ++i) {
    const auto s = hoi::testing::random_state(rng), r = hoi::testing::random_state(rng);
    const auto b = total_reward(s, r, RewardWeights{}, RewardMode::kMultiplicative);
    for (double v : {b.r_p, b.r_r, b.r_pv, b.r_rv, b.r_b, b.r_op, b.r_or, b.r_opv,
                     b.r_orv, b.r_o, b.r_ig, b.r_cg, b.r_total}) {
      EXPECT_GT(v, 0.0);
      EXPECT_LE(v, 1.0);
    }
    EXPECT_LE(b.r_total, std::min({b.r_b, b.r_o, b.r_ig, b.r_cg}));
  }
}

TEST(TotalReward, ZeroWeightNeutrality) {
  std::mt19937_64 rng(9);
  const auto s = hoi::testing::random_state(rng), r = hoi::testing::random_state(rng);
  const RewardWeights w{};
  const auto base = total_reward(s, r, w, RewardMode::kMultiplicative);
  auto zp = w;
  zp.p = 0.0;
  const auto b = total_reward(s, r, zp, RewardMode::kMultiplicative);
  EXPECT_EQ(b.r_p, 1.0);
  EXPECT_EQ(b.r_r, base.r_r);
  EXPECT_EQ(b.r_o, base.r_o);
  EXPECT_EQ(b.r_ig, base.r_ig);
  EXPECT_EQ(b.r_cg, base.r_cg);
}

TEST(RewardConfig, JsonRoundTripAndUnknownKeys) {
  RewardConfig c;
  c.mode = RewardMode::kKinematicOnly;
  c.weights = RewardWeights::grab();
  const auto back = reward_config_from_json(to_json(c));
  EXPECT_EQ(back.mode, c.mode);
  EXPECT_TRUE(back.weights == c.weights);
  EXPECT_THROW(reward_config_from_json({{"lambda", {{"q", 1}}}}), Error);
  EXPECT_THROW(reward_config_from_json({{"mode", "physics"}}), Error);
  EXPECT_THROW(reward_config_from_json({{"extra", 1}}), Error);
}
