#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>

#include <gtest/gtest.h>

#include "fixtures.hpp"
#include "hoi/demo.hpp"
#include "hoi/error.hpp"
#include "hoi/metrics.hpp"

using namespace hoi;

namespace {

HoiState shifted(HoiState s, double body_dx, double obj_dx) {
  s.body.pos.col(0).array() += body_dx;
  s.object.pos.col(0).array() += obj_dx;
  return s;
}

// Applies the same rotation and translation to every frame of a trajectory.
std::vector<Eigen::MatrixXd> rigid(const std::vector<Eigen::MatrixXd>& traj, double a,
                                   Eigen::Vector2d t) {
  Eigen::Matrix2d R;
  R << std::cos(a), -std::sin(a), std::sin(a), std::cos(a);
  std::vector<Eigen::MatrixXd> out;
  for (const auto& m : traj) out.push_back(((m * R.transpose()).rowwise() + t.transpose()).eval());
  return out;
}

}  // namespace

TEST(FrameSuccess, Fixtures) {
  std::mt19937_64 rng(1);
  // Positions at the origin keep the threshold distances exact.
  HoiState ref = hoi::testing::random_state(rng);
  ref.body.pos.setZero();
  ref.object.pos.setZero();
  EXPECT_TRUE(frame_success(ref, ref));
  EXPECT_FALSE(frame_success(shifted(ref, 0.0, 0.25), ref));
  EXPECT_TRUE(frame_success(shifted(ref, 0.0, 0.2), ref));
  EXPECT_TRUE(frame_success(shifted(ref, 0.1, 0.0), ref));
  EXPECT_FALSE(frame_success(shifted(ref, 0.1001, 0.0), ref));
  HoiState wrong_edge = ref;
  wrong_edge.cg_edges[2] ^= 1;
  EXPECT_FALSE(frame_success(wrong_edge, ref));
  HoiState short_edges = ref;
  short_edges.cg_edges.pop_back();
  EXPECT_THROW(frame_success(short_edges, ref), Error);
}

TEST(FrameSuccess, BodyErrorIsMeanOverBodies) {
  std::mt19937_64 rng(2);
  const HoiState ref = hoi::testing::random_state(rng);
  HoiState sim = ref;
  // One body 0.3 m off, the other three exact: mean 0.075 m.
  sim.body.pos(2, 1) += 0.3;
  EXPECT_NEAR(body_position_error(sim, ref), 0.075, 1e-15);
  EXPECT_TRUE(frame_success(sim, ref));
}

TEST(Mpjpe, Examples) {
  std::mt19937_64 rng(3);
  std::vector<Eigen::MatrixXd> a, b;
  for (int t = 0; t < 5; ++t) a.push_back(hoi::testing::random_matrix(rng, 4, 2));
  EXPECT_EQ(mpjpe(a, a), 0.0);
  for (const auto& m : a) b.push_back((m.rowwise() + Eigen::RowVector2d(0.03, 0.04)).eval());
  EXPECT_NEAR(mpjpe(b, a), 50.0, 1e-9);
  std::vector<Eigen::MatrixXd> c;
  for (int t = 0; t < 5; ++t) c.push_back(hoi::testing::random_matrix(rng, 4, 2));
  double sum = 0.0;
  for (int t = 0; t < 5; ++t)
    for (int j = 0; j < 4; ++j)
      sum += std::hypot(a[t](j, 0) - c[t](j, 0), a[t](j, 1) - c[t](j, 1));
  EXPECT_NEAR(mpjpe(a, c), 1000.0 * sum / 20.0, 1e-9);
  EXPECT_THROW(mpjpe(std::span(a).first(2), c), Error);
}

TEST(Mpjpe, RigidInvariance) {
  std::mt19937_64 rng(4);
  std::vector<Eigen::MatrixXd> a, b;
  for (int t = 0; t < 6; ++t) {
    a.push_back(hoi::testing::random_matrix(rng, 3, 2));
    b.push_back(hoi::testing::random_matrix(rng, 3, 2));
  }
  const Eigen::Vector2d t(1.5, -0.7);
  EXPECT_NEAR(mpjpe(rigid(a, 0.8, t), rigid(b, 0.8, t)), mpjpe(a, b), 1e-9);
  EXPECT_GE(mpjpe(a, b), 0.0);
}

TEST(ContactAccuracy, Examples) {
  using E = std::vector<std::vector<std::uint8_t>>;
  const E ref{{1, 0, 0}, {1, 1, 0}, {0, 0, 0}};
  EXPECT_EQ(contact_accuracy(ref, ref), 0.0);
  const E one_wrong{{0, 0, 0}, {1, 1, 1}, {0, 1, 0}};
  EXPECT_DOUBLE_EQ(contact_accuracy(one_wrong, ref), 1.0 / 3.0);
  EXPECT_THROW(contact_accuracy(E{{1, 0, 0}}, ref), Error);

  std::mt19937_64 rng(5);
  std::bernoulli_distribution b(0.5);
  E x(40, std::vector<std::uint8_t>(6)), y = x;
  for (auto* s : {&x, &y})
    for (auto& f : *s)
      for (auto& e : f) e = b(rng);
  double sum = 0.0;
  for (int t = 0; t < 40; ++t) {
    double sq = 0.0;
    for (int j = 0; j < 6; ++j) sq += (x[t][j] - y[t][j]) * (x[t][j] - y[t][j]);
    sum += sq / 6.0;
  }
  const double got = contact_accuracy(x, y);
  EXPECT_DOUBLE_EQ(got, sum / 40.0);
  EXPECT_GE(got, 0.0);
  EXPECT_LE(got, 1.0);
}

TEST(ScoreRollouts, SuccEqualsMaskMeanAndDivergenceFails) {
  std::mt19937_64 rng(6);
  RefHoiSequence seq;
  seq.frames = {hoi::testing::random_state(rng), hoi::testing::random_state(rng),
                hoi::testing::random_state(rng), hoi::testing::random_state(rng)};
  Rollout good;
  good.states = seq.frames;
  good.reason = TerminationReason::kMaxTime;
  Rollout partial;
  partial.states = {seq.frames[0], shifted(seq.frames[1], 0.0, 0.5), seq.frames[2]};
  partial.diverged_at = 3;
  partial.reason = TerminationReason::kDiverged;
  const auto rep = score_rollouts({good, partial}, seq);
  ASSERT_EQ(rep.success_mask.size(), 6u);
  EXPECT_EQ(rep.success_mask, (std::vector<std::uint8_t>{1, 1, 1, 0, 1, 0}));
  EXPECT_DOUBLE_EQ(rep.succ, 4.0 / 6.0);
  EXPECT_DOUBLE_EQ(rep.e_cg, 1.0 / 6.0);
  EXPECT_EQ(rep.episodes, 2);
  EXPECT_EQ(rep.terminations[static_cast<int>(TerminationReason::kDiverged)], 1);
  // Object MPJPE over the five scored frames: one at 0.5 m.
  EXPECT_NEAR(rep.e_o_mpjpe, 500.0 / 5.0, 1e-9);
  EXPECT_EQ(rep.e_b_mpjpe, 0.0);
}

TEST(Evaluate, KinematicReplaySelfComparison) {
  const Embodiment body = Embodiment::toy_arm();
  const auto seq = demo::generate(demo::DemoScript::defaults(demo::TaskKind::kHold), body);
  const auto replay = kinematic_replay(seq, body, physics::SimConfig{});
  const auto rep = score_rollouts({replay}, seq);
  EXPECT_EQ(rep.succ, 1.0);
  EXPECT_LT(rep.e_b_mpjpe, 1.0);
  EXPECT_LT(rep.e_o_mpjpe, 5.0);
  EXPECT_EQ(rep.e_cg, 0.0);

  // Against itself, the recorded replay scores perfectly.
  RefHoiSequence self = seq;
  self.frames = replay.states;
  const auto exact = score_rollouts({replay}, self);
  EXPECT_EQ(exact.succ, 1.0);
  EXPECT_EQ(exact.e_b_mpjpe, 0.0);
  EXPECT_EQ(exact.e_o_mpjpe, 0.0);
  EXPECT_EQ(exact.e_cg, 0.0);
}

TEST(Evaluate, RepeatsAreIdenticalAndUntrainedPolicyFails) {
  const Embodiment body = Embodiment::toy_arm();
  const auto seq = demo::generate(demo::DemoScript::defaults(demo::TaskKind::kTossCatch), body);
  ExperimentConfig cfg;
  std::mt19937_64 rng(7);
  auto policy = ActorCritic::create(state_dimension(seq.layout, 1, 3), 3, {32}, std::log(0.05),
                                    false, rng);
  // Random heavy weights push the arm to its limits.
  std::normal_distribution<double> n(0.0, 1.0);
  for (int i = 0; i < policy.actor.parameter_count(); ++i) policy.actor.params()[i] = n(rng);
  const auto one = evaluate(policy, seq, cfg, 1, 1);
  const auto ten = evaluate(policy, seq, cfg, 10, 2);
  // Deterministic rollouts agree; only the averaging order differs.
  EXPECT_NEAR(one.succ, ten.succ, 1e-12);
  EXPECT_NEAR(one.e_o_mpjpe, ten.e_o_mpjpe, 1e-12 * one.e_o_mpjpe);
  EXPECT_NEAR(one.e_cg, ten.e_cg, 1e-12);
  EXPECT_EQ(ten.episodes, 10);
  EXPECT_LT(one.succ, 0.2);
  EXPECT_GT(one.e_o_mpjpe, 100.0);
}

TEST(Evaluate, ReportJsonAndCsv) {
  std::mt19937_64 rng(8);
  RefHoiSequence seq;
  seq.frames = {hoi::testing::random_state(rng), hoi::testing::random_state(rng)};
  Rollout r;
  r.states = seq.frames;
  r.reason = TerminationReason::kMaxTime;
  const auto rep = score_rollouts({r}, seq);
  const auto j = to_json(rep);
  EXPECT_EQ(j["succ"], 1.0);
  EXPECT_EQ(j["terminations"]["max_time"], 1);
  const auto path = (std::filesystem::temp_directory_path() / "hoi_frames_test.csv").string();
  write_frame_csv(rep, path);
  std::ifstream in(path);
  std::string header, row;
  std::getline(in, header);
  std::getline(in, row);
  std::filesystem::remove(path);
  EXPECT_EQ(header, "repeat,frame,success,body_err,obj_err,cg_err");
  EXPECT_EQ(row.rfind("0,1,1,", 0), 0u);
}
