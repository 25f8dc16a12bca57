#pragma once

#include <cmath>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "hoi/model.hpp"
#include "hoi/rotation.hpp"

namespace hoi::testing {

inline Eigen::MatrixXd random_matrix(std::mt19937_64& rng, int rows, int cols,
                                     double scale = 1.0) {
  std::normal_distribution<double> n(0.0, scale);
  Eigen::MatrixXd m(rows, cols);
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j) m(i, j) = n(rng);
  return m;
}

inline Eigen::MatrixXd random_planar_features(std::mt19937_64& rng, int rows) {
  std::uniform_real_distribution<double> u(-M_PI, M_PI);
  Eigen::MatrixXd m(rows, 2);
  for (int i = 0; i < rows; ++i) m.row(i) = encode_rotation(u(rng)).transpose();
  return m;
}

inline Motion random_motion(std::mt19937_64& rng, int rows, double scale = 0.3) {
  Motion m;
  m.pos = random_matrix(rng, rows, 2, scale);
  m.rot = random_planar_features(rng, rows);
  m.pos_vel = random_matrix(rng, rows, 2, scale * 0.1);
  m.rot_vel = random_matrix(rng, rows, 2, scale * 0.1);
  return m;
}

// Planar layout of the toy arm: 4 bodies, one contact body (the hand).
inline BodyLayout toy_layout() {
  BodyLayout l;
  l.body_count = 4;
  l.actuated_dof = 3;
  l.spatial_dim = 2;
  l.rot_feature_dim = 2;
  l.body_names = {"torso", "upper_arm", "forearm", "hand"};
  l.contact_body_indices = {3};
  return l;
}

inline AggregationMap toy_map() {
  const std::vector<std::string> hands{"hand"};
  const std::vector<std::string> rest{"torso", "upper_arm", "forearm"};
  return AggregationMap::ball_play(hands, rest, "ball");
}

inline HoiState random_state(std::mt19937_64& rng, int bodies = 4,
                             int objects = 1, int contact = 1, int edges = 3) {
  HoiState s;
  s.body = random_motion(rng, bodies);
  s.object = random_motion(rng, objects);
  s.ig.vectors = random_matrix(rng, contact * objects, 2, 0.3);
  s.ig.contact_count = contact;
  s.ig.object_count = objects;
  std::bernoulli_distribution b(0.5);
  for (int e = 0; e < edges; ++e) s.cg_edges.push_back(b(rng) ? 1 : 0);
  return s;
}

// Valid sequence with random poses; derived fields recomputed.
inline RefHoiSequence random_sequence(std::mt19937_64& rng, int frames) {
  RefHoiSequence seq;
  seq.layout = toy_layout();
  seq.cg = toy_map();
  seq.object_names = {"ball"};
  std::bernoulli_distribution b(0.5);
  for (int t = 0; t < frames; ++t) {
    HoiState f;
    f.body.pos = random_matrix(rng, 4, 2);
    f.body.rot = random_planar_features(rng, 4);
    f.object.pos = random_matrix(rng, 1, 2);
    f.object.rot = random_planar_features(rng, 1);
    for (int e = 0; e < 3; ++e) f.cg_edges.push_back(b(rng) ? 1 : 0);
    seq.frames.push_back(f);
  }
  refresh_derived(seq);
  return seq;
}

}  // namespace hoi::testing
