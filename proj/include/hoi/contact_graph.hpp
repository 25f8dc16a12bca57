#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

namespace hoi {

// Groups simulated bodies and objects into contact-graph nodes. Entities
// absent from `assignment` (or mapped to kExcluded) never set an edge; the
// ground plane is normally left out this way.
struct AggregationMap {
  static constexpr int kExcluded = -1;

  std::vector<std::string> node_names;
  std::map<std::string, int> assignment;

  int node_count() const { return static_cast<int>(node_names.size()); }
  int edge_count() const { return node_count() * (node_count() - 1) / 2; }

  // Node of an entity, nullopt when the entity is excluded. Throws
  // kUnknownEntity for names the map has never heard of.
  std::optional<int> node_of(const std::string& entity) const;

  // Structural checks plus, when entity lists are given, that at least one
  // body-bearing node and one object-bearing node exist.
  void validate() const;
  void validate(std::span<const std::string> body_names,
                std::span<const std::string> object_names) const;

  // {hands, ball, rest_body}: edge 0 hands-ball, 1 hands-rest, 2 ball-rest.
  static AggregationMap ball_play(std::span<const std::string> hand_bodies,
                                  std::span<const std::string> other_bodies,
                                  const std::string& ball);
  // {body, object, table}: edge 0 body-object, 1 body-table, 2 object-table.
  static AggregationMap grab(std::span<const std::string> bodies,
                             const std::string& object,
                             const std::string& table);

  bool operator==(const AggregationMap&) const = default;
};

struct ContactGraphState {
  std::vector<std::uint8_t> edges;

  bool operator==(const ContactGraphState&) const = default;
};

// One side of the force-approximation rule: the summed net force of a set
// of entities, measured as the Euclidean norm over the chosen axes.
struct ForceGroup {
  std::vector<std::string> entities;
  std::vector<int> axes;
  double threshold = 1.0;
};

// Edge (node_a, node_b) is on when `active` exceeds its threshold and
// `quiet` (if it names any entities) stays below its own.
struct ForceEdgeRule {
  int node_a = 0;
  int node_b = 1;
  ForceGroup active;
  ForceGroup quiet;
};

struct ContactEvidence {
  std::vector<std::pair<std::string, std::string>> pairs;
  std::map<std::string, Eigen::VectorXd> net_forces;
};

// Flat index of the edge between nodes i < j: row-major upper triangle,
// (0,1), (0,2), ..., (0,k-1), (1,2), ...
int edge_index(int i, int j, int node_count);
std::pair<int, int> edge_nodes(int index, int node_count);

ContactGraphState extract_cg(const ContactEvidence& evidence,
                             const AggregationMap& map);

ContactGraphState extract_cg_from_forces(
    const std::map<std::string, Eigen::VectorXd>& net_forces,
    std::span<const ForceEdgeRule> rules, const AggregationMap& map);

std::vector<std::uint8_t> cg_error(std::span<const std::uint8_t> sim,
                                   std::span<const std::uint8_t> ref);

}  // namespace hoi
