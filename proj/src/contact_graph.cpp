#include "hoi/contact_graph.hpp"

#include <set>

#include "hoi/error.hpp"

namespace hoi {

std::optional<int> AggregationMap::node_of(const std::string& entity) const {
  auto it = assignment.find(entity);
  if (it == assignment.end()) {
    throw Error(ErrorKind::kUnknownEntity,
                "entity '" + entity + "' is not in the aggregation map");
  }
  if (it->second == kExcluded) return std::nullopt;
  return it->second;
}

void AggregationMap::validate() const {
  if (node_count() < 2) {
    throw Error(ErrorKind::kInvalidArgument,
                "contact graph needs at least 2 nodes");
  }
  std::set<std::string> unique(node_names.begin(), node_names.end());
  if (unique.size() != node_names.size()) {
    throw Error(ErrorKind::kInvalidArgument, "duplicate contact graph node");
  }
  for (const auto& [name, node] : assignment) {
    if (node != kExcluded && (node < 0 || node >= node_count())) {
      throw Error(ErrorKind::kOutOfRange,
                  "entity '" + name + "' maps to invalid node " +
                      std::to_string(node));
    }
  }
}

void AggregationMap::validate(std::span<const std::string> body_names,
                              std::span<const std::string> object_names) const {
  validate();
  bool has_body = false;
  bool has_object = false;
  for (const auto& name : body_names) {
    auto it = assignment.find(name);
    if (it == assignment.end()) {
      throw Error(ErrorKind::kUnknownEntity,
                  "body '" + name + "' missing from aggregation map");
    }
    has_body |= it->second != kExcluded;
  }
  for (const auto& name : object_names) {
    auto it = assignment.find(name);
    if (it == assignment.end()) {
      throw Error(ErrorKind::kUnknownEntity,
                  "object '" + name + "' missing from aggregation map");
    }
    has_object |= it->second != kExcluded;
  }
  if (!has_body || !has_object) {
    throw Error(ErrorKind::kInvalidArgument,
                "aggregation map needs a body-bearing and an object-bearing "
                "node");
  }
}

AggregationMap AggregationMap::ball_play(
    std::span<const std::string> hand_bodies,
    std::span<const std::string> other_bodies, const std::string& ball) {
  AggregationMap map;
  map.node_names = {"hands", "ball", "rest_body"};
  for (const auto& b : hand_bodies) map.assignment[b] = 0;
  map.assignment[ball] = 1;
  for (const auto& b : other_bodies) map.assignment[b] = 2;
  map.assignment["ground"] = kExcluded;
  return map;
}

AggregationMap AggregationMap::grab(std::span<const std::string> bodies,
                                    const std::string& object,
                                    const std::string& table) {
  AggregationMap map;
  map.node_names = {"body", "object", "table"};
  for (const auto& b : bodies) map.assignment[b] = 0;
  map.assignment[object] = 1;
  map.assignment[table] = 2;
  map.assignment["ground"] = kExcluded;
  return map;
}

int edge_index(int i, int j, int node_count) {
  if (node_count < 2 || i < 0 || j >= node_count || i >= j) {
    throw Error(ErrorKind::kOutOfRange,
                "edge (" + std::to_string(i) + "," + std::to_string(j) +
                    ") invalid for " + std::to_string(node_count) + " nodes");
  }
  // Edges in rows 0..i-1 number i*k - i*(i+1)/2.
  return i * node_count - i * (i + 1) / 2 + (j - i - 1);
}

std::pair<int, int> edge_nodes(int index, int node_count) {
  int remaining = index;
  for (int i = 0; i < node_count - 1; ++i) {
    const int row = node_count - 1 - i;
    if (remaining < row) return {i, i + 1 + remaining};
    remaining -= row;
  }
  throw Error(ErrorKind::kOutOfRange,
              "edge index " + std::to_string(index) + " out of range");
}

ContactGraphState extract_cg(const ContactEvidence& evidence,
                             const AggregationMap& map) {
  const int k = map.node_count();
  ContactGraphState out;
  out.edges.assign(static_cast<std::size_t>(map.edge_count()), 0);
  for (const auto& [a, b] : evidence.pairs) {
    const auto na = map.node_of(a);
    const auto nb = map.node_of(b);
    if (!na || !nb || *na == *nb) continue;
    const int lo = std::min(*na, *nb);
    const int hi = std::max(*na, *nb);
    out.edges[static_cast<std::size_t>(edge_index(lo, hi, k))] = 1;
  }
  return out;
}

static double group_force(
    const std::map<std::string, Eigen::VectorXd>& net_forces,
    const ForceGroup& group) {
  Eigen::VectorXd sum;
  for (const auto& name : group.entities) {
    auto it = net_forces.find(name);
    if (it == net_forces.end()) {
      throw Error(ErrorKind::kMissingForce,
                  "no net force reported for '" + name + "'");
    }
    if (sum.size() == 0) sum = Eigen::VectorXd::Zero(it->second.size());
    if (it->second.size() != sum.size()) {
      throw Error(ErrorKind::kDimensionMismatch,
                  "force vector of '" + name + "' has wrong dimension");
    }
    sum += it->second;
  }
  if (sum.size() == 0) return 0.0;
  double sq = 0.0;
  for (int axis : group.axes) {
    if (axis < 0 || axis >= sum.size()) {
      throw Error(ErrorKind::kOutOfRange,
                  "force axis " + std::to_string(axis) + " out of range");
    }
    sq += sum[axis] * sum[axis];
  }
  return std::sqrt(sq);
}

ContactGraphState extract_cg_from_forces(
    const std::map<std::string, Eigen::VectorXd>& net_forces,
    std::span<const ForceEdgeRule> rules, const AggregationMap& map) {
  const int k = map.node_count();
  ContactGraphState out;
  out.edges.assign(static_cast<std::size_t>(map.edge_count()), 0);
  for (const auto& rule : rules) {
    const int lo = std::min(rule.node_a, rule.node_b);
    const int hi = std::max(rule.node_a, rule.node_b);
    const int index = edge_index(lo, hi, k);
    if (rule.active.threshold <= 0.0 ||
        (!rule.quiet.entities.empty() && rule.quiet.threshold <= 0.0)) {
      throw Error(ErrorKind::kInvalidArgument,
                  "force thresholds must be positive");
    }
    const bool active =
        group_force(net_forces, rule.active) > rule.active.threshold;
    const bool quiet = rule.quiet.entities.empty() ||
                       group_force(net_forces, rule.quiet) <
                           rule.quiet.threshold;
    if (active && quiet) out.edges[static_cast<std::size_t>(index)] = 1;
  }
  return out;
}

std::vector<std::uint8_t> cg_error(std::span<const std::uint8_t> sim,
                                   std::span<const std::uint8_t> ref) {
  if (sim.size() != ref.size()) {
    throw Error(ErrorKind::kDimensionMismatch,
                "contact graph lengths differ: " + std::to_string(sim.size()) +
                    " vs " + std::to_string(ref.size()));
  }
  std::vector<std::uint8_t> out(sim.size());
  for (std::size_t j = 0; j < sim.size(); ++j) {
    out[j] = sim[j] == ref[j] ? 0 : 1;
  }
  return out;
}

}  // namespace hoi
