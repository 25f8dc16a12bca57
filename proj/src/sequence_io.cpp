#include "hoi/sequence_io.hpp"

#include <fstream>
#include <set>

#include "hoi/error.hpp"

namespace hoi {

using nlohmann::json;

namespace {

constexpr int kVersion = 1;

json matrix_to_json(const Eigen::MatrixXd& m) {
  json rows = json::array();
  for (int r = 0; r < m.rows(); ++r) {
    json row = json::array();
    for (int c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    rows.push_back(std::move(row));
  }
  return rows;
}

const json& require(const json& j, const char* key, long frame = -1) {
  if (!j.is_object() || !j.contains(key)) {
    throw Error(ErrorKind::kSchema, std::string("missing key '") + key + "'",
                frame >= 0 ? std::optional<long>(frame) : std::nullopt);
  }
  return j.at(key);
}

Eigen::MatrixXd matrix_from_json(const json& j, int rows, int cols,
                                 const std::string& what, long frame) {
  if (!j.is_array()) {
    throw Error(ErrorKind::kSchema, what + " must be an array", frame);
  }
  if (static_cast<int>(j.size()) != rows) {
    throw Error(ErrorKind::kDimensionMismatch,
                what + " has " + std::to_string(j.size()) + " rows, expected " +
                    std::to_string(rows),
                frame);
  }
  Eigen::MatrixXd m(rows, cols);
  for (int r = 0; r < rows; ++r) {
    const json& row = j[static_cast<std::size_t>(r)];
    if (!row.is_array() || static_cast<int>(row.size()) != cols) {
      throw Error(ErrorKind::kDimensionMismatch,
                  what + " row " + std::to_string(r) + " must have " +
                      std::to_string(cols) + " numbers",
                  frame);
    }
    for (int c = 0; c < cols; ++c) {
      const json& v = row[static_cast<std::size_t>(c)];
      if (!v.is_number()) {
        throw Error(ErrorKind::kSchema, what + " holds a non-number", frame);
      }
      m(r, c) = v.get<double>();
    }
  }
  return m;
}

void reject_unknown(const json& j, const std::set<std::string>& allowed,
                    const std::string& where, long frame = -1) {
  for (const auto& [key, _] : j.items()) {
    if (!allowed.count(key)) {
      throw Error(ErrorKind::kSchema,
                  "unknown key '" + key + "' in " + where,
                  frame >= 0 ? std::optional<long>(frame) : std::nullopt);
    }
  }
}

}  // namespace

json layout_to_json(const BodyLayout& layout) {
  return {{"body_count", layout.body_count},
          {"actuated_dof", layout.actuated_dof},
          {"spatial_dim", layout.spatial_dim},
          {"rot_feature_dim", layout.rot_feature_dim},
          {"body_names", layout.body_names},
          {"contact_body_indices", layout.contact_body_indices}};
}

BodyLayout layout_from_json(const json& j) {
  reject_unknown(j,
                 {"body_count", "actuated_dof", "spatial_dim",
                  "rot_feature_dim", "body_names", "contact_body_indices"},
                 "layout");
  BodyLayout layout;
  try {
    layout.body_count = require(j, "body_count").get<int>();
    layout.actuated_dof = require(j, "actuated_dof").get<int>();
    layout.spatial_dim = require(j, "spatial_dim").get<int>();
    layout.rot_feature_dim = require(j, "rot_feature_dim").get<int>();
    layout.body_names =
        require(j, "body_names").get<std::vector<std::string>>();
    layout.contact_body_indices =
        require(j, "contact_body_indices").get<std::vector<int>>();
  } catch (const json::exception& e) {
    throw Error(ErrorKind::kSchema, std::string("layout: ") + e.what());
  }
  layout.validate();
  return layout;
}

json aggregation_to_json(const AggregationMap& map) {
  json agg = json::object();
  for (const auto& [name, node] : map.assignment) agg[name] = node;
  return {{"nodes", map.node_names}, {"aggregation", agg}};
}

AggregationMap aggregation_from_json(const json& j) {
  reject_unknown(j, {"nodes", "aggregation"}, "cg");
  AggregationMap map;
  try {
    map.node_names = require(j, "nodes").get<std::vector<std::string>>();
    map.assignment =
        require(j, "aggregation").get<std::map<std::string, int>>();
  } catch (const json::exception& e) {
    throw Error(ErrorKind::kSchema, std::string("cg: ") + e.what());
  }
  map.validate();
  return map;
}

json sequence_to_json(const RefHoiSequence& seq) {
  json frames = json::array();
  for (const auto& f : seq.frames) {
    json edges = json::array();
    for (auto e : f.cg_edges) edges.push_back(static_cast<int>(e));
    frames.push_back({{"body_pos", matrix_to_json(f.body.pos)},
                      {"body_rot", matrix_to_json(f.body.rot)},
                      {"obj_pos", matrix_to_json(f.object.pos)},
                      {"obj_rot", matrix_to_json(f.object.rot)},
                      {"cg_edges", edges}});
  }
  return {{"version", kVersion},
          {"fps", seq.fps},
          {"layout", layout_to_json(seq.layout)},
          {"cg", aggregation_to_json(seq.cg)},
          {"objects",
           {{"count", seq.object_count()}, {"names", seq.object_names}}},
          {"frames", frames}};
}

RefHoiSequence sequence_from_json(const json& doc, ValidationReport* report) {
  reject_unknown(doc, {"version", "fps", "layout", "cg", "objects", "frames"},
                 "sequence");
  const json& version = require(doc, "version");
  if (!version.is_number_integer() || version.get<int>() != kVersion) {
    throw Error(ErrorKind::kSchema, "unsupported sequence version");
  }
  RefHoiSequence seq;
  const json& fps = require(doc, "fps");
  if (!fps.is_number_integer()) {
    throw Error(ErrorKind::kSchema, "fps must be an integer");
  }
  seq.fps = fps.get<int>();
  seq.layout = layout_from_json(require(doc, "layout"));
  seq.cg = aggregation_from_json(require(doc, "cg"));
  const json& objects = require(doc, "objects");
  reject_unknown(objects, {"count", "names"}, "objects");
  try {
    seq.object_names =
        require(objects, "names").get<std::vector<std::string>>();
    if (require(objects, "count").get<int>() != seq.object_count()) {
      throw Error(ErrorKind::kDimensionMismatch,
                  "objects.count disagrees with objects.names");
    }
  } catch (const json::exception& e) {
    throw Error(ErrorKind::kSchema, std::string("objects: ") + e.what());
  }

  const auto& L = seq.layout;
  const int m = seq.object_count();
  const json& frames = require(doc, "frames");
  if (!frames.is_array()) {
    throw Error(ErrorKind::kSchema, "frames must be an array");
  }
  struct StoredVel {
    long frame;
    const char* key;
    Eigen::MatrixXd value;
  };
  std::vector<StoredVel> stored;
  for (std::size_t t = 0; t < frames.size(); ++t) {
    const json& fj = frames[t];
    const long ft = static_cast<long>(t);
    reject_unknown(fj,
                   {"body_pos", "body_rot", "obj_pos", "obj_rot", "cg_edges",
                    "body_pos_vel", "body_rot_vel", "obj_pos_vel",
                    "obj_rot_vel"},
                   "frame", ft);
    RefHoiState f;
    f.body = Motion::zeros(L.body_count, L.spatial_dim, L.rot_feature_dim);
    f.object = Motion::zeros(m, L.spatial_dim, L.rot_feature_dim);
    f.body.pos = matrix_from_json(require(fj, "body_pos", ft), L.body_count,
                                  L.spatial_dim, "body_pos", ft);
    f.body.rot = matrix_from_json(require(fj, "body_rot", ft), L.body_count,
                                  L.rot_feature_dim, "body_rot", ft);
    f.object.pos = matrix_from_json(require(fj, "obj_pos", ft), m,
                                    L.spatial_dim, "obj_pos", ft);
    f.object.rot = matrix_from_json(require(fj, "obj_rot", ft), m,
                                    L.rot_feature_dim, "obj_rot", ft);
    const json& edges = require(fj, "cg_edges", ft);
    if (!edges.is_array()) {
      throw Error(ErrorKind::kSchema, "cg_edges must be an array", ft);
    }
    for (const json& e : edges) {
      if (!e.is_number_integer()) {
        throw Error(ErrorKind::kNonBinaryEdge, "cg edge is not an integer",
                    ft);
      }
      const auto v = e.get<long>();
      if (v != 0 && v != 1) {
        throw Error(ErrorKind::kNonBinaryEdge,
                    "cg edge value " + std::to_string(v) + " is not 0 or 1",
                    ft);
      }
      f.cg_edges.push_back(static_cast<std::uint8_t>(v));
    }
    for (const auto& [key, rows, cols] :
         {std::tuple{"body_pos_vel", L.body_count, L.spatial_dim},
          std::tuple{"body_rot_vel", L.body_count, L.rot_feature_dim},
          std::tuple{"obj_pos_vel", m, L.spatial_dim},
          std::tuple{"obj_rot_vel", m, L.rot_feature_dim}}) {
      if (fj.contains(key)) {
        stored.push_back(
            {ft, key, matrix_from_json(fj.at(key), rows, cols, key, ft)});
      }
    }
    seq.frames.push_back(std::move(f));
  }
  if (seq.frames.empty()) {
    throw Error(ErrorKind::kInvalidArgument, "sequence has no frames");
  }
  refresh_derived(seq);
  ValidationReport local = validate_sequence(seq);

  double max_dev = 0.0;
  long worst = -1;
  for (const auto& s : stored) {
    const auto& f = seq.frames[static_cast<std::size_t>(s.frame)];
    const std::string key = s.key;
    const Eigen::MatrixXd& recomputed =
        key == "body_pos_vel"   ? f.body.pos_vel
        : key == "body_rot_vel" ? f.body.rot_vel
        : key == "obj_pos_vel"  ? f.object.pos_vel
                                : f.object.rot_vel;
    const double dev = (recomputed - s.value).cwiseAbs().maxCoeff();
    if (dev > max_dev) {
      max_dev = dev;
      worst = s.frame;
    }
  }
  if (max_dev > 0.0) {
    local.warnings.push_back(
        "stored velocities are inconsistent with positions; max deviation " +
        std::to_string(max_dev) + " at frame " + std::to_string(worst));
  }
  if (report) *report = std::move(local);
  return seq;
}

void save_sequence(const RefHoiSequence& seq,
                   const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) {
    throw Error(ErrorKind::kIo, "cannot write " + path.string());
  }
  out << sequence_to_json(seq).dump() << '\n';
  if (!out) throw Error(ErrorKind::kIo, "write failed for " + path.string());
}

RefHoiSequence load_sequence(const std::filesystem::path& path,
                             ValidationReport* report) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::kIo, "cannot open " + path.string());
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw Error(ErrorKind::kSchema,
                path.string() + " is not valid JSON: " + e.what());
  }
  return sequence_from_json(doc, report);
}

}  // namespace hoi
