#pragma once

#include <filesystem>
#include <string>

#include <json.hpp>

#include "hoi/model.hpp"

namespace hoi {

// HOI sequence file (JSON, version 1). Velocities and the interaction graph
// are never written; they are recomputed on load. Frames may carry optional
// "body_pos_vel", "body_rot_vel", "obj_pos_vel", "obj_rot_vel" arrays, which
// are only checked against the recomputed values and reported as warnings.
nlohmann::json sequence_to_json(const RefHoiSequence& seq);
RefHoiSequence sequence_from_json(const nlohmann::json& doc,
                                  ValidationReport* report = nullptr);

void save_sequence(const RefHoiSequence& seq, const std::filesystem::path& path);
RefHoiSequence load_sequence(const std::filesystem::path& path,
                             ValidationReport* report = nullptr);

nlohmann::json layout_to_json(const BodyLayout& layout);
BodyLayout layout_from_json(const nlohmann::json& j);
nlohmann::json aggregation_to_json(const AggregationMap& map);
AggregationMap aggregation_from_json(const nlohmann::json& j);

}  // namespace hoi
