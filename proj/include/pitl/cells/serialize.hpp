#pragma once

#include <filesystem>

#include <json.hpp>

#include "pitl/cells/model.hpp"

namespace pitl {

/// Model document: {"format", "version", "spec", "layers": [{"params": {...}}], "head"}.
/// Parameter arrays are row-major and round-trip bit-exactly.
nlohmann::json model_to_json(const Model& model);
Model model_from_json(const nlohmann::json& doc);

nlohmann::json spec_to_json(const ModelSpec& spec);
ModelSpec spec_from_json(const nlohmann::json& doc);

void save_model(const Model& model, const std::filesystem::path& path);
Model load_model(const std::filesystem::path& path);

}  // namespace pitl
