#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "pitl/asm1/asm1.hpp"
#include "pitl/data/dataset.hpp"

namespace pitl::experiment {

struct SourcePlantConfig;
struct SisterPlantConfig;
struct TargetPlantConfig;

/// Ten measured signals of the target plant: seven flotation-outlet analogues
/// and three suspended-solids readings.
const std::vector<std::string>& target_features();
asm1::DriverProfile target_profile();
/// How the target's measured columns feed the oxygen balance.
asm1::InputMap target_input_map();
asm1::Params target_params();

/// Sister plant: the target's signal set at different operating levels.
asm1::DriverProfile sister_profile();
asm1::Params sister_params();

/// Independent sub-seed for stream `tag` of run `seed`.
std::uint64_t sub_seed(std::uint64_t seed, std::uint64_t tag);

Dataset generate_source(std::uint64_t seed, const SourcePlantConfig& cfg);
/// Noisy four-feature table of the sister plant.
Dataset generate_industrial(std::uint64_t seed, const SisterPlantConfig& cfg);
/// 900-day target series with measurement noise on S_O.
Dataset generate_target(std::uint64_t seed, const TargetPlantConfig& cfg);

}  // namespace pitl::experiment
