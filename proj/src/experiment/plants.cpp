#include "pitl/experiment/plants.hpp"

#include <random>

#include "pitl/data/pipeline.hpp"
#include "pitl/errors.hpp"
#include "pitl/experiment/config.hpp"

namespace pitl::experiment {

const std::vector<std::string>& target_features() {
  static const std::vector<std::string> kFeatures{"pH",     "TSS_daf", "COD",     "grease",   "NH4",
                                                  "phenol", "sulfur",  "TSS_RAS", "TSS_AS_A", "TSS_AS_B"};
  return kFeatures;
}

asm1::DriverProfile target_profile() {
  asm1::DriverProfile p;
  // Aeration-basin solids climb through the series, so the last 200 days sit
  // above most of the training range.
  //            name         mean    diurnal weekly seasonal period phase trend  noise  corr
  p.signals = {{"pH", 7.2, 0.0, 0.05, 0.15, 120.0, 0.4, 0.0, 0.08, 0.7},
               {"TSS_daf", 45.0, 0.0, 4.0, 9.0, 150.0, 1.3, 0.0, 4.0, 0.8},
               {"COD", 300.0, 0.0, 25.0, 70.0, 200.0, 0.2, 0.0, 30.0, 0.8},
               {"grease", 14.0, 0.0, 1.5, 3.0, 170.0, 2.2, 0.0, 1.5, 0.8},
               {"NH4", 2.4, 0.0, 0.3, 0.9, 160.0, 1.0, 0.0, 0.35, 0.8},
               {"phenol", 4.0, 0.0, 0.4, 1.0, 140.0, 2.9, 0.0, 0.4, 0.8},
               {"sulfur", 9.0, 0.0, 0.8, 2.0, 190.0, 0.6, 0.0, 0.8, 0.8},
               {"TSS_RAS", 6500.0, 0.0, 150.0, 600.0, 250.0, 1.8, 0.6, 200.0, 0.9},
               {"TSS_AS_A", 2700.0, 0.0, 40.0, 250.0, 300.0, 0.5, 0.7, 60.0, 0.95},
               {"TSS_AS_B", 2650.0, 0.0, 40.0, 240.0, 300.0, 0.6, 0.7, 70.0, 0.95}};
  return p;
}

asm1::InputMap target_input_map() {
  asm1::InputMap m;
  m.S_S = {"COD", 0.006};
  m.S_NH = {"NH4", 1.0};
  m.x_BH = {"TSS_AS_A", 0.8};
  m.x_BA = {"TSS_AS_A", 0.05};
  return m;
}

asm1::Params target_params() {
  asm1::Params p = asm1::bsm1_defaults();
  p.kla = 260.0;
  p.mu_H = 3.6;
  p.K_OH = 0.25;
  return p;
}

asm1::DriverProfile sister_profile() {
  asm1::DriverProfile p;
  //            name         mean    diurnal weekly seasonal period phase trend noise  corr
  p.signals = {{"Q", 900.0, 0.0, 60.0, 120.0, 180.0, 0.9, 0.0, 50.0, 0.8},
               {"pH", 7.0, 0.0, 0.05, 0.2, 110.0, 1.9, 0.0, 0.1, 0.7},
               {"COD", 340.0, 0.0, 30.0, 110.0, 150.0, 0.5, 0.0, 35.0, 0.8},
               {"NH4", 2.8, 0.0, 0.3, 1.3, 130.0, 2.4, 0.0, 0.4, 0.8},
               {"TSS_AS_A", 3000.0, 0.0, 20.0, 120.0, 220.0, 1.4, 0.0, 30.0, 0.95}};
  return p;
}

asm1::Params sister_params() {
  asm1::Params p = asm1::bsm1_defaults();
  p.kla = 250.0;
  return p;
}

std::uint64_t sub_seed(std::uint64_t seed, std::uint64_t tag) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(tag), static_cast<std::uint32_t>(tag >> 32)};
  std::uint32_t out[2];
  seq.generate(out, out + 2);
  return (static_cast<std::uint64_t>(out[0]) << 32) | out[1];
}

Dataset generate_source(std::uint64_t seed, const SourcePlantConfig& cfg) {
  return asm1::emit_source_dataset(sub_seed(seed, 1), cfg.points, cfg.params);
}

Dataset generate_industrial(std::uint64_t seed, const SisterPlantConfig& cfg) {
  const Dataset full = asm1::emit_dataset("sister_raw", sub_seed(seed, 2), cfg.points, cfg.params, sister_profile(),
                                          target_input_map(), {"Q", "pH", "COD", "NH4", "TSS_AS_A"});
  Dataset ds = derive_industrial(full, sub_seed(seed, 3), cfg.noise_frac, cfg.keep_columns, cfg.points);
  ds.name = "industrial";
  return ds;
}

Dataset generate_target(std::uint64_t seed, const TargetPlantConfig& cfg) {
  Dataset ds = asm1::emit_dataset("target", sub_seed(seed, 4), cfg.points, cfg.params, target_profile(),
                                  target_input_map(), target_features());
  if (cfg.label_noise > 0.0) {
    std::mt19937_64 rng(sub_seed(seed, 5));
    std::normal_distribution<double> noise(0.0, cfg.label_noise);
    for (double& y : ds.target) y += noise(rng);
  }
  ds.provenance += ", S_O noise std " + std::to_string(cfg.label_noise);
  return ds;
}

}  // namespace pitl::experiment
