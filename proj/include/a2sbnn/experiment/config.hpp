#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <vector>

#include <nlohmann/json.hpp>

#include "a2sbnn/calibration/calibration.hpp"
#include "a2sbnn/copula/a2_copula.hpp"
#include "a2sbnn/field/field_synth.hpp"
#include "a2sbnn/model/sbnn.hpp"

namespace a2sbnn::experiment {

struct ExperimentConfig {
  std::vector<double> theta_grid = {1.5, 2.0, 3.0, 4.0, 5.0, 6.0, 7.0, 8.0, 9.0, 10.0};
  std::vector<std::uint64_t> seeds = {0, 1, 2};

  std::size_t grid_size = 32;
  field::FieldConfig field;  // seed is replaced by the experiment seed

  std::size_t centers_per_side = 8;
  double tau = 0.3;
  std::size_t hidden_width = 64;
  double elu_alpha = 1.0;
  double bn_momentum = 0.1;
  double bn_eps = 1e-5;

  copula::A2Params copula;                      // theta is set per sweep cell
  calibration::CalibrationConfig calibration;   // seed is set per sweep cell

  std::size_t shapiro_subsample = 500;
  bool shapiro_full_grid = false;

  std::filesystem::path output_dir = "a2sbnn_out";
  bool emit_plots = true;
  // Worker threads for independent (theta, seed) cells; 0 = hardware.
  std::size_t threads = 0;

  model::ModelConfig model_config() const;

  // ConfigError describing the first violated constraint.
  void validate() const;
};

// Strict schema: unknown keys and wrong types are ConfigErrors. Missing
// keys keep their defaults.
ExperimentConfig config_from_json(const nlohmann::json& j);
nlohmann::json config_to_json(const ExperimentConfig& cfg);

// Reads and validates a JSON config file (ConfigError on any problem).
ExperimentConfig load_config(const std::filesystem::path& path);

}  // namespace a2sbnn::experiment
