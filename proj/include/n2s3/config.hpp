#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "json.hpp"
#include "n2s3/metrics.hpp"
#include "n2s3/score_network.hpp"
#include "n2s3/surfaces.hpp"
#include "n2s3/trainer.hpp"

namespace n2s3 {

/// One cloud to synthesize: a surface plus sampling parameters.
struct ShapeInstance {
  std::string name;
  AnalyticSurface surface;
  double plane_half_extent = 1.0;
};

struct DatasetConfig {
  std::vector<ShapeInstance> shapes;
  int points_per_shape = 2000;
  std::vector<double> noise_levels = {0.02};
  std::uint64_t seed = 0;
};

struct SigmaGridConfig {
  double min = 0.001;
  double max = 0.06;
  int count = 40;
  std::vector<double> values() const;
};

/// The one JSON document every command reads its section from. Unknown keys
/// are rejected anywhere in the tree.
struct ExperimentConfig {
  DatasetConfig dataset;
  TrainingConfig training;
  Architecture arch;
  TvParams tv;
  SigmaGridConfig sigma_grid;
  bool has_dataset = false;
  bool has_training = false;
};

ExperimentConfig parse_experiment_config(const nlohmann::json& doc);
ExperimentConfig load_experiment_config(const std::string& path);

nlohmann::json load_json(const std::string& path);
void write_json(const std::string& path, const nlohmann::json& doc);

}  // namespace n2s3
