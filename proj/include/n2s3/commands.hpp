#pragma once

#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "n2s3/point_cloud.hpp"

namespace n2s3 {

struct SynthOptions {
  std::string config_path;
  std::string out_dir;
  std::optional<std::uint64_t> seed_override;
};

struct TrainOptions {
  std::string config_path;
  std::vector<std::string> inputs;     // explicit cloud files, or
  std::string manifest_path;           // a synth manifest plus a level
  std::optional<double> manifest_level;
  std::string out_dir;
  std::optional<std::uint64_t> seed_override;
};

struct DenoiseOptions {
  std::string model_path;
  std::string input_path;
  std::optional<double> sigma;  // known-noise mode
  bool estimate_sigma = false;  // unknown-noise mode
  std::string config_path;      // optional: tv + sigma_grid sections
  std::string clean_path;       // optional references for report metrics
  std::string surface_spec;
  std::string out_dir;
};

struct EvaluateOptions {
  std::string denoised_path;
  std::string clean_path;    // at least one of clean/surface required
  std::string surface_spec;
  std::string noisy_path;    // optional: adds the noisy baseline CD
  std::string out_path;      // empty: print to stdout
};

struct GradcheckOptions {
  std::string config_path;  // optional: architecture from training section
  std::uint64_t seed = 0;
  int probes = 100;
  double tolerance = 1e-6;
  std::string out_path;  // empty: print to stdout
};

int cmd_synth(const SynthOptions& opt);
int cmd_train(const TrainOptions& opt);
int cmd_denoise(const DenoiseOptions& opt);
int cmd_evaluate(const EvaluateOptions& opt);
int cmd_gradcheck(const GradcheckOptions& opt);

/// CD with the pinned evaluation convention: both clouds are independently
/// normalized to the unit sphere first.
double evaluation_chamfer(const PointCloud& denoised, const PointCloud& clean);

}  // namespace n2s3
