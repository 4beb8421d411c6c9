#include "n2s3/commands.hpp"

#include <chrono>
#include <filesystem>
#include <iostream>

#include "n2s3/cloud_io.hpp"
#include "n2s3/config.hpp"
#include "n2s3/denoiser.hpp"
#include "n2s3/errors.hpp"
#include "n2s3/rng.hpp"
#include "n2s3/synth.hpp"

namespace n2s3 {

namespace {

using nlohmann::json;

constexpr std::uint64_t kInitStream = 3;

void emit(const json& doc, const std::string& out_path) {
  if (out_path.empty()) {
    std::cout << doc.dump(2) << std::endl;
  } else {
    write_json(out_path, doc);
  }
}

ExperimentConfig config_or_default(const std::string& path) {
  if (path.empty()) return ExperimentConfig{};
  return load_experiment_config(path);
}

}  // namespace

double evaluation_chamfer(const PointCloud& denoised, const PointCloud& clean) {
  const PointCloud a = normalize_unit_sphere(denoised).first;
  const PointCloud b = normalize_unit_sphere(clean).first;
  return chamfer_distance(a, b);
}

int cmd_synth(const SynthOptions& opt) {
  ExperimentConfig cfg = load_experiment_config(opt.config_path);
  if (!cfg.has_dataset) throw ConfigError("synth needs a 'dataset' section");
  if (opt.seed_override) cfg.dataset.seed = *opt.seed_override;
  run_synth(cfg.dataset, opt.out_dir);
  return 0;
}

int cmd_train(const TrainOptions& opt) {
  ExperimentConfig cfg = load_experiment_config(opt.config_path);
  if (!cfg.has_training) throw ConfigError("train needs a 'training' section");
  if (opt.seed_override) cfg.training.seed = *opt.seed_override;

  std::vector<std::string> files = opt.inputs;
  if (!opt.manifest_path.empty()) {
    const json manifest = load_json(opt.manifest_path);
    const std::string dir =
        std::filesystem::path(opt.manifest_path).parent_path().string();
    for (const json& shape : manifest.at("shapes")) {
      for (const json& noisy : shape.at("noisy")) {
        if (opt.manifest_level &&
            noisy.at("level").get<double>() != *opt.manifest_level) {
          continue;
        }
        files.push_back(dir.empty() ? noisy.at("path").get<std::string>()
                                    : dir + "/" + noisy.at("path").get<std::string>());
      }
    }
  }
  if (files.empty()) throw ConfigError("train: no input clouds given");

  std::vector<PointCloud> clouds;
  clouds.reserve(files.size());
  for (const std::string& f : files) {
    clouds.push_back(normalize_unit_sphere(read_cloud(f)).first);
  }

  ScoreNetwork net =
      ScoreNetwork::init_params(cfg.arch, derive_seed(cfg.training.seed, 0, 0, kInitStream));
  auto [trained, history] = train(clouds, std::move(net), cfg.training);

  std::filesystem::create_directories(opt.out_dir);
  save_params(trained, opt.out_dir + "/model.n2s3");
  history.write_csv(opt.out_dir + "/history.csv");
  return 0;
}

int cmd_denoise(const DenoiseOptions& opt) {
  if (opt.sigma.has_value() == opt.estimate_sigma) {
    throw ConfigError("denoise needs exactly one of --sigma or --estimate-sigma");
  }
  const auto t0 = std::chrono::steady_clock::now();

  const ScoreNetwork net = load_params(opt.model_path);
  const ExperimentConfig cfg = config_or_default(opt.config_path);

  const PointCloud input = read_cloud(opt.input_path);
  auto [work, transform] = normalize_unit_sphere(input);

  json report;
  report["input"] = opt.input_path;
  report["model"] = opt.model_path;

  PointCloud denoised_work;
  if (opt.sigma) {
    // --sigma is a fraction of the bounding radius, i.e. the absolute value
    // in the normalized frame.
    if (*opt.sigma < 0.0) throw ConfigError("--sigma must be >= 0");
    denoised_work = denoise_known_sigma(net, work, *opt.sigma, net.arch().k_patch);
    report["sigma_mode"] = "known";
    report["sigma_star"] = *opt.sigma;
    report["tv_trace"] = json::array();
  } else {
    const std::vector<double> grid = cfg.sigma_grid.values();
    const SigmaSweepResult sweep =
        denoise_unknown_sigma(net, work, grid, net.arch().k_patch, cfg.tv);
    denoised_work = sweep.denoised;
    report["sigma_mode"] = "estimated";
    report["sigma_star"] = sweep.sigma_star;
    json trace = json::array();
    for (const auto& [sigma, tv] : sweep.tv_trace) trace.push_back({sigma, tv});
    report["tv_trace"] = std::move(trace);
  }

  const PointCloud denoised = denormalize(denoised_work, transform);

  std::filesystem::create_directories(opt.out_dir);
  const std::string out_cloud = opt.out_dir + "/denoised.xyz";
  write_xyz(out_cloud, denoised);
  report["output"] = out_cloud;

  if (!opt.clean_path.empty()) {
    report["cd"] = evaluation_chamfer(denoised, read_cloud(opt.clean_path));
  }
  if (!opt.surface_spec.empty()) {
    report["p2m"] = point_to_surface(denoised, parse_surface_spec(opt.surface_spec));
  }

  report["seconds"] =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  write_json(opt.out_dir + "/report.json", report);
  return 0;
}

int cmd_evaluate(const EvaluateOptions& opt) {
  if (opt.clean_path.empty() && opt.surface_spec.empty()) {
    throw ConfigError("evaluate needs --clean and/or --surface");
  }
  const PointCloud denoised = read_cloud(opt.denoised_path);

  json metrics;
  metrics["denoised"] = opt.denoised_path;
  if (!opt.clean_path.empty()) {
    const PointCloud clean = read_cloud(opt.clean_path);
    metrics["cd"] = evaluation_chamfer(denoised, clean);
    if (!opt.noisy_path.empty()) {
      metrics["cd_noisy"] = evaluation_chamfer(read_cloud(opt.noisy_path), clean);
    }
  }
  if (!opt.surface_spec.empty()) {
    metrics["p2m"] = point_to_surface(denoised, parse_surface_spec(opt.surface_spec));
  }
  emit(metrics, opt.out_path);
  return 0;
}

int cmd_gradcheck(const GradcheckOptions& opt) {
  const ExperimentConfig cfg = config_or_default(opt.config_path);
  const ScoreNetwork net =
      ScoreNetwork::init_params(cfg.arch, derive_seed(opt.seed, 0, 0, kInitStream));
  const GradCheckReport rep = gradient_check(net, opt.probes, opt.seed);

  json doc;
  doc["probes"] = rep.probes;
  doc["step"] = rep.step;
  doc["max_rel_error"] = rep.max_rel_error;
  doc["mean_rel_error"] = rep.mean_rel_error;
  doc["tolerance"] = opt.tolerance;
  const bool pass = rep.max_rel_error <= opt.tolerance;
  doc["pass"] = pass;
  emit(doc, opt.out_path);
  return pass ? 0 : 2;
}

}  // namespace n2s3
