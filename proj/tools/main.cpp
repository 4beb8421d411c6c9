#include <cxxabi.h>

#include <cstdlib>
#include <iostream>
#include <memory>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"
#include "n2s3/commands.hpp"
#include "n2s3/errors.hpp"

namespace {

std::string error_kind(const std::exception& e) {
  int status = 0;
  std::unique_ptr<char, void (*)(void*)> demangled(
      abi::__cxa_demangle(typeid(e).name(), nullptr, nullptr, &status), std::free);
  std::string name = status == 0 && demangled ? demangled.get() : typeid(e).name();
  const std::size_t colon = name.rfind("::");
  if (colon != std::string::npos) name = name.substr(colon + 2);
  return name;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Noise2Score3D point cloud denoising"};
  app.require_subcommand(1);

  n2s3::SynthOptions synth;
  auto* synth_cmd = app.add_subcommand("synth", "generate clean/noisy clouds from analytic surfaces");
  synth_cmd->add_option("--config", synth.config_path, "experiment config JSON")->required();
  synth_cmd->add_option("--out", synth.out_dir, "output directory")->required();
  std::uint64_t synth_seed = 0;
  auto* synth_seed_opt = synth_cmd->add_option("--seed", synth_seed, "override dataset seed");

  n2s3::TrainOptions tr;
  auto* train_cmd = app.add_subcommand("train", "train a score model on noisy clouds");
  train_cmd->add_option("--config", tr.config_path, "experiment config JSON")->required();
  train_cmd->add_option("--inputs", tr.inputs, "noisy cloud files (.xyz/.ply)");
  train_cmd->add_option("--manifest", tr.manifest_path, "synth manifest.json");
  double train_level = 0.0;
  auto* train_level_opt =
      train_cmd->add_option("--level", train_level, "restrict manifest clouds to this noise level");
  train_cmd->add_option("--out", tr.out_dir, "output directory")->required();
  std::uint64_t train_seed = 0;
  auto* train_seed_opt = train_cmd->add_option("--seed", train_seed, "override training seed");

  n2s3::DenoiseOptions dn;
  auto* denoise_cmd = app.add_subcommand("denoise", "one-step denoising of a noisy cloud");
  denoise_cmd->add_option("--model", dn.model_path, "trained parameter file")->required();
  denoise_cmd->add_option("--input", dn.input_path, "noisy cloud")->required();
  double dn_sigma = 0.0;
  auto* sigma_opt = denoise_cmd->add_option(
      "--sigma", dn_sigma, "known noise level as a fraction of the bounding radius");
  denoise_cmd->add_flag("--estimate-sigma", dn.estimate_sigma,
                        "estimate the level by minimizing total variation");
  denoise_cmd->add_option("--config", dn.config_path, "config with tv/sigma_grid sections");
  denoise_cmd->add_option("--clean", dn.clean_path, "clean reference for the report CD");
  denoise_cmd->add_option("--surface", dn.surface_spec,
                          "analytic reference surface for the report, e.g. sphere:0,0,0,1");
  denoise_cmd->add_option("--out", dn.out_dir, "output directory")->required();

  n2s3::EvaluateOptions ev;
  auto* eval_cmd = app.add_subcommand("evaluate", "metrics for a denoised cloud");
  eval_cmd->add_option("--denoised", ev.denoised_path, "denoised cloud")->required();
  eval_cmd->add_option("--clean", ev.clean_path, "clean reference cloud");
  eval_cmd->add_option("--surface", ev.surface_spec, "analytic reference surface");
  eval_cmd->add_option("--noisy", ev.noisy_path, "noisy input, adds the baseline CD");
  eval_cmd->add_option("--out", ev.out_path, "write metrics JSON here instead of stdout");

  n2s3::GradcheckOptions gc;
  auto* grad_cmd = app.add_subcommand("gradcheck", "finite-difference check of the training gradient");
  grad_cmd->add_option("--config", gc.config_path, "config with a training section (architecture)");
  grad_cmd->add_option("--seed", gc.seed, "probe seed");
  grad_cmd->add_option("--probes", gc.probes, "number of probed coordinates");
  grad_cmd->add_option("--tolerance", gc.tolerance, "max relative error to pass");
  grad_cmd->add_option("--out", gc.out_path, "write report JSON here instead of stdout");

  CLI11_PARSE(app, argc, argv);

  try {
    if (synth_cmd->parsed()) {
      if (synth_seed_opt->count() > 0) synth.seed_override = synth_seed;
      return n2s3::cmd_synth(synth);
    }
    if (train_cmd->parsed()) {
      if (train_level_opt->count() > 0) tr.manifest_level = train_level;
      if (train_seed_opt->count() > 0) tr.seed_override = train_seed;
      return n2s3::cmd_train(tr);
    }
    if (denoise_cmd->parsed()) {
      if (sigma_opt->count() > 0) dn.sigma = dn_sigma;
      return n2s3::cmd_denoise(dn);
    }
    if (eval_cmd->parsed()) return n2s3::cmd_evaluate(ev);
    if (grad_cmd->parsed()) return n2s3::cmd_gradcheck(gc);
  } catch (const std::exception& e) {
    nlohmann::json err;
    err["error"] = {{"type", error_kind(e)}, {"message", e.what()}};
    std::cerr << err.dump() << std::endl;
    return 1;
  }
  return 0;
}
