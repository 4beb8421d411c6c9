#include "n2s3/trainer.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <numeric>

#include "n2s3/errors.hpp"
#include "n2s3/kdtree.hpp"
#include "n2s3/rng.hpp"

namespace n2s3 {

namespace {

constexpr double kDivergenceGuard = 1e6;

// seed stream tags
constexpr std::uint64_t kPerturbStream = 1;
constexpr std::uint64_t kShuffleStream = 2;

void shuffle_indices(std::vector<int>& v, Rng& rng) {
  for (std::size_t i = v.size(); i > 1; --i) {
    const std::size_t j = std::size_t(rng.below(i));
    std::swap(v[i - 1], v[j]);
  }
}

}  // namespace

LossVariant loss_variant_from_string(const std::string& name) {
  if (name == "ardae") return LossVariant::ardae;
  if (name == "dae") return LossVariant::dae;
  throw ConfigError("unknown loss variant '" + name + "' (expected ardae or dae)");
}

std::string to_string(LossVariant v) { return v == LossVariant::ardae ? "ardae" : "dae"; }

void TrainingConfig::validate() const {
  // zero is allowed: it turns training into an identity pass, which the
  // tests rely on
  if (!(learning_rate >= 0.0)) throw ConfigError("learning_rate must be >= 0");
  if (weight_decay < 0.0) throw ConfigError("weight_decay must be >= 0");
  if (epochs < 1) throw ConfigError("epochs must be >= 1");
  if (batch_size < 1) throw ConfigError("batch_size must be >= 1");
  if (!(sigma_max >= sigma_min) || !(sigma_min > 0.0)) {
    throw ConfigError("need sigma_max >= sigma_min > 0");
  }
}

LossResult ardae_loss(std::span<const Vec3> scores, std::span<const Vec3> u,
                      double sigma_t) {
  if (scores.size() != u.size()) {
    throw LengthMismatch("ardae_loss: scores and u differ in length");
  }
  if (scores.empty()) throw LengthMismatch("ardae_loss: empty batch");
  const double n = double(scores.size());
  LossResult res;
  res.grads.resize(scores.size());
  double sum = 0.0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    const Vec3 r = sigma_t * scores[i] + u[i];
    sum += r.squaredNorm();
    res.grads[i] = (2.0 * sigma_t / n) * r;
  }
  res.loss = sum / n;
  return res;
}

LossResult dae_loss(std::span<const Vec3> reconstructions, std::span<const Vec3> targets) {
  if (reconstructions.size() != targets.size()) {
    throw LengthMismatch("dae_loss: reconstructions and targets differ in length");
  }
  if (reconstructions.empty()) throw LengthMismatch("dae_loss: empty batch");
  const double n = double(reconstructions.size());
  LossResult res;
  res.grads.resize(reconstructions.size());
  double sum = 0.0;
  for (std::size_t i = 0; i < reconstructions.size(); ++i) {
    const Vec3 r = reconstructions[i] - targets[i];
    sum += r.squaredNorm();
    res.grads[i] = (2.0 / n) * r;
  }
  res.loss = sum / n;
  return res;
}

void adam_step(Eigen::VectorXd& params, const Eigen::VectorXd& grads, AdamState& state,
               double learning_rate, double weight_decay) {
  if (params.size() != grads.size() || params.size() != state.m.size()) {
    throw LengthMismatch("adam_step: vector lengths disagree");
  }
  if (!grads.allFinite()) throw NonFiniteGradient("adam_step: gradient contains NaN/Inf");

  state.step_count += 1;
  const double b1 = state.beta1;
  const double b2 = state.beta2;
  const double c1 = 1.0 - std::pow(b1, double(state.step_count));
  const double c2 = 1.0 - std::pow(b2, double(state.step_count));
  for (Eigen::Index i = 0; i < params.size(); ++i) {
    const double g = grads[i] + weight_decay * params[i];
    state.m[i] = b1 * state.m[i] + (1.0 - b1) * g;
    state.v[i] = b2 * state.v[i] + (1.0 - b2) * g * g;
    const double mhat = state.m[i] / c1;
    const double vhat = state.v[i] / c2;
    params[i] -= learning_rate * mhat / (std::sqrt(vhat) + state.epsilon);
  }
}

std::pair<ScoreNetwork, TrainingHistory> train(const std::vector<PointCloud>& noisy_clouds,
                                               ScoreNetwork net,
                                               const TrainingConfig& cfg) {
  cfg.validate();
  if (noisy_clouds.empty()) throw Error("train: no input clouds");
  const int k_patch = net.arch().k_patch;
  for (const PointCloud& pc : noisy_clouds) {
    validate_cloud(pc);
    if (pc.size() < std::size_t(k_patch)) {
      throw InvalidK("train: cloud smaller than k_patch");
    }
  }

  const AnnealSchedule sched = cfg.schedule();
  const std::size_t n_clouds = noisy_clouds.size();

  TrainingHistory history;
  Eigen::VectorXd grad = Eigen::VectorXd::Zero(net.param_count());
  AdamState adam{net.param_count()};
  ScoreNetwork::Workspace ws = net.make_workspace();

  std::vector<PatchFeatures> patches;
  std::vector<Vec3> outputs;
  std::vector<Vec3> batch_u;

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    const auto t0 = std::chrono::steady_clock::now();
    const double sigma_t = sigma_schedule(epoch, sched);

    // Fresh perturbation, index, and visit order per cloud.
    std::vector<PointCloud> perturbed(n_clouds);
    std::vector<std::vector<Vec3>> noise(n_clouds);
    std::vector<KnnIndex> indices;
    indices.reserve(n_clouds);
    std::vector<std::vector<int>> order(n_clouds);
    for (std::size_t c = 0; c < n_clouds; ++c) {
      auto [yp, u] = perturb_for_training(
          noisy_clouds[c], sigma_t,
          derive_seed(cfg.seed, std::uint64_t(epoch), c, kPerturbStream));
      perturbed[c] = std::move(yp);
      noise[c] = std::move(u);
      indices.emplace_back(perturbed[c]);
      order[c].resize(noisy_clouds[c].size());
      std::iota(order[c].begin(), order[c].end(), 0);
      Rng shuffle_rng(derive_seed(cfg.seed, std::uint64_t(epoch), c, kShuffleStream));
      shuffle_indices(order[c], shuffle_rng);
    }

    double loss_sum = 0.0;
    std::size_t points_seen = 0;
    std::vector<std::size_t> pos(n_clouds, 0);
    bool any_left = true;
    while (any_left) {
      any_left = false;
      for (std::size_t c = 0; c < n_clouds; ++c) {
        if (pos[c] >= order[c].size()) continue;
        const std::size_t take =
            std::min(std::size_t(cfg.batch_size), order[c].size() - pos[c]);

        patches.clear();
        batch_u.clear();
        for (std::size_t b = 0; b < take; ++b) {
          const int i = order[c][pos[c] + b];
          patches.push_back(extract_patch(perturbed[c], indices[c], i, k_patch));
          batch_u.push_back(noise[c][std::size_t(i)]);
        }

        outputs.clear();
        for (const PatchFeatures& p : patches) outputs.push_back(net.forward(p, ws));

        LossResult lr;
        if (cfg.loss_variant == LossVariant::ardae) {
          lr = ardae_loss(outputs, batch_u, sigma_t);
        } else {
          // Reconstruction view: network output is a displacement from the
          // perturbed point; the target is the unperturbed noisy point.
          std::vector<Vec3> recon(take);
          std::vector<Vec3> target(take);
          for (std::size_t b = 0; b < take; ++b) {
            const int i = order[c][pos[c] + b];
            recon[b] = perturbed[c][std::size_t(i)] + outputs[b];
            target[b] = noisy_clouds[c][std::size_t(i)];
          }
          lr = dae_loss(recon, target);
        }

        grad.setZero();
        for (std::size_t b = 0; b < take; ++b) {
          net.accumulate_gradient(patches[b], lr.grads[b], grad, ws);
        }
        adam_step(net.params(), grad, adam, cfg.learning_rate, cfg.weight_decay);

        loss_sum += lr.loss * double(take);
        points_seen += take;
        pos[c] += take;
        if (pos[c] < order[c].size()) any_left = true;
      }
    }

    const double mean_loss = loss_sum / double(points_seen);
    if (!std::isfinite(mean_loss) || mean_loss > kDivergenceGuard) {
      throw TrainingDiverged("mean loss " + std::to_string(mean_loss) + " at epoch " +
                             std::to_string(epoch));
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    history.epochs.push_back(EpochRecord{epoch, sigma_t, mean_loss, secs});
  }

  if (cfg.loss_variant == LossVariant::dae) {
    // Alain-Bengio extraction: displacement / sigma^2 at the last training
    // noise level, folded into the linear head so the artifact emits scores.
    const double sigma_ref = sigma_schedule(cfg.epochs - 1, sched);
    net.scale_output_layer(1.0 / (sigma_ref * sigma_ref));
  }

  return {std::move(net), std::move(history)};
}

void TrainingHistory::write_csv(const std::string& path) const {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot open " + path + " for writing");
  out << "epoch,sigma_t,mean_loss,seconds\n";
  out << std::setprecision(17);
  for (const EpochRecord& r : epochs) {
    out << r.epoch << ',' << r.sigma_t << ',' << r.mean_loss << ',' << r.seconds << '\n';
  }
  if (!out) throw IoError("failed writing " + path);
}

double ardae_objective(const ScoreNetwork& net, std::span<const PatchFeatures> patches,
                       std::span<const Vec3> u, double sigma_t) {
  ScoreNetwork::Workspace ws = net.make_workspace();
  std::vector<Vec3> outputs;
  outputs.reserve(patches.size());
  for (const PatchFeatures& p : patches) outputs.push_back(net.forward(p, ws));
  return ardae_loss(outputs, u, sigma_t).loss;
}

Eigen::VectorXd ardae_parameter_gradient(const ScoreNetwork& net,
                                         std::span<const PatchFeatures> patches,
                                         std::span<const Vec3> u, double sigma_t) {
  ScoreNetwork::Workspace ws = net.make_workspace();
  std::vector<Vec3> outputs;
  outputs.reserve(patches.size());
  for (const PatchFeatures& p : patches) outputs.push_back(net.forward(p, ws));
  const LossResult lr = ardae_loss(outputs, u, sigma_t);
  Eigen::VectorXd grad = Eigen::VectorXd::Zero(net.param_count());
  for (std::size_t i = 0; i < patches.size(); ++i) {
    net.accumulate_gradient(patches[i], lr.grads[i], grad, ws);
  }
  return grad;
}

double max_relative_gradient_error(const Eigen::VectorXd& analytic,
                                   std::span<const std::pair<std::int64_t, double>> fd_probes) {
  // Error relative to the gradient's own scale: coordinates are compared
  // against max(|analytic_i|, |fd_i|) floored at the max-norm of the full
  // analytic gradient, so near-zero coordinates do not turn central-
  // difference cancellation noise into spurious relative error.
  const double floor = std::max(analytic.cwiseAbs().maxCoeff(), 1e-300);
  double worst = 0.0;
  for (const auto& [idx, fd] : fd_probes) {
    const double a = analytic[Eigen::Index(idx)];
    const double rel = std::abs(a - fd) / std::max({std::abs(a), std::abs(fd), floor});
    worst = std::max(worst, rel);
  }
  return worst;
}

GradCheckReport gradient_check(const ScoreNetwork& net, int n_probes, std::uint64_t seed,
                               double step, double sigma_t, int batch_points) {
  if (n_probes < 1) throw Error("gradient_check: need at least one probe");
  Rng rng(derive_seed(seed, 0xc0ffee));

  // Synthetic probe batch: patches shaped like real neighborhoods (zero
  // first offset, centered spread) plus unit-variance noise targets.
  std::vector<PatchFeatures> patches(static_cast<std::size_t>(batch_points));
  std::vector<Vec3> u(static_cast<std::size_t>(batch_points));
  const int k_patch = net.arch().k_patch;
  for (auto& p : patches) {
    p.offsets.assign(std::size_t(k_patch), Vec3::Zero());
    for (int j = 1; j < k_patch; ++j) {
      p.offsets[std::size_t(j)] =
          0.15 * Vec3(rng.normal(), rng.normal(), rng.normal());
    }
  }
  for (auto& v : u) v = Vec3(rng.normal(), rng.normal(), rng.normal());

  const Eigen::VectorXd analytic = ardae_parameter_gradient(net, patches, u, sigma_t);

  ScoreNetwork probe_net = net;
  std::vector<std::pair<std::int64_t, double>> fd;
  fd.reserve(std::size_t(n_probes));
  for (int p = 0; p < n_probes; ++p) {
    const auto idx = std::int64_t(rng.below(std::uint64_t(net.param_count())));
    const double saved = probe_net.params()[Eigen::Index(idx)];
    probe_net.params()[Eigen::Index(idx)] = saved + step;
    const double up = ardae_objective(probe_net, patches, u, sigma_t);
    probe_net.params()[Eigen::Index(idx)] = saved - step;
    const double down = ardae_objective(probe_net, patches, u, sigma_t);
    probe_net.params()[Eigen::Index(idx)] = saved;
    fd.emplace_back(idx, (up - down) / (2.0 * step));
  }

  GradCheckReport report;
  report.probes = n_probes;
  report.step = step;
  report.max_rel_error = max_relative_gradient_error(analytic, fd);

  const double floor = std::max(analytic.cwiseAbs().maxCoeff(), 1e-300);
  double sum = 0.0;
  for (const auto& [idx, val] : fd) {
    const double a = analytic[Eigen::Index(idx)];
    sum += std::abs(a - val) / std::max({std::abs(a), std::abs(val), floor});
  }
  report.mean_rel_error = sum / double(n_probes);
  return report;
}

}  // namespace n2s3
