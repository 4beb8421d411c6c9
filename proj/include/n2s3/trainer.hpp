#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "n2s3/noise.hpp"
#include "n2s3/point_cloud.hpp"
#include "n2s3/score_network.hpp"

namespace n2s3 {

enum class LossVariant { ardae, dae };

LossVariant loss_variant_from_string(const std::string& name);
std::string to_string(LossVariant v);

struct TrainingConfig {
  double learning_rate = 0.0002;
  double weight_decay = 0.0001;
  int epochs = 400;
  int batch_size = 512;           // points per gradient step
  double sigma_max = 0.031;       // anneal endpoints over the epoch count
  double sigma_min = 0.001;
  LossVariant loss_variant = LossVariant::ardae;
  std::uint64_t seed = 0;

  AnnealSchedule schedule() const { return AnnealSchedule{sigma_max, sigma_min, epochs}; }
  void validate() const;
};

struct AdamState {
  Eigen::VectorXd m;
  Eigen::VectorXd v;
  long step_count = 0;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;

  explicit AdamState(Eigen::Index n)
      : m(Eigen::VectorXd::Zero(n)), v(Eigen::VectorXd::Zero(n)) {}
};

struct EpochRecord {
  int epoch = 0;
  double sigma_t = 0.0;
  double mean_loss = 0.0;
  double seconds = 0.0;
};

struct TrainingHistory {
  std::vector<EpochRecord> epochs;
  void write_csv(const std::string& path) const;
};

struct LossResult {
  double loss = 0.0;
  std::vector<Vec3> grads;  // d loss / d (score or reconstruction), per point
};

/// AR-DAE objective: (1/N) sum_i || sigma_t * S_i + u_i ||^2, together with
/// the per-point upstream gradients (2 sigma_t / N)(sigma_t S_i + u_i).
LossResult ardae_loss(std::span<const Vec3> scores, std::span<const Vec3> u,
                      double sigma_t);

/// Reconstruction MSE (1/N) sum_i || r_i - y_i ||^2 with upstream gradients
/// (2/N)(r_i - y_i). Scores come out of a trained reconstructor post hoc as
/// (r(y') - y') / sigma_t^2.
LossResult dae_loss(std::span<const Vec3> reconstructions,
                    std::span<const Vec3> targets);

/// One Adam update in place. Weight decay enters as an additive
/// weight_decay * param term on the gradient; moments are bias-corrected.
/// Throws NonFiniteGradient when grads contain NaN/Inf.
void adam_step(Eigen::VectorXd& params, const Eigen::VectorXd& grads,
               AdamState& state, double learning_rate, double weight_decay);

/// Trains the network on one or more noisy clouds. Per epoch: sigma_t from
/// the linear schedule, one fresh perturbation per cloud, minibatches of
/// points taken round-robin across clouds, patches extracted from the
/// perturbed cloud. Bit-deterministic for a fixed seed. In dae mode the
/// final linear layer is rescaled by 1/sigma_t_final^2 afterwards so the
/// returned network emits score estimates in both modes.
std::pair<ScoreNetwork, TrainingHistory> train(const std::vector<PointCloud>& noisy_clouds,
                                               ScoreNetwork net,
                                               const TrainingConfig& cfg);

/// Full-batch AR-DAE objective and its analytic parameter gradient; the
/// building blocks of gradient_check, exposed so tests can run negative
/// controls against an independently perturbed gradient.
double ardae_objective(const ScoreNetwork& net, std::span<const PatchFeatures> patches,
                       std::span<const Vec3> u, double sigma_t);
Eigen::VectorXd ardae_parameter_gradient(const ScoreNetwork& net,
                                         std::span<const PatchFeatures> patches,
                                         std::span<const Vec3> u, double sigma_t);

/// Relative discrepancy between the analytic gradient and finite-difference
/// probes: |a - f| / max(|a|, |f|, floor) per probe, floored at the max-norm
/// of the full analytic gradient so near-zero coordinates are judged against
/// the gradient's overall scale rather than against themselves.
double max_relative_gradient_error(const Eigen::VectorXd& analytic,
                                   std::span<const std::pair<std::int64_t, double>> fd_probes);

struct GradCheckReport {
  double max_rel_error = 0.0;
  double mean_rel_error = 0.0;
  int probes = 0;
  double step = 0.0;
};

/// Central-finite-difference check of the AR-DAE training gradient on
/// n_probes random parameter coordinates of a random probe batch.
GradCheckReport gradient_check(const ScoreNetwork& net, int n_probes,
                               std::uint64_t seed, double step = 1e-6,
                               double sigma_t = 0.02, int batch_points = 8);

}  // namespace n2s3
