#include <cmath>

#include "doctest.h"
#include "n2s3/denoiser.hpp"
#include "n2s3/errors.hpp"
#include "n2s3/noise.hpp"
#include "n2s3/rng.hpp"

using namespace n2s3;

namespace {

PointCloud blob_cloud(int n, std::uint64_t seed, double spread, const Vec3& mu = Vec3::Zero()) {
  Rng rng(seed);
  PointCloud pc;
  for (int i = 0; i < n; ++i) {
    pc.points.push_back(mu + spread * Vec3(rng.normal(), rng.normal(), rng.normal()));
  }
  return pc;
}

ScoreField constant_field(std::size_t n, const Vec3& v) {
  ScoreField f;
  f.scores.assign(n, v);
  return f;
}

}  // namespace

TEST_CASE("analytic_gaussian_score: center, arithmetic, batch recompute") {
  PointCloud at_mu({Vec3(0.5, -1, 2)});
  const ScoreField f0 = analytic_gaussian_score(at_mu, Vec3(0.5, -1, 2), 0.3);
  CHECK(f0.scores[0] == Vec3(0, 0, 0));

  PointCloud p({Vec3(1, 0, 0)});
  const ScoreField f1 = analytic_gaussian_score(p, Vec3::Zero(), 0.5);
  CHECK(f1.scores[0] == Vec3(-4, 0, 0));

  const PointCloud pc = blob_cloud(100, 1, 1.0);
  const Vec3 mu(0.1, 0.2, -0.3);
  const double sigma = 0.7;
  const ScoreField batch = analytic_gaussian_score(pc, mu, sigma);
  for (std::size_t i = 0; i < pc.size(); ++i) {
    CHECK(batch.scores[i] == -(pc[i] - mu) / (sigma * sigma));
  }
  CHECK(batch.source == ScoreField::Source::analytic_gaussian);
}

TEST_CASE("analytic_plane_score points along the restoring normal") {
  const Plane plane{Vec3::UnitZ(), 0.25};
  PointCloud pc({Vec3(3, 4, 0.5), Vec3(-1, 2, 0.0)});
  const ScoreField f = analytic_plane_score(pc, plane, 0.5);
  CHECK(f.scores[0] == Vec3(0, 0, -1.0));  // -(0.5-0.25)/0.25 = -1 along z
  CHECK(f.scores[1] == Vec3(0, 0, 1.0));
}

TEST_CASE("tweedie_denoise: zero scores and zero sigma are identities") {
  const PointCloud pc = blob_cloud(20, 2, 1.0);
  const PointCloud a = tweedie_denoise(pc, constant_field(pc.size(), Vec3::Zero()), 0.5);
  const PointCloud b = tweedie_denoise(pc, analytic_gaussian_score(pc, Vec3::Zero(), 1.0), 0.0);
  for (std::size_t i = 0; i < pc.size(); ++i) {
    CHECK(a[i] == pc[i]);
    CHECK(b[i] == pc[i]);
  }
}

TEST_CASE("tweedie_denoise: matched analytic score recovers the mean exactly") {
  PointCloud p({Vec3(1, 0, 0)});
  const PointCloud out = tweedie_denoise(p, analytic_gaussian_score(p, Vec3::Zero(), 0.5), 0.5);
  CHECK(out[0] == Vec3(0, 0, 0));

  // any cloud, any mean, machine-precision collapse
  const Vec3 mu(0.25, -0.125, 0.5);
  const PointCloud pc = blob_cloud(500, 3, 0.03, mu);
  const double sigma = 0.02;
  const PointCloud collapsed =
      tweedie_denoise(pc, analytic_gaussian_score(pc, mu, sigma), sigma);
  for (const Vec3& q : collapsed.points) CHECK((q - mu).norm() <= 1e-12);
}

TEST_CASE("tweedie_denoise is affine in the score field") {
  const PointCloud pc = blob_cloud(50, 4, 1.0);
  Rng rng(5);
  ScoreField s;
  for (std::size_t i = 0; i < pc.size(); ++i) {
    s.scores.emplace_back(rng.normal(), rng.normal(), rng.normal());
  }
  const double sigma = 0.3;
  const double a = 2.5;
  ScoreField scaled;
  for (const Vec3& v : s.scores) scaled.scores.push_back(a * v);
  const PointCloud lhs = tweedie_denoise(pc, scaled, sigma);
  for (std::size_t i = 0; i < pc.size(); ++i) {
    const Vec3 expect = pc[i] + a * (sigma * sigma) * s.scores[i];
    CHECK((lhs[i] - expect).norm() <= 1e-12 * std::max(1.0, expect.norm()));
  }
}

TEST_CASE("tweedie_denoise rejects mismatched lengths") {
  const PointCloud pc = blob_cloud(5, 6, 1.0);
  CHECK_THROWS_AS(tweedie_denoise(pc, constant_field(4, Vec3::Zero()), 0.1),
                  LengthMismatch);
}

TEST_CASE("predict_scores: zero net, permutation consistency") {
  Architecture arch;
  arch.k_patch = 6;
  const ScoreNetwork zero_net(arch);
  const PointCloud pc = blob_cloud(40, 7, 0.2);
  const ScoreField f = predict_scores(zero_net, pc, arch.k_patch);
  for (const Vec3& s : f.scores) CHECK(s == Vec3(0, 0, 0));
  CHECK(f.source == ScoreField::Source::network);

  const ScoreNetwork net = ScoreNetwork::init_params(arch, 8);
  const ScoreField base = predict_scores(net, pc, arch.k_patch);
  PointCloud rev = pc;
  std::reverse(rev.points.begin(), rev.points.end());
  const ScoreField flipped = predict_scores(net, rev, arch.k_patch);
  for (std::size_t i = 0; i < pc.size(); ++i) {
    CHECK(flipped.scores[pc.size() - 1 - i] == base.scores[i]);
  }
}

TEST_CASE("denoise_known_sigma equals the predict+tweedie composition") {
  Architecture arch;
  arch.k_patch = 8;
  const ScoreNetwork net = ScoreNetwork::init_params(arch, 9);
  const PointCloud pc = blob_cloud(64, 10, 0.3);
  const double sigma = 0.05;
  const PointCloud composed =
      tweedie_denoise(pc, predict_scores(net, pc, arch.k_patch), sigma);
  const PointCloud direct = denoise_known_sigma(net, pc, sigma, arch.k_patch);
  for (std::size_t i = 0; i < pc.size(); ++i) CHECK(direct[i] == composed[i]);
}

TEST_CASE("pipeline is translation equivariant with a network score") {
  Architecture arch;
  arch.k_patch = 8;
  arch.hidden = {16, 8};
  const ScoreNetwork net = ScoreNetwork::init_params(arch, 11);
  // dyadic grid: the translated patch offsets are then bit-identical
  PointCloud pc = blob_cloud(100, 12, 0.3);
  for (Vec3& p : pc.points) {
    for (int c = 0; c < 3; ++c) p[c] = std::round(p[c] * 1048576.0) / 1048576.0;
  }
  const Vec3 t(1.5, -2.25, 0.75);
  PointCloud moved;
  for (const Vec3& p : pc.points) moved.points.push_back(p + t);

  // the score fields agree exactly; the final additions commute to 1 ulp
  const ScoreField s0 = predict_scores(net, pc, arch.k_patch);
  const ScoreField s1 = predict_scores(net, moved, arch.k_patch);
  for (std::size_t i = 0; i < pc.size(); ++i) CHECK(s1.scores[i] == s0.scores[i]);

  const PointCloud d0 = denoise_known_sigma(net, pc, 0.02, arch.k_patch);
  const PointCloud d1 = denoise_known_sigma(net, moved, 0.02, arch.k_patch);
  for (std::size_t i = 0; i < pc.size(); ++i) {
    CHECK((d1[i] - (d0[i] + t)).norm() <= 1e-12);
  }
}

TEST_CASE("sigma_sweep: single grid value") {
  const PointCloud pc = blob_cloud(50, 13, 0.1);
  const ScoreField f = analytic_gaussian_score(pc, Vec3::Zero(), 0.1);
  const double grid[] = {0.07};
  const SigmaSweepResult res = sigma_sweep(pc, f, grid, TvParams{});
  CHECK(res.sigma_star == 0.07);
  REQUIRE(res.tv_trace.size() == 1);
  const PointCloud expect = tweedie_denoise(pc, f, 0.07);
  for (std::size_t i = 0; i < pc.size(); ++i) CHECK(res.denoised[i] == expect[i]);
}

TEST_CASE("sigma_sweep: analytic blob selects the collapse sigma") {
  // clean mass at the origin, noise sigma 0.5: the score of the noisy blob
  // is the N(0, 0.5^2) score, and TV bottoms out where the cloud collapses
  const double sigma_true = 0.5;
  const PointCloud noisy = blob_cloud(300, 14, sigma_true);
  const ScoreField f = analytic_gaussian_score(noisy, Vec3::Zero(), sigma_true);
  std::vector<double> grid;
  for (int i = 1; i <= 10; ++i) grid.push_back(0.1 * i);

  TvParams tv;
  const SigmaSweepResult res = sigma_sweep(noisy, f, grid, tv);

  // exhaustive recomputation of the trace
  REQUIRE(res.tv_trace.size() == grid.size());
  double best_tv = std::numeric_limits<double>::infinity();
  double best_sigma = 0.0;
  for (std::size_t g = 0; g < grid.size(); ++g) {
    const double tv_val = tv_pc(tweedie_denoise(noisy, f, grid[g]), tv);
    CHECK(res.tv_trace[g].first == grid[g]);
    CHECK(res.tv_trace[g].second == tv_val);
    if (tv_val < best_tv) {
      best_tv = tv_val;
      best_sigma = grid[g];
    }
  }
  CHECK(res.sigma_star == best_sigma);
  CHECK(std::abs(res.sigma_star - sigma_true) <= 0.1 + 1e-12);  // one grid step

  // bookkeeping: sigma_star's tv equals the trace minimum; denoised is the
  // bit-exact tweedie output at sigma_star
  double min_tv = std::numeric_limits<double>::infinity();
  for (const auto& [s, v] : res.tv_trace) min_tv = std::min(min_tv, v);
  double at_star = std::numeric_limits<double>::quiet_NaN();
  for (const auto& [s, v] : res.tv_trace) {
    if (s == res.sigma_star) at_star = v;
  }
  CHECK(at_star == min_tv);
  const PointCloud recomputed = tweedie_denoise(noisy, f, res.sigma_star);
  for (std::size_t i = 0; i < noisy.size(); ++i) CHECK(res.denoised[i] == recomputed[i]);
}

TEST_CASE("sigma_sweep: zero field makes TV flat and the tie rule picks the smallest") {
  const PointCloud pc = blob_cloud(60, 15, 0.2);
  const ScoreField zero = constant_field(pc.size(), Vec3::Zero());
  std::vector<double> grid = {0.01, 0.02, 0.03, 0.04};
  const SigmaSweepResult res = sigma_sweep(pc, zero, grid, TvParams{});
  const double tv0 = res.tv_trace[0].second;
  for (const auto& [s, v] : res.tv_trace) CHECK(v == tv0);
  CHECK(res.sigma_star == 0.01);
}

TEST_CASE("sigma_sweep validates its grid") {
  const PointCloud pc = blob_cloud(30, 16, 0.2);
  const ScoreField zero = constant_field(pc.size(), Vec3::Zero());
  CHECK_THROWS(sigma_sweep(pc, zero, std::vector<double>{}, TvParams{}));
  CHECK_THROWS(sigma_sweep(pc, zero, std::vector<double>{0.02, 0.01}, TvParams{}));
  CHECK_THROWS(sigma_sweep(pc, zero, std::vector<double>{-0.1, 0.2}, TvParams{}));
}

TEST_CASE("default sigma grid spans 0.001..0.06 with 40 ascending values") {
  const std::vector<double> grid = default_sigma_grid();
  REQUIRE(grid.size() == 40);
  CHECK(grid.front() == 0.001);
  CHECK(grid.back() == 0.06);
  for (std::size_t i = 1; i < grid.size(); ++i) CHECK(grid[i] > grid[i - 1]);
}

TEST_CASE("TV and CD traces bottom out at nearby sigmas (analytic field)") {
  // the co-location property behind sigma estimation: for a noisy blob with
  // the analytic score, the TV-over-sigma and CD-to-clean-over-sigma curves
  // attain their minima within 20% of each other
  const double spread = 0.004;  // tight clean blob
  const double sigma_noise = 0.02;
  const PointCloud clean = blob_cloud(400, 17, spread);
  const PointCloud noisy = corrupt_gaussian(clean, sigma_noise, 18);
  const double sigma_total = std::hypot(spread, sigma_noise);
  const ScoreField f = analytic_gaussian_score(noisy, Vec3::Zero(), sigma_total);

  const std::vector<double> grid = default_sigma_grid();
  const SigmaSweepResult res = sigma_sweep(noisy, f, grid, TvParams{});

  double best_cd = std::numeric_limits<double>::infinity();
  double best_cd_sigma = 0.0;
  for (double s : grid) {
    const double cd = chamfer_distance(tweedie_denoise(noisy, f, s), clean);
    if (cd < best_cd) {
      best_cd = cd;
      best_cd_sigma = s;
    }
  }
  CHECK(std::abs(res.sigma_star - best_cd_sigma) <= 0.2 * best_cd_sigma + 1e-12);
}
