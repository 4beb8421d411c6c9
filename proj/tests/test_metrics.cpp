#include <algorithm>
#include <cmath>
#include <numeric>

#include "doctest.h"
#include "n2s3/errors.hpp"
#include "n2s3/metrics.hpp"
#include "n2s3/rng.hpp"
#include "oracles.hpp"

using namespace n2s3;

namespace {

PointCloud random_cloud(int n, std::uint64_t seed, double spread = 1.0) {
  Rng rng(seed);
  PointCloud pc;
  for (int i = 0; i < n; ++i) {
    pc.points.emplace_back(spread * rng.normal(), spread * rng.normal(),
                           spread * rng.normal());
  }
  return pc;
}

}  // namespace

TEST_CASE("tv_pc: three identical points") {
  PointCloud pc({Vec3(1, 1, 1), Vec3(1, 1, 1), Vec3(1, 1, 1)});
  TvParams tv;
  tv.k_neighbors = 2;
  tv.epsilon = 1e-3;
  CHECK(tv_pc(pc, tv) == doctest::Approx(6e-3).epsilon(1e-12));
}

TEST_CASE("tv_pc: two points at distance one, sharp limit") {
  PointCloud pc({Vec3(0, 0, 0), Vec3(1, 0, 0)});
  TvParams tv;
  tv.k_neighbors = 1;
  tv.epsilon = 0.0;
  CHECK(tv_pc(pc, tv) == 2.0);
}

TEST_CASE("tv_pc matches the brute-force double loop exactly") {
  TvParams tv;
  tv.k_neighbors = 3;
  tv.epsilon = 1e-6;
  for (std::uint64_t seed = 0; seed < 25; ++seed) {
    const PointCloud pc = random_cloud(10, seed);
    CHECK(tv_pc(pc, tv) == oracle::brute_tv(pc, 3, 1e-6));
  }
}

TEST_CASE("tv_pc needs more points than neighbors") {
  const PointCloud pc = random_cloud(8, 1);
  TvParams tv;
  tv.k_neighbors = 8;
  CHECK_THROWS_AS(tv_pc(pc, tv), InvalidK);
}

TEST_CASE("tv_pc gaussian weighting downweights far neighbors") {
  const PointCloud pc = random_cloud(50, 2);
  TvParams constant;
  TvParams gauss;
  gauss.weighting = TvParams::Weighting::gaussian;
  gauss.kernel_sigma = 0.05;
  CHECK(tv_pc(pc, gauss) < tv_pc(pc, constant));

  // brute recomputation of the weighted sum
  double expect = 0.0;
  for (std::size_t i = 0; i < pc.size(); ++i) {
    std::vector<std::pair<double, int>> others;
    for (std::size_t j = 0; j < pc.size(); ++j) {
      if (j != i) others.emplace_back((pc[i] - pc[j]).squaredNorm(), int(j));
    }
    std::sort(others.begin(), others.end());
    for (int n = 0; n < gauss.k_neighbors; ++n) {
      const double d2 = others[std::size_t(n)].first;
      expect += std::exp(-d2 / (2.0 * gauss.kernel_sigma * gauss.kernel_sigma)) *
                std::sqrt(d2 + gauss.epsilon * gauss.epsilon);
    }
  }
  CHECK(tv_pc(pc, gauss) == expect);
}

TEST_CASE("tv_pc invariances: translation, permutation, scaling") {
  TvParams tv;
  Rng rng(3);
  for (int trial = 0; trial < 100; ++trial) {
    const PointCloud pc = random_cloud(30, 500 + std::uint64_t(trial));
    const double base = tv_pc(pc, tv);

    const Vec3 t(rng.normal() * 4, rng.normal() * 4, rng.normal() * 4);
    CHECK(tv_pc(transform_cloud(pc, 1.0, t), tv) ==
          doctest::Approx(base).epsilon(1e-12));

    auto [shuffled, perm] = shuffle_cloud(pc, 900 + std::uint64_t(trial));
    (void)perm;
    CHECK(tv_pc(shuffled, tv) == doctest::Approx(base).epsilon(1e-12));
  }

  // exact scaling in the eps = 0 limit
  TvParams sharp;
  sharp.epsilon = 0.0;
  const PointCloud pc = random_cloud(40, 4);
  const double base = tv_pc(pc, sharp);
  for (double a : {2.0, 0.5, 3.7}) {
    CHECK(tv_pc(transform_cloud(pc, a, Vec3::Zero()), sharp) ==
          doctest::Approx(a * base).epsilon(1e-12));
  }
}

TEST_CASE("chamfer: identical clouds and the single-pair example") {
  const PointCloud pc = random_cloud(30, 5);
  CHECK(chamfer_distance(pc, pc) == 0.0);

  PointCloud a({Vec3(0, 0, 0)});
  PointCloud b({Vec3(1, 0, 0)});
  CHECK(chamfer_distance(a, b) == 2.0);
}

TEST_CASE("chamfer equals brute force exactly on random pairs") {
  for (std::uint64_t seed = 0; seed < 25; ++seed) {
    const PointCloud a = random_cloud(50, seed);
    const PointCloud b = random_cloud(50, seed + 1000);
    CHECK(chamfer_distance(a, b) == oracle::brute_chamfer(a, b));
  }
}

TEST_CASE("chamfer symmetry, permutation invariance, zero-iff-coincident") {
  Rng rng(6);
  for (int trial = 0; trial < 100; ++trial) {
    const PointCloud a = random_cloud(20, 2000 + std::uint64_t(trial));
    const PointCloud b = random_cloud(25, 3000 + std::uint64_t(trial));
    const double ab = chamfer_distance(a, b);
    CHECK(chamfer_distance(b, a) == ab);
    CHECK(ab > 0.0);

    // permutation reorders the summation, so equality holds to rounding
    auto [pa, perm] = shuffle_cloud(a, 4000 + std::uint64_t(trial));
    (void)perm;
    CHECK(chamfer_distance(pa, b) == doctest::Approx(ab).epsilon(1e-12));
  }

  // clouds covering the same point set in different order and multiplicity
  PointCloud a({Vec3(0, 0, 0), Vec3(1, 0, 0), Vec3(0, 1, 0)});
  PointCloud b({Vec3(0, 1, 0), Vec3(0, 0, 0), Vec3(1, 0, 0), Vec3(0, 0, 0)});
  CHECK(chamfer_distance(a, b) == 0.0);
}

TEST_CASE("point_to_surface: sphere and plane examples") {
  PointCloud p1({Vec3(2, 0, 0)});
  CHECK(point_to_surface(p1, Sphere{Vec3::Zero(), 1.0}) == 1.0);

  PointCloud p2({Vec3(0, 0, 0.3), Vec3(0, 0, -0.3)});
  CHECK(point_to_surface(p2, Plane{Vec3::UnitZ(), 0.0}) ==
        doctest::Approx(0.3).epsilon(1e-15));
}

TEST_CASE("point_to_surface: box inside and outside") {
  const Box box{Vec3::Zero(), Vec3(1, 1, 1)};
  PointCloud outside({Vec3(2, 0, 0)});
  CHECK(point_to_surface(outside, box) == 1.0);
  PointCloud corner({Vec3(2, 2, 2)});
  CHECK(point_to_surface(corner, box) == doctest::Approx(std::sqrt(3.0)));
  PointCloud inside({Vec3(0.25, 0, 0)});
  CHECK(point_to_surface(inside, box) == 0.75);
}

TEST_CASE("point_to_surface: torus against dense parametric sampling") {
  const Torus torus{Vec3::Zero(), 1.0, 0.25};
  Rng rng(8);
  PointCloud pc;
  for (int i = 0; i < 100; ++i) {
    pc.points.emplace_back(2.0 * rng.normal(), 2.0 * rng.normal(), 2.0 * rng.normal());
  }
  double expect = 0.0;
  for (const Vec3& p : pc.points) {
    expect += oracle::torus_distance_sampled(Vec3::Zero(), 1.0, 0.25, p);
  }
  expect /= double(pc.size());
  CHECK(point_to_surface(pc, torus) == doctest::Approx(expect).epsilon(1e-6));
}

TEST_CASE("shuffle helpers: identity and inverse round trip") {
  const PointCloud pc = random_cloud(40, 9);
  std::vector<int> identity(pc.size());
  std::iota(identity.begin(), identity.end(), 0);
  const PointCloud same = apply_permutation(pc, identity);
  for (std::size_t i = 0; i < pc.size(); ++i) CHECK(same[i] == pc[i]);

  auto [shuffled, perm] = shuffle_cloud(pc, 10);
  std::vector<int> inverse(perm.size());
  for (std::size_t i = 0; i < perm.size(); ++i) inverse[std::size_t(perm[i])] = int(i);
  const PointCloud back = apply_permutation(shuffled, inverse);
  for (std::size_t i = 0; i < pc.size(); ++i) CHECK(back[i] == pc[i]);
}
