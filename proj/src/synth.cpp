#include "n2s3/synth.hpp"

#include <filesystem>

#include "n2s3/cloud_io.hpp"
#include "n2s3/errors.hpp"
#include "n2s3/noise.hpp"
#include "n2s3/rng.hpp"

namespace n2s3 {

namespace {

// seed stream tags
constexpr std::uint64_t kSampleStream = 10;
constexpr std::uint64_t kCorruptStream = 11;

}  // namespace

nlohmann::json run_synth(const DatasetConfig& ds, const std::string& out_dir) {
  std::filesystem::create_directories(out_dir);

  nlohmann::json manifest;
  manifest["seed"] = ds.seed;
  manifest["points_per_shape"] = ds.points_per_shape;
  manifest["noise_levels"] = ds.noise_levels;
  manifest["shapes"] = nlohmann::json::array();

  for (std::size_t s = 0; s < ds.shapes.size(); ++s) {
    const ShapeInstance& shape = ds.shapes[s];
    const PointCloud raw = sample_surface(shape.surface, ds.points_per_shape,
                                          derive_seed(ds.seed, s, 0, kSampleStream),
                                          shape.plane_half_extent);
    auto [clean, transform] = normalize_unit_sphere(raw);
    const AnalyticSurface surface_n = transform_surface(shape.surface, transform);

    const std::string clean_name = shape.name + "_clean.xyz";
    write_xyz(out_dir + "/" + clean_name, clean);

    nlohmann::json entry;
    entry["name"] = shape.name;
    entry["surface"] = format_surface_spec(surface_n);
    entry["clean"] = clean_name;
    entry["noisy"] = nlohmann::json::array();
    for (std::size_t l = 0; l < ds.noise_levels.size(); ++l) {
      // Clean cloud has unit radius, so the level is the absolute sigma.
      const double sigma = ds.noise_levels[l];
      const PointCloud noisy =
          corrupt_gaussian(clean, sigma, derive_seed(ds.seed, s, l, kCorruptStream));
      const std::string noisy_name = shape.name + "_noisy_" + std::to_string(l) + ".xyz";
      write_xyz(out_dir + "/" + noisy_name, noisy);
      entry["noisy"].push_back({{"level", ds.noise_levels[l]}, {"path", noisy_name}});
    }
    manifest["shapes"].push_back(std::move(entry));
  }

  write_json(out_dir + "/manifest.json", manifest);
  return manifest;
}

}  // namespace n2s3
