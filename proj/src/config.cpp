#include "n2s3/config.hpp"

#include <cmath>
#include <fstream>
#include <set>

#include "n2s3/errors.hpp"

namespace n2s3 {

namespace {

using nlohmann::json;

void require_keys(const json& obj, const std::set<std::string>& allowed,
                  const std::string& where) {
  if (!obj.is_object()) throw ConfigError(where + " must be a JSON object");
  for (const auto& [key, value] : obj.items()) {
    (void)value;
    if (!allowed.count(key)) throw ConfigError(where + ": unknown key '" + key + "'");
  }
}

double get_number(const json& obj, const std::string& key, double fallback,
                  const std::string& where) {
  if (!obj.contains(key)) return fallback;
  if (!obj[key].is_number()) throw ConfigError(where + "/" + key + " must be a number");
  return obj[key].get<double>();
}

int get_int(const json& obj, const std::string& key, int fallback,
            const std::string& where) {
  if (!obj.contains(key)) return fallback;
  if (!obj[key].is_number_integer()) {
    throw ConfigError(where + "/" + key + " must be an integer");
  }
  return obj[key].get<int>();
}

Vec3 get_vec3(const json& obj, const std::string& key, const Vec3& fallback,
              const std::string& where) {
  if (!obj.contains(key)) return fallback;
  const json& arr = obj[key];
  if (!arr.is_array() || arr.size() != 3 || !arr[0].is_number() || !arr[1].is_number() ||
      !arr[2].is_number()) {
    throw ConfigError(where + "/" + key + " must be an array of three numbers");
  }
  return Vec3(arr[0].get<double>(), arr[1].get<double>(), arr[2].get<double>());
}

ShapeInstance parse_shape(const json& obj, int index) {
  const std::string where = "dataset/shapes[" + std::to_string(index) + "]";
  if (!obj.is_object() || !obj.contains("kind") || !obj["kind"].is_string()) {
    throw ConfigError(where + " must be an object with a string 'kind'");
  }
  const std::string kind = obj["kind"].get<std::string>();
  ShapeInstance shape;
  shape.name = obj.value("name", kind + "_" + std::to_string(index));

  if (kind == "plane") {
    require_keys(obj, {"kind", "name", "count", "normal", "offset", "half_extent"}, where);
    Vec3 n = get_vec3(obj, "normal", Vec3::UnitZ(), where);
    if (n.norm() < 1e-12) throw ConfigError(where + ": plane normal must be nonzero");
    const double len = n.norm();
    shape.surface = Plane{n / len, get_number(obj, "offset", 0.0, where) / len};
    shape.plane_half_extent = get_number(obj, "half_extent", 1.0, where);
    if (!(shape.plane_half_extent > 0.0)) {
      throw ConfigError(where + ": half_extent must be > 0");
    }
  } else if (kind == "sphere") {
    require_keys(obj, {"kind", "name", "count", "center", "radius"}, where);
    const double r = get_number(obj, "radius", 1.0, where);
    if (!(r > 0.0)) throw ConfigError(where + ": radius must be > 0");
    shape.surface = Sphere{get_vec3(obj, "center", Vec3::Zero(), where), r};
  } else if (kind == "torus") {
    require_keys(obj, {"kind", "name", "count", "center", "major_radius", "minor_radius"},
                 where);
    const double R = get_number(obj, "major_radius", 1.0, where);
    const double r = get_number(obj, "minor_radius", 0.25, where);
    if (!(R > 0.0) || !(r > 0.0)) throw ConfigError(where + ": radii must be > 0");
    shape.surface = Torus{get_vec3(obj, "center", Vec3::Zero(), where), R, r};
  } else if (kind == "box") {
    require_keys(obj, {"kind", "name", "count", "center", "half_extents"}, where);
    const Vec3 h = get_vec3(obj, "half_extents", Vec3::Ones(), where);
    if (!(h.minCoeff() > 0.0)) throw ConfigError(where + ": half_extents must be > 0");
    shape.surface = Box{get_vec3(obj, "center", Vec3::Zero(), where), h};
  } else {
    throw ConfigError(where + ": unknown shape kind '" + kind + "'");
  }
  return shape;
}

DatasetConfig parse_dataset(const json& obj) {
  require_keys(obj, {"shapes", "points_per_shape", "noise_levels", "seed"}, "dataset");
  DatasetConfig ds;
  if (!obj.contains("shapes") || !obj["shapes"].is_array() || obj["shapes"].empty()) {
    throw ConfigError("dataset/shapes must be a non-empty array");
  }
  int index = 0;
  for (const json& s : obj["shapes"]) {
    const ShapeInstance base = parse_shape(s, index);
    const int count = get_int(s, "count", 1, "dataset/shapes");
    if (count < 1) throw ConfigError("dataset/shapes: count must be >= 1");
    for (int c = 0; c < count; ++c) {
      ShapeInstance inst = base;
      if (count > 1) inst.name += "_" + std::to_string(c);
      ds.shapes.push_back(std::move(inst));
    }
    ++index;
  }
  ds.points_per_shape = get_int(obj, "points_per_shape", 2000, "dataset");
  if (ds.points_per_shape < 1) throw ConfigError("dataset/points_per_shape must be >= 1");
  if (obj.contains("noise_levels")) {
    if (!obj["noise_levels"].is_array() || obj["noise_levels"].empty()) {
      throw ConfigError("dataset/noise_levels must be a non-empty array");
    }
    ds.noise_levels.clear();
    for (const json& v : obj["noise_levels"]) {
      if (!v.is_number() || !(v.get<double>() > 0.0)) {
        throw ConfigError("dataset/noise_levels entries must be positive numbers");
      }
      ds.noise_levels.push_back(v.get<double>());
    }
  }
  ds.seed = std::uint64_t(get_number(obj, "seed", 0.0, "dataset"));
  return ds;
}

std::pair<TrainingConfig, Architecture> parse_training(const json& obj) {
  require_keys(obj,
               {"learning_rate", "weight_decay", "epochs", "batch_size", "sigma_max",
                "sigma_min", "loss", "seed", "k_patch", "hidden", "activation"},
               "training");
  TrainingConfig cfg;
  cfg.learning_rate = get_number(obj, "learning_rate", cfg.learning_rate, "training");
  cfg.weight_decay = get_number(obj, "weight_decay", cfg.weight_decay, "training");
  cfg.epochs = get_int(obj, "epochs", cfg.epochs, "training");
  cfg.batch_size = get_int(obj, "batch_size", cfg.batch_size, "training");
  cfg.sigma_max = get_number(obj, "sigma_max", cfg.sigma_max, "training");
  cfg.sigma_min = get_number(obj, "sigma_min", cfg.sigma_min, "training");
  if (obj.contains("loss")) {
    if (!obj["loss"].is_string()) throw ConfigError("training/loss must be a string");
    cfg.loss_variant = loss_variant_from_string(obj["loss"].get<std::string>());
  }
  cfg.seed = std::uint64_t(get_number(obj, "seed", 0.0, "training"));
  cfg.validate();

  Architecture arch;
  arch.k_patch = get_int(obj, "k_patch", arch.k_patch, "training");
  if (obj.contains("hidden")) {
    if (!obj["hidden"].is_array()) throw ConfigError("training/hidden must be an array");
    arch.hidden.clear();
    for (const json& v : obj["hidden"]) {
      if (!v.is_number_integer()) throw ConfigError("training/hidden must hold integers");
      arch.hidden.push_back(v.get<int>());
    }
  }
  if (obj.contains("activation")) {
    if (!obj["activation"].is_string()) {
      throw ConfigError("training/activation must be a string");
    }
    arch.activation = activation_from_string(obj["activation"].get<std::string>());
  }
  arch.validate();
  return {cfg, arch};
}

TvParams parse_tv(const json& obj) {
  require_keys(obj, {"k_neighbors", "epsilon", "weighting", "kernel_sigma"}, "tv");
  TvParams tv;
  tv.k_neighbors = get_int(obj, "k_neighbors", tv.k_neighbors, "tv");
  tv.epsilon = get_number(obj, "epsilon", tv.epsilon, "tv");
  if (obj.contains("weighting")) {
    const std::string w = obj["weighting"].get<std::string>();
    if (w == "constant") {
      tv.weighting = TvParams::Weighting::constant_one;
    } else if (w == "gaussian") {
      tv.weighting = TvParams::Weighting::gaussian;
    } else {
      throw ConfigError("tv/weighting must be 'constant' or 'gaussian'");
    }
  }
  tv.kernel_sigma = get_number(obj, "kernel_sigma", tv.kernel_sigma, "tv");
  tv.validate();
  if (!(tv.epsilon > 0.0)) throw ConfigError("tv/epsilon must be > 0");
  return tv;
}

SigmaGridConfig parse_sigma_grid(const json& obj) {
  require_keys(obj, {"min", "max", "count"}, "sigma_grid");
  SigmaGridConfig grid;
  grid.min = get_number(obj, "min", grid.min, "sigma_grid");
  grid.max = get_number(obj, "max", grid.max, "sigma_grid");
  grid.count = get_int(obj, "count", grid.count, "sigma_grid");
  if (!(grid.min > 0.0) || !(grid.max > grid.min)) {
    throw ConfigError("sigma_grid requires 0 < min < max");
  }
  if (grid.count < 1) throw ConfigError("sigma_grid/count must be >= 1");
  return grid;
}

}  // namespace

std::vector<double> SigmaGridConfig::values() const {
  std::vector<double> grid(static_cast<std::size_t>(count));
  if (count == 1) {
    grid[0] = min;
    return grid;
  }
  const double log_lo = std::log(min);
  const double log_hi = std::log(max);
  for (int i = 0; i < count; ++i) {
    grid[std::size_t(i)] = std::exp(std::lerp(log_lo, log_hi, double(i) / (count - 1)));
  }
  grid.front() = min;
  grid.back() = max;
  return grid;
}

ExperimentConfig parse_experiment_config(const nlohmann::json& doc) {
  require_keys(doc, {"dataset", "training", "tv", "sigma_grid"}, "config");
  ExperimentConfig cfg;
  if (doc.contains("dataset")) {
    cfg.dataset = parse_dataset(doc["dataset"]);
    cfg.has_dataset = true;
  }
  if (doc.contains("training")) {
    std::tie(cfg.training, cfg.arch) = parse_training(doc["training"]);
    cfg.has_training = true;
  }
  if (doc.contains("tv")) cfg.tv = parse_tv(doc["tv"]);
  if (doc.contains("sigma_grid")) cfg.sigma_grid = parse_sigma_grid(doc["sigma_grid"]);
  return cfg;
}

nlohmann::json load_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path);
  nlohmann::json doc;
  try {
    in >> doc;
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError("invalid JSON in " + path + ": " + e.what());
  }
  return doc;
}

void write_json(const std::string& path, const nlohmann::json& doc) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot open " + path + " for writing");
  out << doc.dump(2) << '\n';
  if (!out) throw IoError("failed writing " + path);
}

ExperimentConfig load_experiment_config(const std::string& path) {
  return parse_experiment_config(load_json(path));
}

}  // namespace n2s3
