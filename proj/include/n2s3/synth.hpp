#pragma once

#include <string>

#include "json.hpp"
#include "n2s3/config.hpp"

namespace n2s3 {

/// Samples each shape uniformly by area, normalizes the clean cloud to the
/// unit sphere, corrupts it at every noise level, and writes
/// <name>_clean.xyz, <name>_noisy_<i>.xyz and manifest.json under out_dir.
/// The manifest records each surface in the normalized frame, so metrics can
/// be evaluated directly against the written clouds. Returns the manifest.
nlohmann::json run_synth(const DatasetConfig& ds, const std::string& out_dir);

}  // namespace n2s3
