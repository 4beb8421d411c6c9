#pragma once

#include <string>
#include <vector>

#include "json.hpp"

namespace n2s3 {

/// Validates a document against the subset of JSON Schema the repo's
/// schemas use: type, enum, properties, required, additionalProperties
/// (boolean), items, minItems, maxItems. Returns one message per violation;
/// empty means valid.
std::vector<std::string> validate_schema(const nlohmann::json& schema,
                                         const nlohmann::json& doc);

}  // namespace n2s3
