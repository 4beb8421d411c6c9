#include "n2s3/json_schema.hpp"

namespace n2s3 {

namespace {

using nlohmann::json;

bool matches_type(const json& doc, const std::string& type) {
  if (type == "object") return doc.is_object();
  if (type == "array") return doc.is_array();
  if (type == "string") return doc.is_string();
  if (type == "number") return doc.is_number();
  if (type == "integer") return doc.is_number_integer();
  if (type == "boolean") return doc.is_boolean();
  if (type == "null") return doc.is_null();
  return false;
}

void check(const json& schema, const json& doc, const std::string& where,
           std::vector<std::string>& errors) {
  if (schema.contains("type")) {
    const json& t = schema["type"];
    bool ok = false;
    if (t.is_string()) {
      ok = matches_type(doc, t.get<std::string>());
    } else if (t.is_array()) {
      for (const auto& alt : t) ok = ok || matches_type(doc, alt.get<std::string>());
    }
    if (!ok) {
      errors.push_back(where + ": expected type " + t.dump() + ", got " +
                       std::string(doc.type_name()));
      return;
    }
  }

  if (schema.contains("enum")) {
    bool ok = false;
    for (const auto& alt : schema["enum"]) ok = ok || (alt == doc);
    if (!ok) errors.push_back(where + ": value " + doc.dump() + " not in enum");
  }

  if (doc.is_object()) {
    if (schema.contains("required")) {
      for (const auto& key : schema["required"]) {
        if (!doc.contains(key.get<std::string>())) {
          errors.push_back(where + ": missing required key '" + key.get<std::string>() + "'");
        }
      }
    }
    const json props = schema.value("properties", json::object());
    for (const auto& [key, value] : doc.items()) {
      if (props.contains(key)) {
        check(props[key], value, where + "/" + key, errors);
      } else if (schema.contains("additionalProperties") &&
                 schema["additionalProperties"].is_boolean() &&
                 !schema["additionalProperties"].get<bool>()) {
        errors.push_back(where + ": unexpected key '" + key + "'");
      }
    }
  }

  if (doc.is_array()) {
    if (schema.contains("minItems") && doc.size() < schema["minItems"].get<std::size_t>()) {
      errors.push_back(where + ": fewer than minItems elements");
    }
    if (schema.contains("maxItems") && doc.size() > schema["maxItems"].get<std::size_t>()) {
      errors.push_back(where + ": more than maxItems elements");
    }
    if (schema.contains("items")) {
      for (std::size_t i = 0; i < doc.size(); ++i) {
        check(schema["items"], doc[i], where + "/" + std::to_string(i), errors);
      }
    }
  }
}

}  // namespace

std::vector<std::string> validate_schema(const nlohmann::json& schema,
                                         const nlohmann::json& doc) {
  std::vector<std::string> errors;
  check(schema, doc, "#", errors);
  return errors;
}

}  // namespace n2s3
