#pragma once

#include <string>
#include <vector>

#include <json.hpp>

namespace topodyn {

// Small JSON-Schema subset: type, enum, const, properties, required,
// additionalProperties, items, minItems, minimum, maximum, oneOf. Enough to
// pin the shape of the shipped report documents.
namespace schema {

using json = nlohmann::ordered_json;

namespace detail {

inline bool type_matches(const json& value, const std::string& type) {
  if (type == "object") return value.is_object();
  if (type == "array") return value.is_array();
  if (type == "string") return value.is_string();
  if (type == "boolean") return value.is_boolean();
  if (type == "null") return value.is_null();
  if (type == "number") return value.is_number();
  if (type == "integer") return value.is_number_integer() || value.is_number_unsigned();
  return false;
}

inline void validate_impl(const json& value, const json& sch,
                          const std::string& path,
                          std::vector<std::string>& errors);

inline bool validates(const json& value, const json& sch) {
  std::vector<std::string> errs;
  validate_impl(value, sch, "", errs);
  return errs.empty();
}

inline void validate_impl(const json& value, const json& sch,
                          const std::string& path,
                          std::vector<std::string>& errors) {
  if (!sch.is_object()) return;

  if (sch.contains("oneOf")) {
    int matches = 0;
    for (const auto& sub : sch.at("oneOf"))
      if (validates(value, sub)) ++matches;
    if (matches != 1)
      errors.push_back(path + ": oneOf matched " + std::to_string(matches) +
                       " schemas");
  }

  if (sch.contains("type")) {
    const json& t = sch.at("type");
    bool ok = false;
    if (t.is_string()) {
      ok = type_matches(value, t.get<std::string>());
    } else if (t.is_array()) {
      for (const auto& alt : t)
        if (type_matches(value, alt.get<std::string>())) ok = true;
    }
    if (!ok) {
      errors.push_back(path + ": type mismatch");
      return;
    }
  }

  if (sch.contains("enum")) {
    bool ok = false;
    for (const auto& alt : sch.at("enum"))
      if (alt == value) ok = true;
    if (!ok) errors.push_back(path + ": value not in enum");
  }

  if (sch.contains("const") && !(sch.at("const") == value))
    errors.push_back(path + ": value differs from const");

  if (value.is_number() && sch.contains("minimum") &&
      value.get<double>() < sch.at("minimum").get<double>())
    errors.push_back(path + ": below minimum");
  if (value.is_number() && sch.contains("maximum") &&
      value.get<double>() > sch.at("maximum").get<double>())
    errors.push_back(path + ": above maximum");

  if (value.is_object()) {
    if (sch.contains("required"))
      for (const auto& key : sch.at("required"))
        if (!value.contains(key.get<std::string>()))
          errors.push_back(path + ": missing required key '" +
                           key.get<std::string>() + "'");
    const json* props = sch.contains("properties") ? &sch.at("properties") : nullptr;
    for (auto it = value.begin(); it != value.end(); ++it) {
      std::string sub_path = path + "/" + it.key();
      if (props && props->contains(it.key())) {
        validate_impl(it.value(), props->at(it.key()), sub_path, errors);
      } else if (sch.contains("additionalProperties")) {
        const json& ap = sch.at("additionalProperties");
        if (ap.is_boolean() && !ap.get<bool>())
          errors.push_back(sub_path + ": unexpected key");
        else if (ap.is_object())
          validate_impl(it.value(), ap, sub_path, errors);
      }
    }
  }

  if (value.is_array()) {
    if (sch.contains("minItems") &&
        value.size() < sch.at("minItems").get<std::size_t>())
      errors.push_back(path + ": fewer items than minItems");
    if (sch.contains("items")) {
      std::size_t i = 0;
      for (const auto& el : value)
        validate_impl(el, sch.at("items"), path + "/" + std::to_string(i++),
                      errors);
    }
  }
}

}  // namespace detail

inline std::vector<std::string> validate(const json& value, const json& sch) {
  std::vector<std::string> errors;
  detail::validate_impl(value, sch, "$", errors);
  return errors;
}

}  // namespace schema
}  // namespace topodyn
