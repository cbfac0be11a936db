#pragma once

#include <json.hpp>

#include <cstdint>
#include <string>

#include "fanfire/errors.hpp"

// Strict field extraction for the file formats; every miss is a ParseError
// naming the context, so CLI diagnostics stay readable.
namespace fanfire::jsonu {

using nlohmann::json;

inline const json& need(const json& j, const char* key, const std::string& ctx) {
  if (!j.is_object()) throw ParseError(ctx + ": expected an object");
  auto it = j.find(key);
  if (it == j.end()) throw ParseError(ctx + ": missing '" + key + "'");
  return *it;
}

inline std::string need_string(const json& j, const char* key, const std::string& ctx) {
  const json& v = need(j, key, ctx);
  if (!v.is_string()) throw ParseError(ctx + ": '" + key + "' must be a string");
  return v.get<std::string>();
}

inline std::uint64_t need_unsigned(const json& j, const char* key, const std::string& ctx) {
  const json& v = need(j, key, ctx);
  // In-memory construction from int literals lands on the signed type, so
  // accept any integer that is not negative.
  if (!(v.is_number_unsigned() ||
        (v.is_number_integer() && v.get<std::int64_t>() >= 0)))
    throw ParseError(ctx + ": '" + key + "' must be a nonnegative integer");
  return v.get<std::uint64_t>();
}

inline double need_number(const json& j, const char* key, const std::string& ctx) {
  const json& v = need(j, key, ctx);
  if (!v.is_number()) throw ParseError(ctx + ": '" + key + "' must be a number");
  return v.get<double>();
}

inline const json& need_array(const json& j, const char* key, const std::string& ctx) {
  const json& v = need(j, key, ctx);
  if (!v.is_array()) throw ParseError(ctx + ": '" + key + "' must be an array");
  return v;
}

inline std::string opt_string(const json& j, const char* key, const std::string& ctx) {
  if (!j.is_object() || !j.contains(key) || j.at(key).is_null()) return "";
  if (!j.at(key).is_string()) throw ParseError(ctx + ": '" + key + "' must be a string");
  return j.at(key).get<std::string>();
}

}  // namespace fanfire::jsonu
