#pragma once

// JSON encoding shared by the seed/export documents, the HTTP API and the
// CLI's --json output. Field names are the semantic camelCase names of the
// domain types. Decoding is strict: unknown fields and wrong types are
// rejected with Error(ValidationFailed).

#include <initializer_list>
#include <set>
#include <string>
#include <string_view>

#include <json.hpp>

#include "logomon/domain.hpp"

namespace logomon {

using json = nlohmann::json;

/// Field-by-field reader over one JSON object that remembers which keys were
/// consumed so that finish() can reject the rest.
class StrictObject {
 public:
  StrictObject(const json& object, std::string context);

  const json& required(std::string_view key);
  const json* optional(std::string_view key);

  std::string string(std::string_view key);
  std::string string_or(std::string_view key, std::string fallback);
  std::int64_t integer(std::string_view key);
  std::int64_t integer_or(std::string_view key, std::int64_t fallback);
  int int32(std::string_view key);
  int int32_or(std::string_view key, int fallback);
  bool boolean(std::string_view key);
  bool boolean_or(std::string_view key, bool fallback);
  /// Null or absent -> nullopt.
  std::optional<std::int64_t> nullable_integer(std::string_view key);
  std::optional<std::string> nullable_string(std::string_view key);
  Date date(std::string_view key);
  std::optional<Date> nullable_date(std::string_view key);
  const json& array(std::string_view key);

  /// Throws when the object holds keys that were never read.
  void finish() const;

  [[noreturn]] void fail(std::string_view key, std::string_view problem) const;

 private:
  const json& object_;
  std::string context_;
  std::set<std::string, std::less<>> consumed_;
};

json to_json(const Entity& entity);
Entity entity_from_json(EntityKind kind, const json& j);

template <class T>
T decode(const json& j) {
  return std::get<T>(entity_from_json(kind_of_v<T>, j));
}

json to_json(const Violation& v);
json to_json(const ValidationResult& r);
json to_json(const EntityRef& ref);

}  // namespace logomon
