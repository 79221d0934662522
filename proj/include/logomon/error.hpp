#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "logomon/entity_kind.hpp"

namespace logomon {

enum class ErrorCode {
  NotFound,
  ValidationFailed,
  ReferentialIntegrity,
  StillReferenced,
  UniquenessViolation,
  AlreadyReported,
  UnknownExercise,
  BadAttemptSequence,
  SourceMissing,
  NameCollision,
  WrongExtension,
  AssetMissing,
  DigestMismatch,
  UnknownAssignment,
  MalformedBundle,
  MalformedRequest,
  StoreOpenFailure,
  BindFailure,
};

std::string_view to_string(ErrorCode code);

/// One broken rule on a candidate value. `field` names the offending field,
/// `code` is a stable kebab-case identifier such as "difficulty-range".
struct Violation {
  std::string field;
  std::string code;
  std::string message;

  bool operator==(const Violation&) const = default;
};

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, std::string message);
  Error(ErrorCode code, std::string message, std::vector<Violation> violations);
  Error(ErrorCode code, std::string message, std::vector<EntityRef> refs);

  ErrorCode code() const noexcept { return code_; }
  const std::vector<Violation>& violations() const noexcept { return violations_; }
  /// Referrers for StillReferenced, the dangling reference for ReferentialIntegrity.
  const std::vector<EntityRef>& refs() const noexcept { return refs_; }

 private:
  ErrorCode code_;
  std::vector<Violation> violations_;
  std::vector<EntityRef> refs_;
};

}  // namespace logomon
