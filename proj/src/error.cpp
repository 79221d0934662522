#include "logomon/error.hpp"

#include <array>
#include <utility>

namespace logomon {

namespace {

constexpr std::array<std::pair<EntityKind, std::pair<std::string_view, std::string_view>>, 14>
    kKindNames{{
        {EntityKind::MediaAsset, {"MediaAsset", "mediaAssets"}},
        {EntityKind::Word, {"Word", "words"}},
        {EntityKind::ParonymPair, {"ParonymPair", "paronymPairs"}},
        {EntityKind::ExerciseType, {"ExerciseType", "exerciseTypes"}},
        {EntityKind::ExerciseSubtype, {"ExerciseSubtype", "exerciseSubtypes"}},
        {EntityKind::TargetSound, {"TargetSound", "targetSounds"}},
        {EntityKind::Association, {"Association", "associations"}},
        {EntityKind::Instructions, {"Instructions", "instructions"}},
        {EntityKind::Exercise, {"Exercise", "exercises"}},
        {EntityKind::ExerciseConfiguration, {"ExerciseConfiguration", "exerciseConfigurations"}},
        {EntityKind::PredefinedHomework, {"PredefinedHomework", "predefinedHomework"}},
        {EntityKind::Child, {"Child", "children"}},
        {EntityKind::HomeworkAssignment, {"HomeworkAssignment", "homeworkAssignments"}},
        {EntityKind::HomeworkAttemptRecord, {"HomeworkAttemptRecord", "attemptRecords"}},
    }};

}  // namespace

std::string_view to_string(EntityKind kind) {
  for (const auto& [k, names] : kKindNames)
    if (k == kind) return names.first;
  return "Unknown";
}

std::optional<EntityKind> entity_kind_from_string(std::string_view name) {
  for (const auto& [k, names] : kKindNames)
    if (names.first == name) return k;
  return std::nullopt;
}

std::string_view collection_name(EntityKind kind) {
  for (const auto& [k, names] : kKindNames)
    if (k == kind) return names.second;
  return "unknown";
}

std::optional<EntityKind> entity_kind_from_collection(std::string_view name) {
  for (const auto& [k, names] : kKindNames)
    if (names.second == name) return k;
  return std::nullopt;
}

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::NotFound: return "NotFound";
    case ErrorCode::ValidationFailed: return "ValidationFailed";
    case ErrorCode::ReferentialIntegrity: return "ReferentialIntegrity";
    case ErrorCode::StillReferenced: return "StillReferenced";
    case ErrorCode::UniquenessViolation: return "UniquenessViolation";
    case ErrorCode::AlreadyReported: return "AlreadyReported";
    case ErrorCode::UnknownExercise: return "UnknownExercise";
    case ErrorCode::BadAttemptSequence: return "BadAttemptSequence";
    case ErrorCode::SourceMissing: return "SourceMissing";
    case ErrorCode::NameCollision: return "NameCollision";
    case ErrorCode::WrongExtension: return "WrongExtension";
    case ErrorCode::AssetMissing: return "AssetMissing";
    case ErrorCode::DigestMismatch: return "DigestMismatch";
    case ErrorCode::UnknownAssignment: return "UnknownAssignment";
    case ErrorCode::MalformedBundle: return "MalformedBundle";
    case ErrorCode::MalformedRequest: return "MalformedRequest";
    case ErrorCode::StoreOpenFailure: return "StoreOpenFailure";
    case ErrorCode::BindFailure: return "BindFailure";
  }
  return "Unknown";
}

Error::Error(ErrorCode code, std::string message)
    : std::runtime_error(std::move(message)), code_(code) {}

Error::Error(ErrorCode code, std::string message, std::vector<Violation> violations)
    : std::runtime_error(std::move(message)),
      code_(code),
      violations_(std::move(violations)) {}

Error::Error(ErrorCode code, std::string message, std::vector<EntityRef> refs)
    : std::runtime_error(std::move(message)), code_(code), refs_(std::move(refs)) {}

}  // namespace logomon
