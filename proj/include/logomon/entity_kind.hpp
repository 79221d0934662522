#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string_view>

namespace logomon {

using EntityId = std::int64_t;

// Declaration order is a valid insertion order: every kind only references
// kinds declared before it.
enum class EntityKind {
  MediaAsset,
  Word,
  ParonymPair,
  ExerciseType,
  ExerciseSubtype,
  TargetSound,
  Association,
  Instructions,
  Exercise,
  ExerciseConfiguration,
  PredefinedHomework,
  Child,
  HomeworkAssignment,
  HomeworkAttemptRecord,
};

inline constexpr std::array kAllEntityKinds = {
    EntityKind::MediaAsset,         EntityKind::Word,
    EntityKind::ParonymPair,        EntityKind::ExerciseType,
    EntityKind::ExerciseSubtype,    EntityKind::TargetSound,
    EntityKind::Association,        EntityKind::Instructions,
    EntityKind::Exercise,           EntityKind::ExerciseConfiguration,
    EntityKind::PredefinedHomework, EntityKind::Child,
    EntityKind::HomeworkAssignment, EntityKind::HomeworkAttemptRecord,
};

/// Singular kind name, e.g. "Word". Used in error messages and referrer lists.
std::string_view to_string(EntityKind kind);
std::optional<EntityKind> entity_kind_from_string(std::string_view name);

/// Plural camelCase collection name used by the seed/export documents,
/// e.g. "words", "attemptRecords".
std::string_view collection_name(EntityKind kind);
std::optional<EntityKind> entity_kind_from_collection(std::string_view name);

struct EntityRef {
  EntityKind kind;
  EntityId id;

  auto operator<=>(const EntityRef&) const = default;
};

}  // namespace logomon
