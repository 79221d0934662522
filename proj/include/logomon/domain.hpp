#pragma once

// Domain values for the word, paronym, exercise and homework catalogue.
// Everything here is a plain value: no persistence and no I/O.

#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "logomon/calendar.hpp"
#include "logomon/entity_kind.hpp"
#include "logomon/error.hpp"

namespace logomon {

enum class MediaKind { Sound, Image };
enum class PartOfSpeech { Noun, Verb, Adjective, Other };
enum class Gender { Masculine, Feminine, Neuter };
enum class LegacyTable { Deficiente, Teste, DateCopii };

struct MediaAsset {
  EntityId id = 0;
  MediaKind kind = MediaKind::Sound;
  std::string filename;

  bool operator==(const MediaAsset&) const = default;
};

struct Word {
  EntityId id = 0;
  std::string text;
  std::string speakerFamilyName;
  std::string speakerGivenName;
  bool isTherapistRecording = false;
  PartOfSpeech partOfSpeech = PartOfSpeech::Other;
  // Free-text label, meaningful only for PartOfSpeech::Other.
  std::string partOfSpeechLabel;
  std::optional<Gender> gender;
  bool articleCompatible = false;
  EntityId soundAssetId = 0;
  EntityId imageAssetId = 0;

  bool operator==(const Word&) const = default;
};

struct ParonymPair {
  EntityId id = 0;
  EntityId wordAId = 0;
  EntityId wordBId = 0;

  bool operator==(const ParonymPair&) const = default;
};

struct ExerciseType {
  EntityId id = 0;
  std::string name;
  std::string applicationName;

  bool operator==(const ExerciseType&) const = default;
};

struct ExerciseSubtype {
  EntityId id = 0;
  std::string name;
  std::string applicationName;

  bool operator==(const ExerciseSubtype&) const = default;
};

struct TargetSound {
  EntityId id = 0;
  std::string label;

  bool operator==(const TargetSound&) const = default;
};

/// The (type, subtype, target sound) triple an exercise is built for.
struct Association {
  EntityId id = 0;
  EntityId typeId = 0;
  EntityId subtypeId = 0;
  EntityId soundId = 0;

  bool operator==(const Association&) const = default;
};

struct Instructions {
  EntityId id = 0;
  std::string text;

  bool operator==(const Instructions&) const = default;
};

inline constexpr int kMinDifficulty = 1;
inline constexpr int kMaxDifficulty = 5;

struct Exercise {
  EntityId id = 0;
  std::string title;
  int difficulty = kMinDifficulty;
  EntityId associationId = 0;
  EntityId instructionsId = 0;

  bool operator==(const Exercise&) const = default;
};

/// One word slot of an exercise. param1 is the image display time in
/// milliseconds, param2 is 1 when the word contains the target sound,
/// param3 is reserved for subtype-specific use and defaults to 0.
struct ExerciseConfiguration {
  EntityId id = 0;
  EntityId exerciseId = 0;
  EntityId wordId = 0;
  std::optional<EntityId> paronymId;
  int param1 = 0;
  int param2 = 0;
  int param3 = 0;

  bool operator==(const ExerciseConfiguration&) const = default;
};

struct TemplateExerciseItem {
  EntityId exerciseId = 0;
  int successThresholdPercent = 0;

  bool operator==(const TemplateExerciseItem&) const = default;
};

/// Pointer into a table owned by the surrounding therapy system.
struct LegacyRef {
  LegacyTable table = LegacyTable::Deficiente;
  EntityId id = 0;

  bool operator==(const LegacyRef&) const = default;
};

struct PredefinedHomework {
  EntityId id = 0;
  std::string description;
  int repetitionsPerDay = 1;
  std::vector<TemplateExerciseItem> exerciseItems;
  std::vector<LegacyRef> deficiencyRefs;
  std::vector<LegacyRef> testRefs;

  bool operator==(const PredefinedHomework&) const = default;
};

struct Child {
  EntityId id = 0;
  std::string familyName;
  std::string givenName;

  bool operator==(const Child&) const = default;
};

struct HomeworkAssignment {
  EntityId id = 0;
  EntityId childId = 0;
  EntityId predefinedHomeworkId = 0;
  Date assignedDate{};
  int deadlineDays = 1;
  std::optional<Date> reportDate;

  bool operator==(const HomeworkAssignment&) const = default;
};

struct HomeworkAttemptRecord {
  EntityId id = 0;
  EntityId assignmentId = 0;
  EntityId exerciseId = 0;
  int attemptIndex = 1;
  int achievedPercent = 0;
  int initiallyWrongWords = 0;

  bool operator==(const HomeworkAttemptRecord&) const = default;
};

using Entity =
    std::variant<MediaAsset, Word, ParonymPair, ExerciseType, ExerciseSubtype,
                 TargetSound, Association, Instructions, Exercise,
                 ExerciseConfiguration, PredefinedHomework, Child,
                 HomeworkAssignment, HomeworkAttemptRecord>;

template <class T>
struct KindOf;
template <> struct KindOf<MediaAsset> { static constexpr auto value = EntityKind::MediaAsset; };
template <> struct KindOf<Word> { static constexpr auto value = EntityKind::Word; };
template <> struct KindOf<ParonymPair> { static constexpr auto value = EntityKind::ParonymPair; };
template <> struct KindOf<ExerciseType> { static constexpr auto value = EntityKind::ExerciseType; };
template <> struct KindOf<ExerciseSubtype> { static constexpr auto value = EntityKind::ExerciseSubtype; };
template <> struct KindOf<TargetSound> { static constexpr auto value = EntityKind::TargetSound; };
template <> struct KindOf<Association> { static constexpr auto value = EntityKind::Association; };
template <> struct KindOf<Instructions> { static constexpr auto value = EntityKind::Instructions; };
template <> struct KindOf<Exercise> { static constexpr auto value = EntityKind::Exercise; };
template <> struct KindOf<ExerciseConfiguration> { static constexpr auto value = EntityKind::ExerciseConfiguration; };
template <> struct KindOf<PredefinedHomework> { static constexpr auto value = EntityKind::PredefinedHomework; };
template <> struct KindOf<Child> { static constexpr auto value = EntityKind::Child; };
template <> struct KindOf<HomeworkAssignment> { static constexpr auto value = EntityKind::HomeworkAssignment; };
template <> struct KindOf<HomeworkAttemptRecord> { static constexpr auto value = EntityKind::HomeworkAttemptRecord; };

template <class T>
inline constexpr EntityKind kind_of_v = KindOf<T>::value;

EntityKind kind_of(const Entity& entity);
EntityId id_of(const Entity& entity);
void set_id(Entity& entity, EntityId id);

/// Outgoing references of an entity, in field order. Optional references
/// are included only when set.
std::vector<EntityRef> references_of(const Entity& entity);

std::string_view to_string(MediaKind kind);
std::string_view to_string(PartOfSpeech pos);
std::string_view to_string(Gender gender);
std::string_view to_string(LegacyTable table);
std::optional<MediaKind> media_kind_from_string(std::string_view text);
std::optional<PartOfSpeech> part_of_speech_from_string(std::string_view text);
std::optional<Gender> gender_from_string(std::string_view text);
std::optional<LegacyTable> legacy_table_from_string(std::string_view text);

// ---------------------------------------------------------------------------
// Validation

struct ValidationResult {
  std::vector<Violation> violations;

  bool ok() const noexcept { return violations.empty(); }
  bool has(std::string_view code) const;
  void add(std::string field, std::string code, std::string message);
  void merge(const ValidationResult& other);
  /// Throws Error(ValidationFailed) carrying the violations unless ok().
  void throw_if_failed(std::string_view what) const;

  bool operator==(const ValidationResult&) const = default;
};

/// Allowed lower-case extensions (with the leading dot) per media kind.
struct MediaPolicy {
  std::vector<std::string> soundExtensions{".wav", ".mp3"};
  std::vector<std::string> imageExtensions{".png", ".jpg"};

  const std::vector<std::string>& extensions_for(MediaKind kind) const {
    return kind == MediaKind::Sound ? soundExtensions : imageExtensions;
  }
  bool accepts(MediaKind kind, std::string_view filename) const;
};

/// Answers "does this id exist" for reference checks during validation.
using ExistsLookup = std::function<bool(EntityKind, EntityId)>;
/// Answers "what kind of media is asset #id", nullopt when absent.
using AssetKindLookup = std::function<std::optional<MediaKind>(EntityId)>;

ValidationResult validate_media_asset(const MediaAsset& asset,
                                      const MediaPolicy& policy = {});
/// Without a lookup only the intrinsic rules are checked; with one, the
/// sound/image asset ids must resolve to assets of the matching kind.
ValidationResult validate_word(const Word& word, const AssetKindLookup& assets = {});
ValidationResult validate_paronym_pair(const ParonymPair& pair);
ValidationResult validate_exercise_type(const ExerciseType& type);
ValidationResult validate_exercise_subtype(const ExerciseSubtype& subtype);
ValidationResult validate_target_sound(const TargetSound& sound);
ValidationResult validate_association(const Association& association);
ValidationResult validate_instructions(const Instructions& instructions);
ValidationResult validate_exercise(const Exercise& exercise,
                                   const ExistsLookup& resolver = {});
ValidationResult validate_configuration(const ExerciseConfiguration& config);
ValidationResult validate_template(const PredefinedHomework& tmpl);
ValidationResult validate_legacy_ref(const LegacyRef& ref);
ValidationResult validate_child(const Child& child);
ValidationResult validate_assignment(const HomeworkAssignment& assignment);
ValidationResult validate_attempt_record(const HomeworkAttemptRecord& record,
                                         int exerciseWordCount);

/// Intrinsic (reference-free) validation of any entity. Attempt records are
/// checked without the word-count bound.
ValidationResult validate_intrinsic(const Entity& entity,
                                    const MediaPolicy& policy = {});

/// "un" for masculine and neuter nouns, "o" for feminine nouns, nothing when
/// the word does not take an indefinite article.
std::optional<std::string_view> indefinite_article_for(const Word& word);

}  // namespace logomon
