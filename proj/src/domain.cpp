#include "logomon/domain.hpp"

#include <algorithm>
#include <cctype>
#include <set>

namespace logomon {

namespace {

bool blank(std::string_view s) {
  return std::all_of(s.begin(), s.end(),
                     [](unsigned char c) { return std::isspace(c) != 0; });
}

std::string lower(std::string_view s) {
  std::string out(s);
  for (char& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

bool has_traversal(std::string_view path) {
  if (path.empty() || path.front() == '/' || path.front() == '\\') return true;
  std::size_t start = 0;
  while (start <= path.size()) {
    std::size_t end = path.find_first_of("/\\", start);
    if (end == std::string_view::npos) end = path.size();
    const auto segment = path.substr(start, end - start);
    if (segment == ".." || segment.empty()) return true;
    start = end + 1;
  }
  return false;
}

template <class T>
void require_name(ValidationResult& r, const T& named, std::string_view field) {
  if (blank(named)) r.add(std::string(field), "name-empty", std::string(field) + " must not be empty");
}

}  // namespace

// ---------------------------------------------------------------------------

EntityKind kind_of(const Entity& entity) {
  return std::visit([](const auto& e) { return kind_of_v<std::decay_t<decltype(e)>>; }, entity);
}

EntityId id_of(const Entity& entity) {
  return std::visit([](const auto& e) { return e.id; }, entity);
}

void set_id(Entity& entity, EntityId id) {
  std::visit([id](auto& e) { e.id = id; }, entity);
}

std::vector<EntityRef> references_of(const Entity& entity) {
  using K = EntityKind;
  struct Visitor {
    std::vector<EntityRef> operator()(const MediaAsset&) const { return {}; }
    std::vector<EntityRef> operator()(const Word& w) const {
      return {{K::MediaAsset, w.soundAssetId}, {K::MediaAsset, w.imageAssetId}};
    }
    std::vector<EntityRef> operator()(const ParonymPair& p) const {
      return {{K::Word, p.wordAId}, {K::Word, p.wordBId}};
    }
    std::vector<EntityRef> operator()(const ExerciseType&) const { return {}; }
    std::vector<EntityRef> operator()(const ExerciseSubtype&) const { return {}; }
    std::vector<EntityRef> operator()(const TargetSound&) const { return {}; }
    std::vector<EntityRef> operator()(const Association& a) const {
      return {{K::ExerciseType, a.typeId},
              {K::ExerciseSubtype, a.subtypeId},
              {K::TargetSound, a.soundId}};
    }
    std::vector<EntityRef> operator()(const Instructions&) const { return {}; }
    std::vector<EntityRef> operator()(const Exercise& e) const {
      return {{K::Association, e.associationId}, {K::Instructions, e.instructionsId}};
    }
    std::vector<EntityRef> operator()(const ExerciseConfiguration& c) const {
      std::vector<EntityRef> refs{{K::Exercise, c.exerciseId}, {K::Word, c.wordId}};
      if (c.paronymId) refs.push_back({K::ParonymPair, *c.paronymId});
      return refs;
    }
    std::vector<EntityRef> operator()(const PredefinedHomework& t) const {
      std::vector<EntityRef> refs;
      for (const auto& item : t.exerciseItems) refs.push_back({K::Exercise, item.exerciseId});
      return refs;
    }
    std::vector<EntityRef> operator()(const Child&) const { return {}; }
    std::vector<EntityRef> operator()(const HomeworkAssignment& a) const {
      return {{K::Child, a.childId}, {K::PredefinedHomework, a.predefinedHomeworkId}};
    }
    std::vector<EntityRef> operator()(const HomeworkAttemptRecord& r) const {
      return {{K::HomeworkAssignment, r.assignmentId}, {K::Exercise, r.exerciseId}};
    }
  };
  return std::visit(Visitor{}, entity);
}

// ---------------------------------------------------------------------------
// Enum names

std::string_view to_string(MediaKind kind) {
  return kind == MediaKind::Sound ? "Sound" : "Image";
}

std::string_view to_string(PartOfSpeech pos) {
  switch (pos) {
    case PartOfSpeech::Noun: return "Noun";
    case PartOfSpeech::Verb: return "Verb";
    case PartOfSpeech::Adjective: return "Adjective";
    case PartOfSpeech::Other: return "Other";
  }
  return "Other";
}

std::string_view to_string(Gender gender) {
  switch (gender) {
    case Gender::Masculine: return "Masculine";
    case Gender::Feminine: return "Feminine";
    case Gender::Neuter: return "Neuter";
  }
  return "Neuter";
}

std::string_view to_string(LegacyTable table) {
  switch (table) {
    case LegacyTable::Deficiente: return "Deficiente";
    case LegacyTable::Teste: return "Teste";
    case LegacyTable::DateCopii: return "DateCopii";
  }
  return "Deficiente";
}

std::optional<MediaKind> media_kind_from_string(std::string_view text) {
  if (text == "Sound") return MediaKind::Sound;
  if (text == "Image") return MediaKind::Image;
  return std::nullopt;
}

std::optional<PartOfSpeech> part_of_speech_from_string(std::string_view text) {
  for (auto pos : {PartOfSpeech::Noun, PartOfSpeech::Verb, PartOfSpeech::Adjective,
                   PartOfSpeech::Other})
    if (to_string(pos) == text) return pos;
  return std::nullopt;
}

std::optional<Gender> gender_from_string(std::string_view text) {
  for (auto g : {Gender::Masculine, Gender::Feminine, Gender::Neuter})
    if (to_string(g) == text) return g;
  return std::nullopt;
}

std::optional<LegacyTable> legacy_table_from_string(std::string_view text) {
  for (auto t : {LegacyTable::Deficiente, LegacyTable::Teste, LegacyTable::DateCopii})
    if (to_string(t) == text) return t;
  return std::nullopt;
}

// ---------------------------------------------------------------------------
// ValidationResult

bool ValidationResult::has(std::string_view code) const {
  return std::any_of(violations.begin(), violations.end(),
                     [&](const Violation& v) { return v.code == code; });
}

void ValidationResult::add(std::string field, std::string code, std::string message) {
  violations.push_back({std::move(field), std::move(code), std::move(message)});
}

void ValidationResult::merge(const ValidationResult& other) {
  violations.insert(violations.end(), other.violations.begin(), other.violations.end());
}

void ValidationResult::throw_if_failed(std::string_view what) const {
  if (ok()) return;
  std::string message(what);
  message += ": ";
  for (std::size_t i = 0; i < violations.size(); ++i) {
    if (i) message += "; ";
    message += violations[i].field + " (" + violations[i].code + ")";
  }
  throw Error(ErrorCode::ValidationFailed, message, violations);
}

bool MediaPolicy::accepts(MediaKind kind, std::string_view filename) const {
  const auto dot = filename.rfind('.');
  if (dot == std::string_view::npos) return false;
  const auto ext = lower(filename.substr(dot));
  const auto& allowed = extensions_for(kind);
  return std::find(allowed.begin(), allowed.end(), ext) != allowed.end();
}

// ---------------------------------------------------------------------------
// Validators

ValidationResult validate_media_asset(const MediaAsset& asset, const MediaPolicy& policy) {
  ValidationResult r;
  if (asset.filename.empty()) {
    r.add("filename", "filename-empty", "filename must not be empty");
    return r;
  }
  if (has_traversal(asset.filename))
    r.add("filename", "filename-traversal", "filename must be a plain relative path");
  if (!policy.accepts(asset.kind, asset.filename))
    r.add("filename", "wrong-extension",
          "extension not allowed for " + std::string(to_string(asset.kind)) + " assets");
  return r;
}

ValidationResult validate_word(const Word& word, const AssetKindLookup& assets) {
  ValidationResult r;
  if (blank(word.text)) r.add("text", "text-empty", "text must not be empty");

  const bool noun = word.partOfSpeech == PartOfSpeech::Noun;
  if (noun && !word.gender)
    r.add("gender", "gender-missing", "nouns must carry a gender");
  if (!noun && word.gender)
    r.add("gender", "gender-on-non-noun", "only nouns carry a gender");
  if (!noun && word.articleCompatible)
    r.add("articleCompatible", "article-on-non-noun", "only nouns take an indefinite article");
  if (word.partOfSpeech != PartOfSpeech::Other && !word.partOfSpeechLabel.empty())
    r.add("partOfSpeechLabel", "label-on-closed-pos",
          "a free-text label is only allowed for partOfSpeech Other");

  if (assets) {
    const auto sound = assets(word.soundAssetId);
    if (!sound)
      r.add("soundAssetId", "sound-asset-unresolved", "sound asset does not exist");
    else if (*sound != MediaKind::Sound)
      r.add("soundAssetId", "sound-asset-kind", "sound asset is not a Sound");
    const auto image = assets(word.imageAssetId);
    if (!image)
      r.add("imageAssetId", "image-asset-unresolved", "image asset does not exist");
    else if (*image != MediaKind::Image)
      r.add("imageAssetId", "image-asset-kind", "image asset is not an Image");
  }
  return r;
}

ValidationResult validate_paronym_pair(const ParonymPair& pair) {
  ValidationResult r;
  if (pair.wordAId == pair.wordBId)
    r.add("wordBId", "self-pair", "a paronym pair needs two different words");
  return r;
}

ValidationResult validate_exercise_type(const ExerciseType& type) {
  ValidationResult r;
  require_name(r, type.name, "name");
  return r;
}

ValidationResult validate_exercise_subtype(const ExerciseSubtype& subtype) {
  ValidationResult r;
  require_name(r, subtype.name, "name");
  return r;
}

ValidationResult validate_target_sound(const TargetSound& sound) {
  ValidationResult r;
  if (blank(sound.label)) r.add("label", "label-empty", "label must not be empty");
  return r;
}

ValidationResult validate_association(const Association&) { return {}; }

ValidationResult validate_instructions(const Instructions& instructions) {
  ValidationResult r;
  if (blank(instructions.text)) r.add("text", "text-empty", "text must not be empty");
  return r;
}

ValidationResult validate_exercise(const Exercise& exercise, const ExistsLookup& resolver) {
  ValidationResult r;
  if (blank(exercise.title)) r.add("title", "title-empty", "title must not be empty");
  if (exercise.difficulty < kMinDifficulty || exercise.difficulty > kMaxDifficulty)
    r.add("difficulty", "difficulty-range", "difficulty must lie in 1..5");
  if (resolver) {
    if (!resolver(EntityKind::Association, exercise.associationId))
      r.add("associationId", "association-unresolved", "association does not exist");
    if (!resolver(EntityKind::Instructions, exercise.instructionsId))
      r.add("instructionsId", "instructions-unresolved", "instructions do not exist");
  }
  return r;
}

ValidationResult validate_configuration(const ExerciseConfiguration& config) {
  ValidationResult r;
  if (config.param1 < 0) r.add("param1", "param1-negative", "display time must be >= 0");
  if (config.param2 != 0 && config.param2 != 1)
    r.add("param2", "param2-flag", "param2 must be 0 or 1");
  return r;
}

ValidationResult validate_legacy_ref(const LegacyRef& ref) {
  ValidationResult r;
  if (ref.id < 1) r.add("id", "legacy-id-range", "legacy ids start at 1");
  return r;
}

ValidationResult validate_template(const PredefinedHomework& tmpl) {
  ValidationResult r;
  if (tmpl.repetitionsPerDay < 1)
    r.add("repetitionsPerDay", "repetitions-range", "repetitionsPerDay must be >= 1");
  if (tmpl.exerciseItems.empty())
    r.add("exerciseItems", "no-exercises", "a template needs at least one exercise");
  std::set<EntityId> seen;
  for (const auto& item : tmpl.exerciseItems) {
    if (!seen.insert(item.exerciseId).second)
      r.add("exerciseItems", "duplicate-exercise",
            "exercise " + std::to_string(item.exerciseId) + " listed twice");
    if (item.successThresholdPercent < 0 || item.successThresholdPercent > 100)
      r.add("exerciseItems", "threshold-range", "successThresholdPercent must lie in 0..100");
  }
  for (const auto& ref : tmpl.deficiencyRefs) {
    r.merge(validate_legacy_ref(ref));
    if (ref.table != LegacyTable::Deficiente)
      r.add("deficiencyRefs", "legacy-table", "deficiency refs must point at Deficiente");
  }
  for (const auto& ref : tmpl.testRefs) {
    r.merge(validate_legacy_ref(ref));
    if (ref.table != LegacyTable::Teste)
      r.add("testRefs", "legacy-table", "test refs must point at Teste");
  }
  return r;
}

ValidationResult validate_child(const Child& child) {
  ValidationResult r;
  if (blank(child.familyName)) r.add("familyName", "name-empty", "familyName must not be empty");
  if (blank(child.givenName)) r.add("givenName", "name-empty", "givenName must not be empty");
  return r;
}

ValidationResult validate_assignment(const HomeworkAssignment& assignment) {
  ValidationResult r;
  if (!assignment.assignedDate.ok())
    r.add("assignedDate", "date-invalid", "assignedDate is not a calendar date");
  if (assignment.deadlineDays < 1)
    r.add("deadlineDays", "deadline-range", "deadlineDays must be >= 1");
  if (assignment.reportDate) {
    if (!assignment.reportDate->ok())
      r.add("reportDate", "date-invalid", "reportDate is not a calendar date");
    else if (std::chrono::sys_days{*assignment.reportDate} <
             std::chrono::sys_days{assignment.assignedDate})
      r.add("reportDate", "report-before-assignment", "reportDate precedes assignedDate");
  }
  return r;
}

namespace {

ValidationResult attempt_fields(const HomeworkAttemptRecord& record) {
  ValidationResult r;
  if (record.attemptIndex < 1)
    r.add("attemptIndex", "attempt-index-range", "attemptIndex starts at 1");
  if (record.achievedPercent < 0 || record.achievedPercent > 100)
    r.add("achievedPercent", "percent-range", "achievedPercent must lie in 0..100");
  if (record.initiallyWrongWords < 0)
    r.add("initiallyWrongWords", "wrong-count-negative", "initiallyWrongWords must be >= 0");
  return r;
}

}  // namespace

ValidationResult validate_attempt_record(const HomeworkAttemptRecord& record,
                                         int exerciseWordCount) {
  auto r = attempt_fields(record);
  if (record.initiallyWrongWords > exerciseWordCount)
    r.add("initiallyWrongWords", "wrong-count-exceeds-words",
          "initiallyWrongWords exceeds the exercise's " + std::to_string(exerciseWordCount) +
              " configured words");
  return r;
}

ValidationResult validate_intrinsic(const Entity& entity, const MediaPolicy& policy) {
  struct Visitor {
    const MediaPolicy& policy;
    ValidationResult operator()(const MediaAsset& e) const { return validate_media_asset(e, policy); }
    ValidationResult operator()(const Word& e) const { return validate_word(e); }
    ValidationResult operator()(const ParonymPair& e) const { return validate_paronym_pair(e); }
    ValidationResult operator()(const ExerciseType& e) const { return validate_exercise_type(e); }
    ValidationResult operator()(const ExerciseSubtype& e) const { return validate_exercise_subtype(e); }
    ValidationResult operator()(const TargetSound& e) const { return validate_target_sound(e); }
    ValidationResult operator()(const Association& e) const { return validate_association(e); }
    ValidationResult operator()(const Instructions& e) const { return validate_instructions(e); }
    ValidationResult operator()(const Exercise& e) const { return validate_exercise(e); }
    ValidationResult operator()(const ExerciseConfiguration& e) const { return validate_configuration(e); }
    ValidationResult operator()(const PredefinedHomework& e) const { return validate_template(e); }
    ValidationResult operator()(const Child& e) const { return validate_child(e); }
    ValidationResult operator()(const HomeworkAssignment& e) const { return validate_assignment(e); }
    ValidationResult operator()(const HomeworkAttemptRecord& e) const { return attempt_fields(e); }
  };
  return std::visit(Visitor{policy}, entity);
}

std::optional<std::string_view> indefinite_article_for(const Word& word) {
  if (!word.articleCompatible || word.partOfSpeech != PartOfSpeech::Noun || !word.gender)
    return std::nullopt;
  return *word.gender == Gender::Feminine ? std::string_view{"o"} : std::string_view{"un"};
}

}  // namespace logomon
