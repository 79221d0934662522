#include "logomon/json_codec.hpp"

#include <limits>

namespace logomon {

StrictObject::StrictObject(const json& object, std::string context)
    : object_(object), context_(std::move(context)) {
  if (!object_.is_object()) fail("", "expected a JSON object");
}

void StrictObject::fail(std::string_view key, std::string_view problem) const {
  std::string field = key.empty() ? context_ : std::string(key);
  throw Error(ErrorCode::ValidationFailed,
              context_ + (key.empty() ? "" : "." + std::string(key)) + ": " + std::string(problem),
              std::vector<Violation>{{field, "json-field", std::string(problem)}});
}

const json& StrictObject::required(std::string_view key) {
  const auto it = object_.find(key);
  if (it == object_.end()) fail(key, "missing field");
  consumed_.emplace(key);
  return *it;
}

const json* StrictObject::optional(std::string_view key) {
  const auto it = object_.find(key);
  if (it == object_.end()) return nullptr;
  consumed_.emplace(key);
  return &*it;
}

std::string StrictObject::string(std::string_view key) {
  const auto& v = required(key);
  if (!v.is_string()) fail(key, "expected a string");
  return v.get<std::string>();
}

std::string StrictObject::string_or(std::string_view key, std::string fallback) {
  const auto* v = optional(key);
  if (!v) return fallback;
  if (!v->is_string()) fail(key, "expected a string");
  return v->get<std::string>();
}

std::int64_t StrictObject::integer(std::string_view key) {
  const auto& v = required(key);
  if (!v.is_number_integer()) fail(key, "expected an integer");
  return v.get<std::int64_t>();
}

std::int64_t StrictObject::integer_or(std::string_view key, std::int64_t fallback) {
  const auto* v = optional(key);
  if (!v || v->is_null()) return fallback;
  if (!v->is_number_integer()) fail(key, "expected an integer");
  return v->get<std::int64_t>();
}

namespace {

int narrow(StrictObject& obj, std::string_view key, std::int64_t value) {
  if (value < std::numeric_limits<int>::min() || value > std::numeric_limits<int>::max())
    obj.fail(key, "integer out of range");
  return static_cast<int>(value);
}

}  // namespace

int StrictObject::int32(std::string_view key) { return narrow(*this, key, integer(key)); }

int StrictObject::int32_or(std::string_view key, int fallback) {
  return narrow(*this, key, integer_or(key, fallback));
}

bool StrictObject::boolean(std::string_view key) {
  const auto& v = required(key);
  if (!v.is_boolean()) fail(key, "expected a boolean");
  return v.get<bool>();
}

bool StrictObject::boolean_or(std::string_view key, bool fallback) {
  const auto* v = optional(key);
  if (!v) return fallback;
  if (!v->is_boolean()) fail(key, "expected a boolean");
  return v->get<bool>();
}

std::optional<std::int64_t> StrictObject::nullable_integer(std::string_view key) {
  const auto* v = optional(key);
  if (!v || v->is_null()) return std::nullopt;
  if (!v->is_number_integer()) fail(key, "expected an integer or null");
  return v->get<std::int64_t>();
}

std::optional<std::string> StrictObject::nullable_string(std::string_view key) {
  const auto* v = optional(key);
  if (!v || v->is_null()) return std::nullopt;
  if (!v->is_string()) fail(key, "expected a string or null");
  return v->get<std::string>();
}

Date StrictObject::date(std::string_view key) {
  const auto text = string(key);
  const auto d = parse_date(text);
  if (!d) fail(key, "expected a YYYY-MM-DD date");
  return *d;
}

std::optional<Date> StrictObject::nullable_date(std::string_view key) {
  const auto text = nullable_string(key);
  if (!text) return std::nullopt;
  const auto d = parse_date(*text);
  if (!d) fail(key, "expected a YYYY-MM-DD date");
  return d;
}

const json& StrictObject::array(std::string_view key) {
  const auto& v = required(key);
  if (!v.is_array()) fail(key, "expected an array");
  return v;
}

void StrictObject::finish() const {
  for (const auto& [key, value] : object_.items()) {
    if (!consumed_.contains(key)) fail(key, "unknown field");
  }
}

// ---------------------------------------------------------------------------

namespace {

json nullable(const std::optional<EntityId>& v) { return v ? json(*v) : json(nullptr); }
json nullable(const std::optional<Date>& v) { return v ? json(format_date(*v)) : json(nullptr); }

json legacy_refs(const std::vector<LegacyRef>& refs) {
  json out = json::array();
  for (const auto& r : refs) out.push_back({{"table", to_string(r.table)}, {"id", r.id}});
  return out;
}

struct Encoder {
  json operator()(const MediaAsset& e) const {
    return {{"id", e.id}, {"kind", to_string(e.kind)}, {"filename", e.filename}};
  }
  json operator()(const Word& e) const {
    return {{"id", e.id},
            {"text", e.text},
            {"speakerFamilyName", e.speakerFamilyName},
            {"speakerGivenName", e.speakerGivenName},
            {"isTherapistRecording", e.isTherapistRecording},
            {"partOfSpeech", to_string(e.partOfSpeech)},
            {"partOfSpeechLabel", e.partOfSpeechLabel},
            {"gender", e.gender ? json(to_string(*e.gender)) : json(nullptr)},
            {"articleCompatible", e.articleCompatible},
            {"soundAssetId", e.soundAssetId},
            {"imageAssetId", e.imageAssetId}};
  }
  json operator()(const ParonymPair& e) const {
    return {{"id", e.id}, {"wordAId", e.wordAId}, {"wordBId", e.wordBId}};
  }
  json operator()(const ExerciseType& e) const {
    return {{"id", e.id}, {"name", e.name}, {"applicationName", e.applicationName}};
  }
  json operator()(const ExerciseSubtype& e) const {
    return {{"id", e.id}, {"name", e.name}, {"applicationName", e.applicationName}};
  }
  json operator()(const TargetSound& e) const { return {{"id", e.id}, {"label", e.label}}; }
  json operator()(const Association& e) const {
    return {{"id", e.id}, {"typeId", e.typeId}, {"subtypeId", e.subtypeId}, {"soundId", e.soundId}};
  }
  json operator()(const Instructions& e) const { return {{"id", e.id}, {"text", e.text}}; }
  json operator()(const Exercise& e) const {
    return {{"id", e.id},
            {"title", e.title},
            {"difficulty", e.difficulty},
            {"associationId", e.associationId},
            {"instructionsId", e.instructionsId}};
  }
  json operator()(const ExerciseConfiguration& e) const {
    return {{"id", e.id},         {"exerciseId", e.exerciseId},
            {"wordId", e.wordId}, {"paronymId", nullable(e.paronymId)},
            {"param1", e.param1}, {"param2", e.param2},
            {"param3", e.param3}};
  }
  json operator()(const PredefinedHomework& e) const {
    json items = json::array();
    for (const auto& item : e.exerciseItems)
      items.push_back({{"exerciseId", item.exerciseId},
                       {"successThresholdPercent", item.successThresholdPercent}});
    return {{"id", e.id},
            {"description", e.description},
            {"repetitionsPerDay", e.repetitionsPerDay},
            {"exerciseItems", items},
            {"deficiencyRefs", legacy_refs(e.deficiencyRefs)},
            {"testRefs", legacy_refs(e.testRefs)}};
  }
  json operator()(const Child& e) const {
    return {{"id", e.id}, {"familyName", e.familyName}, {"givenName", e.givenName}};
  }
  json operator()(const HomeworkAssignment& e) const {
    return {{"id", e.id},
            {"childId", e.childId},
            {"predefinedHomeworkId", e.predefinedHomeworkId},
            {"assignedDate", format_date(e.assignedDate)},
            {"deadlineDays", e.deadlineDays},
            {"reportDate", nullable(e.reportDate)}};
  }
  json operator()(const HomeworkAttemptRecord& e) const {
    return {{"id", e.id},
            {"assignmentId", e.assignmentId},
            {"exerciseId", e.exerciseId},
            {"attemptIndex", e.attemptIndex},
            {"achievedPercent", e.achievedPercent},
            {"initiallyWrongWords", e.initiallyWrongWords}};
  }
};

template <class Enum, class Parse>
Enum enum_field(StrictObject& obj, std::string_view key, Parse parse) {
  const auto text = obj.string(key);
  const auto value = parse(text);
  if (!value) obj.fail(key, "unknown value '" + text + "'");
  return *value;
}

std::vector<LegacyRef> decode_legacy_refs(StrictObject& parent, std::string_view key,
                                          const std::string& context) {
  std::vector<LegacyRef> refs;
  const auto* arr = parent.optional(key);
  if (!arr) return refs;
  if (!arr->is_array()) parent.fail(key, "expected an array");
  for (const auto& item : *arr) {
    StrictObject o(item, context + "." + std::string(key));
    LegacyRef ref;
    ref.table = enum_field<LegacyTable>(o, "table", legacy_table_from_string);
    ref.id = o.integer("id");
    o.finish();
    refs.push_back(ref);
  }
  return refs;
}

Entity decode_entity(EntityKind kind, const json& j) {
  const std::string context(to_string(kind));
  StrictObject o(j, context);
  auto id = o.integer_or("id", 0);
  Entity result = [&]() -> Entity {
    switch (kind) {
      case EntityKind::MediaAsset: {
        MediaAsset e;
        e.kind = enum_field<MediaKind>(o, "kind", media_kind_from_string);
        e.filename = o.string("filename");
        return e;
      }
      case EntityKind::Word: {
        Word e;
        e.text = o.string("text");
        e.speakerFamilyName = o.string_or("speakerFamilyName", "");
        e.speakerGivenName = o.string_or("speakerGivenName", "");
        e.isTherapistRecording = o.boolean_or("isTherapistRecording", false);
        e.partOfSpeech = enum_field<PartOfSpeech>(o, "partOfSpeech", part_of_speech_from_string);
        e.partOfSpeechLabel = o.string_or("partOfSpeechLabel", "");
        if (auto g = o.nullable_string("gender")) {
          e.gender = gender_from_string(*g);
          if (!e.gender) o.fail("gender", "unknown value '" + *g + "'");
        }
        e.articleCompatible = o.boolean_or("articleCompatible", false);
        e.soundAssetId = o.integer("soundAssetId");
        e.imageAssetId = o.integer("imageAssetId");
        return e;
      }
      case EntityKind::ParonymPair: {
        ParonymPair e;
        e.wordAId = o.integer("wordAId");
        e.wordBId = o.integer("wordBId");
        return e;
      }
      case EntityKind::ExerciseType: {
        ExerciseType e;
        e.name = o.string("name");
        e.applicationName = o.string_or("applicationName", "");
        return e;
      }
      case EntityKind::ExerciseSubtype: {
        ExerciseSubtype e;
        e.name = o.string("name");
        e.applicationName = o.string_or("applicationName", "");
        return e;
      }
      case EntityKind::TargetSound: {
        TargetSound e;
        e.label = o.string("label");
        return e;
      }
      case EntityKind::Association: {
        Association e;
        e.typeId = o.integer("typeId");
        e.subtypeId = o.integer("subtypeId");
        e.soundId = o.integer("soundId");
        return e;
      }
      case EntityKind::Instructions: {
        Instructions e;
        e.text = o.string("text");
        return e;
      }
      case EntityKind::Exercise: {
        Exercise e;
        e.title = o.string("title");
        e.difficulty = o.int32("difficulty");
        e.associationId = o.integer("associationId");
        e.instructionsId = o.integer("instructionsId");
        return e;
      }
      case EntityKind::ExerciseConfiguration: {
        ExerciseConfiguration e;
        e.exerciseId = o.integer("exerciseId");
        e.wordId = o.integer("wordId");
        e.paronymId = o.nullable_integer("paronymId");
        e.param1 = o.int32_or("param1", 0);
        e.param2 = o.int32_or("param2", 0);
        e.param3 = o.int32_or("param3", 0);
        return e;
      }
      case EntityKind::PredefinedHomework: {
        PredefinedHomework e;
        e.description = o.string_or("description", "");
        e.repetitionsPerDay = o.int32("repetitionsPerDay");
        for (const auto& item : o.array("exerciseItems")) {
          StrictObject io(item, context + ".exerciseItems");
          TemplateExerciseItem ti;
          ti.exerciseId = io.integer("exerciseId");
          ti.successThresholdPercent = io.int32("successThresholdPercent");
          io.finish();
          e.exerciseItems.push_back(ti);
        }
        e.deficiencyRefs = decode_legacy_refs(o, "deficiencyRefs", context);
        e.testRefs = decode_legacy_refs(o, "testRefs", context);
        return e;
      }
      case EntityKind::Child: {
        Child e;
        e.familyName = o.string("familyName");
        e.givenName = o.string("givenName");
        return e;
      }
      case EntityKind::HomeworkAssignment: {
        HomeworkAssignment e;
        e.childId = o.integer("childId");
        e.predefinedHomeworkId = o.integer("predefinedHomeworkId");
        e.assignedDate = o.date("assignedDate");
        e.deadlineDays = o.int32("deadlineDays");
        e.reportDate = o.nullable_date("reportDate");
        return e;
      }
      case EntityKind::HomeworkAttemptRecord: {
        HomeworkAttemptRecord e;
        e.assignmentId = o.integer("assignmentId");
        e.exerciseId = o.integer("exerciseId");
        e.attemptIndex = o.int32("attemptIndex");
        e.achievedPercent = o.int32("achievedPercent");
        e.initiallyWrongWords = o.int32_or("initiallyWrongWords", 0);
        return e;
      }
    }
    o.fail("", "unknown entity kind");
  }();
  o.finish();
  set_id(result, id);
  return result;
}

}  // namespace

json to_json(const Entity& entity) { return std::visit(Encoder{}, entity); }

Entity entity_from_json(EntityKind kind, const json& j) { return decode_entity(kind, j); }

json to_json(const Violation& v) {
  return {{"field", v.field}, {"code", v.code}, {"message", v.message}};
}

json to_json(const ValidationResult& r) {
  json arr = json::array();
  for (const auto& v : r.violations) arr.push_back(to_json(v));
  return {{"ok", r.ok()}, {"violations", arr}};
}

json to_json(const EntityRef& ref) { return {{"kind", to_string(ref.kind)}, {"id", ref.id}}; }

}  // namespace logomon
