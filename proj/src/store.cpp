#include "logomon/store.hpp"

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <set>
#include <utility>

#include "logomon/digest.hpp"
#include "logomon/text.hpp"
#include "sqlite.hpp"

namespace fs = std::filesystem;

namespace logomon {

namespace {

using sql::Value;

constexpr const char* kSchema = R"sql(
CREATE TABLE IF NOT EXISTS media_assets(
  id INTEGER PRIMARY KEY AUTOINCREMENT,
  kind TEXT NOT NULL CHECK (kind IN ('Sound', 'Image')),
  filename TEXT NOT NULL,
  UNIQUE (kind, filename));

CREATE TABLE IF NOT EXISTS words(
  id INTEGER PRIMARY KEY AUTOINCREMENT,
  text TEXT NOT NULL,
  speaker_family_name TEXT NOT NULL,
  speaker_given_name TEXT NOT NULL,
  is_therapist_recording INTEGER NOT NULL,
  part_of_speech TEXT NOT NULL,
  part_of_speech_label TEXT NOT NULL,
  gender TEXT,
  article_compatible INTEGER NOT NULL,
  sound_asset_id INTEGER NOT NULL REFERENCES media_assets(id),
  image_asset_id INTEGER NOT NULL REFERENCES media_assets(id));

CREATE TABLE IF NOT EXISTS paronym_pairs(
  id INTEGER PRIMARY KEY AUTOINCREMENT,
  word_a_id INTEGER NOT NULL REFERENCES words(id),
  word_b_id INTEGER NOT NULL REFERENCES words(id),
  CHECK (word_a_id <> word_b_id));
CREATE UNIQUE INDEX IF NOT EXISTS paronym_pairs_unordered
  ON paronym_pairs(min(word_a_id, word_b_id), max(word_a_id, word_b_id));

CREATE TABLE IF NOT EXISTS exercise_types(
  id INTEGER PRIMARY KEY AUTOINCREMENT,
  name TEXT NOT NULL UNIQUE,
  application_name TEXT NOT NULL);

CREATE TABLE IF NOT EXISTS exercise_subtypes(
  id INTEGER PRIMARY KEY AUTOINCREMENT,
  name TEXT NOT NULL UNIQUE,
  application_name TEXT NOT NULL);

CREATE TABLE IF NOT EXISTS target_sounds(
  id INTEGER PRIMARY KEY AUTOINCREMENT,
  label TEXT NOT NULL UNIQUE);

CREATE TABLE IF NOT EXISTS associations(
  id INTEGER PRIMARY KEY AUTOINCREMENT,
  type_id INTEGER NOT NULL REFERENCES exercise_types(id),
  subtype_id INTEGER NOT NULL REFERENCES exercise_subtypes(id),
  sound_id INTEGER NOT NULL REFERENCES target_sounds(id),
  UNIQUE (type_id, subtype_id, sound_id));

CREATE TABLE IF NOT EXISTS instructions(
  id INTEGER PRIMARY KEY AUTOINCREMENT,
  text TEXT NOT NULL);

CREATE TABLE IF NOT EXISTS exercises(
  id INTEGER PRIMARY KEY AUTOINCREMENT,
  title TEXT NOT NULL,
  difficulty INTEGER NOT NULL CHECK (difficulty BETWEEN 1 AND 5),
  association_id INTEGER NOT NULL REFERENCES associations(id),
  instructions_id INTEGER NOT NULL REFERENCES instructions(id));

CREATE TABLE IF NOT EXISTS exercise_configurations(
  id INTEGER PRIMARY KEY AUTOINCREMENT,
  exercise_id INTEGER NOT NULL REFERENCES exercises(id),
  word_id INTEGER NOT NULL REFERENCES words(id),
  paronym_id INTEGER REFERENCES paronym_pairs(id),
  param1 INTEGER NOT NULL CHECK (param1 >= 0),
  param2 INTEGER NOT NULL CHECK (param2 IN (0, 1)),
  param3 INTEGER NOT NULL,
  UNIQUE (exercise_id, word_id));

CREATE TABLE IF NOT EXISTS predefined_homework(
  id INTEGER PRIMARY KEY AUTOINCREMENT,
  description TEXT NOT NULL,
  repetitions_per_day INTEGER NOT NULL CHECK (repetitions_per_day >= 1));

CREATE TABLE IF NOT EXISTS template_exercises(
  template_id INTEGER NOT NULL REFERENCES predefined_homework(id),
  position INTEGER NOT NULL,
  exercise_id INTEGER NOT NULL REFERENCES exercises(id),
  success_threshold_percent INTEGER NOT NULL
    CHECK (success_threshold_percent BETWEEN 0 AND 100),
  PRIMARY KEY (template_id, position),
  UNIQUE (template_id, exercise_id));

CREATE TABLE IF NOT EXISTS template_legacy_refs(
  template_id INTEGER NOT NULL REFERENCES predefined_homework(id),
  legacy_table TEXT NOT NULL,
  position INTEGER NOT NULL,
  legacy_id INTEGER NOT NULL CHECK (legacy_id >= 1),
  PRIMARY KEY (template_id, legacy_table, position));

CREATE TABLE IF NOT EXISTS children(
  id INTEGER PRIMARY KEY AUTOINCREMENT,
  family_name TEXT NOT NULL,
  given_name TEXT NOT NULL);

CREATE TABLE IF NOT EXISTS homework_assignments(
  id INTEGER PRIMARY KEY AUTOINCREMENT,
  child_id INTEGER NOT NULL REFERENCES children(id),
  predefined_homework_id INTEGER NOT NULL REFERENCES predefined_homework(id),
  assigned_date TEXT NOT NULL,
  deadline_days INTEGER NOT NULL CHECK (deadline_days >= 1),
  report_date TEXT);

CREATE TABLE IF NOT EXISTS attempt_records(
  id INTEGER PRIMARY KEY AUTOINCREMENT,
  assignment_id INTEGER NOT NULL REFERENCES homework_assignments(id),
  exercise_id INTEGER NOT NULL REFERENCES exercises(id),
  attempt_index INTEGER NOT NULL CHECK (attempt_index >= 1),
  achieved_percent INTEGER NOT NULL CHECK (achieved_percent BETWEEN 0 AND 100),
  initially_wrong_words INTEGER NOT NULL CHECK (initially_wrong_words >= 0),
  UNIQUE (assignment_id, exercise_id, attempt_index));

CREATE TABLE IF NOT EXISTS exported_manifests(
  assignment_id INTEGER NOT NULL,
  digest TEXT NOT NULL,
  body BLOB NOT NULL,
  PRIMARY KEY (assignment_id, digest));
)sql";

struct TableSpec {
  std::string_view table;
  std::vector<std::string_view> columns;
};

const TableSpec& spec_for(EntityKind kind) {
  static const std::vector<TableSpec> specs = {
      {"media_assets", {"kind", "filename"}},
      {"words",
       {"text", "speaker_family_name", "speaker_given_name", "is_therapist_recording",
        "part_of_speech", "part_of_speech_label", "gender", "article_compatible",
        "sound_asset_id", "image_asset_id"}},
      {"paronym_pairs", {"word_a_id", "word_b_id"}},
      {"exercise_types", {"name", "application_name"}},
      {"exercise_subtypes", {"name", "application_name"}},
      {"target_sounds", {"label"}},
      {"associations", {"type_id", "subtype_id", "sound_id"}},
      {"instructions", {"text"}},
      {"exercises", {"title", "difficulty", "association_id", "instructions_id"}},
      {"exercise_configurations",
       {"exercise_id", "word_id", "paronym_id", "param1", "param2", "param3"}},
      {"predefined_homework", {"description", "repetitions_per_day"}},
      {"children", {"family_name", "given_name"}},
      {"homework_assignments",
       {"child_id", "predefined_homework_id", "assigned_date", "deadline_days", "report_date"}},
      {"attempt_records",
       {"assignment_id", "exercise_id", "attempt_index", "achieved_percent",
        "initially_wrong_words"}},
  };
  return specs.at(static_cast<std::size_t>(kind));
}

/// One foreign-key edge: rows of `table` (identified by `idColumn`, of kind
/// `referrer`) point at `target` through `column`.
struct Relation {
  EntityKind target;
  EntityKind referrer;
  std::string_view table;
  std::string_view idColumn;
  std::string_view column;
};

constexpr std::array<Relation, 17> kRelations{{
    {EntityKind::MediaAsset, EntityKind::Word, "words", "id", "sound_asset_id"},
    {EntityKind::MediaAsset, EntityKind::Word, "words", "id", "image_asset_id"},
    {EntityKind::Word, EntityKind::ParonymPair, "paronym_pairs", "id", "word_a_id"},
    {EntityKind::Word, EntityKind::ParonymPair, "paronym_pairs", "id", "word_b_id"},
    {EntityKind::Word, EntityKind::ExerciseConfiguration, "exercise_configurations", "id", "word_id"},
    {EntityKind::ExerciseType, EntityKind::Association, "associations", "id", "type_id"},
    {EntityKind::ExerciseSubtype, EntityKind::Association, "associations", "id", "subtype_id"},
    {EntityKind::TargetSound, EntityKind::Association, "associations", "id", "sound_id"},
    {EntityKind::Association, EntityKind::Exercise, "exercises", "id", "association_id"},
    {EntityKind::Instructions, EntityKind::Exercise, "exercises", "id", "instructions_id"},
    {EntityKind::Exercise, EntityKind::ExerciseConfiguration, "exercise_configurations", "id", "exercise_id"},
    {EntityKind::Exercise, EntityKind::PredefinedHomework, "template_exercises", "template_id", "exercise_id"},
    {EntityKind::Exercise, EntityKind::HomeworkAttemptRecord, "attempt_records", "id", "exercise_id"},
    {EntityKind::ParonymPair, EntityKind::ExerciseConfiguration, "exercise_configurations", "id", "paronym_id"},
    {EntityKind::PredefinedHomework, EntityKind::HomeworkAssignment, "homework_assignments", "id", "predefined_homework_id"},
    {EntityKind::Child, EntityKind::HomeworkAssignment, "homework_assignments", "id", "child_id"},
    {EntityKind::HomeworkAssignment, EntityKind::HomeworkAttemptRecord, "attempt_records", "id", "assignment_id"},
}};

// ---------------------------------------------------------------------------
// Row mapping

Value v(std::int64_t i) { return i; }
Value v(bool b) { return static_cast<std::int64_t>(b); }
Value v(std::string s) { return s; }
Value v(std::string_view s) { return std::string(s); }

std::int64_t as_int(const Value& value) {
  if (const auto* i = std::get_if<std::int64_t>(&value)) return *i;
  return 0;
}
std::string as_text(const Value& value) {
  if (const auto* s = std::get_if<std::string>(&value)) return *s;
  return {};
}
std::optional<std::int64_t> as_opt_int(const Value& value) {
  if (const auto* i = std::get_if<std::int64_t>(&value)) return *i;
  return std::nullopt;
}
int as_int32(const Value& value) { return static_cast<int>(as_int(value)); }

struct RowEncoder {
  std::vector<Value> operator()(const MediaAsset& e) const {
    return {v(to_string(e.kind)), v(e.filename)};
  }
  std::vector<Value> operator()(const Word& e) const {
    return {v(e.text),
            v(e.speakerFamilyName),
            v(e.speakerGivenName),
            v(e.isTherapistRecording),
            v(to_string(e.partOfSpeech)),
            v(e.partOfSpeechLabel),
            e.gender ? v(to_string(*e.gender)) : Value{},
            v(e.articleCompatible),
            v(e.soundAssetId),
            v(e.imageAssetId)};
  }
  std::vector<Value> operator()(const ParonymPair& e) const { return {v(e.wordAId), v(e.wordBId)}; }
  std::vector<Value> operator()(const ExerciseType& e) const {
    return {v(e.name), v(e.applicationName)};
  }
  std::vector<Value> operator()(const ExerciseSubtype& e) const {
    return {v(e.name), v(e.applicationName)};
  }
  std::vector<Value> operator()(const TargetSound& e) const { return {v(e.label)}; }
  std::vector<Value> operator()(const Association& e) const {
    return {v(e.typeId), v(e.subtypeId), v(e.soundId)};
  }
  std::vector<Value> operator()(const Instructions& e) const { return {v(e.text)}; }
  std::vector<Value> operator()(const Exercise& e) const {
    return {v(e.title), v(std::int64_t{e.difficulty}), v(e.associationId), v(e.instructionsId)};
  }
  std::vector<Value> operator()(const ExerciseConfiguration& e) const {
    return {v(e.exerciseId),
            v(e.wordId),
            e.paronymId ? v(*e.paronymId) : Value{},
            v(std::int64_t{e.param1}),
            v(std::int64_t{e.param2}),
            v(std::int64_t{e.param3})};
  }
  std::vector<Value> operator()(const PredefinedHomework& e) const {
    return {v(e.description), v(std::int64_t{e.repetitionsPerDay})};
  }
  std::vector<Value> operator()(const Child& e) const { return {v(e.familyName), v(e.givenName)}; }
  std::vector<Value> operator()(const HomeworkAssignment& e) const {
    return {v(e.childId), v(e.predefinedHomeworkId), v(format_date(e.assignedDate)),
            v(std::int64_t{e.deadlineDays}),
            e.reportDate ? v(format_date(*e.reportDate)) : Value{}};
  }
  std::vector<Value> operator()(const HomeworkAttemptRecord& e) const {
    return {v(e.assignmentId), v(e.exerciseId), v(std::int64_t{e.attemptIndex}),
            v(std::int64_t{e.achievedPercent}), v(std::int64_t{e.initiallyWrongWords})};
  }
};

Date stored_date(const Value& value) {
  const auto d = parse_date(as_text(value));
  return d ? *d : Date{};
}

Entity decode_row(EntityKind kind, EntityId id, const std::vector<Value>& r) {
  switch (kind) {
    case EntityKind::MediaAsset:
      return MediaAsset{id, *media_kind_from_string(as_text(r[0])), as_text(r[1])};
    case EntityKind::Word: {
      Word w;
      w.id = id;
      w.text = as_text(r[0]);
      w.speakerFamilyName = as_text(r[1]);
      w.speakerGivenName = as_text(r[2]);
      w.isTherapistRecording = as_int(r[3]) != 0;
      w.partOfSpeech = part_of_speech_from_string(as_text(r[4])).value_or(PartOfSpeech::Other);
      w.partOfSpeechLabel = as_text(r[5]);
      if (!std::holds_alternative<std::monostate>(r[6])) w.gender = gender_from_string(as_text(r[6]));
      w.articleCompatible = as_int(r[7]) != 0;
      w.soundAssetId = as_int(r[8]);
      w.imageAssetId = as_int(r[9]);
      return w;
    }
    case EntityKind::ParonymPair: return ParonymPair{id, as_int(r[0]), as_int(r[1])};
    case EntityKind::ExerciseType: return ExerciseType{id, as_text(r[0]), as_text(r[1])};
    case EntityKind::ExerciseSubtype: return ExerciseSubtype{id, as_text(r[0]), as_text(r[1])};
    case EntityKind::TargetSound: return TargetSound{id, as_text(r[0])};
    case EntityKind::Association: return Association{id, as_int(r[0]), as_int(r[1]), as_int(r[2])};
    case EntityKind::Instructions: return Instructions{id, as_text(r[0])};
    case EntityKind::Exercise:
      return Exercise{id, as_text(r[0]), as_int32(r[1]), as_int(r[2]), as_int(r[3])};
    case EntityKind::ExerciseConfiguration:
      return ExerciseConfiguration{id,           as_int(r[0]),   as_int(r[1]),
                                   as_opt_int(r[2]), as_int32(r[3]), as_int32(r[4]),
                                   as_int32(r[5])};
    case EntityKind::PredefinedHomework: {
      PredefinedHomework t;
      t.id = id;
      t.description = as_text(r[0]);
      t.repetitionsPerDay = as_int32(r[1]);
      return t;
    }
    case EntityKind::Child: return Child{id, as_text(r[0]), as_text(r[1])};
    case EntityKind::HomeworkAssignment: {
      HomeworkAssignment a;
      a.id = id;
      a.childId = as_int(r[0]);
      a.predefinedHomeworkId = as_int(r[1]);
      a.assignedDate = stored_date(r[2]);
      a.deadlineDays = as_int32(r[3]);
      if (!std::holds_alternative<std::monostate>(r[4])) a.reportDate = stored_date(r[4]);
      return a;
    }
    case EntityKind::HomeworkAttemptRecord:
      return HomeworkAttemptRecord{id,           as_int(r[0]),   as_int(r[1]),
                                   as_int32(r[2]), as_int32(r[3]), as_int32(r[4])};
  }
  throw std::logic_error("unknown entity kind");
}

std::string select_sql(const TableSpec& spec) {
  std::string sql = "SELECT id";
  for (auto c : spec.columns) (sql += ", ") += c;
  (sql += " FROM ") += spec.table;
  return sql;
}

std::string upsert_sql(const TableSpec& spec) {
  std::string cols = "id", params = "?1", updates;
  int i = 2;
  for (auto c : spec.columns) {
    (cols += ", ") += c;
    params += ", ?" + std::to_string(i++);
    if (!updates.empty()) updates += ", ";
    updates += std::string(c) + " = excluded." + std::string(c);
  }
  return "INSERT INTO " + std::string(spec.table) + "(" + cols + ") VALUES(" + params +
         ") ON CONFLICT(id) DO UPDATE SET " + updates;
}

struct TextNormalizer {
    void operator()(MediaAsset& e) const { e.filename = to_nfc(e.filename); }
    void operator()(Word& e) const {
      e.text = to_nfc(e.text);
      e.speakerFamilyName = to_nfc(e.speakerFamilyName);
      e.speakerGivenName = to_nfc(e.speakerGivenName);
      e.partOfSpeechLabel = to_nfc(e.partOfSpeechLabel);
    }
    void operator()(ExerciseType& e) const {
      e.name = to_nfc(e.name);
      e.applicationName = to_nfc(e.applicationName);
    }
    void operator()(ExerciseSubtype& e) const {
      e.name = to_nfc(e.name);
      e.applicationName = to_nfc(e.applicationName);
    }
    void operator()(TargetSound& e) const { e.label = to_nfc(e.label); }
    void operator()(Instructions& e) const { e.text = to_nfc(e.text); }
    void operator()(Exercise& e) const { e.title = to_nfc(e.title); }
    void operator()(PredefinedHomework& e) const { e.description = to_nfc(e.description); }
    void operator()(Child& e) const {
      e.familyName = to_nfc(e.familyName);
      e.givenName = to_nfc(e.givenName);
    }
  template <class T>
  void operator()(T&) const {}
};

void normalize_text(Entity& entity) { std::visit(TextNormalizer{}, entity); }

std::string describe(const EntityRef& ref) {
  return std::string(to_string(ref.kind)) + ":" + std::to_string(ref.id);
}

std::string describe(const std::vector<EntityRef>& refs) {
  std::string out;
  for (const auto& r : refs) {
    if (!out.empty()) out += ", ";
    out += describe(r);
  }
  return out;
}

std::string_view subdir_for(MediaKind kind) { return kind == MediaKind::Sound ? "sound" : "image"; }

}  // namespace

// ---------------------------------------------------------------------------

fs::path resolve_data_root(const std::optional<fs::path>& flag) {
  if (flag && !flag->empty()) return *flag;
  if (const char* env = std::getenv("LOGOMON_DATA"); env && *env) return fs::path(env);
  return fs::path("logomon-data");
}

struct Store::Impl {
  fs::path root;
  StoreOptions options;
  std::unique_ptr<sql::Connection> db;
  mutable std::recursive_mutex mutex;
  int depth = 0;
  int savepointCounter = 0;
  // File operations that must follow the outermost transaction's fate.
  std::vector<fs::path> removeOnCommit;
  std::vector<fs::path> removeOnRollback;

  sql::Statement prepare(std::string_view text) const { return sql::Statement(*db, text); }

  void begin() {
    if (depth == 0) {
      db->exec("BEGIN IMMEDIATE");
    }
    ++depth;
    db->exec("SAVEPOINT sp" + std::to_string(depth));
  }

  void release() {
    db->exec("RELEASE sp" + std::to_string(depth));
    --depth;
    if (depth == 0) {
      db->exec("COMMIT");
      for (const auto& p : removeOnCommit) {
        std::error_code ec;
        fs::remove(p, ec);
      }
      removeOnCommit.clear();
      removeOnRollback.clear();
    }
  }

  void rollback() noexcept {
    try {
      db->exec("ROLLBACK TO sp" + std::to_string(depth));
      db->exec("RELEASE sp" + std::to_string(depth));
    } catch (...) {
    }
    --depth;
    if (depth == 0) {
      try {
        db->exec("ROLLBACK");
      } catch (...) {
      }
      for (const auto& p : removeOnRollback) {
        std::error_code ec;
        fs::remove(p, ec);
      }
      removeOnCommit.clear();
      removeOnRollback.clear();
    }
  }

  // -- reads ---------------------------------------------------------------

  std::vector<Entity> select(EntityKind kind, const std::string& where,
                             const std::vector<Value>& params, const std::string& tail = "") const {
    const auto& spec = spec_for(kind);
    auto stmt = prepare(select_sql(spec) + (where.empty() ? "" : " WHERE " + where) + tail);
    for (std::size_t i = 0; i < params.size(); ++i) stmt.bind(static_cast<int>(i + 1), params[i]);
    std::vector<Entity> out;
    while (stmt.step()) {
      std::vector<Value> row;
      for (std::size_t c = 0; c < spec.columns.size(); ++c)
        row.push_back(stmt.value(static_cast<int>(c + 1)));
      out.push_back(decode_row(kind, stmt.int64(0), row));
    }
    for (auto& e : out)
      if (auto* t = std::get_if<PredefinedHomework>(&e)) load_template_children(*t);
    return out;
  }

  void load_template_children(PredefinedHomework& t) const {
    auto items = prepare(
        "SELECT exercise_id, success_threshold_percent FROM template_exercises "
        "WHERE template_id = ?1 ORDER BY position");
    items.bind(1, t.id);
    while (items.step())
      t.exerciseItems.push_back({items.int64(0), static_cast<int>(items.int64(1))});
    auto refs = prepare(
        "SELECT legacy_table, legacy_id FROM template_legacy_refs "
        "WHERE template_id = ?1 ORDER BY legacy_table, position");
    refs.bind(1, t.id);
    while (refs.step()) {
      const auto table = legacy_table_from_string(refs.text(0)).value_or(LegacyTable::Deficiente);
      LegacyRef ref{table, refs.int64(1)};
      (table == LegacyTable::Teste ? t.testRefs : t.deficiencyRefs).push_back(ref);
    }
  }

  std::optional<Entity> find(EntityKind kind, EntityId id) const {
    auto rows = select(kind, "id = ?1", {Value{id}});
    if (rows.empty()) return std::nullopt;
    return std::move(rows.front());
  }

  bool exists(EntityKind kind, EntityId id) const {
    auto stmt = prepare("SELECT 1 FROM " + std::string(spec_for(kind).table) + " WHERE id = ?1");
    stmt.bind(1, id);
    return stmt.step();
  }

  std::int64_t scalar(const std::string& text, const std::vector<Value>& params) const {
    auto stmt = prepare(text);
    for (std::size_t i = 0; i < params.size(); ++i) stmt.bind(static_cast<int>(i + 1), params[i]);
    return stmt.step() ? stmt.int64(0) : 0;
  }

  std::vector<EntityRef> referrers(EntityKind kind, EntityId id) const {
    std::set<EntityRef> found;
    for (const auto& rel : kRelations) {
      if (rel.target != kind) continue;
      auto stmt = prepare("SELECT DISTINCT " + std::string(rel.idColumn) + " FROM " +
                          std::string(rel.table) + " WHERE " + std::string(rel.column) + " = ?1");
      stmt.bind(1, id);
      while (stmt.step()) found.insert({rel.referrer, stmt.int64(0)});
    }
    return {found.begin(), found.end()};
  }

  // -- writes --------------------------------------------------------------

  [[noreturn]] static void unique(const std::string& what) {
    throw Error(ErrorCode::UniquenessViolation, what);
  }

  bool other_row(const std::string& table, const std::string& where,
                 const std::vector<Value>& params, EntityId self) const {
    auto all = params;
    all.push_back(self);
    const auto n = static_cast<int>(all.size());
    return scalar("SELECT COUNT(*) FROM " + table + " WHERE (" + where + ") AND id <> ?" +
                      std::to_string(n),
                  all) > 0;
  }

  int configuration_word_count(EntityId exerciseId) const {
    return static_cast<int>(
        scalar("SELECT COUNT(*) FROM exercise_configurations WHERE exercise_id = ?1", {exerciseId}));
  }

  void check_context(const Entity& entity, EntityId self) {
    struct Checker {
      Impl& s;
      EntityId self;

      void operator()(const MediaAsset& e) const {
        if (s.other_row("media_assets", "kind = ?1 AND filename = ?2",
                        {std::string(to_string(e.kind)), e.filename}, self))
          throw Error(ErrorCode::NameCollision,
                      "asset name already registered: " + std::string(to_string(e.kind)) + "/" +
                          e.filename);
        const auto path = s.root / "assets" / subdir_for(e.kind) / e.filename;
        if (!fs::is_regular_file(path))
          throw Error(ErrorCode::AssetMissing, "asset file missing: " + path.string());
        if (self) {
          if (auto old = s.find(EntityKind::MediaAsset, self)) {
            const auto& prev = std::get<MediaAsset>(*old);
            if (prev.kind != e.kind && !s.referrers(EntityKind::MediaAsset, self).empty()) {
              ValidationResult r;
              r.add("kind", "asset-kind-change", "cannot change the kind of a referenced asset");
              r.throw_if_failed("MediaAsset");
            }
          }
        }
      }
      void operator()(const Word& e) const {
        validate_word(e, [this](EntityId id) -> std::optional<MediaKind> {
          auto asset = s.find(EntityKind::MediaAsset, id);
          if (!asset) return std::nullopt;
          return std::get<MediaAsset>(*asset).kind;
        }).throw_if_failed("Word");
        if (!self) return;
        for (const auto& link : s.partners(self)) {
          const auto partner = std::get<Word>(*s.find(EntityKind::Word, link.partnerWordId));
          if (partner.text == e.text) {
            ValidationResult r;
            r.add("text", "paronym-texts-equal", "text would equal its paronym partner's text");
            r.throw_if_failed("Word");
          }
        }
      }
      void operator()(const ParonymPair& e) const {
        const auto a = std::get<Word>(*s.find(EntityKind::Word, e.wordAId));
        const auto b = std::get<Word>(*s.find(EntityKind::Word, e.wordBId));
        if (a.text == b.text) {
          ValidationResult r;
          r.add("wordBId", "paronym-texts-equal", "paronym words must have distinct texts");
          r.throw_if_failed("ParonymPair");
        }
        if (s.other_row("paronym_pairs",
                        "(word_a_id = ?1 AND word_b_id = ?2) OR (word_a_id = ?2 AND word_b_id = ?1)",
                        {e.wordAId, e.wordBId}, self))
          unique("paronym pair {" + std::to_string(e.wordAId) + ", " + std::to_string(e.wordBId) +
                 "} already exists");
      }
      void operator()(const ExerciseType& e) const {
        if (s.other_row("exercise_types", "name = ?1", {e.name}, self))
          unique("exercise type name already used: " + e.name);
      }
      void operator()(const ExerciseSubtype& e) const {
        if (s.other_row("exercise_subtypes", "name = ?1", {e.name}, self))
          unique("exercise subtype name already used: " + e.name);
      }
      void operator()(const TargetSound& e) const {
        if (s.other_row("target_sounds", "label = ?1", {e.label}, self))
          unique("target sound already exists: " + e.label);
      }
      void operator()(const Association& e) const {
        if (s.other_row("associations", "type_id = ?1 AND subtype_id = ?2 AND sound_id = ?3",
                        {e.typeId, e.subtypeId, e.soundId}, self))
          unique("association triple already exists");
      }
      void operator()(const Instructions&) const {}
      void operator()(const Exercise&) const {}
      void operator()(const ExerciseConfiguration& e) const {
        if (e.paronymId) {
          const auto pair = std::get<ParonymPair>(*s.find(EntityKind::ParonymPair, *e.paronymId));
          if (pair.wordAId != e.wordId && pair.wordBId != e.wordId) {
            ValidationResult r;
            r.add("paronymId", "paronym-word-mismatch", "the paronym pair does not contain wordId");
            r.throw_if_failed("ExerciseConfiguration");
          }
        }
        if (s.other_row("exercise_configurations", "exercise_id = ?1 AND word_id = ?2",
                        {e.exerciseId, e.wordId}, self))
          unique("word " + std::to_string(e.wordId) + " already configured for exercise " +
                 std::to_string(e.exerciseId));
      }
      void operator()(const PredefinedHomework& e) const {
        if (!self) return;
        auto old = s.find(EntityKind::PredefinedHomework, self);
        if (!old || std::get<PredefinedHomework>(*old) == e) return;
        auto refs = s.referrers(EntityKind::PredefinedHomework, self);
        if (!refs.empty())
          throw Error(ErrorCode::StillReferenced,
                      "template is in use by assignments and cannot change: " + describe(refs),
                      refs);
      }
      void operator()(const Child&) const {}
      void operator()(const HomeworkAssignment&) const {}
      void operator()(const HomeworkAttemptRecord& e) const {
        const auto assignment =
            std::get<HomeworkAssignment>(*s.find(EntityKind::HomeworkAssignment, e.assignmentId));
        const auto tmpl = std::get<PredefinedHomework>(
            *s.find(EntityKind::PredefinedHomework, assignment.predefinedHomeworkId));
        const bool member = std::any_of(tmpl.exerciseItems.begin(), tmpl.exerciseItems.end(),
                                        [&](const auto& item) { return item.exerciseId == e.exerciseId; });
        if (!member)
          throw Error(ErrorCode::UnknownExercise,
                      "exercise " + std::to_string(e.exerciseId) + " is not part of the template");
        validate_attempt_record(e, s.configuration_word_count(e.exerciseId))
            .throw_if_failed("HomeworkAttemptRecord");
        if (s.other_row("attempt_records",
                        "assignment_id = ?1 AND exercise_id = ?2 AND attempt_index = ?3",
                        {e.assignmentId, e.exerciseId, std::int64_t{e.attemptIndex}}, self))
          unique("attempt " + std::to_string(e.attemptIndex) + " already recorded");
      }
    };
    std::visit(Checker{*this, self}, entity);
  }

  std::vector<PartnerLink> partners(EntityId wordId) const {
    auto stmt = prepare(
        "SELECT id, CASE WHEN word_a_id = ?1 THEN word_b_id ELSE word_a_id END "
        "FROM paronym_pairs WHERE word_a_id = ?1 OR word_b_id = ?1 ORDER BY id");
    stmt.bind(1, wordId);
    std::vector<PartnerLink> out;
    while (stmt.step()) out.push_back({stmt.int64(0), stmt.int64(1)});
    return out;
  }

  EntityId put(Entity entity) {
    normalize_text(entity);
    const auto kind = kind_of(entity);
    const auto self = id_of(entity);
    if (self < 0) throw Error(ErrorCode::ValidationFailed, "ids must be positive");

    if (const auto* pair = std::get_if<ParonymPair>(&entity); pair && pair->wordAId == pair->wordBId)
      throw Error(ErrorCode::UniquenessViolation, "self-pair: a word cannot be its own paronym");

    validate_intrinsic(entity, options.media).throw_if_failed(to_string(kind));

    for (const auto& ref : references_of(entity)) {
      if (!exists(ref.kind, ref.id))
        throw Error(ErrorCode::ReferentialIntegrity, "missing reference " + describe(ref),
                    std::vector<EntityRef>{ref});
    }
    check_context(entity, self);

    const auto& spec = spec_for(kind);
    auto stmt = prepare(upsert_sql(spec));
    if (self) stmt.bind(1, self); else stmt.bind_null(1);
    const auto row = std::visit(RowEncoder{}, entity);
    for (std::size_t i = 0; i < row.size(); ++i) stmt.bind(static_cast<int>(i + 2), row[i]);
    stmt.run();
    const EntityId id = self ? self : db->last_insert_rowid();

    if (const auto* t = std::get_if<PredefinedHomework>(&entity)) write_template_children(id, *t);
    return id;
  }

  void write_template_children(EntityId id, const PredefinedHomework& t) {
    auto clear = prepare("DELETE FROM template_exercises WHERE template_id = ?1");
    clear.bind(1, id).run();
    auto clearRefs = prepare("DELETE FROM template_legacy_refs WHERE template_id = ?1");
    clearRefs.bind(1, id).run();
    std::int64_t position = 0;
    for (const auto& item : t.exerciseItems) {
      auto ins = prepare(
          "INSERT INTO template_exercises(template_id, position, exercise_id, "
          "success_threshold_percent) VALUES(?1, ?2, ?3, ?4)");
      ins.bind(1, id).bind(2, position++).bind(3, item.exerciseId);
      ins.bind(4, std::int64_t{item.successThresholdPercent}).run();
    }
    auto write_refs = [&](const std::vector<LegacyRef>& refs) {
      std::int64_t pos = 0;
      for (const auto& ref : refs) {
        auto ins = prepare(
            "INSERT INTO template_legacy_refs(template_id, legacy_table, position, legacy_id) "
            "VALUES(?1, ?2, ?3, ?4)");
        ins.bind(1, id).bind(2, to_string(ref.table)).bind(3, pos++).bind(4, ref.id).run();
      }
    };
    write_refs(t.deficiencyRefs);
    write_refs(t.testRefs);
  }

  void erase(EntityKind kind, EntityId id) {
    auto existing = find(kind, id);
    if (!existing)
      throw Error(ErrorCode::NotFound, describe(EntityRef{kind, id}) + " not found");
    auto refs = referrers(kind, id);
    if (!refs.empty())
      throw Error(ErrorCode::StillReferenced,
                  describe(EntityRef{kind, id}) + " is still referenced by " + describe(refs), refs);
    if (kind == EntityKind::PredefinedHomework) {
      prepare("DELETE FROM template_exercises WHERE template_id = ?1").bind(1, id).run();
      prepare("DELETE FROM template_legacy_refs WHERE template_id = ?1").bind(1, id).run();
    }
    if (kind == EntityKind::HomeworkAssignment)
      prepare("DELETE FROM exported_manifests WHERE assignment_id = ?1").bind(1, id).run();
    prepare("DELETE FROM " + std::string(spec_for(kind).table) + " WHERE id = ?1").bind(1, id).run();
    if (const auto* asset = std::get_if<MediaAsset>(&*existing))
      removeOnCommit.push_back(root / "assets" / subdir_for(asset->kind) / asset->filename);
  }
};

// ---------------------------------------------------------------------------

Store::Store(std::unique_ptr<Impl> impl) : impl_(std::move(impl)) {}
Store::Store(Store&&) noexcept = default;
Store& Store::operator=(Store&&) noexcept = default;
Store::~Store() = default;

Store Store::open(const fs::path& root, StoreOptions options) {
  auto impl = std::make_unique<Impl>();
  impl->root = root;
  impl->options = std::move(options);
  try {
    fs::create_directories(root / "db");
    fs::create_directories(root / "assets" / "sound");
    fs::create_directories(root / "assets" / "image");
    impl->db = std::make_unique<sql::Connection>((root / "db" / "logomon.db").string());
    impl->db->exec("PRAGMA journal_mode = WAL");
    impl->db->exec("PRAGMA synchronous = FULL");
    impl->db->exec("PRAGMA foreign_keys = ON");
    impl->db->exec(kSchema);
  } catch (const std::exception& e) {
    throw Error(ErrorCode::StoreOpenFailure, "cannot open store at " + root.string() + ": " + e.what());
  }
  return Store(std::move(impl));
}

Store::Transaction::Transaction(Store& store) : store_(store), lock_(store.impl_->mutex) {
  store_.impl_->begin();
}

Store::Transaction::~Transaction() {
  if (!done_) store_.impl_->rollback();
}

void Store::Transaction::commit() {
  store_.impl_->release();
  done_ = true;
}

const fs::path& Store::root() const { return impl_->root; }
fs::path Store::asset_root() const { return impl_->root / "assets"; }
fs::path Store::asset_path(const MediaAsset& asset) const {
  return asset_root() / subdir_for(asset.kind) / asset.filename;
}
const MediaPolicy& Store::media_policy() const { return impl_->options.media; }

namespace {

template <class F>
decltype(auto) translate_sql(F&& fn) {
  try {
    return fn();
  } catch (const sql::SqlError& e) {
    if (e.constraint()) throw Error(ErrorCode::UniquenessViolation, e.what());
    throw;
  }
}

}  // namespace

EntityId Store::put(Entity entity) {
  return atomically([&] { return translate_sql([&] { return impl_->put(std::move(entity)); }); });
}

Entity Store::get(EntityKind kind, EntityId id) const {
  auto found = find(kind, id);
  if (!found) throw Error(ErrorCode::NotFound, describe(EntityRef{kind, id}) + " not found");
  return std::move(*found);
}

std::optional<Entity> Store::find(EntityKind kind, EntityId id) const {
  std::lock_guard lock(impl_->mutex);
  return impl_->find(kind, id);
}

bool Store::exists(EntityKind kind, EntityId id) const {
  std::lock_guard lock(impl_->mutex);
  return impl_->exists(kind, id);
}

std::vector<Entity> Store::list(EntityKind kind, std::size_t limit, std::size_t offset) const {
  std::lock_guard lock(impl_->mutex);
  const auto lim = limit == kNoLimit ? std::int64_t{-1} : static_cast<std::int64_t>(limit);
  return impl_->select(kind, "", {}, " ORDER BY id LIMIT " + std::to_string(lim) + " OFFSET " +
                                         std::to_string(offset));
}

std::size_t Store::count(EntityKind kind) const {
  std::lock_guard lock(impl_->mutex);
  return static_cast<std::size_t>(
      impl_->scalar("SELECT COUNT(*) FROM " + std::string(spec_for(kind).table), {}));
}

void Store::erase(EntityKind kind, EntityId id) {
  atomically([&] { translate_sql([&] { impl_->erase(kind, id); }); });
}

std::vector<EntityRef> Store::referrers(EntityKind kind, EntityId id) const {
  std::lock_guard lock(impl_->mutex);
  return impl_->referrers(kind, id);
}

std::optional<MediaAsset> Store::find_asset_by_filename(MediaKind kind,
                                                        std::string_view filename) const {
  std::lock_guard lock(impl_->mutex);
  auto rows = impl_->select(EntityKind::MediaAsset, "kind = ?1 AND filename = ?2",
                            {std::string(to_string(kind)), to_nfc(filename)});
  if (rows.empty()) return std::nullopt;
  return std::get<MediaAsset>(rows.front());
}

MediaAsset Store::register_media_asset(MediaKind kind, const fs::path& source) {
  std::error_code ec;
  if (!fs::is_regular_file(source, ec))
    throw Error(ErrorCode::SourceMissing, "source file not found: " + source.string());
  const auto filename = to_nfc(source.filename().string());
  if (!impl_->options.media.accepts(kind, filename))
    throw Error(ErrorCode::WrongExtension,
                filename + " is not an allowed " + std::string(to_string(kind)) + " file");

  return atomically([&] {
    if (find_asset_by_filename(kind, filename))
      throw Error(ErrorCode::NameCollision,
                  "asset name already registered: " + std::string(subdir_for(kind)) + "/" + filename);
    const auto target = asset_root() / subdir_for(kind) / filename;
    fs::copy_file(source, target, fs::copy_options::overwrite_existing);
    impl_->removeOnRollback.push_back(target);
    MediaAsset asset{0, kind, filename};
    asset.id = impl_->put(asset);
    return asset;
  });
}

std::vector<Exercise> Store::query_exercises(const ExerciseFilter& filter) const {
  std::lock_guard lock(impl_->mutex);
  auto opt = [](const auto& o) -> Value {
    if (o) return static_cast<std::int64_t>(*o);
    return std::monostate{};
  };
  auto rows = impl_->select(
      EntityKind::Exercise,
      "association_id IN (SELECT id FROM associations WHERE (?1 IS NULL OR type_id = ?1) "
      "AND (?2 IS NULL OR subtype_id = ?2) AND (?3 IS NULL OR sound_id = ?3)) "
      "AND (?4 IS NULL OR difficulty >= ?4) AND (?5 IS NULL OR difficulty <= ?5)",
      {opt(filter.typeId), opt(filter.subtypeId), opt(filter.soundId), opt(filter.difficultyMin),
       opt(filter.difficultyMax)},
      " ORDER BY difficulty, title, id");
  std::vector<Exercise> out;
  for (auto& e : rows) out.push_back(std::get<Exercise>(std::move(e)));
  return out;
}

std::vector<PartnerLink> Store::paronym_partners(EntityId wordId) const {
  std::lock_guard lock(impl_->mutex);
  if (!impl_->exists(EntityKind::Word, wordId))
    throw Error(ErrorCode::NotFound, "Word:" + std::to_string(wordId) + " not found");
  return impl_->partners(wordId);
}

std::vector<ExerciseConfiguration> Store::configurations_of(EntityId exerciseId) const {
  std::lock_guard lock(impl_->mutex);
  std::vector<ExerciseConfiguration> out;
  for (auto& e : impl_->select(EntityKind::ExerciseConfiguration, "exercise_id = ?1",
                               {Value{exerciseId}}, " ORDER BY id"))
    out.push_back(std::get<ExerciseConfiguration>(std::move(e)));
  return out;
}

std::vector<HomeworkAttemptRecord> Store::attempts_of(EntityId assignmentId) const {
  std::lock_guard lock(impl_->mutex);
  std::vector<HomeworkAttemptRecord> out;
  for (auto& e : impl_->select(EntityKind::HomeworkAttemptRecord, "assignment_id = ?1",
                               {Value{assignmentId}}, " ORDER BY exercise_id, attempt_index"))
    out.push_back(std::get<HomeworkAttemptRecord>(std::move(e)));
  return out;
}

std::vector<HomeworkAssignment> Store::assignments_of_child(EntityId childId) const {
  std::lock_guard lock(impl_->mutex);
  std::vector<HomeworkAssignment> out;
  for (auto& e : impl_->select(EntityKind::HomeworkAssignment, "child_id = ?1", {Value{childId}},
                               " ORDER BY assigned_date, id"))
    out.push_back(std::get<HomeworkAssignment>(std::move(e)));
  return out;
}

void Store::remember_manifest(EntityId assignmentId, std::string_view digest,
                              std::string_view body) {
  atomically([&] {
    auto stmt = impl_->prepare(
        "INSERT OR IGNORE INTO exported_manifests(assignment_id, digest, body) VALUES(?1, ?2, ?3)");
    stmt.bind(1, assignmentId).bind(2, digest).bind(3, body).run();
  });
}

bool Store::has_manifest(EntityId assignmentId, std::string_view digest) const {
  std::lock_guard lock(impl_->mutex);
  return impl_->scalar(
             "SELECT COUNT(*) FROM exported_manifests WHERE assignment_id = ?1 AND digest = ?2",
             {assignmentId, std::string(digest)}) > 0;
}

std::vector<std::string> Store::audit() const {
  std::lock_guard lock(impl_->mutex);
  std::vector<std::string> findings;
  for (auto kind : kAllEntityKinds) {
    for (const auto& entity : impl_->select(kind, "", {})) {
      const EntityRef self{kind, id_of(entity)};
      for (const auto& ref : references_of(entity))
        if (!impl_->exists(ref.kind, ref.id))
          findings.push_back(describe(self) + " -> missing " + describe(ref));
      if (const auto* asset = std::get_if<MediaAsset>(&entity))
        if (!fs::is_regular_file(asset_path(*asset)))
          findings.push_back(describe(self) + " -> missing file " + asset->filename);
    }
  }
  auto orphans = impl_->prepare(
      "SELECT template_id FROM template_exercises WHERE template_id NOT IN "
      "(SELECT id FROM predefined_homework) UNION SELECT template_id FROM template_legacy_refs "
      "WHERE template_id NOT IN (SELECT id FROM predefined_homework)");
  while (orphans.step())
    findings.push_back("orphan template junction row for template " +
                       std::to_string(orphans.int64(0)));
  return findings;
}

json Store::export_json() const {
  std::lock_guard lock(impl_->mutex);
  json doc = json::object();
  doc["formatVersion"] = 1;
  for (auto kind : kAllEntityKinds) {
    json arr = json::array();
    for (const auto& e : impl_->select(kind, "", {}, " ORDER BY id")) arr.push_back(to_json(e));
    doc[std::string(collection_name(kind))] = std::move(arr);
  }
  return doc;
}

void Store::export_to_directory(const fs::path& dir) const {
  const auto doc = export_json();
  fs::create_directories(dir);
  for (auto kind : kAllEntityKinds) {
    const std::string name(collection_name(kind));
    write_file(dir / (name + ".json"), doc.at(name).dump(2) + "\n");
  }
  for (const auto& e : doc.at(std::string(collection_name(EntityKind::MediaAsset)))) {
    const auto asset = decode<MediaAsset>(e);
    const auto target = dir / "assets" / subdir_for(asset.kind) / asset.filename;
    fs::create_directories(target.parent_path());
    fs::copy_file(asset_path(asset), target, fs::copy_options::overwrite_existing);
  }
}

void Store::seed(const json& document) {
  if (!document.is_object())
    throw Error(ErrorCode::ValidationFailed, "seed document must be a JSON object");
  for (const auto& [key, value] : document.items()) {
    if (key == "formatVersion") {
      if (value != 1) throw Error(ErrorCode::ValidationFailed, "unsupported seed formatVersion");
      continue;
    }
    if (!entity_kind_from_collection(key))
      throw Error(ErrorCode::ValidationFailed, "unknown collection in seed: " + key);
    if (!value.is_array())
      throw Error(ErrorCode::ValidationFailed, "collection " + key + " must be an array");
  }
  // Decode everything first so malformed documents never touch the store.
  std::vector<Entity> entities;
  for (auto kind : kAllEntityKinds) {
    const auto it = document.find(std::string(collection_name(kind)));
    if (it == document.end()) continue;
    for (const auto& item : *it) entities.push_back(entity_from_json(kind, item));
  }
  atomically([&] {
    for (auto& e : entities) translate_sql([&] { return impl_->put(std::move(e)); });
  });
}

void Store::seed_from_directory(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw Error(ErrorCode::SourceMissing, "not a directory: " + dir.string());
  json doc = json::object();
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (!entry.is_regular_file() || entry.path().extension() != ".json") continue;
    const auto name = entry.path().stem().string();
    if (!entity_kind_from_collection(name))
      throw Error(ErrorCode::ValidationFailed, "unknown seed file: " + entry.path().filename().string());
    try {
      doc[name] = json::parse(read_file(entry.path()));
    } catch (const json::parse_error& e) {
      throw Error(ErrorCode::ValidationFailed, entry.path().filename().string() + ": " + e.what());
    }
  }
  atomically([&] {
    for (auto kind : {MediaKind::Sound, MediaKind::Image}) {
      const auto from = dir / "assets" / subdir_for(kind);
      if (!fs::is_directory(from)) continue;
      for (const auto& entry : fs::directory_iterator(from)) {
        if (!entry.is_regular_file()) continue;
        const auto target = asset_root() / subdir_for(kind) / entry.path().filename();
        if (fs::exists(target)) {
          if (read_file(target) == read_file(entry.path())) continue;
          if (find_asset_by_filename(kind, entry.path().filename().string()))
            throw Error(ErrorCode::NameCollision,
                        "different file already registered as " + entry.path().filename().string());
        }
        fs::copy_file(entry.path(), target, fs::copy_options::overwrite_existing);
        impl_->removeOnRollback.push_back(target);
      }
    }
    seed(doc);
  });
}

}  // namespace logomon
