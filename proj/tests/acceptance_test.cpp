// Acceptance suite: one PASS/FAIL line per criterion. Exit status is
// non-zero when any criterion fails. `acceptance_test N` runs criterion N only.

#include <httplib.h>

#include <ctime>
#include <functional>
#include <iostream>
#include <map>
#include <numeric>
#include <random>
#include <set>
#include <sstream>

#include "logomon/api.hpp"
#include "logomon/cli.hpp"
#include "logomon/device_sync.hpp"
#include "logomon/digest.hpp"
#include "logomon/homework.hpp"
#include "logomon/zip.hpp"
#include "support/fixtures.hpp"

using namespace logomon;
using logomon::testing::TempDir;
namespace fs = std::filesystem;

namespace {

struct Failures {
  std::vector<std::string> items;
  void expect(bool ok, const std::string& what) {
    if (!ok && items.size() < 20) items.push_back(what);
    if (!ok && items.size() == 20) items.push_back("...");
  }
};

template <class F>
std::optional<ErrorCode> error_of(F&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  return std::nullopt;
}

long epoch_day(const Date& d) {
  std::tm tm{};
  tm.tm_year = static_cast<int>(d.year()) - 1900;
  tm.tm_mon = static_cast<int>(static_cast<unsigned>(d.month())) - 1;
  tm.tm_mday = static_cast<int>(static_cast<unsigned>(d.day()));
  return static_cast<long>(timegm(&tm) / 86400);
}

Date from_epoch_day(long day) {
  const time_t t = static_cast<time_t>(day) * 86400;
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[16];
  std::strftime(buf, sizeof buf, "%Y-%m-%d", &tm);
  return *parse_date(buf);
}

// ---------------------------------------------------------------------------
// 1. Schema fidelity

void schema_fidelity(Failures& f) {
  TempDir dir;
  testing::Catalog c;
  HomeworkAssignment a;
  {
    auto store = Store::open(dir / "data");
    c = testing::build_catalog(store, dir / "scratch");
    a = homework::assign_homework(store, c.child.id, c.tmpl.id, *parse_date("2024-03-01"), 7);
    homework::ingest_report(store, {a.id, *parse_date("2024-03-04"), {{c.paronyms.id, 1, 90, 0}}});
    a.reportDate = *parse_date("2024-03-04");
  }
  auto store = Store::open(dir / "data");
  for (auto kind : kAllEntityKinds)
    f.expect(store.count(kind) >= 1, "no " + std::string(to_string(kind)) + " in the fixture");
  f.expect(store.count(EntityKind::Word) >= 2, "fewer than two words");
  f.expect(store.get<Word>(c.copil.id) == c.copil, "word copil differs after reopen");
  f.expect(store.get<Word>(c.zac.id) == c.zac, "word zac differs after reopen");
  f.expect(store.get<ParonymPair>(c.pair.id) == c.pair, "paronym pair differs");
  f.expect(store.get<ExerciseType>(c.type.id) == c.type, "type differs");
  f.expect(store.get<ExerciseSubtype>(c.subtype.id) == c.subtype, "subtype differs");
  f.expect(store.get<TargetSound>(c.sound.id) == c.sound, "sound differs");
  f.expect(store.get<Association>(c.association.id) == c.association, "association differs");
  f.expect(store.get<Instructions>(c.instructions.id) == c.instructions, "instructions differ");
  f.expect(store.get<Exercise>(c.paronyms.id) == c.paronyms, "exercise differs");
  f.expect(store.get<ExerciseConfiguration>(c.configA.id) == c.configA, "configuration A differs");
  f.expect(store.get<ExerciseConfiguration>(c.configB.id) == c.configB, "configuration B differs");
  f.expect(store.get<PredefinedHomework>(c.tmpl.id) == c.tmpl, "template differs");
  f.expect(store.get<Child>(c.child.id) == c.child, "child differs");
  f.expect(store.get<HomeworkAssignment>(a.id) == a, "assignment differs");
  const auto attempts = store.attempts_of(a.id);
  f.expect(attempts.size() == 1 && attempts[0].achievedPercent == 90, "attempt record differs");
  for (const auto& w : {c.copil, c.copii, c.sac, c.zac}) {
    f.expect(store.exists(EntityKind::MediaAsset, w.soundAssetId), "word sound asset missing");
    f.expect(fs::exists(store.asset_path(store.get<MediaAsset>(w.imageAssetId))), "image file missing");
  }

  // Diacritics byte-exact: U+00E2 and U+0103, U+0219 (s-comma).
  const std::string subtypeBytes = "Identificare cuv\xC3\xA2nt \xC3\xAEn perechi de paronime";
  const std::string instructionBytes = "Ascult\xC4\x83 \xC8\x99i alege imaginea corect\xC4\x83.";
  f.expect(store.get<ExerciseSubtype>(c.subtype.id).name == subtypeBytes, "subtype diacritics changed");
  f.expect(store.get<Instructions>(c.instructions.id).text == instructionBytes,
           "instruction diacritics changed");

  store.export_to_directory(dir / "export");
  auto copy = Store::open(dir / "copy");
  copy.seed_from_directory(dir / "export");
  f.expect(copy.export_json() == store.export_json(), "export/seed round trip differs");
  f.expect(store.audit().empty(), "audit reports findings");
}

// ---------------------------------------------------------------------------
// 2. Validation bounds

void validation_bounds(Failures& f) {
  TempDir dir;
  auto store = Store::open(dir / "data");
  auto c = testing::build_catalog(store, dir / "scratch");

  for (int d = -3; d <= 9; ++d) {
    const auto err = error_of([&] {
      store.put(Exercise{0, "Dificultate " + std::to_string(d), d, c.association.id, c.instructions.id});
    });
    const bool accepted = !err;
    f.expect(accepted == (d >= 1 && d <= 5), "difficulty " + std::to_string(d));
    if (err) f.expect(*err == ErrorCode::ValidationFailed, "difficulty rejection code");
  }

  // achievedPercent: every value through the validator, the boundaries through ingest.
  for (int p = -5; p <= 105; ++p) {
    const bool ok = validate_attempt_record({0, 1, 1, 1, p, 0}, 1).ok();
    f.expect(ok == (p >= 0 && p <= 100), "achievedPercent " + std::to_string(p));
  }
  for (int p : {-1, 0, 100, 101}) {
    const auto a = homework::assign_homework(store, c.child.id, c.tmpl.id, *parse_date("2024-03-01"), 7);
    const auto err = error_of(
        [&] { homework::ingest_report(store, {a.id, *parse_date("2024-03-02"), {{c.listening.id, 1, p, 0}}}); });
    f.expect(!err == (p >= 0 && p <= 100), "ingest achievedPercent " + std::to_string(p));
  }

  for (int days = -2; days <= 3; ++days) {
    const auto err = error_of(
        [&] { homework::assign_homework(store, c.child.id, c.tmpl.id, *parse_date("2024-03-01"), days); });
    f.expect(!err == (days >= 1), "termen " + std::to_string(days));
  }

  // Remaining field bounds.
  for (int t : {-1, 0, 100, 101}) {
    PredefinedHomework tmpl{0, "t", 1, {{c.paronyms.id, t}}, {}, {}};
    f.expect(validate_template(tmpl).ok() == (t >= 0 && t <= 100), "threshold " + std::to_string(t));
  }
  for (int r : {0, 1}) {
    PredefinedHomework tmpl{0, "t", r, {{c.paronyms.id, 50}}, {}, {}};
    f.expect(validate_template(tmpl).ok() == (r >= 1), "repetitions " + std::to_string(r));
  }
  for (int flag : {-1, 0, 1, 2}) {
    ExerciseConfiguration cfg{0, 1, 1, std::nullopt, 0, flag, 0};
    f.expect(validate_configuration(cfg).ok() == (flag == 0 || flag == 1), "param2 " + std::to_string(flag));
  }
  for (int idx : {0, 1}) f.expect(validate_attempt_record({0, 1, 1, idx, 50, 0}, 2).ok() == (idx >= 1), "attemptIndex");
  for (int wrong : {-1, 0, 2, 3})
    f.expect(validate_attempt_record({0, 1, 1, 1, 50, wrong}, 2).ok() == (wrong >= 0 && wrong <= 2),
             "initiallyWrongWords " + std::to_string(wrong));
}

// ---------------------------------------------------------------------------
// 3. Article rule

void article_rule(Failures& f) {
  TempDir dir;
  auto store = Store::open(dir / "data");
  auto c = testing::build_catalog(store, dir / "scratch");
  f.expect(indefinite_article_for(store.get<Word>(c.copil.id)) == "un", "copil must take 'un'");
  f.expect(!indefinite_article_for(store.get<Word>(c.copii.id)).has_value(), "copii takes no article");

  // Declared rule as a table: only article-compatible nouns with a gender
  // take an article; feminine takes "o", masculine and neuter "un".
  const std::map<std::pair<std::string, bool>, std::optional<std::string>> nounRule = {
      {{"none", false}, std::nullopt},      {{"none", true}, std::nullopt},
      {{"Masculine", false}, std::nullopt}, {{"Masculine", true}, "un"},
      {{"Feminine", false}, std::nullopt},  {{"Feminine", true}, "o"},
      {{"Neuter", false}, std::nullopt},    {{"Neuter", true}, "un"},
  };
  int rows = 0;
  for (auto pos : {PartOfSpeech::Noun, PartOfSpeech::Verb, PartOfSpeech::Adjective, PartOfSpeech::Other})
    for (std::optional<Gender> g : {std::optional<Gender>{}, std::optional<Gender>{Gender::Masculine},
                                    std::optional<Gender>{Gender::Feminine}, std::optional<Gender>{Gender::Neuter}})
      for (bool article : {false, true}) {
        Word w;
        w.text = "x";
        w.partOfSpeech = pos;
        w.gender = g;
        w.articleCompatible = article;
        std::optional<std::string> expected;
        if (pos == PartOfSpeech::Noun)
          expected = nounRule.at({g ? std::string(to_string(*g)) : "none", article});
        const auto got = indefinite_article_for(w);
        f.expect((got ? std::optional<std::string>(std::string(*got)) : std::nullopt) == expected,
                 "article row " + std::string(to_string(pos)) + "/" + (g ? std::string(to_string(*g)) : "none") +
                     "/" + (article ? "true" : "false"));
        ++rows;
      }
  f.expect(rows == 32, "truth table size");
}

// ---------------------------------------------------------------------------
// 4. Referential integrity

struct GraphOracle {
  // Incoming references computed from the exported document, independent
  // of the store's own relation table.
  static std::set<EntityRef> referrers(const json& doc, EntityRef target) {
    std::set<EntityRef> out;
    for (auto kind : kAllEntityKinds)
      for (const auto& item : doc[std::string(collection_name(kind))]) {
        const auto entity = entity_from_json(kind, item);
        for (const auto& r : references_of(entity))
          if (r == target) out.insert({kind, id_of(entity)});
      }
    return out;
  }
};

void referential_integrity(Failures& f) {
  TempDir dir;
  auto store = Store::open(dir / "data");
  std::mt19937_64 rng(20240301);
  int serial = 0;
  int rejectedDeletes = 0, danglingPuts = 0, deletes = 0, puts = 0;

  auto ids = [&](EntityKind kind) {
    std::vector<EntityId> out;
    for (const auto& e : store.list(kind)) out.push_back(id_of(e));
    return out;
  };
  // Existing id with probability 0.9, otherwise one that never exists.
  auto pick = [&](EntityKind kind, bool& dangling) -> EntityId {
    const auto existing = ids(kind);
    if (existing.empty() || rng() % 10 == 0) {
      dangling = true;
      return 1'000'000 + static_cast<EntityId>(rng() % 1000);
    }
    return existing[rng() % existing.size()];
  };

  auto random_put = [&]() {
    const int choice = static_cast<int>(rng() % 12);
    const auto name = "n" + std::to_string(++serial);
    bool dangling = false;
    Entity entity;
    switch (choice) {
      case 0: {
        const bool sound = rng() % 2;
        const auto file = testing::make_file(dir / "scratch", name + (sound ? ".wav" : ".png"), name);
        store.register_media_asset(sound ? MediaKind::Sound : MediaKind::Image, file);
        return std::make_pair(true, false);
      }
      case 1: {
        Word w;
        w.text = name;
        w.partOfSpeech = PartOfSpeech::Noun;
        w.gender = Gender::Feminine;
        // Pick assets of the right kind.
        std::vector<EntityId> sounds, images;
        for (auto& a : store.list_all<MediaAsset>()) (a.kind == MediaKind::Sound ? sounds : images).push_back(a.id);
        if (sounds.empty() || images.empty() || rng() % 10 == 0) dangling = true;
        w.soundAssetId = sounds.empty() || dangling ? 2'000'000 : sounds[rng() % sounds.size()];
        w.imageAssetId = images.empty() || dangling ? 2'000'001 : images[rng() % images.size()];
        entity = w;
        break;
      }
      case 2: {
        const auto words = ids(EntityKind::Word);
        if (words.size() < 2) return std::make_pair(false, false);
        const auto a = words[rng() % words.size()];
        auto b = pick(EntityKind::Word, dangling);
        if (a == b) return std::make_pair(false, false);
        entity = ParonymPair{0, a, b};
        break;
      }
      case 3: entity = ExerciseType{0, name, name + ".exe"}; break;
      case 4: entity = ExerciseSubtype{0, name, ""}; break;
      case 5: entity = TargetSound{0, name}; break;
      case 6:
        entity = Association{0, pick(EntityKind::ExerciseType, dangling), pick(EntityKind::ExerciseSubtype, dangling),
                             pick(EntityKind::TargetSound, dangling)};
        break;
      case 7: entity = Instructions{0, name}; break;
      case 8:
        entity = Exercise{0, name, 1 + static_cast<int>(rng() % 5), pick(EntityKind::Association, dangling),
                          pick(EntityKind::Instructions, dangling)};
        break;
      case 9:
        entity = ExerciseConfiguration{0, pick(EntityKind::Exercise, dangling), pick(EntityKind::Word, dangling),
                                       std::nullopt, 100, 0, 0};
        break;
      case 10: {
        PredefinedHomework t;
        t.description = name;
        t.repetitionsPerDay = 1;
        t.exerciseItems = {{pick(EntityKind::Exercise, dangling), 50}};
        entity = t;
        break;
      }
      default: {
        if (rng() % 2) {
          entity = Child{0, name, "X"};
        } else {
          HomeworkAssignment a;
          a.childId = pick(EntityKind::Child, dangling);
          a.predefinedHomeworkId = pick(EntityKind::PredefinedHomework, dangling);
          a.assignedDate = *parse_date("2024-03-01");
          a.deadlineDays = 5;
          entity = a;
        }
      }
    }
    const auto err = error_of([&] { store.put(entity); });
    if (dangling) {
      ++danglingPuts;
      f.expect(err == ErrorCode::ReferentialIntegrity, "dangling put accepted: " + std::string(to_string(kind_of(entity))));
    }
    return std::make_pair(!err, dangling);
  };

  auto random_delete = [&]() {
    const auto kind = kAllEntityKinds[rng() % kAllEntityKinds.size()];
    const auto existing = ids(kind);
    if (existing.empty()) return;
    const EntityRef target{kind, existing[rng() % existing.size()]};
    const auto before = store.export_json();
    const auto expectedReferrers = GraphOracle::referrers(before, target);
    const auto err = error_of([&] { store.erase(kind, target.id); });
    ++deletes;
    if (!expectedReferrers.empty()) {
      ++rejectedDeletes;
      f.expect(err == ErrorCode::StillReferenced, "referenced delete not rejected");
      f.expect(store.export_json() == before, "rejected delete changed the store");
      const auto reported = store.referrers(kind, target.id);
      f.expect(std::set<EntityRef>(reported.begin(), reported.end()) == expectedReferrers,
               "referrers disagree with the graph oracle");
    } else {
      f.expect(!err, "unreferenced delete failed");
      f.expect(!store.exists(kind, target.id), "deleted entity still present");
    }
  };

  for (int sequence = 0; sequence < 1000; ++sequence) {
    const int steps = 1 + static_cast<int>(rng() % 4);
    for (int step = 0; step < steps; ++step) {
      if (rng() % 3 == 0) random_delete();
      else {
        random_put();
        ++puts;
      }
      const auto findings = store.audit();
      f.expect(findings.empty(), "audit failed: " + (findings.empty() ? std::string() : findings.front()));
    }
  }
  f.expect(rejectedDeletes > 50, "too few referenced deletes exercised: " + std::to_string(rejectedDeletes));
  f.expect(danglingPuts > 50, "too few dangling puts exercised");
}

// ---------------------------------------------------------------------------
// 5. Homework lifecycle

void homework_lifecycle(Failures& f) {
  std::mt19937 rng(5);
  const long base = epoch_day(*parse_date("2023-01-01"));
  for (int i = 0; i < 1000; ++i) {
    const long assigned = base + static_cast<long>(rng() % 1000);
    const int termen = 1 + static_cast<int>(rng() % 60);
    const long today = assigned + static_cast<long>(rng() % 90);
    std::optional<long> report;
    if (rng() % 2) report = assigned + static_cast<long>(rng() % 90);

    HomeworkAssignment a;
    a.assignedDate = from_epoch_day(assigned);
    a.deadlineDays = termen;
    if (report) a.reportDate = from_epoch_day(*report);

    std::string expected;
    if (report) expected = *report <= assigned + termen ? "ReportedOnTime" : "ReportedLate";
    else expected = today <= assigned + termen ? "Pending" : "Overdue";
    f.expect(homework::to_string(homework::assignment_status(a, from_epoch_day(today))) == expected,
             "status mismatch at tuple " + std::to_string(i));
  }
  HomeworkAssignment onDue;
  onDue.assignedDate = *parse_date("2024-03-01");
  onDue.deadlineDays = 7;
  onDue.reportDate = *parse_date("2024-03-08");
  f.expect(homework::assignment_status(onDue, *parse_date("2024-04-01")) ==
               homework::AssignmentStatus::ReportedOnTime,
           "report on the due date must be on time");
}

// ---------------------------------------------------------------------------
// 6. Resolution rule

void resolution_rule(Failures& f) {
  auto make = [](std::vector<int> percents) {
    std::vector<HomeworkAttemptRecord> out;
    for (std::size_t i = 0; i < percents.size(); ++i)
      out.push_back({0, 1, 1, static_cast<int>(i + 1), percents[i], 0});
    return out;
  };
  f.expect(homework::evaluate_exercise(1, make({70, 85}), 80).resolved, "[70,85]/80 must resolve");
  f.expect(!homework::evaluate_exercise(1, make({70, 75}), 80).resolved, "[70,75]/80 must not resolve");

  std::mt19937 rng(6);
  for (int i = 0; i < 5000; ++i) {
    std::vector<int> percents(1 + rng() % 6);
    for (auto& p : percents) p = static_cast<int>(rng() % 101);
    const int threshold = static_cast<int>(rng() % 101);
    int best = 0;
    for (int p : percents) best = p > best ? p : best;
    const auto outcome = homework::evaluate_exercise(1, make(percents), threshold);
    f.expect(outcome.bestPercent == best, "best percent");
    f.expect(outcome.resolved == (best >= threshold), "resolution");
  }
}

// ---------------------------------------------------------------------------
// 7. Sync round trip

void sync_round_trip(Failures& f) {
  TempDir dir;
  auto store = Store::open(dir / "data");
  auto c = testing::build_catalog(store, dir / "scratch");
  const auto a = homework::assign_homework(store, c.child.id, c.tmpl.id, *parse_date("2024-03-01"), 7);

  const auto first = sync::build_bundle(store, a.id, {"2024-03-01T10:00:00Z"});
  const auto second = sync::build_bundle(store, a.id, {"2024-03-01T10:00:00Z"});
  f.expect(first.archive == second.archive, "export not byte-identical");
  const auto later = sync::build_bundle(store, a.id, {"2024-03-05T18:30:00Z"});
  auto normalized = later.manifest;
  normalized.exportedAt = first.manifest.exportedAt;
  f.expect(normalized == first.manifest, "manifests differ beyond exportedAt");

  // Single-byte tamper inside the manifest, archive re-packed so it stays readable.
  auto entries = zip::read_archive(first.archive);
  auto& manifest = entries.at(std::string(sync::kManifestEntry));
  manifest[manifest.find("Paronime s/z")] ^= 0x02;
  const auto tamperedArchive = zip::write_archive(entries);
  const auto tampered = sync::simulate_device(std::string_view(tamperedArchive), {0.0, 11, std::nullopt});
  auto before = store.export_json();
  f.expect(error_of([&] { sync::import_results(store, tampered); }) == ErrorCode::DigestMismatch,
           "tampered manifest not rejected with DigestMismatch");
  f.expect(store.export_json() == before, "tampered import changed the store");

  const auto results = sync::simulate_device(std::string_view(first.archive), {0.0, 11, std::nullopt});
  const auto outcomes = sync::import_result_archive(store, sync::write_result_archive(results));
  f.expect(outcomes.size() == 2, "outcome count");
  for (const auto& o : outcomes) f.expect(o.resolved, "exercise not resolved with errorRate 0");
  f.expect(store.get<HomeworkAssignment>(a.id).reportDate.has_value(), "assignment not reported");

  before = store.export_json();
  f.expect(error_of([&] { sync::import_result_archive(store, sync::write_result_archive(results)); }) ==
               ErrorCode::AlreadyReported,
           "duplicate import not rejected");
  f.expect(store.export_json() == before, "duplicate import changed the store");
}

// ---------------------------------------------------------------------------
// 8. Progress oracle

struct Frac {
  std::int64_t n, d;
};

void progress_oracle(Failures& f) {
  TempDir dir;
  auto store = Store::open(dir / "data");
  auto c = testing::build_catalog(store, dir / "scratch");
  std::mt19937 rng(8);

  // A few extra templates over the two exercises.
  std::vector<EntityId> templates{c.tmpl.id};
  templates.push_back(store.put(PredefinedHomework{0, "doar paronime", 1, {{c.paronyms.id, 75}}, {}, {}}));
  templates.push_back(
      store.put(PredefinedHomework{0, "invers", 3, {{c.listening.id, 90}, {c.paronyms.id, 40}}, {}, {}}));

  std::vector<EntityId> children{c.child.id};
  for (int i = 1; i < 10; ++i) children.push_back(store.put(Child{0, "Copil", std::to_string(i)}));

  const long base = epoch_day(*parse_date("2024-01-01"));
  for (int i = 0; i < 30; ++i) {
    const auto child = children[rng() % children.size()];
    const auto tmplId = templates[rng() % templates.size()];
    const auto assigned = from_epoch_day(base + static_cast<long>(rng() % 60));
    const auto a = homework::assign_homework(store, child, tmplId, assigned, 7);
    if (rng() % 5 == 0) continue;  // left unreported
    homework::ReportIntake intake{a.id, from_epoch_day(epoch_day(assigned) + static_cast<long>(rng() % 10)), {}};
    for (const auto& item : store.get<PredefinedHomework>(tmplId).exerciseItems) {
      const int words = static_cast<int>(store.configurations_of(item.exerciseId).size());
      const int n = static_cast<int>(rng() % 6);  // 0..5 attempts
      for (int k = 1; k <= n; ++k)
        intake.records.push_back({item.exerciseId, k, static_cast<int>(rng() % 101),
                                  static_cast<int>(rng() % (words + 1))});
    }
    homework::ingest_report(store, intake);
  }

  // Brute force from raw rows of the exported document.
  const auto doc = store.export_json();
  std::map<EntityId, json> templatesById;
  for (const auto& t : doc["predefinedHomework"]) templatesById[t["id"]] = t;
  std::map<std::pair<EntityId, EntityId>, int> best;  // (assignment, exercise) -> max
  for (const auto& r : doc["attemptRecords"]) {
    auto& b = best[{r["assignmentId"], r["exerciseId"]}];
    b = std::max(b, r["achievedPercent"].get<int>());
  }
  for (const auto child : children) {
    std::vector<json> reported;
    for (const auto& a : doc["homeworkAssignments"])
      if (a["childId"] == child && !a["reportDate"].is_null()) reported.push_back(a);
    std::sort(reported.begin(), reported.end(), [](const json& x, const json& y) {
      return std::make_pair(x["assignedDate"].get<std::string>(), x["id"].get<EntityId>()) <
             std::make_pair(y["assignedDate"].get<std::string>(), y["id"].get<EntityId>());
    });
    const auto summary = homework::child_progress(store, child);
    f.expect(summary.perAssignment.size() == reported.size(), "reported assignment count");
    for (std::size_t i = 0; i < reported.size() && i < summary.perAssignment.size(); ++i) {
      const auto& a = reported[i];
      const auto& items = templatesById.at(a["predefinedHomeworkId"])["exerciseItems"];
      std::int64_t sum = 0;
      int resolved = 0;
      for (const auto& item : items) {
        const auto key = std::make_pair(a["id"].get<EntityId>(), item["exerciseId"].get<EntityId>());
        const int b = best.contains(key) ? best[key] : 0;
        sum += b;
        resolved += b >= item["successThresholdPercent"].get<int>() ? 1 : 0;
      }
      const std::int64_t count = static_cast<std::int64_t>(items.size());
      const auto g = std::gcd(sum, count);
      const Frac expected{sum / g, count / g};
      const auto& got = summary.perAssignment[i];
      f.expect(got.assignmentId == a["id"].get<EntityId>(), "assignment order");
      f.expect(got.meanBestPercent.numerator == expected.n && got.meanBestPercent.denominator == expected.d,
               "mean best percent for assignment " + a["id"].dump());
      f.expect(got.resolvedCount == resolved, "resolved count");
      f.expect(got.exerciseCount == count, "exercise count");
    }
  }
}

// ---------------------------------------------------------------------------
// 9. CLI/API parity

struct CliSide {
  TempDir& dir;
  std::string root;
  Failures& f;
  void run(std::vector<std::string> args) {
    args.insert(args.begin(), {"--data-root", root});
    std::ostringstream out, err;
    const int code = cli::dispatch(args, out, err);
    f.expect(code == 0, "cli failed: " + err.str());
  }
};

struct ApiSide {
  httplib::Client& client;
  Failures& f;
  json call(const std::string& method, const std::string& path, const json& body) {
    auto res = method == "POST" ? client.Post(path, body.dump(), "application/json") : client.Get(path);
    if (!res || res->status >= 300) {
      f.expect(false, method + " " + path + " failed" + (res ? ": " + res->body : std::string()));
      return json();
    }
    return res->body.empty() || res->get_header_value("Content-Type") != "application/json" ? json()
                                                                                          : json::parse(res->body);
  }
  json upload(const std::string& path, const fs::path& file) {
    httplib::MultipartFormDataItems items{{"file", read_file(file), file.filename().string(), ""}};
    auto res = client.Post(path, items);
    f.expect(res && res->status == 201, "upload failed");
    return json::parse(res->body);
  }
};

std::map<std::string, std::string> asset_digests(const fs::path& assets) {
  std::map<std::string, std::string> out;
  if (!fs::exists(assets)) return out;
  for (const auto& e : fs::recursive_directory_iterator(assets))
    if (e.is_regular_file()) out[fs::relative(e.path(), assets).string()] = sha256_file_hex(e.path());
  return out;
}

void cli_api_parity(Failures& f) {
  TempDir dir;
  const auto media = dir / "media";
  testing::make_file(media, "copil.wav", "RIFF-copil");
  testing::make_file(media, "copil.png", "PNG-copil");
  testing::make_file(media, "sac.wav", "RIFF-sac");
  testing::make_file(media, "sac.png", "PNG-sac");

  CliSide cli{dir, (dir / "cli").string(), f};
  auto apiStore = Store::open(dir / "api");
  api::Service service(apiStore, {"127.0.0.1", 0, dir / "api", std::nullopt});
  httplib::Client client("127.0.0.1", service.start());
  ApiSide http{client, f};

  auto compare = [&](const std::string& scenario) {
    const auto cliStore = Store::open(cli.root);
    f.expect(cliStore.export_json() == apiStore.export_json(), "store exports differ after " + scenario);
    f.expect(asset_digests(dir / "cli" / "assets") == asset_digests(dir / "api" / "assets"),
             "asset trees differ after " + scenario);
  };

  // word add
  cli.run({"word", "add", "--text", "copil", "--speaker", "Pop Ana", "--therapist", "--pos", "noun", "--gender",
           "m", "--article", "--sound", (media / "copil.wav").string(), "--image", (media / "copil.png").string()});
  cli.run({"word", "add", "--text", "sac", "--speaker", "Pop Ana", "--pos", "noun", "--gender", "m", "--sound",
           (media / "sac.wav").string(), "--image", (media / "sac.png").string()});
  for (const auto& [text, article] : {std::pair{"copil", true}, std::pair{"sac", false}}) {
    const auto s = http.upload("/assets/sound", media / (std::string(text) + ".wav"));
    const auto i = http.upload("/assets/image", media / (std::string(text) + ".png"));
    http.call("POST", "/words",
              {{"text", text}, {"speakerFamilyName", "Pop"}, {"speakerGivenName", "Ana"},
               {"isTherapistRecording", article}, {"partOfSpeech", "Noun"}, {"partOfSpeechLabel", ""},
               {"gender", "Masculine"}, {"articleCompatible", article}, {"soundAssetId", s["id"]},
               {"imageAssetId", i["id"]}});
  }
  compare("word add");

  // Content needed by the assignment scenarios.
  cli.run({"exercise", "add", "--title", "Ascultare", "--difficulty", "2", "--type", "Auz Fonematic", "--type-app",
           "AuzFonematic.exe", "--subtype", "Identificare", "--subtype-app", "Paronime.exe", "--sound", "s",
           "--instructions", "Ascultă și alege."});
  cli.run({"exercise", "configure", "--exercise", "1", "--word", "1", "--param1", "1500"});
  cli.run({"exercise", "configure", "--exercise", "1", "--word", "2", "--param1", "1500", "--param2", "1"});
  cli.run({"template", "add", "--description", "Tema s", "--repetitions", "2", "--item", "1:80", "--deficiency",
           "3"});
  cli.run({"child", "add", "--family", "Ionescu", "--given", "Maria"});
  http.call("POST", "/exercise-types", {{"name", "Auz Fonematic"}, {"applicationName", "AuzFonematic.exe"}});
  http.call("POST", "/exercise-subtypes", {{"name", "Identificare"}, {"applicationName", "Paronime.exe"}});
  http.call("POST", "/sounds", {{"label", "s"}});
  http.call("POST", "/associations", {{"typeId", 1}, {"subtypeId", 1}, {"soundId", 1}});
  http.call("POST", "/instructions", {{"text", "Ascultă și alege."}});
  http.call("POST", "/exercises",
            {{"title", "Ascultare"}, {"difficulty", 2}, {"associationId", 1}, {"instructionsId", 1}});
  http.call("POST", "/exercises/1/configurations",
            {{"wordId", 1}, {"paronymId", nullptr}, {"param1", 1500}, {"param2", 0}, {"param3", 0}});
  http.call("POST", "/exercises/1/configurations",
            {{"wordId", 2}, {"paronymId", nullptr}, {"param1", 1500}, {"param2", 1}, {"param3", 0}});
  http.call("POST", "/templates",
            {{"description", "Tema s"},
             {"repetitionsPerDay", 2},
             {"exerciseItems", {{{"exerciseId", 1}, {"successThresholdPercent", 80}}}},
             {"deficiencyRefs", {{{"table", "Deficiente"}, {"id", 3}}}},
             {"testRefs", json::array()}});
  http.call("POST", "/children", {{"familyName", "Ionescu"}, {"givenName", "Maria"}});
  compare("content setup");

  // assign
  for (const auto* date : {"2024-03-01", "2024-03-08"}) {
    cli.run({"assign", "create", "--child", "1", "--template", "1", "--date", date, "--days", "7"});
    http.call("POST", "/assignments",
              {{"childId", 1}, {"predefinedHomeworkId", 1}, {"assignedDate", date}, {"deadlineDays", 7}});
  }
  compare("assign");

  // report
  cli.run({"assign", "report", "--id", "1", "--date", "2024-03-06", "--record", "1:1:70:1", "--record", "1:2:85:0"});
  http.call("POST", "/assignments/1/report",
            {{"reportDate", "2024-03-06"},
             {"records",
              {{{"exerciseId", 1}, {"attemptIndex", 1}, {"achievedPercent", 70}, {"initiallyWrongWords", 1}},
               {{"exerciseId", 1}, {"attemptIndex", 2}, {"achievedPercent", 85}, {"initiallyWrongWords", 0}}}}});
  compare("report");

  // bundle export/import
  const auto cliBundle = (dir / "cli-bundle.zip").string();
  const auto cliResults = (dir / "cli-results.zip").string();
  cli.run({"bundle", "export", "--assignment", "2", "--out", cliBundle, "--exported-at", "2024-03-08T09:00:00Z"});
  cli.run({"device", "simulate", "--bundle", cliBundle, "--out", cliResults, "--error-rate", "0.3", "--seed", "17"});
  cli.run({"bundle", "import", "--file", cliResults});

  auto res = client.Get("/assignments/2/bundle?exportedAt=2024-03-08T09:00:00Z");
  f.expect(res && res->status == 200, "bundle download failed");
  f.expect(res && res->body == read_file(cliBundle), "CLI and API bundles differ");
  const auto results = sync::simulate_device(std::string_view(res->body), {0.3, 17, std::nullopt});
  res = client.Post("/assignments/2/results", sync::write_result_archive(results), "application/zip");
  f.expect(res && res->status == 200, "result upload failed");
  compare("bundle export/import");
}

struct Criterion {
  int number;
  const char* name;
  void (*run)(Failures&);
};

}  // namespace

int main(int argc, char** argv) {
  const std::vector<Criterion> criteria = {
      {1, "schema fidelity", schema_fidelity},
      {2, "validation bounds", validation_bounds},
      {3, "article rule", article_rule},
      {4, "referential integrity", referential_integrity},
      {5, "homework lifecycle", homework_lifecycle},
      {6, "resolution rule", resolution_rule},
      {7, "sync round trip", sync_round_trip},
      {8, "progress oracle", progress_oracle},
      {9, "CLI/API parity", cli_api_parity},
  };
  const int only = argc > 1 ? std::atoi(argv[1]) : 0;
  int failed = 0;
  for (const auto& c : criteria) {
    if (only && c.number != only) continue;
    Failures f;
    const auto start = std::chrono::steady_clock::now();
    try {
      c.run(f);
    } catch (const std::exception& e) {
      f.items.push_back(std::string("uncaught: ") + e.what());
    }
    const auto ms = std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::steady_clock::now() - start);
    std::cout << (f.items.empty() ? "PASS" : "FAIL") << "  " << c.number << "  " << c.name << "  (" << ms.count()
              << " ms)\n";
    for (const auto& item : f.items) std::cout << "      " << item << "\n";
    failed += f.items.empty() ? 0 : 1;
  }
  return failed == 0 ? 0 : 1;
}
