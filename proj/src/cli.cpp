#include "logomon/cli.hpp"

#include <functional>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "logomon/api.hpp"
#include "logomon/device_sync.hpp"
#include "logomon/digest.hpp"
#include "logomon/homework.hpp"
#include "logomon/store.hpp"

namespace fs = std::filesystem;

namespace logomon::cli {
namespace {

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Context {
  std::ostream& out;
  std::ostream& err;
  bool jsonOutput = false;
  std::string dataRoot;
  std::optional<Store> store;

  Store& db() {
    if (!store)
      store.emplace(Store::open(resolve_data_root(dataRoot.empty() ? std::nullopt
                                                                   : std::optional<fs::path>(dataRoot))));
    return *store;
  }
  void emit(const json& body) { out << body.dump(2) << "\n"; }
};

using Action = std::function<void(Context&)>;

std::vector<std::string> split(const std::string& text, char sep) {
  std::vector<std::string> parts;
  std::string part;
  std::istringstream in(text);
  while (std::getline(in, part, sep)) parts.push_back(part);
  if (!text.empty() && text.back() == sep) parts.emplace_back();
  return parts;
}

std::int64_t to_int(const std::string& text, const std::string& what) {
  try {
    std::size_t used = 0;
    const auto v = std::stoll(text, &used);
    if (used == text.size()) return v;
  } catch (...) {
  }
  throw UsageError(what + ": '" + text + "' is not an integer");
}

Date to_date(const std::string& text, const std::string& what) {
  const auto d = parse_date(text);
  if (!d) throw UsageError(what + " must be YYYY-MM-DD, got '" + text + "'");
  return *d;
}

std::string describe(const Entity& entity) {
  std::ostringstream s;
  s << id_of(entity) << "\t";
  std::visit(
      [&](const auto& e) {
        using T = std::decay_t<decltype(e)>;
        if constexpr (std::is_same_v<T, MediaAsset>) s << to_string(e.kind) << "\t" << e.filename;
        else if constexpr (std::is_same_v<T, Word>) {
          s << e.text << "\t" << to_string(e.partOfSpeech);
          if (e.gender) s << "\t" << to_string(*e.gender);
        } else if constexpr (std::is_same_v<T, ParonymPair>) s << e.wordAId << "\t" << e.wordBId;
        else if constexpr (std::is_same_v<T, ExerciseType> || std::is_same_v<T, ExerciseSubtype>)
          s << e.name << "\t" << e.applicationName;
        else if constexpr (std::is_same_v<T, TargetSound>) s << e.label;
        else if constexpr (std::is_same_v<T, Association>) s << e.typeId << "\t" << e.subtypeId << "\t" << e.soundId;
        else if constexpr (std::is_same_v<T, Instructions>) s << e.text;
        else if constexpr (std::is_same_v<T, Exercise>) s << e.title << "\tdifficulty " << e.difficulty;
        else if constexpr (std::is_same_v<T, ExerciseConfiguration>) {
          s << "exercise " << e.exerciseId << "\tword " << e.wordId;
          if (e.paronymId) s << "\tpair " << *e.paronymId;
        } else if constexpr (std::is_same_v<T, PredefinedHomework>) {
          s << e.description << "\t" << e.exerciseItems.size() << " exercises\t" << e.repetitionsPerDay
            << "/day";
        } else if constexpr (std::is_same_v<T, Child>) s << e.familyName << " " << e.givenName;
        else if constexpr (std::is_same_v<T, HomeworkAssignment>) {
          s << "child " << e.childId << "\ttemplate " << e.predefinedHomeworkId << "\t"
            << format_date(e.assignedDate) << "+" << e.deadlineDays;
          if (e.reportDate) s << "\treported " << format_date(*e.reportDate);
        } else if constexpr (std::is_same_v<T, HomeworkAttemptRecord>) {
          s << "exercise " << e.exerciseId << "\tattempt " << e.attemptIndex << "\t" << e.achievedPercent
            << "%";
        }
      },
      entity);
  return s.str();
}

void print_created(Context& ctx, const Entity& entity) {
  if (ctx.jsonOutput) ctx.emit(to_json(entity));
  else ctx.out << id_of(entity) << "\n";
}

void print_list(Context& ctx, const std::vector<Entity>& items) {
  if (ctx.jsonOutput) {
    json arr = json::array();
    for (const auto& e : items) arr.push_back(to_json(e));
    ctx.emit(arr);
  } else {
    for (const auto& e : items) ctx.out << describe(e) << "\n";
  }
}

void print_outcomes(Context& ctx, const std::vector<homework::ExerciseOutcome>& outcomes) {
  if (ctx.jsonOutput) return ctx.emit(homework::to_json(outcomes));
  for (const auto& o : outcomes)
    ctx.out << "exercise " << o.exerciseId << "\tbest " << o.bestPercent << "%\tthreshold "
            << o.successThresholdPercent << "%\t" << (o.resolved ? "resolved" : "unresolved") << "\n";
}

/// An existing registered asset of that name is reused when its bytes match
/// the given file (or the file is absent); otherwise the file is registered.
EntityId resolve_asset(Store& store, MediaKind kind, const std::string& source) {
  const auto name = fs::path(source).filename().string();
  if (auto existing = store.find_asset_by_filename(kind, name)) {
    if (!fs::exists(source) || sha256_file_hex(source) == sha256_file_hex(store.asset_path(*existing)))
      return existing->id;
  }
  return store.register_media_asset(kind, source).id;
}

template <class T, class Pred>
std::optional<T> find_first(const Store& store, Pred pred) {
  for (auto& e : store.list_all<T>())
    if (pred(e)) return e;
  return std::nullopt;
}

// ---------------------------------------------------------------------------

void add_list_command(CLI::App* parent, Action& action, EntityKind kind, const std::string& help) {
  auto* cmd = parent->add_subcommand("list", help);
  auto limit = std::make_shared<std::size_t>(Store::kNoLimit);
  auto offset = std::make_shared<std::size_t>(0);
  cmd->add_option("--limit", *limit, "Maximum number of rows");
  cmd->add_option("--offset", *offset, "Rows to skip");
  cmd->callback([&action, kind, limit, offset] {
    action = [=](Context& ctx) { print_list(ctx, ctx.db().list(kind, *limit, *offset)); };
  });
}

void word_commands(CLI::App& app, Action& action) {
  auto* word = app.add_subcommand("word", "Manage words")->require_subcommand(1);

  struct Opts {
    std::string text, speaker, pos, posLabel, gender, sound, image;
    bool therapist = false, article = false;
  };
  auto o = std::make_shared<Opts>();
  auto* add = word->add_subcommand("add", "Add a word with its sound and image");
  add->add_option("--text", o->text, "Written form")->required();
  add->add_option("--speaker", o->speaker, "Recorded speaker, \"Family Given\"");
  add->add_flag("--therapist", o->therapist, "Recorded by the therapist");
  add->add_option("--pos", o->pos, "Part of speech")
      ->required()
      ->check(CLI::IsMember({"noun", "verb", "adjective", "other"}, CLI::ignore_case));
  add->add_option("--pos-label", o->posLabel, "Free label when --pos other");
  add->add_option("--gender", o->gender, "m, f or n")
      ->check(CLI::IsMember({"m", "f", "n"}, CLI::ignore_case));
  add->add_flag("--article", o->article, "Word takes an indefinite article");
  add->add_option("--sound", o->sound, "Sound file (.wav/.mp3) or registered asset name")->required();
  add->add_option("--image", o->image, "Image file (.png/.jpg) or registered asset name")->required();
  add->callback([&action, o] {
    action = [o](Context& ctx) {
      auto& store = ctx.db();
      const auto id = store.atomically([&] {
        Word w;
        w.text = o->text;
        const auto space = o->speaker.find(' ');
        w.speakerFamilyName = o->speaker.substr(0, space);
        if (space != std::string::npos) w.speakerGivenName = o->speaker.substr(space + 1);
        w.isTherapistRecording = o->therapist;
        auto pos = o->pos;
        pos[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(pos[0])));
        w.partOfSpeech = *part_of_speech_from_string(pos);
        w.partOfSpeechLabel = o->posLabel;
        if (!o->gender.empty()) {
          const char g = static_cast<char>(std::tolower(static_cast<unsigned char>(o->gender[0])));
          w.gender = g == 'm' ? Gender::Masculine : g == 'f' ? Gender::Feminine : Gender::Neuter;
        }
        w.articleCompatible = o->article;
        validate_word(w).throw_if_failed("Word");
        w.soundAssetId = resolve_asset(store, MediaKind::Sound, o->sound);
        w.imageAssetId = resolve_asset(store, MediaKind::Image, o->image);
        return store.put(w);
      });
      print_created(ctx, store.get(EntityKind::Word, id));
    };
  });

  add_list_command(word, action, EntityKind::Word, "List words");

  auto rmId = std::make_shared<std::int64_t>(0);
  auto* rm = word->add_subcommand("rm", "Delete an unreferenced word");
  rm->add_option("--id", *rmId, "Word id")->required();
  rm->callback([&action, rmId] {
    action = [rmId](Context& ctx) {
      ctx.db().erase(EntityKind::Word, *rmId);
      if (ctx.jsonOutput) ctx.emit({{"deleted", to_json(EntityRef{EntityKind::Word, *rmId})}});
      else ctx.out << "deleted " << *rmId << "\n";
    };
  });
}

void paronym_commands(CLI::App& app, Action& action) {
  auto* paronym = app.add_subcommand("paronym", "Manage paronym pairs")->require_subcommand(1);
  auto ids = std::make_shared<std::pair<std::int64_t, std::int64_t>>();
  auto* add = paronym->add_subcommand("add", "Pair two words");
  add->add_option("--a", ids->first, "First word id")->required();
  add->add_option("--b", ids->second, "Second word id")->required();
  add->callback([&action, ids] {
    action = [ids](Context& ctx) {
      const auto id = ctx.db().put(ParonymPair{0, ids->first, ids->second});
      print_created(ctx, ctx.db().get(EntityKind::ParonymPair, id));
    };
  });
  add_list_command(paronym, action, EntityKind::ParonymPair, "List paronym pairs");
}

void exercise_commands(CLI::App& app, Action& action) {
  auto* exercise = app.add_subcommand("exercise", "Manage exercises")->require_subcommand(1);

  struct AddOpts {
    std::string title, type, typeApp, subtype, subtypeApp, sound, instructions;
    int difficulty = 0;
    std::int64_t associationId = 0, instructionsId = 0;
  };
  auto o = std::make_shared<AddOpts>();
  auto* add = exercise->add_subcommand("add", "Add an exercise");
  add->add_option("--title", o->title, "Title")->required();
  add->add_option("--difficulty", o->difficulty, "Difficulty 1..5")->required();
  auto* assoc = add->add_option("--association", o->associationId, "Existing association id");
  auto* type = add->add_option("--type", o->type, "Exercise type name (created when new)");
  add->add_option("--type-app", o->typeApp, "Application name for a new type");
  auto* subtype = add->add_option("--subtype", o->subtype, "Exercise subtype name (created when new)");
  add->add_option("--subtype-app", o->subtypeApp, "Application name for a new subtype");
  auto* sound = add->add_option("--sound", o->sound, "Target sound label (created when new)");
  auto* instrId = add->add_option("--instructions-id", o->instructionsId, "Existing instructions id");
  auto* instr = add->add_option("--instructions", o->instructions, "Instructions text (created when new)");
  assoc->excludes(type)->excludes(subtype)->excludes(sound);
  instrId->excludes(instr);
  add->callback([&action, o, assoc, type, subtype, sound, instrId, instr] {
    if (!assoc->count() && !(type->count() && subtype->count() && sound->count()))
      throw CLI::ValidationError("give --association or all of --type, --subtype and --sound");
    if (!instrId->count() && !instr->count())
      throw CLI::ValidationError("give --instructions or --instructions-id");
    action = [o](Context& ctx) {
      auto& store = ctx.db();
      const auto id = store.atomically([&] {
        Exercise e{0, o->title, o->difficulty, o->associationId, o->instructionsId};
        // Intrinsic checks before anything is created.
        ValidationResult pre;
        for (auto& v : validate_exercise(e).violations)
          if (v.code == "difficulty-range" || v.code == "title-empty") pre.add(v.field, v.code, v.message);
        pre.throw_if_failed("Exercise");
        if (!o->type.empty()) {
          auto t = find_first<ExerciseType>(store, [&](auto& x) { return x.name == o->type; });
          const auto typeId = t ? t->id : store.put(ExerciseType{0, o->type, o->typeApp});
          auto s = find_first<ExerciseSubtype>(store, [&](auto& x) { return x.name == o->subtype; });
          const auto subtypeId = s ? s->id : store.put(ExerciseSubtype{0, o->subtype, o->subtypeApp});
          auto snd = find_first<TargetSound>(store, [&](auto& x) { return x.label == o->sound; });
          const auto soundId = snd ? snd->id : store.put(TargetSound{0, o->sound});
          auto a = find_first<Association>(store, [&](auto& x) {
            return x.typeId == typeId && x.subtypeId == subtypeId && x.soundId == soundId;
          });
          e.associationId = a ? a->id : store.put(Association{0, typeId, subtypeId, soundId});
        }
        if (!o->instructions.empty() || e.instructionsId == 0) {
          auto i = find_first<Instructions>(store, [&](auto& x) { return x.text == o->instructions; });
          e.instructionsId = i ? i->id : store.put(Instructions{0, o->instructions});
        }
        return store.put(e);
      });
      print_created(ctx, store.get(EntityKind::Exercise, id));
    };
  });

  struct ListOpts {
    std::int64_t type = 0, subtype = 0, sound = 0;
    int dmin = 0, dmax = 0;
  };
  auto l = std::make_shared<ListOpts>();
  auto* list = exercise->add_subcommand("list", "List exercises, optionally filtered");
  auto* lt = list->add_option("--type", l->type, "Type id");
  auto* ls = list->add_option("--subtype", l->subtype, "Subtype id");
  auto* lsnd = list->add_option("--sound", l->sound, "Target sound id");
  auto* lmin = list->add_option("--difficulty-min", l->dmin, "Lowest difficulty");
  auto* lmax = list->add_option("--difficulty-max", l->dmax, "Highest difficulty");
  list->callback([&action, l, lt, ls, lsnd, lmin, lmax] {
    ExerciseFilter f;
    if (lt->count()) f.typeId = l->type;
    if (ls->count()) f.subtypeId = l->subtype;
    if (lsnd->count()) f.soundId = l->sound;
    if (lmin->count()) f.difficultyMin = l->dmin;
    if (lmax->count()) f.difficultyMax = l->dmax;
    action = [f](Context& ctx) {
      std::vector<Entity> items;
      for (auto& e : ctx.db().query_exercises(f)) items.emplace_back(std::move(e));
      print_list(ctx, items);
    };
  });

  auto c = std::make_shared<ExerciseConfiguration>();
  auto* configure = exercise->add_subcommand("configure", "Add a word to an exercise");
  configure->add_option("--exercise", c->exerciseId, "Exercise id")->required();
  configure->add_option("--word", c->wordId, "Word id")->required();
  auto* pair = configure->add_option("--paronym", "Paronym pair id");
  configure->add_option("--param1", c->param1, "Timing parameter");
  configure->add_option("--param2", c->param2, "Flag parameter, 0 or 1");
  configure->add_option("--param3", c->param3, "Reserved parameter");
  configure->callback([&action, c, pair] {
    auto config = *c;
    if (pair->count()) config.paronymId = pair->as<std::int64_t>();
    action = [config](Context& ctx) {
      const auto id = ctx.db().put(config);
      print_created(ctx, ctx.db().get(EntityKind::ExerciseConfiguration, id));
    };
  });
}

void template_commands(CLI::App& app, Action& action) {
  auto* tmpl = app.add_subcommand("template", "Manage predefined homework")->require_subcommand(1);
  struct Opts {
    std::string description;
    int repetitions = 1;
    std::vector<std::string> items;
    std::vector<std::int64_t> deficiencies, tests;
  };
  auto o = std::make_shared<Opts>();
  auto* add = tmpl->add_subcommand("add", "Add a predefined homework template");
  add->add_option("--description", o->description, "Description");
  add->add_option("--repetitions", o->repetitions, "Recommended repetitions per day");
  add->add_option("--item", o->items, "EXERCISE:THRESHOLD, repeatable")->required();
  add->add_option("--deficiency", o->deficiencies, "Legacy deficiency id, repeatable");
  add->add_option("--test", o->tests, "Legacy test id, repeatable");
  add->callback([&action, o] {
    PredefinedHomework t;
    t.description = o->description;
    t.repetitionsPerDay = o->repetitions;
    for (const auto& item : o->items) {
      const auto parts = split(item, ':');
      if (parts.size() != 2) throw CLI::ValidationError("--item", "expected EXERCISE:THRESHOLD, got " + item);
      t.exerciseItems.push_back({to_int(parts[0], "--item exercise"),
                                 static_cast<int>(to_int(parts[1], "--item threshold"))});
    }
    for (auto id : o->deficiencies) t.deficiencyRefs.push_back({LegacyTable::Deficiente, id});
    for (auto id : o->tests) t.testRefs.push_back({LegacyTable::Teste, id});
    action = [t](Context& ctx) {
      const auto id = ctx.db().put(t);
      print_created(ctx, ctx.db().get(EntityKind::PredefinedHomework, id));
    };
  });
  add_list_command(tmpl, action, EntityKind::PredefinedHomework, "List templates");
}

void child_commands(CLI::App& app, Action& action) {
  auto* child = app.add_subcommand("child", "Manage children")->require_subcommand(1);
  auto c = std::make_shared<Child>();
  auto* add = child->add_subcommand("add", "Add a child");
  add->add_option("--family", c->familyName, "Family name")->required();
  add->add_option("--given", c->givenName, "Given name")->required();
  add->callback([&action, c] {
    action = [c](Context& ctx) {
      const auto id = ctx.db().put(*c);
      print_created(ctx, ctx.db().get(EntityKind::Child, id));
    };
  });
  add_list_command(child, action, EntityKind::Child, "List children");
}

void assign_commands(CLI::App& app, Action& action) {
  auto* assign = app.add_subcommand("assign", "Homework assignments")->require_subcommand(1);

  struct CreateOpts {
    std::int64_t child = 0, tmpl = 0;
    std::string date;
    int days = 0;
  };
  auto o = std::make_shared<CreateOpts>();
  auto* create = assign->add_subcommand("create", "Assign a template to a child");
  create->add_option("--child", o->child, "Child id")->required();
  create->add_option("--template", o->tmpl, "Template id")->required();
  create->add_option("--date", o->date, "Assigned date, YYYY-MM-DD")->required();
  create->add_option("--days", o->days, "Deadline in days")->required();
  create->callback([&action, o] {
    const auto date = to_date(o->date, "--date");
    action = [o, date](Context& ctx) {
      const auto a = homework::assign_homework(ctx.db(), o->child, o->tmpl, date, o->days);
      print_created(ctx, Entity{a});
    };
  });

  auto s = std::make_shared<std::pair<std::int64_t, std::string>>();
  auto* status = assign->add_subcommand("status", "Show an assignment's status");
  status->add_option("--id", s->first, "Assignment id")->required();
  status->add_option("--today", s->second, "Reference date, YYYY-MM-DD (default: today, UTC)");
  status->callback([&action, s] {
    const auto today = s->second.empty() ? today_utc() : to_date(s->second, "--today");
    action = [s, today](Context& ctx) {
      const auto body = api::status_body(ctx.db().get<HomeworkAssignment>(s->first), today);
      if (ctx.jsonOutput) ctx.emit(body);
      else ctx.out << body["status"].get<std::string>() << "\n";
    };
  });

  struct ReportOpts {
    std::int64_t id = 0;
    std::string file, date;
    std::vector<std::string> records;
  };
  auto r = std::make_shared<ReportOpts>();
  auto* report = assign->add_subcommand("report", "Record the returned activity report");
  report->add_option("--id", r->id, "Assignment id")->required();
  auto* file = report->add_option("--file", r->file, "Report intake JSON file");
  auto* date = report->add_option("--date", r->date, "Report date, YYYY-MM-DD");
  auto* records = report->add_option("--record", r->records,
                                     "EXERCISE:ATTEMPT:PERCENT:WRONG, repeatable");
  file->excludes(date)->excludes(records);
  report->callback([&action, r, file] {
    homework::ReportIntake intake;
    bool fromFile = file->count() > 0;
    if (!fromFile) {
      if (r->date.empty()) throw CLI::ValidationError("give --file or --date with --record entries");
      intake.assignmentId = r->id;
      intake.reportDate = to_date(r->date, "--date");
      for (const auto& rec : r->records) {
        const auto parts = split(rec, ':');
        if (parts.size() != 4)
          throw CLI::ValidationError("--record", "expected EXERCISE:ATTEMPT:PERCENT:WRONG, got " + rec);
        intake.records.push_back({to_int(parts[0], "--record exercise"),
                                  static_cast<int>(to_int(parts[1], "--record attempt")),
                                  static_cast<int>(to_int(parts[2], "--record percent")),
                                  static_cast<int>(to_int(parts[3], "--record wrong"))});
      }
    }
    action = [r, intake, fromFile](Context& ctx) mutable {
      if (fromFile) {
        json body;
        try {
          body = json::parse(read_file(r->file));
        } catch (const json::exception& e) {
          throw Error(ErrorCode::MalformedRequest, r->file + ": " + e.what());
        }
        if (body.is_object() && !body.contains("assignmentId")) body["assignmentId"] = r->id;
        intake = homework::report_intake_from_json(body);
        if (intake.assignmentId != r->id) {
          ValidationResult v;
          v.add("assignmentId", "id-mismatch", "assignmentId in the file differs from --id");
          v.throw_if_failed("report");
        }
      }
      print_outcomes(ctx, homework::ingest_report(ctx.db(), intake));
    };
  });
  add_list_command(assign, action, EntityKind::HomeworkAssignment, "List assignments");
}

void bundle_commands(CLI::App& app, Action& action) {
  auto* bundle = app.add_subcommand("bundle", "Device bundles")->require_subcommand(1);

  struct ExportOpts {
    std::int64_t assignment = 0;
    std::string out, exportedAt;
  };
  auto e = std::make_shared<ExportOpts>();
  auto* exp = bundle->add_subcommand("export", "Write an assignment's bundle archive");
  exp->add_option("--assignment", e->assignment, "Assignment id")->required();
  exp->add_option("--out", e->out, "Archive path or existing directory")->required();
  exp->add_option("--exported-at", e->exportedAt, "Timestamp YYYY-MM-DDTHH:MM:SSZ (default: now)");
  exp->callback([&action, e] {
    action = [e](Context& ctx) {
      sync::ExportOptions options;
      if (!e->exportedAt.empty()) options.exportedAt = e->exportedAt;
      const auto path = sync::export_bundle(ctx.db(), e->assignment, e->out, options);
      if (ctx.jsonOutput) {
        const auto manifest = sync::read_bundle_manifest(read_file(path));
        ctx.emit({{"path", path.string()}, {"manifestDigest", sha256_hex(sync::serialize(manifest))}});
      } else {
        ctx.out << path.string() << "\n";
      }
    };
  });

  auto file = std::make_shared<std::string>();
  auto* imp = bundle->add_subcommand("import", "Import a device result archive");
  imp->add_option("--file", *file, "Result archive")->required();
  imp->callback([&action, file] {
    action = [file](Context& ctx) { print_outcomes(ctx, sync::import_result_bundle(ctx.db(), *file)); };
  });
}

void device_commands(CLI::App& app, Action& action) {
  auto* device = app.add_subcommand("device", "Device stand-in")->require_subcommand(1);
  struct Opts {
    std::string bundle, out, reportDate;
    double errorRate = 0.0;
    std::uint64_t seed = 0;
  };
  auto o = std::make_shared<Opts>();
  auto* sim = device->add_subcommand("simulate", "Play a bundle and write a result archive");
  sim->add_option("--bundle", o->bundle, "Bundle archive")->required();
  sim->add_option("--out", o->out, "Result archive to write")->required();
  sim->add_option("--error-rate", o->errorRate, "Probability a word is initially wrong, 0..1");
  sim->add_option("--seed", o->seed, "Random seed");
  sim->add_option("--report-date", o->reportDate, "Report date (default: export date)");
  sim->callback([&action, o] {
    std::optional<Date> reportDate;
    if (!o->reportDate.empty()) reportDate = to_date(o->reportDate, "--report-date");
    action = [o, reportDate](Context& ctx) {
      const auto results =
          sync::simulate_device(fs::path(o->bundle), sync::DeviceProfile{o->errorRate, o->seed, reportDate});
      write_file(o->out, sync::write_result_archive(results));
      if (ctx.jsonOutput) ctx.emit(sync::to_json(results));
      else ctx.out << o->out << "\n";
    };
  });
}

void progress_commands(CLI::App& app, Action& action) {
  auto* progress = app.add_subcommand("progress", "Child progress")->require_subcommand(1);
  auto child = std::make_shared<std::int64_t>(0);
  auto* show = progress->add_subcommand("show", "Show a child's progress summary");
  show->add_option("--child", *child, "Child id")->required();
  show->callback([&action, child] {
    action = [child](Context& ctx) {
      const auto summary = homework::child_progress(ctx.db(), *child);
      if (ctx.jsonOutput) return ctx.emit(homework::to_json(summary));
      for (const auto& p : summary.perAssignment) {
        char mean[32];
        std::snprintf(mean, sizeof mean, "%.2f", p.meanBestPercent.to_double());
        ctx.out << format_date(p.assignedDate) << "\tassignment " << p.assignmentId << "\tmean best "
                << mean << "%\tresolved " << p.resolvedCount << "/" << p.exerciseCount << "\n";
      }
    };
  });
}

void db_commands(CLI::App& app, Action& action) {
  auto* db = app.add_subcommand("db", "Data root maintenance")->require_subcommand(1);
  db->add_subcommand("init", "Create the data root")->callback([&action] {
    action = [](Context& ctx) {
      auto& store = ctx.db();
      if (ctx.jsonOutput) ctx.emit({{"dataRoot", store.root().string()}});
      else ctx.out << store.root().string() << "\n";
    };
  });

  auto from = std::make_shared<std::string>();
  auto* seed = db->add_subcommand("seed", "Load an export document or directory");
  seed->add_option("--from", *from, "export JSON file or export directory")->required();
  seed->callback([&action, from] {
    action = [from](Context& ctx) {
      auto& store = ctx.db();
      if (fs::is_directory(*from)) {
        store.seed_from_directory(*from);
      } else {
        json doc;
        try {
          doc = json::parse(read_file(*from));
        } catch (const json::exception& e) {
          throw Error(ErrorCode::MalformedRequest, *from + ": " + e.what());
        }
        store.seed(doc);
      }
      json counts = json::object();
      for (auto kind : kAllEntityKinds) counts[std::string(collection_name(kind))] = store.count(kind);
      if (ctx.jsonOutput) ctx.emit(counts);
      else
        for (auto& [k, v] : counts.items()) ctx.out << k << "\t" << v << "\n";
    };
  });

  auto out = std::make_shared<std::string>();
  auto* exp = db->add_subcommand("export", "Export the store");
  exp->add_option("--out", *out, "Directory to write (default: JSON on stdout)");
  exp->callback([&action, out] {
    action = [out](Context& ctx) {
      if (out->empty()) return ctx.emit(ctx.db().export_json());
      ctx.db().export_to_directory(*out);
      if (ctx.jsonOutput) ctx.emit({{"path", *out}});
      else ctx.out << *out << "\n";
    };
  });
}

}  // namespace

int dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app("Speech therapy exercise and homework manager", "logomon");
  app.require_subcommand(1);
  Context ctx{out, err, false, {}, {}};
  Action action;
  app.add_option("--data-root", ctx.dataRoot, "Data root (default: $LOGOMON_DATA or ./logomon-data)");
  app.add_flag("--json", ctx.jsonOutput, "JSON output");

  word_commands(app, action);
  paronym_commands(app, action);
  exercise_commands(app, action);
  template_commands(app, action);
  child_commands(app, action);
  assign_commands(app, action);
  bundle_commands(app, action);
  device_commands(app, action);
  progress_commands(app, action);
  db_commands(app, action);

  try {
    app.parse(std::vector<std::string>(args.rbegin(), args.rend()));
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "usage error: " << e.what() << "\n\n" << app.help();
    return kExitUsage;
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << "\n\n" << app.help();
    return kExitUsage;
  }

  try {
    action(ctx);
    return kExitOk;
  } catch (const Error& e) {
    if (ctx.jsonOutput) {
      err << api::error_body(e).dump(2) << "\n";
    } else {
      err << to_string(e.code()) << ": " << e.what() << "\n";
      for (const auto& v : e.violations()) err << "  " << v.field << ": " << v.code << ": " << v.message << "\n";
      for (const auto& r : e.refs()) err << "  " << to_string(r.kind) << ":" << r.id << "\n";
    }
    return kExitDomainError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitDomainError;
  }
}

}  // namespace logomon::cli
