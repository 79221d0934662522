#include "logomon/device_sync.hpp"

#include <map>
#include <random>
#include <set>

#include "logomon/digest.hpp"
#include "logomon/zip.hpp"

namespace fs = std::filesystem;

namespace logomon::sync {

namespace {

[[noreturn]] void malformed(const std::string& what) {
  throw Error(ErrorCode::MalformedBundle, what);
}

/// Runs a decoder, turning strict-JSON and zip failures into MalformedBundle.
template <class F>
auto as_bundle_error(F&& fn) {
  try {
    return fn();
  } catch (const Error& e) {
    if (e.code() == ErrorCode::ValidationFailed) malformed(e.what());
    throw;
  } catch (const zip::ZipError& e) {
    malformed(e.what());
  } catch (const json::exception& e) {
    malformed(e.what());
  }
}

json optional_json(const std::optional<std::string>& v) { return v ? json(*v) : json(nullptr); }
json optional_json(const std::optional<EntityId>& v) { return v ? json(*v) : json(nullptr); }

std::string_view subdir_for(MediaKind kind) { return kind == MediaKind::Sound ? "sound" : "image"; }

std::string archive_path(const MediaAsset& asset) {
  return "assets/" + std::string(subdir_for(asset.kind)) + "/" + asset.filename;
}

}  // namespace

// ---------------------------------------------------------------------------
// JSON

json to_json(const BundleManifest& m) {
  json exercises = json::array();
  for (const auto& ex : m.exercises) {
    json config = json::array();
    for (const auto& w : ex.configuration)
      config.push_back({{"wordId", w.wordId},
                        {"text", w.text},
                        {"articleToken", optional_json(w.articleToken)},
                        {"soundFile", w.soundFile},
                        {"imageFile", w.imageFile},
                        {"partnerWordId", optional_json(w.partnerWordId)},
                        {"param1", w.param1},
                        {"param2", w.param2},
                        {"param3", w.param3}});
    exercises.push_back({{"exerciseId", ex.exerciseId},
                         {"applicationName", ex.applicationName},
                         {"title", ex.title},
                         {"difficulty", ex.difficulty},
                         {"instructionsText", ex.instructionsText},
                         {"successThresholdPercent", ex.successThresholdPercent},
                         {"configuration", config}});
  }
  json assets = json::array();
  for (const auto& a : m.assets)
    assets.push_back({{"relativePath", a.relativePath}, {"digest", a.digest}});
  return {{"formatVersion", m.formatVersion},
          {"assignmentId", m.assignmentId},
          {"childId", m.childId},
          {"exportedAt", m.exportedAt},
          {"repetitionsPerDay", m.repetitionsPerDay},
          {"exercises", exercises},
          {"assets", assets}};
}

json to_json(const ResultBundle& r) {
  json records = json::array();
  for (const auto& d : r.records) records.push_back(homework::to_json(d));
  return {{"formatVersion", r.formatVersion},
          {"assignmentId", r.assignmentId},
          {"reportDate", format_date(r.reportDate)},
          {"manifestDigest", r.manifestDigest},
          {"records", records}};
}

BundleManifest manifest_from_json(const json& j) {
  return as_bundle_error([&] {
    StrictObject o(j, "manifest");
    BundleManifest m;
    m.formatVersion = o.int32("formatVersion");
    if (m.formatVersion != kFormatVersion) malformed("unsupported manifest formatVersion");
    m.assignmentId = o.integer("assignmentId");
    m.childId = o.integer("childId");
    m.exportedAt = o.string("exportedAt");
    if (!is_utc_timestamp(m.exportedAt)) malformed("exportedAt must be YYYY-MM-DDTHH:MM:SSZ");
    m.repetitionsPerDay = o.int32("repetitionsPerDay");
    if (m.repetitionsPerDay < 1) malformed("repetitionsPerDay must be >= 1");
    for (const auto& ej : o.array("exercises")) {
      StrictObject eo(ej, "manifest.exercises");
      ManifestExercise ex;
      ex.exerciseId = eo.integer("exerciseId");
      ex.applicationName = eo.string("applicationName");
      ex.title = eo.string("title");
      ex.difficulty = eo.int32("difficulty");
      ex.instructionsText = eo.string("instructionsText");
      ex.successThresholdPercent = eo.int32("successThresholdPercent");
      for (const auto& wj : eo.array("configuration")) {
        StrictObject wo(wj, "manifest.configuration");
        ManifestWord w;
        w.wordId = wo.integer("wordId");
        w.text = wo.string("text");
        w.articleToken = wo.nullable_string("articleToken");
        w.soundFile = wo.string("soundFile");
        w.imageFile = wo.string("imageFile");
        w.partnerWordId = wo.nullable_integer("partnerWordId");
        w.param1 = wo.int32("param1");
        w.param2 = wo.int32("param2");
        w.param3 = wo.int32("param3");
        wo.finish();
        ex.configuration.push_back(std::move(w));
      }
      eo.finish();
      m.exercises.push_back(std::move(ex));
    }
    for (const auto& aj : o.array("assets")) {
      StrictObject ao(aj, "manifest.assets");
      ManifestAsset a;
      a.relativePath = ao.string("relativePath");
      a.digest = ao.string("digest");
      ao.finish();
      if (!is_sha256_hex(a.digest)) malformed("asset digest must be 64 lowercase hex chars");
      m.assets.push_back(std::move(a));
    }
    o.finish();

    std::set<std::string> assetPaths;
    for (const auto& a : m.assets) assetPaths.insert(a.relativePath);
    std::set<EntityId> exerciseIds;
    for (const auto& ex : m.exercises) {
      if (!exerciseIds.insert(ex.exerciseId).second) malformed("duplicate exerciseId in manifest");
      for (const auto& w : ex.configuration)
        if (!assetPaths.contains(w.soundFile) || !assetPaths.contains(w.imageFile))
          malformed("configuration names a file missing from assets");
    }
    return m;
  });
}

ResultBundle results_from_json(const json& j) {
  return as_bundle_error([&] {
    StrictObject o(j, "results");
    ResultBundle r;
    r.formatVersion = o.int32("formatVersion");
    if (r.formatVersion != kFormatVersion) malformed("unsupported results formatVersion");
    r.assignmentId = o.integer("assignmentId");
    r.reportDate = o.date("reportDate");
    r.manifestDigest = o.string("manifestDigest");
    for (const auto& rec : o.array("records"))
      r.records.push_back(homework::attempt_draft_from_json(rec));
    o.finish();
    return r;
  });
}

std::string serialize(const BundleManifest& manifest) { return to_json(manifest).dump(2) + "\n"; }
std::string serialize(const ResultBundle& results) { return to_json(results).dump(2) + "\n"; }

// ---------------------------------------------------------------------------
// Export

ExportedBundle build_bundle(Store& store, EntityId assignmentId, const ExportOptions& options) {
  const auto exportedAt = options.exportedAt.value_or(utc_timestamp_now());
  if (!is_utc_timestamp(exportedAt)) {
    ValidationResult r;
    r.add("exportedAt", "timestamp-format", "exportedAt must be YYYY-MM-DDTHH:MM:SSZ");
    r.throw_if_failed("export");
  }

  const auto found = store.find(EntityKind::HomeworkAssignment, assignmentId);
  if (!found)
    throw Error(ErrorCode::NotFound,
                "HomeworkAssignment:" + std::to_string(assignmentId) + " not found");
  const auto& assignment = std::get<HomeworkAssignment>(*found);
  if (assignment.reportDate)
    throw Error(ErrorCode::AlreadyReported,
                "assignment " + std::to_string(assignmentId) + " is already reported");
  const auto tmpl = store.get<PredefinedHomework>(assignment.predefinedHomeworkId);

  BundleManifest manifest;
  manifest.assignmentId = assignment.id;
  manifest.childId = assignment.childId;
  manifest.exportedAt = exportedAt;
  manifest.repetitionsPerDay = tmpl.repetitionsPerDay;

  zip::Entries entries;
  std::map<std::string, std::string> assetDigests;
  auto include_asset = [&](EntityId assetId) {
    const auto asset = store.get<MediaAsset>(assetId);
    const auto relative = archive_path(asset);
    if (!assetDigests.contains(relative)) {
      const auto path = store.asset_path(asset);
      if (!fs::is_regular_file(path))
        throw Error(ErrorCode::AssetMissing, "asset file missing: " + asset.filename);
      auto bytes = read_file(path);
      assetDigests[relative] = sha256_hex(bytes);
      entries[relative] = std::move(bytes);
    }
    return relative;
  };

  for (const auto& item : tmpl.exerciseItems) {
    const auto exercise = store.get<Exercise>(item.exerciseId);
    const auto association = store.get<Association>(exercise.associationId);
    const auto type = store.get<ExerciseType>(association.typeId);
    const auto subtype = store.get<ExerciseSubtype>(association.subtypeId);

    ManifestExercise ex;
    ex.exerciseId = exercise.id;
    ex.applicationName = subtype.applicationName.empty() ? type.applicationName : subtype.applicationName;
    ex.title = exercise.title;
    ex.difficulty = exercise.difficulty;
    ex.instructionsText = store.get<Instructions>(exercise.instructionsId).text;
    ex.successThresholdPercent = item.successThresholdPercent;
    for (const auto& config : store.configurations_of(exercise.id)) {
      const auto word = store.get<Word>(config.wordId);
      ManifestWord w;
      w.wordId = word.id;
      w.text = word.text;
      if (auto article = indefinite_article_for(word)) w.articleToken = std::string(*article);
      w.soundFile = include_asset(word.soundAssetId);
      w.imageFile = include_asset(word.imageAssetId);
      if (config.paronymId) {
        const auto pair = store.get<ParonymPair>(*config.paronymId);
        w.partnerWordId = pair.wordAId == word.id ? pair.wordBId : pair.wordAId;
      }
      w.param1 = config.param1;
      w.param2 = config.param2;
      w.param3 = config.param3;
      ex.configuration.push_back(std::move(w));
    }
    manifest.exercises.push_back(std::move(ex));
  }
  for (const auto& [path, digest] : assetDigests) manifest.assets.push_back({path, digest});

  ExportedBundle bundle;
  bundle.manifestBytes = serialize(manifest);
  bundle.manifestDigest = sha256_hex(bundle.manifestBytes);
  entries[std::string(kManifestEntry)] = bundle.manifestBytes;
  bundle.archive = zip::write_archive(entries);
  bundle.manifest = std::move(manifest);
  store.remember_manifest(assignmentId, bundle.manifestDigest, bundle.manifestBytes);
  return bundle;
}

fs::path export_bundle(Store& store, EntityId assignmentId, const fs::path& destination,
                       const ExportOptions& options) {
  auto bundle = build_bundle(store, assignmentId, options);
  auto target = destination;
  if (fs::is_directory(destination))
    target = destination / ("assignment-" + std::to_string(assignmentId) + ".zip");
  else if (target.has_parent_path())
    fs::create_directories(target.parent_path());
  write_file(target, bundle.archive);
  return target;
}

BundleManifest read_bundle_manifest(std::string_view archive, std::string* manifestBytes) {
  return as_bundle_error([&] {
    auto entries = zip::read_archive(archive);
    const auto it = entries.find(kManifestEntry);
    if (it == entries.end()) malformed("bundle has no manifest.json");
    auto manifest = manifest_from_json(json::parse(it->second));
    for (const auto& asset : manifest.assets) {
      const auto file = entries.find(asset.relativePath);
      if (file == entries.end()) malformed("bundle lacks " + asset.relativePath);
      if (sha256_hex(file->second) != asset.digest) malformed("digest mismatch for " + asset.relativePath);
    }
    if (manifestBytes) *manifestBytes = std::move(it->second);
    return manifest;
  });
}

// ---------------------------------------------------------------------------
// Results

std::string write_result_archive(const ResultBundle& results) {
  zip::Entries entries;
  entries[std::string(kResultsEntry)] = serialize(results);
  return zip::write_archive(entries);
}

ResultBundle read_result_archive(std::string_view archive) {
  return as_bundle_error([&] {
    const auto entries = zip::read_archive(archive);
    const auto it = entries.find(kResultsEntry);
    if (it == entries.end()) malformed("result archive has no results.json");
    return results_from_json(json::parse(it->second));
  });
}

std::vector<homework::ExerciseOutcome> import_results(Store& store, const ResultBundle& results) {
  return store.atomically([&] {
    if (!store.exists(EntityKind::HomeworkAssignment, results.assignmentId))
      throw Error(ErrorCode::UnknownAssignment,
                  "no assignment " + std::to_string(results.assignmentId) + " in this store");
    if (!store.has_manifest(results.assignmentId, results.manifestDigest))
      throw Error(ErrorCode::DigestMismatch,
                  "manifestDigest does not match any bundle exported for assignment " +
                      std::to_string(results.assignmentId));
    homework::ReportIntake intake{results.assignmentId, results.reportDate, results.records};
    return homework::ingest_report(store, intake);
  });
}

std::vector<homework::ExerciseOutcome> import_result_archive(Store& store, std::string_view archive) {
  return import_results(store, read_result_archive(archive));
}

std::vector<homework::ExerciseOutcome> import_result_bundle(Store& store, const fs::path& bundlePath) {
  std::string bytes;
  try {
    bytes = read_file(bundlePath);
  } catch (const std::exception& e) {
    malformed(e.what());
  }
  return import_result_archive(store, bytes);
}

// ---------------------------------------------------------------------------
// Device simulation

int achieved_percent(int total, int wrong) {
  if (total <= 0) return 100;
  const int correct = total - wrong;
  return (200 * correct + total) / (2 * total);
}

ResultBundle simulate_device(std::string_view bundleArchive, const DeviceProfile& profile) {
  if (!(profile.errorRate >= 0.0 && profile.errorRate <= 1.0)) {
    ValidationResult r;
    r.add("errorRate", "rate-range", "errorRate must lie in 0..1");
    r.throw_if_failed("device profile");
  }
  std::string manifestBytes;
  const auto manifest = read_bundle_manifest(bundleArchive, &manifestBytes);

  ResultBundle results;
  results.assignmentId = manifest.assignmentId;
  results.reportDate = profile.reportDate.value_or(*parse_date(manifest.exportedAt.substr(0, 10)));
  results.manifestDigest = sha256_hex(manifestBytes);

  std::mt19937_64 rng(profile.seed);
  for (const auto& ex : manifest.exercises) {
    const int total = static_cast<int>(ex.configuration.size());
    for (int attempt = 1; attempt <= manifest.repetitionsPerDay; ++attempt) {
      int wrong = 0;
      for (int w = 0; w < total; ++w) {
        const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
        if (u < profile.errorRate) ++wrong;
      }
      results.records.push_back({ex.exerciseId, attempt, achieved_percent(total, wrong), wrong});
    }
  }
  return results;
}

ResultBundle simulate_device(const fs::path& bundlePath, const DeviceProfile& profile) {
  std::string bytes;
  try {
    bytes = read_file(bundlePath);
  } catch (const std::exception& e) {
    malformed(e.what());
  }
  return simulate_device(std::string_view(bytes), profile);
}

}  // namespace logomon::sync
