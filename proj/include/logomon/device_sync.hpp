#pragma once

// Offline device exchange.
//
// Export side: one assignment becomes a self-contained zip bundle with
// manifest.json at the root and the referenced media under
// assets/sound/ and assets/image/. Import side: the device returns a zip
// holding results.json, bound to the export through the SHA-256 of the
// manifest it was given.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "logomon/homework.hpp"
#include "logomon/store.hpp"

namespace logomon::sync {

inline constexpr int kFormatVersion = 1;
inline constexpr std::string_view kManifestEntry = "manifest.json";
inline constexpr std::string_view kResultsEntry = "results.json";

struct ManifestWord {
  EntityId wordId = 0;
  std::string text;
  std::optional<std::string> articleToken;
  std::string soundFile;  // archive-relative, e.g. assets/sound/copil.wav
  std::string imageFile;
  std::optional<EntityId> partnerWordId;
  int param1 = 0;
  int param2 = 0;
  int param3 = 0;

  bool operator==(const ManifestWord&) const = default;
};

struct ManifestExercise {
  EntityId exerciseId = 0;
  std::string applicationName;
  std::string title;
  int difficulty = 1;
  std::string instructionsText;
  int successThresholdPercent = 0;
  std::vector<ManifestWord> configuration;

  bool operator==(const ManifestExercise&) const = default;
};

struct ManifestAsset {
  std::string relativePath;
  std::string digest;

  bool operator==(const ManifestAsset&) const = default;
};

struct BundleManifest {
  int formatVersion = kFormatVersion;
  EntityId assignmentId = 0;
  EntityId childId = 0;
  std::string exportedAt;
  int repetitionsPerDay = 1;
  std::vector<ManifestExercise> exercises;
  std::vector<ManifestAsset> assets;  // sorted by relativePath

  bool operator==(const BundleManifest&) const = default;
};

struct ResultBundle {
  int formatVersion = kFormatVersion;
  EntityId assignmentId = 0;
  Date reportDate{};
  std::string manifestDigest;
  std::vector<homework::AttemptDraft> records;

  bool operator==(const ResultBundle&) const = default;
};

json to_json(const BundleManifest& manifest);
json to_json(const ResultBundle& results);
/// Strict: unknown fields, a wrong formatVersion or broken invariants throw
/// Error(MalformedBundle).
BundleManifest manifest_from_json(const json& j);
ResultBundle results_from_json(const json& j);

/// Canonical serialized form; the manifest digest is taken over these bytes.
std::string serialize(const BundleManifest& manifest);
std::string serialize(const ResultBundle& results);

struct ExportOptions {
  /// YYYY-MM-DDTHH:MM:SSZ; defaults to the current time.
  std::optional<std::string> exportedAt;
};

struct ExportedBundle {
  BundleManifest manifest;
  std::string manifestBytes;
  std::string manifestDigest;
  std::string archive;
};

/// Builds the bundle for an unreported assignment and records the manifest
/// in the store. Throws NotFound, AlreadyReported or AssetMissing.
ExportedBundle build_bundle(Store& store, EntityId assignmentId, const ExportOptions& options = {});

/// Writes the bundle to `destination`: a directory receives
/// assignment-<id>.zip, any other path is used as the archive file name.
std::filesystem::path export_bundle(Store& store, EntityId assignmentId,
                                    const std::filesystem::path& destination,
                                    const ExportOptions& options = {});

/// Reads manifest.json back out of a bundle archive.
BundleManifest read_bundle_manifest(std::string_view archive, std::string* manifestBytes = nullptr);

std::string write_result_archive(const ResultBundle& results);
ResultBundle read_result_archive(std::string_view archive);

/// Verifies the manifest digest, then ingests the records as the
/// assignment's report in one transaction. Throws DigestMismatch,
/// UnknownAssignment, AlreadyReported, ValidationFailed or MalformedBundle.
std::vector<homework::ExerciseOutcome> import_results(Store& store, const ResultBundle& results);
std::vector<homework::ExerciseOutcome> import_result_archive(Store& store, std::string_view archive);
std::vector<homework::ExerciseOutcome> import_result_bundle(Store& store,
                                                            const std::filesystem::path& bundlePath);

struct DeviceProfile {
  double errorRate = 0.0;  // probability a word is wrong on first try, 0..1
  std::uint64_t seed = 0;
  /// Defaults to the date part of the manifest's exportedAt.
  std::optional<Date> reportDate;
};

/// Stand-in for the exercise applications on the device. For each exercise
/// it plays repetitionsPerDay attempts; each configured word is initially
/// wrong with probability errorRate. Deterministic for a given seed.
/// Throws Error(MalformedBundle).
ResultBundle simulate_device(std::string_view bundleArchive, const DeviceProfile& profile);
ResultBundle simulate_device(const std::filesystem::path& bundlePath, const DeviceProfile& profile);

/// round-half-up(100 * correct / total); 100 when total is 0.
int achieved_percent(int total, int wrong);

}  // namespace logomon::sync
