#pragma once

// Transactional persistence for the whole entity graph plus the managed
// media tree.
//
// On-disk layout under the data root:
//   db/logomon.db        SQLite database, one table per entity kind
//   assets/sound/<name>  registered sound files
//   assets/image/<name>  registered image files
//
// Every public operation is atomic. Writes are serialized through a single
// connection; atomically() groups several operations into one transaction
// and may be nested.

#include <filesystem>
#include <limits>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <type_traits>
#include <vector>

#include "logomon/domain.hpp"
#include "logomon/json_codec.hpp"

namespace logomon {

struct StoreOptions {
  MediaPolicy media;
};

struct ExerciseFilter {
  std::optional<EntityId> typeId;
  std::optional<EntityId> subtypeId;
  std::optional<EntityId> soundId;
  std::optional<int> difficultyMin;
  std::optional<int> difficultyMax;
};

struct PartnerLink {
  EntityId pairId = 0;
  EntityId partnerWordId = 0;

  bool operator==(const PartnerLink&) const = default;
};

/// Data root from an explicit flag, else $LOGOMON_DATA, else ./logomon-data.
std::filesystem::path resolve_data_root(const std::optional<std::filesystem::path>& flag);

class Store {
 public:
  static constexpr std::size_t kNoLimit = std::numeric_limits<std::size_t>::max();

  /// Opens (creating when needed) the store rooted at `root`.
  /// Throws Error(StoreOpenFailure).
  static Store open(const std::filesystem::path& root, StoreOptions options = {});

  Store(Store&&) noexcept;
  Store& operator=(Store&&) noexcept;
  ~Store();

  const std::filesystem::path& root() const;
  std::filesystem::path asset_root() const;
  std::filesystem::path asset_path(const MediaAsset& asset) const;
  const MediaPolicy& media_policy() const;

  /// Inserts (id == 0, id allocated) or overwrites by id. Text fields are
  /// stored in NFC. Returns the entity id.
  EntityId put(Entity entity);
  template <class T>
  EntityId put(T value) {
    return put(Entity{std::move(value)});
  }

  Entity get(EntityKind kind, EntityId id) const;
  template <class T>
  T get(EntityId id) const {
    return std::get<T>(get(kind_of_v<T>, id));
  }
  std::optional<Entity> find(EntityKind kind, EntityId id) const;
  bool exists(EntityKind kind, EntityId id) const;

  /// Entities of one kind ordered by id.
  std::vector<Entity> list(EntityKind kind, std::size_t limit = kNoLimit,
                           std::size_t offset = 0) const;
  template <class T>
  std::vector<T> list_all() const {
    std::vector<T> out;
    for (auto& e : list(kind_of_v<T>)) out.push_back(std::get<T>(std::move(e)));
    return out;
  }
  std::size_t count(EntityKind kind) const;

  /// Restrictive delete. Throws NotFound or StillReferenced.
  void erase(EntityKind kind, EntityId id);
  /// Everything that points at (kind, id), sorted.
  std::vector<EntityRef> referrers(EntityKind kind, EntityId id) const;

  /// Copies `source` into assets/<kind>/ under its base name and records it.
  /// Throws SourceMissing, WrongExtension or NameCollision.
  MediaAsset register_media_asset(MediaKind kind, const std::filesystem::path& source);
  std::optional<MediaAsset> find_asset_by_filename(MediaKind kind, std::string_view filename) const;

  /// Ordered by (difficulty, title, id).
  std::vector<Exercise> query_exercises(const ExerciseFilter& filter) const;
  /// Throws NotFound when the word does not exist.
  std::vector<PartnerLink> paronym_partners(EntityId wordId) const;

  std::vector<ExerciseConfiguration> configurations_of(EntityId exerciseId) const;
  std::vector<HomeworkAttemptRecord> attempts_of(EntityId assignmentId) const;
  std::vector<HomeworkAssignment> assignments_of_child(EntityId childId) const;

  // Copies of exported bundle manifests, keyed by their SHA-256.
  void remember_manifest(EntityId assignmentId, std::string_view digest, std::string_view body);
  bool has_manifest(EntityId assignmentId, std::string_view digest) const;

  /// Full-graph consistency check. Empty when every reference resolves and
  /// every asset file is present.
  std::vector<std::string> audit() const;

  /// {"formatVersion":1, "<collection>":[...], ...} with every kind present.
  json export_json() const;
  /// One <collection>.json per kind plus an assets/ copy.
  void export_to_directory(const std::filesystem::path& dir) const;
  /// All-or-nothing import of an export_json()-shaped document.
  void seed(const json& document);
  /// All-or-nothing import of an export_to_directory() tree.
  void seed_from_directory(const std::filesystem::path& dir);

  class Transaction {
   public:
    explicit Transaction(Store& store);
    ~Transaction();
    Transaction(const Transaction&) = delete;
    Transaction& operator=(const Transaction&) = delete;
    void commit();

   private:
    Store& store_;
    std::unique_lock<std::recursive_mutex> lock_;
    bool done_ = false;
  };

  template <class F>
  decltype(auto) atomically(F&& fn) {
    Transaction tx(*this);
    if constexpr (std::is_void_v<std::invoke_result_t<F>>) {
      std::forward<F>(fn)();
      tx.commit();
    } else {
      auto result = std::forward<F>(fn)();
      tx.commit();
      return result;
    }
  }

 private:
  struct Impl;
  explicit Store(std::unique_ptr<Impl> impl);
  std::unique_ptr<Impl> impl_;
};

}  // namespace logomon
