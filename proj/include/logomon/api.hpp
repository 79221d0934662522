#pragma once

// HTTP/JSON service over the store, the homework engine and device sync.
//
// Routes (ids are decimal, bodies are UTF-8 JSON unless noted):
//   GET    /health
//   CRUD   /words /paronyms /exercise-types /exercise-subtypes /sounds
//          /associations /instructions /exercises /templates /children
//          GET list (?limit=&offset=), GET /{id}, POST, PUT /{id}, DELETE /{id}
//   GET    /exercises?typeId=&subtypeId=&soundId=&difficultyMin=&difficultyMax=
//   CRUD   /exercises/{id}/configurations[/{cid}]
//   POST   /assets/{sound|image}          multipart, field "file"
//   GET    /assets  /assets/{id};  DELETE /assets/{id}
//   POST   /assignments                   {childId, predefinedHomeworkId, assignedDate, deadlineDays}
//   GET    /assignments  /assignments/{id}
//   GET    /assignments/{id}/status?today=YYYY-MM-DD
//   POST   /assignments/{id}/report       report intake document
//   GET    /assignments/{id}/outcomes
//   GET    /assignments/{id}/bundle?exportedAt=   application/zip
//   POST   /assignments/{id}/results      application/zip body
//   GET    /children/{id}/progress
//   GET    /export

#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <string>

#include "logomon/error.hpp"
#include "logomon/homework.hpp"
#include "logomon/json_codec.hpp"
#include "logomon/store.hpp"

namespace logomon::api {

inline constexpr std::size_t kDefaultPageLimit = 100;

int http_status(ErrorCode code);
/// {"httpStatus", "code", "message", "details": {"violations"?, "refs"?}}
json error_body(const Error& error);

// Bodies shared with the CLI's --json output.
struct AssignmentRequest {
  EntityId childId = 0;
  EntityId predefinedHomeworkId = 0;
  Date assignedDate{};
  int deadlineDays = 0;
};
AssignmentRequest assignment_request_from_json(const json& j);
json status_body(const HomeworkAssignment& assignment, const Date& today);

struct ServiceConfig {
  std::string host = "127.0.0.1";
  int port = 8080;  // 0 picks a free port
  std::filesystem::path dataRoot = "logomon-data";
  std::optional<std::filesystem::path> uiDir;
};

/// key = value lines, '#' comments. Recognized keys: bind, data_root, ui_dir.
std::map<std::string, std::string> read_config_file(const std::filesystem::path& file);

/// Precedence: flag, then $LOGOMON_DATA (data root only), then config file,
/// then defaults. `bind` is host:port.
ServiceConfig resolve_service_config(const std::optional<std::string>& bindFlag,
                                     const std::optional<std::filesystem::path>& dataRootFlag,
                                     const std::optional<std::filesystem::path>& configFile);

class Service {
 public:
  Service(Store& store, ServiceConfig config = {});
  ~Service();
  Service(const Service&) = delete;
  Service& operator=(const Service&) = delete;

  /// Binds the listening socket and returns the port. Throws BindFailure.
  int bind();
  /// Serves until stop(); bind() first.
  void listen();
  /// bind() and serve on a background thread.
  int start();
  /// Stops accepting, lets in-flight requests finish, joins the thread.
  void stop();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace logomon::api
