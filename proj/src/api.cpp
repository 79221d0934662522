#include "logomon/api.hpp"

#include <cstdlib>
#include <fstream>
#include <thread>

#include <httplib.h>

#include "logomon/device_sync.hpp"
#include "logomon/digest.hpp"

namespace fs = std::filesystem;

namespace logomon::api {

int http_status(ErrorCode code) {
  switch (code) {
    case ErrorCode::NotFound:
    case ErrorCode::UnknownAssignment:
      return 404;
    case ErrorCode::ValidationFailed:
    case ErrorCode::UnknownExercise:
    case ErrorCode::BadAttemptSequence:
    case ErrorCode::WrongExtension:
      return 422;
    case ErrorCode::ReferentialIntegrity:
    case ErrorCode::StillReferenced:
    case ErrorCode::UniquenessViolation:
    case ErrorCode::AlreadyReported:
    case ErrorCode::DigestMismatch:
    case ErrorCode::NameCollision:
    case ErrorCode::AssetMissing:
      return 409;
    case ErrorCode::SourceMissing:
    case ErrorCode::MalformedBundle:
    case ErrorCode::MalformedRequest:
      return 400;
    case ErrorCode::StoreOpenFailure:
    case ErrorCode::BindFailure:
      return 503;
  }
  return 500;
}

json error_body(const Error& error) {
  json details = json::object();
  if (!error.violations().empty()) {
    details["violations"] = json::array();
    for (const auto& v : error.violations()) details["violations"].push_back(to_json(v));
  }
  if (!error.refs().empty()) {
    details["refs"] = json::array();
    for (const auto& r : error.refs()) details["refs"].push_back(to_json(r));
  }
  return {{"httpStatus", http_status(error.code())},
          {"code", std::string(to_string(error.code()))},
          {"message", error.what()},
          {"details", details}};
}

AssignmentRequest assignment_request_from_json(const json& j) {
  StrictObject o(j, "assignment");
  AssignmentRequest r;
  r.childId = o.integer("childId");
  r.predefinedHomeworkId = o.integer("predefinedHomeworkId");
  r.assignedDate = o.date("assignedDate");
  r.deadlineDays = o.int32("deadlineDays");
  o.finish();
  return r;
}

json status_body(const HomeworkAssignment& assignment, const Date& today) {
  return {{"assignmentId", assignment.id},
          {"status", std::string(homework::to_string(homework::assignment_status(assignment, today)))},
          {"dueDate", format_date(homework::due_date(assignment))},
          {"today", format_date(today)},
          {"reportDate", assignment.reportDate ? json(format_date(*assignment.reportDate)) : json(nullptr)}};
}

// ---------------------------------------------------------------------------
// Configuration

namespace {

std::string trim(std::string s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

void apply_bind(ServiceConfig& config, const std::string& bind) {
  const auto colon = bind.rfind(':');
  if (colon == std::string::npos)
    throw Error(ErrorCode::MalformedRequest, "bind must be host:port, got '" + bind + "'");
  config.host = bind.substr(0, colon);
  try {
    std::size_t used = 0;
    config.port = std::stoi(bind.substr(colon + 1), &used);
    if (used != bind.size() - colon - 1 || config.port < 0 || config.port > 65535) throw 0;
  } catch (...) {
    throw Error(ErrorCode::MalformedRequest, "bad port in '" + bind + "'");
  }
}

}  // namespace

std::map<std::string, std::string> read_config_file(const fs::path& file) {
  std::ifstream in(file);
  if (!in) throw Error(ErrorCode::MalformedRequest, "cannot read config file " + file.string());
  std::map<std::string, std::string> values;
  std::string line;
  int number = 0;
  while (std::getline(in, line)) {
    ++number;
    line = trim(line.substr(0, line.find('#')));
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw Error(ErrorCode::MalformedRequest,
                  file.string() + ":" + std::to_string(number) + ": expected key = value");
    auto value = trim(line.substr(eq + 1));
    if (value.size() >= 2 && value.front() == '"' && value.back() == '"')
      value = value.substr(1, value.size() - 2);
    values[trim(line.substr(0, eq))] = value;
  }
  return values;
}

ServiceConfig resolve_service_config(const std::optional<std::string>& bindFlag,
                                     const std::optional<fs::path>& dataRootFlag,
                                     const std::optional<fs::path>& configFile) {
  ServiceConfig config;
  std::map<std::string, std::string> file;
  if (configFile) file = read_config_file(*configFile);
  for (const auto& [key, value] : file)
    if (key != "bind" && key != "data_root" && key != "ui_dir")
      throw Error(ErrorCode::MalformedRequest, "unknown config key '" + key + "'");

  if (bindFlag)
    apply_bind(config, *bindFlag);
  else if (file.contains("bind"))
    apply_bind(config, file["bind"]);

  if (dataRootFlag)
    config.dataRoot = *dataRootFlag;
  else if (const char* env = std::getenv("LOGOMON_DATA"); env && *env)
    config.dataRoot = env;
  else if (file.contains("data_root"))
    config.dataRoot = file["data_root"];

  if (file.contains("ui_dir")) config.uiDir = file["ui_dir"];
  return config;
}

// ---------------------------------------------------------------------------
// Service

namespace {

using httplib::Request;
using httplib::Response;

void send_json(Response& res, int status, const json& body) {
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

void send_error(Response& res, const Error& e) { send_json(res, http_status(e.code()), error_body(e)); }

[[noreturn]] void malformed(const std::string& message) {
  throw Error(ErrorCode::MalformedRequest, message);
}

json parse_body(const Request& req) {
  try {
    return json::parse(req.body);
  } catch (const json::parse_error& e) {
    malformed(std::string("request body is not JSON: ") + e.what());
  }
}

EntityId path_id(const Request& req, std::size_t group = 1) {
  try {
    return std::stoll(req.matches[group].str());
  } catch (...) {
    malformed("id out of range");
  }
}

std::optional<std::int64_t> query_int(const Request& req, const std::string& key) {
  if (!req.has_param(key)) return std::nullopt;
  const auto text = req.get_param_value(key);
  try {
    std::size_t used = 0;
    const auto value = std::stoll(text, &used);
    if (used != text.size()) throw 0;
    return value;
  } catch (...) {
    malformed("query parameter " + key + " must be an integer");
  }
}

std::size_t page_param(const Request& req, const std::string& key, std::size_t fallback) {
  const auto v = query_int(req, key);
  if (!v) return fallback;
  if (*v < 0) malformed(key + " must not be negative");
  return static_cast<std::size_t>(*v);
}

Date query_date(const Request& req, const std::string& key, Date fallback) {
  if (!req.has_param(key)) return fallback;
  const auto d = parse_date(req.get_param_value(key));
  if (!d) malformed(key + " must be YYYY-MM-DD");
  return *d;
}

Error not_found(EntityKind kind, EntityId id) {
  return Error(ErrorCode::NotFound, std::string(to_string(kind)) + ":" + std::to_string(id) + " not found");
}

json list_body(const std::vector<Entity>& items) {
  json arr = json::array();
  for (const auto& e : items) arr.push_back(to_json(e));
  return arr;
}

template <class T>
json page(const std::vector<T>& items, std::size_t limit, std::size_t offset) {
  json arr = json::array();
  for (std::size_t i = offset; i < items.size() && i - offset < limit; ++i)
    arr.push_back(to_json(Entity{items[i]}));
  return arr;
}

/// Decodes a create/update body; the id, when present, must be 0 on create
/// and equal to the path id on update.
Entity decode_entity(EntityKind kind, const json& body, EntityId pathId) {
  auto entity = entity_from_json(kind, body);
  const auto given = id_of(entity);
  if (given != 0 && given != pathId) {
    ValidationResult r;
    r.add("id", "id-mismatch",
          pathId == 0 ? "id is allocated by the server" : "body id differs from the path id");
    r.throw_if_failed(std::string(to_string(kind)));
  }
  set_id(entity, pathId);
  return entity;
}

}  // namespace

struct Service::Impl {
  Store& store;
  ServiceConfig config;
  httplib::Server server;
  std::thread thread;
  int port = 0;
  bool bound = false;

  Impl(Store& s, ServiceConfig c) : store(s), config(std::move(c)) {
    // SO_REUSEADDR only: a second service on a busy port must fail to bind.
    server.set_socket_options([](socket_t sock) {
      int yes = 1;
      ::setsockopt(sock, SOL_SOCKET, SO_REUSEADDR, &yes, sizeof yes);
    });
    routes();
  }

  // Each request runs as one store transaction; errors map to their status.
  template <class F>
  httplib::Server::Handler wrap(F fn) {
    return [this, fn](const Request& req, Response& res) {
      try {
        store.atomically([&] { fn(req, res); });
      } catch (const Error& e) {
        send_error(res, e);
      } catch (const json::exception& e) {
        send_error(res, Error(ErrorCode::MalformedRequest, e.what()));
      } catch (const std::exception& e) {
        send_json(res, 500, {{"httpStatus", 500}, {"code", "Internal"}, {"message", e.what()}, {"details", json::object()}});
      }
    };
  }

  void crud(const std::string& base, EntityKind kind) {
    const std::string one = base + R"(/(\d+))";
    server.Get(base, wrap([this, kind](const Request& req, Response& res) {
      send_json(res, 200,
                list_body(store.list(kind, page_param(req, "limit", kDefaultPageLimit),
                                     page_param(req, "offset", 0))));
    }));
    server.Get(one, wrap([this, kind](const Request& req, Response& res) {
      send_json(res, 200, to_json(store.get(kind, path_id(req))));
    }));
    server.Post(base, wrap([this, kind](const Request& req, Response& res) {
      const auto id = store.put(decode_entity(kind, parse_body(req), 0));
      send_json(res, 201, to_json(store.get(kind, id)));
    }));
    server.Put(one, wrap([this, kind](const Request& req, Response& res) {
      const auto id = path_id(req);
      if (!store.exists(kind, id)) throw not_found(kind, id);
      store.put(decode_entity(kind, parse_body(req), id));
      send_json(res, 200, to_json(store.get(kind, id)));
    }));
    server.Delete(one, wrap([this, kind](const Request& req, Response& res) {
      store.erase(kind, path_id(req));
      res.status = 204;
    }));
  }

  void routes() {
    server.Get("/health", [](const Request&, Response& res) { send_json(res, 200, {{"status", "ok"}}); });

    crud("/words", EntityKind::Word);
    crud("/paronyms", EntityKind::ParonymPair);
    crud("/exercise-types", EntityKind::ExerciseType);
    crud("/exercise-subtypes", EntityKind::ExerciseSubtype);
    crud("/sounds", EntityKind::TargetSound);
    crud("/associations", EntityKind::Association);
    crud("/instructions", EntityKind::Instructions);
    crud("/templates", EntityKind::PredefinedHomework);
    crud("/children", EntityKind::Child);
    exercises();
    configurations();
    assets();
    assignments();

    server.Get(R"(/children/(\d+)/progress)", wrap([this](const Request& req, Response& res) {
      send_json(res, 200, homework::to_json(homework::child_progress(store, path_id(req))));
    }));
    server.Get("/export", wrap([this](const Request&, Response& res) {
      send_json(res, 200, store.export_json());
    }));

    if (config.uiDir) server.set_mount_point("/ui", config.uiDir->string());
  }

  void exercises() {
    // The filtered listing replaces the generic one below.
    server.Get("/exercises", wrap([this](const Request& req, Response& res) {
      const auto limit = page_param(req, "limit", kDefaultPageLimit);
      const auto offset = page_param(req, "offset", 0);
      ExerciseFilter f;
      f.typeId = query_int(req, "typeId");
      f.subtypeId = query_int(req, "subtypeId");
      f.soundId = query_int(req, "soundId");
      if (auto v = query_int(req, "difficultyMin")) f.difficultyMin = static_cast<int>(*v);
      if (auto v = query_int(req, "difficultyMax")) f.difficultyMax = static_cast<int>(*v);
      const bool filtered = f.typeId || f.subtypeId || f.soundId || f.difficultyMin || f.difficultyMax;
      if (filtered)
        send_json(res, 200, page(store.query_exercises(f), limit, offset));
      else
        send_json(res, 200, list_body(store.list(EntityKind::Exercise, limit, offset)));
    }));
    crud("/exercises", EntityKind::Exercise);
  }

  void configurations() {
    const std::string base = R"(/exercises/(\d+)/configurations)";
    const std::string one = base + R"(/(\d+))";
    auto require_exercise = [this](EntityId id) {
      if (!store.exists(EntityKind::Exercise, id)) throw not_found(EntityKind::Exercise, id);
    };
    auto owned = [this](EntityId exerciseId, EntityId configId) {
      auto found = store.find(EntityKind::ExerciseConfiguration, configId);
      if (!found || std::get<ExerciseConfiguration>(*found).exerciseId != exerciseId)
        throw not_found(EntityKind::ExerciseConfiguration, configId);
      return std::get<ExerciseConfiguration>(std::move(*found));
    };
    auto decode = [](const Request& req, EntityId exerciseId, EntityId configId) {
      auto body = parse_body(req);
      if (body.is_object() && !body.contains("exerciseId")) body["exerciseId"] = exerciseId;
      auto entity = decode_entity(EntityKind::ExerciseConfiguration, body, configId);
      if (std::get<ExerciseConfiguration>(entity).exerciseId != exerciseId) {
        ValidationResult r;
        r.add("exerciseId", "id-mismatch", "exerciseId differs from the path");
        r.throw_if_failed("ExerciseConfiguration");
      }
      return entity;
    };

    server.Get(base, wrap([=, this](const Request& req, Response& res) {
      const auto exerciseId = path_id(req);
      require_exercise(exerciseId);
      send_json(res, 200,
                page(store.configurations_of(exerciseId), page_param(req, "limit", kDefaultPageLimit),
                     page_param(req, "offset", 0)));
    }));
    server.Get(one, wrap([=](const Request& req, Response& res) {
      send_json(res, 200, to_json(Entity{owned(path_id(req), path_id(req, 2))}));
    }));
    server.Post(base, wrap([=, this](const Request& req, Response& res) {
      const auto exerciseId = path_id(req);
      require_exercise(exerciseId);
      const auto id = store.put(decode(req, exerciseId, 0));
      send_json(res, 201, to_json(store.get(EntityKind::ExerciseConfiguration, id)));
    }));
    server.Put(one, wrap([=, this](const Request& req, Response& res) {
      const auto exerciseId = path_id(req);
      const auto configId = path_id(req, 2);
      owned(exerciseId, configId);
      store.put(decode(req, exerciseId, configId));
      send_json(res, 200, to_json(store.get(EntityKind::ExerciseConfiguration, configId)));
    }));
    server.Delete(one, wrap([=, this](const Request& req, Response& res) {
      const auto configId = path_id(req, 2);
      owned(path_id(req), configId);
      store.erase(EntityKind::ExerciseConfiguration, configId);
      res.status = 204;
    }));
  }

  void assets() {
    server.Get("/assets", wrap([this](const Request& req, Response& res) {
      send_json(res, 200,
                list_body(store.list(EntityKind::MediaAsset, page_param(req, "limit", kDefaultPageLimit),
                                     page_param(req, "offset", 0))));
    }));
    server.Get(R"(/assets/(\d+))", wrap([this](const Request& req, Response& res) {
      send_json(res, 200, to_json(store.get(EntityKind::MediaAsset, path_id(req))));
    }));
    server.Delete(R"(/assets/(\d+))", wrap([this](const Request& req, Response& res) {
      store.erase(EntityKind::MediaAsset, path_id(req));
      res.status = 204;
    }));
    server.Post(R"(/assets/(sound|image))", wrap([this](const Request& req, Response& res) {
      const auto kind = req.matches[1].str() == "sound" ? MediaKind::Sound : MediaKind::Image;
      if (!req.is_multipart_form_data() || !req.has_file("file"))
        malformed("expected a multipart upload with a 'file' field");
      const auto file = req.get_file_value("file");
      const auto name = fs::path(file.filename).filename();
      if (name.empty() || name != fs::path(file.filename)) {
        ValidationResult r;
        r.add("filename", "filename-traversal", "upload file name must be a bare name");
        r.throw_if_failed("MediaAsset");
      }
      std::string scratch = (fs::temp_directory_path() / "logomon-upload-XXXXXX").string();
      if (!::mkdtemp(scratch.data())) throw std::runtime_error("cannot create upload directory");
      struct Cleanup {
        fs::path dir;
        ~Cleanup() {
          std::error_code ec;
          fs::remove_all(dir, ec);
        }
      } cleanup{scratch};
      write_file(cleanup.dir / name, file.content);
      send_json(res, 201, to_json(Entity{store.register_media_asset(kind, cleanup.dir / name)}));
    }));
  }

  void assignments() {
    server.Get("/assignments", wrap([this](const Request& req, Response& res) {
      send_json(res, 200,
                list_body(store.list(EntityKind::HomeworkAssignment,
                                     page_param(req, "limit", kDefaultPageLimit),
                                     page_param(req, "offset", 0))));
    }));
    server.Post("/assignments", wrap([this](const Request& req, Response& res) {
      const auto r = assignment_request_from_json(parse_body(req));
      const auto a =
          homework::assign_homework(store, r.childId, r.predefinedHomeworkId, r.assignedDate, r.deadlineDays);
      send_json(res, 201, to_json(Entity{a}));
    }));
    server.Get(R"(/assignments/(\d+))", wrap([this](const Request& req, Response& res) {
      send_json(res, 200, to_json(store.get(EntityKind::HomeworkAssignment, path_id(req))));
    }));
    server.Get(R"(/assignments/(\d+)/status)", wrap([this](const Request& req, Response& res) {
      const auto a = store.get<HomeworkAssignment>(path_id(req));
      send_json(res, 200, status_body(a, query_date(req, "today", today_utc())));
    }));
    server.Post(R"(/assignments/(\d+)/report)", wrap([this](const Request& req, Response& res) {
      auto body = parse_body(req);
      const auto id = path_id(req);
      if (body.is_object() && !body.contains("assignmentId")) body["assignmentId"] = id;
      const auto intake = homework::report_intake_from_json(body);
      if (intake.assignmentId != id) {
        ValidationResult r;
        r.add("assignmentId", "id-mismatch", "assignmentId differs from the path");
        r.throw_if_failed("report");
      }
      send_json(res, 200, homework::to_json(homework::ingest_report(store, intake)));
    }));
    server.Get(R"(/assignments/(\d+)/outcomes)", wrap([this](const Request& req, Response& res) {
      const auto id = path_id(req);
      if (!store.exists(EntityKind::HomeworkAssignment, id)) throw not_found(EntityKind::HomeworkAssignment, id);
      send_json(res, 200, homework::to_json(homework::assignment_outcomes(store, id)));
    }));
    server.Get(R"(/assignments/(\d+)/bundle)", wrap([this](const Request& req, Response& res) {
      const auto id = path_id(req);
      sync::ExportOptions options;
      if (req.has_param("exportedAt")) options.exportedAt = req.get_param_value("exportedAt");
      const auto bundle = sync::build_bundle(store, id, options);
      res.status = 200;
      res.set_header("Content-Disposition",
                     "attachment; filename=\"assignment-" + std::to_string(id) + ".zip\"");
      res.set_header("X-Manifest-Digest", bundle.manifestDigest);
      res.set_content(bundle.archive, "application/zip");
    }));
    server.Post(R"(/assignments/(\d+)/results)", wrap([this](const Request& req, Response& res) {
      const auto id = path_id(req);
      std::string archive = req.body;
      if (req.is_multipart_form_data()) {
        if (!req.has_file("file")) malformed("expected a 'file' field holding the result archive");
        archive = req.get_file_value("file").content;
      }
      const auto results = sync::read_result_archive(archive);
      if (results.assignmentId != id)
        throw Error(ErrorCode::MalformedBundle, "result archive is for assignment " +
                                                    std::to_string(results.assignmentId));
      send_json(res, 200, homework::to_json(sync::import_results(store, results)));
    }));
  }
};

Service::Service(Store& store, ServiceConfig config)
    : impl_(std::make_unique<Impl>(store, std::move(config))) {}

Service::~Service() { stop(); }

int Service::bind() {
  auto& s = impl_->server;
  int port = impl_->config.port;
  bool ok;
  if (port == 0) {
    port = s.bind_to_any_port(impl_->config.host);
    ok = port > 0;
  } else {
    ok = s.bind_to_port(impl_->config.host, port);
  }
  if (!ok)
    throw Error(ErrorCode::BindFailure,
                "cannot bind " + impl_->config.host + ":" + std::to_string(impl_->config.port));
  impl_->port = port;
  impl_->bound = true;
  return port;
}

void Service::listen() { impl_->server.listen_after_bind(); }

int Service::start() {
  const int port = bind();
  impl_->thread = std::thread([this] { impl_->server.listen_after_bind(); });
  impl_->server.wait_until_ready();
  return port;
}

void Service::stop() {
  if (!impl_) return;
  if (impl_->bound) impl_->server.stop();
  if (impl_->thread.joinable()) impl_->thread.join();
  impl_->bound = false;
}

}  // namespace logomon::api
