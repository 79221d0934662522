// Python bindings. Entities and documents cross the boundary as JSON text;
// the logomon package turns them into dicts.

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <sstream>

#include "logomon/api.hpp"
#include "logomon/cli.hpp"
#include "logomon/device_sync.hpp"
#include "logomon/homework.hpp"
#include "logomon/store.hpp"

namespace py = pybind11;
using namespace logomon;

namespace {

EntityKind kind_arg(const std::string& name) {
  if (auto k = entity_kind_from_string(name)) return *k;
  if (auto k = entity_kind_from_collection(name)) return *k;
  throw Error(ErrorCode::MalformedRequest, "unknown entity kind '" + name + "'");
}

Date date_arg(const std::string& text) {
  auto d = parse_date(text);
  if (!d) throw Error(ErrorCode::MalformedRequest, "date must be YYYY-MM-DD, got '" + text + "'");
  return *d;
}

json parse(const std::string& text) {
  try {
    return json::parse(text);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::MalformedRequest, e.what());
  }
}

}  // namespace

PYBIND11_MODULE(_logomon, m) {
  m.doc() = "logomon core";

  static py::exception<Error> error(m, "Error");
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      py::set_error(error, api::error_body(e).dump().c_str());
    }
  });

  py::class_<Store>(m, "Store")
      .def_static("open", [](const std::filesystem::path& root) { return Store::open(root); })
      .def_property_readonly("root", [](const Store& s) { return s.root(); })
      .def("put", [](Store& s, const std::string& kind, const std::string& body) {
        return s.put(entity_from_json(kind_arg(kind), parse(body)));
      })
      .def("get", [](const Store& s, const std::string& kind, EntityId id) {
        return to_json(s.get(kind_arg(kind), id)).dump();
      })
      .def("list", [](const Store& s, const std::string& kind) {
        json arr = json::array();
        for (const auto& e : s.list(kind_arg(kind))) arr.push_back(to_json(e));
        return arr.dump();
      })
      .def("count", [](const Store& s, const std::string& kind) { return s.count(kind_arg(kind)); })
      .def("erase", [](Store& s, const std::string& kind, EntityId id) { s.erase(kind_arg(kind), id); })
      .def("register_media_asset",
           [](Store& s, const std::string& kind, const std::filesystem::path& source) {
             const auto k = media_kind_from_string(kind);
             if (!k) throw Error(ErrorCode::MalformedRequest, "media kind must be Sound or Image");
             return to_json(Entity{s.register_media_asset(*k, source)}).dump();
           })
      .def("audit", &Store::audit)
      .def("export_json", [](const Store& s) { return s.export_json().dump(); })
      .def("seed", [](Store& s, const std::string& doc) { s.seed(parse(doc)); });

  m.def("assign_homework", [](Store& s, EntityId child, EntityId tmpl, const std::string& date, int days) {
    return to_json(Entity{homework::assign_homework(s, child, tmpl, date_arg(date), days)}).dump();
  });
  m.def("ingest_report", [](Store& s, const std::string& intake) {
    return homework::to_json(homework::ingest_report(s, homework::report_intake_from_json(parse(intake)))).dump();
  });
  m.def("assignment_status", [](const Store& s, EntityId id, const std::string& today) {
    return api::status_body(s.get<HomeworkAssignment>(id), date_arg(today)).dump();
  });
  m.def("child_progress", [](const Store& s, EntityId child) {
    return homework::to_json(homework::child_progress(s, child)).dump();
  });
  m.def("indefinite_article_for", [](const std::string& word) -> std::optional<std::string> {
    auto a = indefinite_article_for(decode<Word>(parse(word)));
    return a ? std::optional<std::string>(std::string(*a)) : std::nullopt;
  });

  m.def("build_bundle", [](Store& s, EntityId id, std::optional<std::string> exportedAt) {
    const auto b = sync::build_bundle(s, id, {exportedAt});
    return py::make_tuple(py::bytes(b.archive), b.manifestDigest);
  }, py::arg("store"), py::arg("assignment_id"), py::arg("exported_at") = py::none());
  m.def("simulate_device", [](py::bytes archive, double errorRate, std::uint64_t seed,
                              std::optional<std::string> reportDate) {
    sync::DeviceProfile profile{errorRate, seed, std::nullopt};
    if (reportDate) profile.reportDate = date_arg(*reportDate);
    const auto results = sync::simulate_device(std::string_view(std::string(archive)), profile);
    return py::bytes(sync::write_result_archive(results));
  }, py::arg("archive"), py::arg("error_rate") = 0.0, py::arg("seed") = 0, py::arg("report_date") = py::none());
  m.def("read_result_archive", [](py::bytes archive) {
    return sync::to_json(sync::read_result_archive(std::string(archive))).dump();
  });
  m.def("import_result_archive", [](Store& s, py::bytes archive) {
    return homework::to_json(sync::import_result_archive(s, std::string(archive))).dump();
  });

  m.def("cli", [](const std::vector<std::string>& args) {
    std::ostringstream out, err;
    const int code = cli::dispatch(args, out, err);
    return py::make_tuple(code, out.str(), err.str());
  });
}
