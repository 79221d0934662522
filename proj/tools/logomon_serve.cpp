// HTTP service entry point. Stops cleanly on SIGINT/SIGTERM.

#include <csignal>
#include <iostream>
#include <thread>

#include <CLI11.hpp>

#include "logomon/api.hpp"

namespace {

volatile std::sig_atomic_t g_stop = 0;
void on_signal(int) { g_stop = 1; }

}  // namespace

int main(int argc, char** argv) {
  CLI::App app("logomon HTTP service", "logomon-serve");
  std::string bind, dataRoot, config;
  auto* bindOpt = app.add_option("--bind", bind, "host:port (default 127.0.0.1:8080)");
  auto* rootOpt = app.add_option("--data-root", dataRoot, "Data root");
  auto* configOpt = app.add_option("--config", config, "key = value config file");
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 2;
  }

  try {
    const auto cfg = logomon::api::resolve_service_config(
        bindOpt->count() ? std::optional<std::string>(bind) : std::nullopt,
        rootOpt->count() ? std::optional<std::filesystem::path>(dataRoot) : std::nullopt,
        configOpt->count() ? std::optional<std::filesystem::path>(config) : std::nullopt);
    auto store = logomon::Store::open(cfg.dataRoot);
    logomon::api::Service service(store, cfg);
    const int port = service.bind();
    std::cerr << "listening on " << cfg.host << ":" << port << ", data root " << store.root().string()
              << "\n";

    std::signal(SIGINT, on_signal);
    std::signal(SIGTERM, on_signal);
    std::thread server([&] { service.listen(); });
    while (!g_stop) std::this_thread::sleep_for(std::chrono::milliseconds(100));
    service.stop();
    server.join();
    return 0;
  } catch (const logomon::Error& e) {
    std::cerr << logomon::to_string(e.code()) << ": " << e.what() << "\n";
    return 1;
  }
}
