#include <doctest.h>

#include <sstream>

#include "logomon/cli.hpp"
#include "logomon/device_sync.hpp"
#include "support/fixtures.hpp"

using namespace logomon;
using logomon::testing::TempDir;

namespace {

struct Run {
  int code;
  std::string out, err;
};

struct Cli {
  TempDir dir;
  std::string root = (dir / "data").string();

  Run operator()(std::vector<std::string> args) {
    args.insert(args.begin(), {"--data-root", root});
    std::ostringstream out, err;
    const int code = cli::dispatch(args, out, err);
    return {code, out.str(), err.str()};
  }
  json json_of(std::vector<std::string> args) {
    args.insert(args.begin(), "--json");
    const auto r = (*this)(std::move(args));
    REQUIRE(r.code == 0);
    return json::parse(r.out);
  }
};

}  // namespace

TEST_CASE("word add prints the allocated id") {
  Cli cli;
  testing::make_file(cli.dir.path(), "copil.wav", "RIFF");
  testing::make_file(cli.dir.path(), "copil.png", "PNG");
  const auto wav = (cli.dir / "copil.wav").string();
  const auto png = (cli.dir / "copil.png").string();
  auto r = cli({"word", "add", "--text", "copil", "--speaker", "Pop Ana", "--therapist", "--pos", "noun",
                "--gender", "m", "--article", "--sound", wav, "--image", png});
  CHECK(r.code == 0);
  CHECK(r.out == "1\n");

  // Re-using registered assets by name.
  r = cli({"word", "add", "--text", "copii", "--pos", "noun", "--gender", "m", "--sound", "copil.wav",
           "--image", "copil.png"});
  CHECK(r.code == 0);
  const auto words = cli.json_of({"word", "list"});
  REQUIRE(words.size() == 2);
  CHECK(words[0]["speakerFamilyName"] == "Pop");
  CHECK(words[0]["speakerGivenName"] == "Ana");
  CHECK(words[1]["soundAssetId"] == words[0]["soundAssetId"]);
  CHECK(words[1]["articleCompatible"] == false);

  r = cli({"word", "add", "--text", "merge", "--pos", "verb", "--gender", "f", "--sound", "copil.wav",
           "--image", "copil.png"});
  CHECK(r.code == 1);
  CHECK(r.err.find("ValidationFailed") != std::string::npos);
  CHECK(cli.json_of({"word", "list"}).size() == 2);
}

TEST_CASE("usage errors exit 2 with a synopsis") {
  Cli cli;
  auto r = cli({"word", "add", "--text", "x"});
  CHECK(r.code == 2);
  CHECK(r.err.find("Usage") != std::string::npos);
  CHECK(cli({"assign", "create", "--child", "1", "--template", "1", "--date", "01.03.2024", "--days", "7"}).code == 2);
  CHECK(cli({"word", "add", "--text", "x", "--pos", "pronoun", "--sound", "a.wav", "--image", "a.png"}).code == 2);
  CHECK(cli({}).code == 2);
  CHECK(cli({"--help"}).code == 0);
}

TEST_CASE("exercise add rejects difficulty 9 and writes nothing") {
  Cli cli;
  auto r = cli({"exercise", "add", "--title", "Paronime", "--difficulty", "9", "--type", "Auz", "--subtype",
                "Paronime", "--sound", "s", "--instructions", "Ascultă."});
  CHECK(r.code == 1);
  CHECK(r.err.find("ValidationFailed") != std::string::npos);
  const auto exported = cli.json_of({"db", "export"});
  CHECK(exported["exerciseTypes"].empty());
  CHECK(exported["targetSounds"].empty());

  const auto ex = cli.json_of({"exercise", "add", "--title", "Paronime", "--difficulty", "2", "--type", "Auz",
                               "--subtype", "Paronime", "--subtype-app", "Paronime.exe", "--sound", "s",
                               "--instructions", "Ascultă."});
  CHECK(ex["difficulty"] == 2);
  // Names are reused on the second exercise.
  cli({"exercise", "add", "--title", "Altul", "--difficulty", "4", "--type", "Auz", "--subtype", "Paronime",
       "--sound", "s", "--instructions", "Ascultă."});
  const auto after = cli.json_of({"db", "export"});
  CHECK(after["associations"].size() == 1);
  CHECK(after["instructions"].size() == 1);
  CHECK(cli.json_of({"exercise", "list", "--difficulty-max", "3"}).size() == 1);
}

TEST_CASE("assign create then status") {
  Cli cli;
  {
    auto store = Store::open(cli.root);
    testing::build_catalog(store, cli.dir / "scratch");
  }
  auto r = cli({"assign", "create", "--child", "1", "--template", "1", "--date", "2024-03-01", "--days", "7"});
  CHECK(r.code == 0);
  CHECK(r.out == "1\n");
  r = cli({"assign", "status", "--id", "1", "--today", "2024-03-08"});
  CHECK(r.out == "Pending\n");
  const auto status = cli.json_of({"assign", "status", "--id", "1", "--today", "2024-03-09"});
  CHECK(status["status"] == "Overdue");
  CHECK(status["dueDate"] == "2024-03-08");

  r = cli({"assign", "report", "--id", "1", "--date", "2024-03-05", "--record", "1:1:70:1", "--record",
           "1:2:85:0", "--record", "2:1:40:1"});
  CHECK(r.code == 0);
  CHECK(r.out.find("resolved") != std::string::npos);
  r = cli({"assign", "report", "--id", "1", "--date", "2024-03-05", "--record", "1:1:70:1"});
  CHECK(r.code == 1);
  CHECK(r.err.find("AlreadyReported") != std::string::npos);

  const auto progress = cli.json_of({"progress", "show", "--child", "1"});
  CHECK(progress["perAssignment"][0]["meanBestPercent"]["numerator"] == 125);
  CHECK(progress["perAssignment"][0]["meanBestPercent"]["denominator"] == 2);
}

TEST_CASE("report from a file") {
  Cli cli;
  {
    auto store = Store::open(cli.root);
    testing::build_catalog(store, cli.dir / "scratch");
  }
  cli({"assign", "create", "--child", "1", "--template", "1", "--date", "2024-03-01", "--days", "7"});
  const auto file = testing::make_file(
      cli.dir.path(), "report.json",
      R"({"reportDate":"2024-03-10","records":[{"exerciseId":1,"attemptIndex":2,"achievedPercent":90,"initiallyWrongWords":0}]})");
  auto r = cli({"assign", "report", "--id", "1", "--file", file.string()});
  CHECK(r.code == 1);
  CHECK(r.err.find("BadAttemptSequence") != std::string::npos);
}

TEST_CASE("bundle export, device simulate, bundle import") {
  Cli cli;
  {
    auto store = Store::open(cli.root);
    testing::build_catalog(store, cli.dir / "scratch");
  }
  cli({"assign", "create", "--child", "1", "--template", "1", "--date", "2024-03-01", "--days", "7"});
  const auto bundle = (cli.dir / "b.zip").string();
  const auto results = (cli.dir / "r.zip").string();
  auto r = cli({"bundle", "export", "--assignment", "1", "--out", bundle, "--exported-at", "2024-03-02T08:00:00Z"});
  CHECK(r.code == 0);
  r = cli({"device", "simulate", "--bundle", bundle, "--out", results, "--seed", "4"});
  CHECK(r.code == 0);
  const auto outcomes = cli.json_of({"bundle", "import", "--file", results});
  for (const auto& o : outcomes) CHECK(o["resolved"] == true);
  r = cli({"bundle", "import", "--file", results});
  CHECK(r.code == 1);
  CHECK(cli.json_of({"assign", "status", "--id", "1", "--today", "2024-03-02"})["status"] == "ReportedOnTime");
  r = cli({"bundle", "import", "--file", (cli.dir / "missing.zip").string()});
  CHECK(r.code == 1);
  CHECK(r.err.find("MalformedBundle") != std::string::npos);
}

TEST_CASE("db export and seed round-trip") {
  Cli cli;
  {
    auto store = Store::open(cli.root);
    testing::build_catalog(store, cli.dir / "scratch");
  }
  const auto out = (cli.dir / "export").string();
  CHECK(cli({"db", "export", "--out", out}).code == 0);
  Cli other;
  CHECK(other({"db", "init"}).code == 0);
  CHECK(other({"db", "seed", "--from", out}).code == 0);
  CHECK(other.json_of({"db", "export"}) == cli.json_of({"db", "export"}));
  // Seeding the same document again is idempotent.
  CHECK(other({"db", "seed", "--from", out}).code == 0);
  CHECK(other.json_of({"db", "export"}) == cli.json_of({"db", "export"}));
}
