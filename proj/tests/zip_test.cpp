#include <doctest.h>

#include <random>

#include "logomon/zip.hpp"

using namespace logomon;

TEST_CASE("crc32 known value") {
  CHECK(zip::crc32("123456789") == 0xCBF43926u);
}

TEST_CASE("archives round-trip and are reproducible") {
  std::mt19937 rng(11);
  for (int round = 0; round < 20; ++round) {
    zip::Entries entries;
    const int n = 1 + static_cast<int>(rng() % 6);
    for (int i = 0; i < n; ++i) {
      std::string data(rng() % 300, '\0');
      for (auto& c : data) c = static_cast<char>(rng());
      entries["dir" + std::to_string(rng() % 3) + "/f" + std::to_string(i) + ".bin"] = data;
    }
    const auto archive = zip::write_archive(entries);
    CHECK(zip::read_archive(archive) == entries);
    CHECK(zip::write_archive(zip::read_archive(archive)) == archive);
  }
}

TEST_CASE("corruption is detected") {
  const auto archive = zip::write_archive({{"manifest.json", "{\"a\":1}"}});
  auto corrupt = archive;
  corrupt[32] ^= 0x01;  // inside the stored payload
  CHECK_THROWS_AS(zip::read_archive(corrupt), zip::ZipError);
  CHECK_THROWS_AS(zip::read_archive("not a zip"), zip::ZipError);
  CHECK_THROWS_AS(zip::read_archive(archive.substr(0, archive.size() / 2)), zip::ZipError);
}
