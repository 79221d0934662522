#pragma once

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "logomon/domain.hpp"
#include "logomon/store.hpp"

namespace logomon::testing {

class TempDir {
 public:
  explicit TempDir(const std::string& prefix = "logomon-test-") {
    std::string pattern = (std::filesystem::temp_directory_path() / (prefix + "XXXXXX")).string();
    if (!::mkdtemp(pattern.data())) throw std::runtime_error("mkdtemp failed");
    path_ = pattern;
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& child) const { return path_ / child; }

 private:
  std::filesystem::path path_;
};

inline std::filesystem::path make_file(const std::filesystem::path& dir, const std::string& name,
                                       const std::string& content) {
  std::filesystem::create_directories(dir);
  const auto p = dir / name;
  std::ofstream(p, std::ios::binary) << content;
  return p;
}

/// Registers <stem>.wav and <stem>.png and stores a word using them.
inline Word add_word(Store& store, const std::filesystem::path& scratch, const std::string& stem,
                     const std::string& text, PartOfSpeech pos = PartOfSpeech::Noun,
                     std::optional<Gender> gender = Gender::Masculine, bool article = true) {
  const auto sound = store.register_media_asset(
      MediaKind::Sound, make_file(scratch, stem + ".wav", "RIFF" + text + "-sound"));
  const auto image = store.register_media_asset(
      MediaKind::Image, make_file(scratch, stem + ".png", "PNG" + text + "-image"));
  Word w;
  w.text = text;
  w.speakerFamilyName = "Pop";
  w.speakerGivenName = "Ana";
  w.isTherapistRecording = true;
  w.partOfSpeech = pos;
  w.gender = pos == PartOfSpeech::Noun ? gender : std::nullopt;
  w.articleCompatible = pos == PartOfSpeech::Noun && article;
  w.soundAssetId = sound.id;
  w.imageAssetId = image.id;
  w.id = store.put(w);
  return w;
}

/// Every entity kind and relation of the schema, small.
struct Catalog {
  Word copil, copii, sac, zac;
  ParonymPair pair;
  ExerciseType type;
  ExerciseSubtype subtype;
  TargetSound sound;
  Association association;
  Instructions instructions;
  Exercise paronyms;
  Exercise listening;
  ExerciseConfiguration configA, configB, configC;
  PredefinedHomework tmpl;
  Child child;
};

inline Catalog build_catalog(Store& store, const std::filesystem::path& scratch) {
  Catalog c;
  c.copil = add_word(store, scratch, "copil", "copil", PartOfSpeech::Noun, Gender::Masculine, true);
  c.copii = add_word(store, scratch, "copii", "copii", PartOfSpeech::Noun, Gender::Masculine, false);
  c.sac = add_word(store, scratch, "sac", "sac");
  c.zac = add_word(store, scratch, "zac", "zac", PartOfSpeech::Verb, std::nullopt, false);

  c.pair = ParonymPair{0, c.sac.id, c.zac.id};
  c.pair.id = store.put(c.pair);

  c.type = ExerciseType{0, "Auz Fonematic", "AuzFonematic.exe"};
  c.type.id = store.put(c.type);
  c.subtype = ExerciseSubtype{0, "Identificare cuvânt în perechi de paronime", "Paronime.exe"};
  c.subtype.id = store.put(c.subtype);
  c.sound = TargetSound{0, "s"};
  c.sound.id = store.put(c.sound);
  c.association = Association{0, c.type.id, c.subtype.id, c.sound.id};
  c.association.id = store.put(c.association);
  c.instructions = Instructions{0, "Ascultă și alege imaginea corectă."};
  c.instructions.id = store.put(c.instructions);

  c.paronyms = Exercise{0, "Paronime s/z", 3, c.association.id, c.instructions.id};
  c.paronyms.id = store.put(c.paronyms);
  c.listening = Exercise{0, "Ascultare copil", 1, c.association.id, c.instructions.id};
  c.listening.id = store.put(c.listening);

  c.configA = ExerciseConfiguration{0, c.paronyms.id, c.sac.id, c.pair.id, 1500, 1, 0};
  c.configA.id = store.put(c.configA);
  c.configB = ExerciseConfiguration{0, c.paronyms.id, c.zac.id, c.pair.id, 1500, 0, 0};
  c.configB.id = store.put(c.configB);
  c.configC = ExerciseConfiguration{0, c.listening.id, c.copil.id, std::nullopt, 2000, 0, 0};
  c.configC.id = store.put(c.configC);

  c.tmpl.description = "Temă sunetul s";
  c.tmpl.repetitionsPerDay = 2;
  c.tmpl.exerciseItems = {{c.paronyms.id, 80}, {c.listening.id, 60}};
  c.tmpl.deficiencyRefs = {{LegacyTable::Deficiente, 3}};
  c.tmpl.testRefs = {{LegacyTable::Teste, 7}};
  c.tmpl.id = store.put(c.tmpl);

  c.child = Child{0, "Ionescu", "Maria"};
  c.child.id = store.put(c.child);
  return c;
}

}  // namespace logomon::testing
