#pragma once

#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>

#include "facetag/corpus.hpp"
#include "facetag/error.hpp"

namespace test {

inline facetag::Corpus corpus_from(const std::string& jsonl,
                                   const facetag::ParseOptions& options = {}) {
  std::istringstream in(jsonl);
  return facetag::parse_corpus_jsonl(in, options, "test");
}

// Runs f and returns the Error it throws; fails the test if nothing is thrown.
template <typename F>
facetag::Error error_of(F&& f) {
  try {
    f();
  } catch (const facetag::Error& e) {
    return e;
  }
  FAIL("expected facetag::Error");
  return facetag::Error(facetag::ErrorCode::InvalidArgument, "unreachable");
}

class TempDir {
 public:
  TempDir() {
    std::random_device rd;
    path_ = std::filesystem::temp_directory_path() /
            ("facetag-test-" + std::to_string(rd()) + std::to_string(rd()));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  std::string file(const std::string& name) const { return (path_ / name).string(); }

 private:
  std::filesystem::path path_;
};

inline std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void spit(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  out << text;
}

// One JSONL utterance line.
inline std::string line(const std::string& conv, int turn, const std::string& speaker,
                        const std::string& text, const std::string& face_act = "other",
                        const std::string& dialog_act = "", int fold = -1) {
  std::string s = "{\"conversation_id\":\"" + conv + "\",\"turn\":" + std::to_string(turn) +
                  ",\"speaker\":\"" + speaker + "\",\"text\":\"" + text + "\"";
  s += face_act.empty() ? ",\"face_act\":null" : ",\"face_act\":\"" + face_act + "\"";
  s += dialog_act.empty() ? ",\"dialog_act\":null" : ",\"dialog_act\":\"" + dialog_act + "\"";
  s += fold < 0 ? ",\"fold\":null" : ",\"fold\":" + std::to_string(fold);
  return s + "}\n";
}

}  // namespace test
