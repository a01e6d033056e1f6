#pragma once

#include <filesystem>
#include <string>

#include "specforge/corpus.hpp"

namespace specforge::testing {

std::filesystem::path fixture_path(const std::string& relative);
std::string fixture(const std::string& relative);
std::filesystem::path template_dir();

// Copies a fixture directory tree to `dest` and returns `dest`.
std::filesystem::path copy_fixture_tree(const std::string& relative, const std::filesystem::path& dest);

// `programs` one-function programs, each declaring buggy, anonymized and
// buggy_anonymized variants besides the implicit baseline.
corpus::Corpus planning_corpus(std::size_t programs);

// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  TempDir();
  ~TempDir();
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }
  void write(const std::string& name, const std::string& content) const;

 private:
  std::filesystem::path path_;
};

}  // namespace specforge::testing
