#include "support.hpp"

#include <random>

#include <fmt/format.h>

#include "specforge/util.hpp"

namespace fs = std::filesystem;

namespace specforge::testing {

fs::path fixture_path(const std::string& relative) { return fs::path(SPECFORGE_FIXTURE_DIR) / relative; }

std::string fixture(const std::string& relative) { return util::read_file(fixture_path(relative)); }

fs::path template_dir() { return SPECFORGE_TEMPLATE_DIR; }

fs::path copy_fixture_tree(const std::string& relative, const fs::path& dest) {
  fs::create_directories(dest);
  fs::copy(fixture_path(relative), dest, fs::copy_options::recursive | fs::copy_options::overwrite_existing);
  return dest;
}

corpus::Corpus planning_corpus(std::size_t programs) {
  static const corpus::Suite kSuites[] = {corpus::Suite::basic, corpus::Suite::famous, corpus::Suite::mirror,
                                          corpus::Suite::unique};
  corpus::Corpus c;
  for (std::size_t i = 0; i < programs; ++i) {
    corpus::Program p;
    p.id = fmt::format("p{:02}", i);
    p.suite = kSuites[i % 4];
    p.source = fmt::format("int add{0}(int a) {{ return a + {0}; }}\n", i);
    c.programs.push_back(p);
    corpus::MutationOp swap;
    swap.op = corpus::MutationKind::operator_swap;
    swap.pattern = "+";
    swap.replacement = "-";
    for (auto kind : {corpus::VariantKind::buggy, corpus::VariantKind::anonymized,
                      corpus::VariantKind::buggy_anonymized}) {
      corpus::VariantSpec v;
      v.program_id = p.id;
      v.kind = kind;
      if (corpus::is_buggy(kind)) v.mutations = {swap};
      c.variants.push_back(v);
    }
  }
  return c;
}

TempDir::TempDir() {
  std::random_device rd;
  std::mt19937_64 rng(rd());
  path_ = fs::temp_directory_path() / fmt::format("specforge-test-{:016x}", rng());
  fs::create_directories(path_);
}

TempDir::~TempDir() {
  std::error_code ec;
  fs::remove_all(path_, ec);
}

void TempDir::write(const std::string& name, const std::string& content) const {
  util::write_file_atomic(path_ / name, content);
}

}  // namespace specforge::testing
