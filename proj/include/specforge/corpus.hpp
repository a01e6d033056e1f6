#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace specforge::corpus {

enum class Suite { basic, famous, mirror, unique, pathcrawler };
enum class VariantKind { baseline, buggy, anonymized, buggy_anonymized };

std::string_view to_string(Suite s);
std::string_view to_string(VariantKind k);
std::optional<Suite> parse_suite(std::string_view s);
std::optional<VariantKind> parse_variant_kind(std::string_view s);

inline bool is_buggy(VariantKind k) {
  return k == VariantKind::buggy || k == VariantKind::buggy_anonymized;
}
inline bool is_anonymized(VariantKind k) {
  return k == VariantKind::anonymized || k == VariantKind::buggy_anonymized;
}

struct Program {
  std::string id;
  std::string source;
  Suite suite = Suite::basic;
  std::string notes;
  std::filesystem::path path;
};

enum class MutationKind { operator_swap, off_by_one, index_swap, token_replace };

std::string_view to_string(MutationKind k);

// A single declarative edit. The locator is either a token pattern (matched
// against code tokens and required to be unique), a line+column naming the
// first token of the run, or both.
struct MutationOp {
  MutationKind op = MutationKind::token_replace;
  std::optional<std::string> pattern;
  std::optional<std::size_t> line;
  std::optional<std::size_t> column;
  std::optional<std::string> replacement;  // computed for index_swap when absent
};

struct AnonymizeOptions {
  bool strip_comments = false;
};

struct VariantSpec {
  std::string program_id;
  VariantKind kind = VariantKind::baseline;
  std::optional<std::string> patch;  // unified diff text
  std::vector<MutationOp> mutations;
  AnonymizeOptions anonymize_opts;
};

struct ProgramVariant {
  std::string program_id;
  VariantKind kind = VariantKind::baseline;
  std::string source;
  std::vector<std::pair<std::string, std::string>> rename_map;
};

struct Corpus {
  std::vector<Program> programs;
  std::vector<VariantSpec> variants;

  const Program* find(std::string_view id) const;
  // Declared variants of one program, with an implicit baseline first when
  // the manifest does not declare one.
  std::vector<VariantSpec> variants_of(std::string_view program_id) const;
};

// Throws Error{ManifestSyntax, MissingSource, DuplicateId}.
Corpus load_manifest(const std::filesystem::path& path);
// Manifest text with paths resolved against `base_dir`.
Corpus parse_manifest(std::string_view json_text, const std::filesystem::path& base_dir);

// Throws Error{PatchConflict, AmbiguousLocator, LocatorNotFound,
// InvalidMutation} or LexError.
ProgramVariant materialize_variant(const Program& p, const VariantSpec& v);

std::string apply_mutation(std::string_view source, const MutationOp& op);
std::string apply_patch(std::string_view source, std::string_view unified_diff);

struct Anonymized {
  std::string source;
  std::vector<std::pair<std::string, std::string>> rename_map;
};

// Renames every function defined in the file (except `main`) to f1, f2, ...
// in order of definition, skipping placeholder names already used by other
// identifiers. Throws LexError.
Anonymized anonymize(std::string_view source, const AnonymizeOptions& opts = {});

}  // namespace specforge::corpus
