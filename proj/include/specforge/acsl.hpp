#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "specforge/ctokens.hpp"

namespace specforge::acsl {

enum class ClauseKind {
  requires_,
  ensures,
  assigns,
  assert_,
  loop_invariant,
  loop_assigns,
  loop_variant,
  behavior,
  logic,
  predicate,
  ghost,
  other,
};

inline constexpr std::size_t kClauseKindCount = 12;

inline constexpr std::array<ClauseKind, kClauseKindCount> kAllClauseKinds = {
    ClauseKind::requires_,      ClauseKind::ensures,      ClauseKind::assigns,
    ClauseKind::assert_,        ClauseKind::loop_invariant, ClauseKind::loop_assigns,
    ClauseKind::loop_variant,   ClauseKind::behavior,     ClauseKind::logic,
    ClauseKind::predicate,      ClauseKind::ghost,        ClauseKind::other,
};

// Column names as they appear in CSV output ("requires", "assert", ...).
std::string_view column_name(ClauseKind k);
std::optional<ClauseKind> kind_from_column(std::string_view name);

struct Annotation {
  ClauseKind kind = ClauseKind::other;
  std::string clause_text;  // whitespace-joined, without `@` prefixes or delimiters
  std::optional<std::string> enclosing_function;
  ctokens::Span span;       // the clause's bytes in the source
};

struct CountRow {
  std::array<std::size_t, kClauseKindCount> counts{};

  std::size_t get(ClauseKind k) const { return counts[static_cast<std::size_t>(k)]; }
  std::size_t& at(ClauseKind k) { return counts[static_cast<std::size_t>(k)]; }
  std::size_t total() const;

  CountRow& operator+=(const CountRow& other);
  bool operator==(const CountRow&) const = default;
};

// Leading-keyword dispatch; never fails.
ClauseKind classify_clause(std::string_view clause_text);

// Throws LexError or Error{MalformedClause}.
std::vector<Annotation> extract_annotations(std::string_view source);
std::vector<Annotation> extract_annotations(const ctokens::TokenStream& ts);

CountRow count(const std::vector<Annotation>& annotations);
CountRow count(std::string_view source);

// Removes every ACSL span. A single space is left where removal would glue
// two non-blank bytes together, so the code tokens are unchanged.
std::string strip_annotations(std::string_view source);

// CSV header of one CountRow line, and the row itself.
std::string count_csv_header();
std::string count_csv_row(std::string_view program, std::string_view variant,
                          std::string_view set, std::string_view sample, const CountRow& row);

}  // namespace specforge::acsl
