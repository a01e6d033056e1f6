#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "specforge/acsl.hpp"
#include "specforge/pipeline.hpp"

namespace specforge::report {

enum class GroupKey { set, suite, variant };
enum class RecordFilter { all, valid_only };
enum class Format { csv, markdown };

std::string_view to_string(GroupKey k);
std::optional<GroupKey> parse_group_key(std::string_view s);
std::optional<RecordFilter> parse_filter(std::string_view s);
std::optional<Format> parse_format(std::string_view s);

struct CountTableRow {
  std::vector<int> order;          // enum positions of the key, used for sorting
  std::vector<std::string> key;    // display names, one per group column
  std::size_t records = 0;
  acsl::CountRow sums;

  double mean(acsl::ClauseKind k) const;
  double mean_total() const;
};

struct CountTable {
  std::vector<GroupKey> group_by;
  RecordFilter filter = RecordFilter::all;
  std::vector<CountTableRow> rows;
};

CountTable aggregate_counts(const std::vector<pipeline::GenerationRecord>& records,
                            const std::vector<GroupKey>& group_by, RecordFilter filter = RecordFilter::all);

// Columns: group keys, records, per-kind sums, total, per-kind means, mean
// total. Without `all_kinds` only requires/ensures/assigns are shown.
std::string emit(const CountTable& table, Format format, bool all_kinds = false);

struct Snippet {
  std::string pattern_id;
  std::string sentence;
  std::size_t begin = 0;  // byte span of `sentence` in the reasoning text
  std::size_t end = 0;
};

std::vector<std::string> default_bug_patterns();

// Case-insensitive, word-bounded matches, reported per sentence. These are
// triage candidates for a human reader, not bug judgements.
std::vector<Snippet> flag_bug_mentions(std::string_view reasoning, const std::vector<std::string>& patterns);

// Sentence spans: split after . ! ? followed by whitespace, and at line breaks.
std::vector<std::pair<std::size_t, std::size_t>> sentence_spans(std::string_view text);

struct BugTableRow {
  std::string label;  // "Basic", ..., "Anonymized Basic", ...
  std::size_t flagged = 0;
  std::size_t total = 0;
};

struct BugTable {
  std::vector<BugTableRow> rows;
};

// One row per suite for buggy records and one per suite for buggy
// anonymized records; `flagged` counts records with at least one candidate.
BugTable bug_table(const std::vector<pipeline::GenerationRecord>& records, const std::vector<std::string>& patterns);
std::string emit(const BugTable& table, Format format);

// Per-record candidate listing for reviewers.
std::string emit_candidates(const std::vector<pipeline::GenerationRecord>& records,
                            const std::vector<std::string>& patterns);

extern const char* const kReviewBanner;

}  // namespace specforge::report
