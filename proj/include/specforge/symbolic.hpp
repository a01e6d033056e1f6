#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include "specforge/error.hpp"

namespace specforge::symbolic {

enum class AlarmCategory { integer_overflow, invalid_memory_access, division_by_zero, other };

std::string_view to_string(AlarmCategory c);
AlarmCategory categorize_alarm(std::string_view message);

struct EvaAlarm {
  std::string file;
  std::size_t line = 0;
  AlarmCategory category = AlarmCategory::other;
  std::string message;         // full warning text, continuation lines joined
  std::string assertion_text;  // starts with "assert"; empty when the warning has none
};

struct FinalState {
  std::string function;
  std::string variable;
  std::string values;
};

struct SummaryCategory {
  AlarmCategory category = AlarmCategory::other;
  std::string label;  // as printed, e.g. "integer overflows"
  std::size_t count = 0;
};

struct EvaSummary {
  std::optional<std::size_t> alarm_count;
  std::vector<SummaryCategory> categories;
  std::optional<std::size_t> functions_analyzed;
  std::optional<std::size_t> functions_total;
  std::optional<std::size_t> statements_reached;
  std::optional<std::size_t> statements_total;

  std::size_t count_of(AlarmCategory c) const;
};

struct EvaReport {
  std::vector<EvaAlarm> alarms;
  std::vector<FinalState> final_states;
  bool non_terminating = false;
  std::optional<EvaSummary> summary;
  std::string raw_text;

  std::size_t alarms_in(AlarmCategory c) const;
};

// Throws Error{MalformedReport}.
EvaReport parse_eva_report(std::string_view text);

enum class Verdict { success, unknown, no_extra_coverage, failure, other };

struct PcVerdict {
  Verdict kind = Verdict::other;
  std::string text;  // original spelling, kept for `other`
};

PcVerdict parse_verdict(std::string_view s);
std::string_view to_string(Verdict v);

struct PcRow {
  std::vector<std::pair<std::string, std::optional<long long>>> inputs;
  std::optional<long long> output;
  PcVerdict verdict;
  std::vector<std::string> cells;  // raw cells in header order
};

struct PcTable {
  std::vector<std::string> header;
  std::vector<PcRow> rows;
  std::string raw_text;
};

enum class RaggedPolicy { reject, pad };

// Throws Error{HeaderMissing, RaggedRow}. With `pad`, short rows are filled
// with empty cells; rows longer than the header are rejected either way.
PcTable parse_pathcrawler_csv(std::string_view text, RaggedPolicy policy = RaggedPolicy::reject);

// RFC-4180 record splitting; exposed for reuse.
std::vector<std::vector<std::string>> parse_csv_records(std::string_view text);

enum class ContextKind { none, eva, pathcrawler };

std::string_view to_string(ContextKind k);

struct SymbolicContext {
  ContextKind kind = ContextKind::none;
  std::string rendered_text;
  std::variant<std::monostate, EvaReport, PcTable> parsed;
};

SymbolicContext no_context();
SymbolicContext eva_context(std::string raw_report);
SymbolicContext pathcrawler_context(std::string raw_csv, RaggedPolicy policy = RaggedPolicy::reject);

enum class Tool { eva, pathcrawler };

std::string_view to_string(Tool t);
// File name used for a tool's output next to a program, e.g. "bsearch.eva.txt".
std::string artifact_name(std::string_view stem, Tool t);

struct ToolConfig {
  std::string binary;
  std::vector<std::string> flags;
  double timeout_s = 300;
  std::optional<std::filesystem::path> replay_dir;
};

class ToolFailure : public Error {
 public:
  ToolFailure(int exit_code, std::string output_tail);
  int exit_code() const noexcept { return exit_code_; }
  const std::string& output_tail() const noexcept { return tail_; }

 private:
  int exit_code_;
  std::string tail_;
};

// Runs the analyzer on one program and returns its combined output. When a
// replay directory holds a stored output for the program, that is returned
// instead and nothing is executed. Throws Error{ToolMissing, ToolFailed,
// Timeout}.
std::string run_external_tool(Tool tool, const std::filesystem::path& program_path, const ToolConfig& config);

}  // namespace specforge::symbolic
