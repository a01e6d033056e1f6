#pragma once

#include <cstddef>
#include <filesystem>
#include <functional>
#include <map>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "specforge/acsl.hpp"
#include "specforge/corpus.hpp"
#include "specforge/ctokens.hpp"
#include "specforge/llm.hpp"
#include "specforge/prompt.hpp"
#include "specforge/symbolic.hpp"

namespace specforge::pipeline {

enum class PromptSet { baseline_set, pathcrawler_set, eva_set };

std::string_view to_string(PromptSet s);
std::optional<PromptSet> parse_prompt_set(std::string_view s);
prompt::TemplateId template_for(PromptSet s);

struct Job {
  std::string program_id;
  corpus::Suite suite = corpus::Suite::basic;
  corpus::VariantKind variant = corpus::VariantKind::baseline;
  PromptSet set = PromptSet::baseline_set;
  prompt::IntentMode intent_mode = prompt::IntentMode::off;
  std::size_t sample_index = 0;
  std::string prompt_digest;

  // Resume key: program, variant, set, intent mode, sample.
  std::string identity() const;
};

// A job together with what is needed to run it.
struct PlannedJob {
  Job job;
  std::string prompt;
  std::string variant_source;
  std::string directive_text;
  prompt::ModelParams model;
};

struct PlanOptions {
  std::vector<PromptSet> sets = {PromptSet::baseline_set};
  std::vector<prompt::IntentMode> intent_modes = {prompt::IntentMode::off};
  std::map<prompt::IntentMode, std::string> directive_texts;  // overrides of the default wording
  std::size_t samples = 3;
  std::filesystem::path symbolic_dir;
  std::filesystem::path template_dir = prompt::TemplateStore::default_dir();
  prompt::ModelParams model;
  symbolic::RaggedPolicy ragged_policy = symbolic::RaggedPolicy::reject;
  bool skip_missing_artifacts = false;
};

// Where the symbolic output for one program variant is looked up: the
// variant-specific file first, then (baseline only) the program-level one.
std::vector<std::filesystem::path> artifact_candidates(const std::filesystem::path& dir, std::string_view program_id,
                                                       corpus::VariantKind variant, symbolic::Tool tool);

// Ordered by program (manifest order), variant, set, intent mode, sample.
// Throws Error{MissingSymbolicArtifact} listing every missing pair unless
// `skip_missing_artifacts` is set, in which case those jobs are left out.
std::vector<PlannedJob> plan_jobs(const corpus::Corpus& corpus, const PlanOptions& options);

// Throws Error{NoCodeBlock}.
std::string extract_code_block(std::string_view answer);

enum class FailureKind { no_code_block, code_edited, zero_annotations, lex_failure, provider_error };

std::string_view to_string(FailureKind k);
std::optional<FailureKind> parse_failure_kind(std::string_view s);

struct Failure {
  FailureKind kind = FailureKind::lex_failure;
  std::string detail;
  std::optional<ctokens::Divergence> divergence;
};

struct ValidationResult {
  std::vector<Failure> failures;
  bool ok() const { return failures.empty(); }
  bool has(FailureKind k) const;
};

ValidationResult validate(std::string_view original, std::string_view extracted);

struct Timestamps {
  std::string recorded_at;
  long long latency_ms = 0;
};

struct GenerationRecord {
  Job job;
  std::string model;
  double temperature = 0.7;
  std::string intent_directive;
  std::string reasoning;
  std::string answer;
  std::optional<std::string> extracted_code;
  ValidationResult validation;
  acsl::CountRow counts;
  Timestamps timestamps;
};

// One JSON object, fields in fixed order, no trailing newline.
std::string record_to_json(const GenerationRecord& r);
// Throws Error{StoreIo} on malformed input.
GenerationRecord record_from_json(std::string_view line);

// Append-only JSONL file with a single serialized writer.
class RecordStore {
 public:
  explicit RecordStore(std::filesystem::path path);

  std::vector<GenerationRecord> load() const;
  std::set<std::string> completed_identities() const;
  void truncate();
  void append(const GenerationRecord& r);
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
  std::mutex mutex_;
};

GenerationRecord run_job(const PlannedJob& planned, llm::Client& client);

struct BatchOptions {
  bool resume = false;
  int workers = 4;
  std::function<void(const GenerationRecord&)> on_record;
};

struct BatchSummary {
  std::size_t planned = 0;
  std::size_t written = 0;
  std::size_t skipped = 0;
  std::size_t ok = 0;
  std::size_t validation_failures = 0;
  std::size_t provider_errors = 0;
};

// Runs every job not already in the store (with `resume`) and appends the
// records in plan order, so replayed batches produce identical files.
BatchSummary run_batch(const std::vector<PlannedJob>& jobs, llm::Client& client, RecordStore& store,
                       const BatchOptions& options = {});

}  // namespace specforge::pipeline
