#include "specforge/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <condition_variable>
#include <exception>
#include <fstream>
#include <thread>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "specforge/error.hpp"
#include "specforge/util.hpp"

namespace fs = std::filesystem;
using json = nlohmann::json;
using ordered_json = nlohmann::ordered_json;

namespace specforge::pipeline {

std::string_view to_string(PromptSet s) {
  switch (s) {
    case PromptSet::baseline_set: return "baseline_set";
    case PromptSet::pathcrawler_set: return "pathcrawler_set";
    case PromptSet::eva_set: return "eva_set";
  }
  return "baseline_set";
}

std::optional<PromptSet> parse_prompt_set(std::string_view s) {
  for (auto v : {PromptSet::baseline_set, PromptSet::pathcrawler_set, PromptSet::eva_set}) {
    std::string_view name = to_string(v);
    if (s == name || s == name.substr(0, name.size() - 4)) return v;
  }
  return std::nullopt;
}

prompt::TemplateId template_for(PromptSet s) {
  switch (s) {
    case PromptSet::baseline_set: return prompt::TemplateId::baseline;
    case PromptSet::pathcrawler_set: return prompt::TemplateId::pathcrawler;
    case PromptSet::eva_set: return prompt::TemplateId::eva;
  }
  return prompt::TemplateId::baseline;
}

std::string Job::identity() const {
  return fmt::format("{}|{}|{}|{}|{}", program_id, corpus::to_string(variant), to_string(set),
                     prompt::to_string(intent_mode), sample_index);
}

std::vector<fs::path> artifact_candidates(const fs::path& dir, std::string_view program_id,
                                          corpus::VariantKind variant, symbolic::Tool tool) {
  std::vector<fs::path> out;
  out.push_back(dir / symbolic::artifact_name(fmt::format("{}.{}", program_id, corpus::to_string(variant)), tool));
  if (variant == corpus::VariantKind::baseline) out.push_back(dir / symbolic::artifact_name(program_id, tool));
  return out;
}

namespace {

template <typename T>
std::vector<T> sorted_unique(std::vector<T> v) {
  std::sort(v.begin(), v.end());
  v.erase(std::unique(v.begin(), v.end()), v.end());
  return v;
}

std::optional<symbolic::SymbolicContext> load_context(PromptSet set, const fs::path& dir, std::string_view program_id,
                                                      corpus::VariantKind variant, symbolic::RaggedPolicy policy) {
  if (set == PromptSet::baseline_set) return symbolic::no_context();
  auto tool = set == PromptSet::eva_set ? symbolic::Tool::eva : symbolic::Tool::pathcrawler;
  for (const auto& candidate : artifact_candidates(dir, program_id, variant, tool)) {
    if (!fs::is_regular_file(candidate)) continue;
    std::string raw = util::read_file(candidate);
    if (tool == symbolic::Tool::eva) return symbolic::eva_context(std::move(raw));
    return symbolic::pathcrawler_context(std::move(raw), policy);
  }
  return std::nullopt;
}

}  // namespace

std::vector<PlannedJob> plan_jobs(const corpus::Corpus& corpus, const PlanOptions& options) {
  auto sets = sorted_unique(options.sets);
  auto modes = sorted_unique(options.intent_modes);
  prompt::TemplateStore templates(options.template_dir);
  std::map<PromptSet, prompt::PromptTemplate> loaded;
  for (auto s : sets) loaded.emplace(s, templates.load(template_for(s)));

  std::vector<PlannedJob> jobs;
  std::vector<std::string> missing;
  for (const auto& program : corpus.programs) {
    for (const auto& spec : corpus.variants_of(program.id)) {
      auto variant = corpus::materialize_variant(program, spec);
      for (auto set : sets) {
        auto context = load_context(set, options.symbolic_dir, program.id, spec.kind, options.ragged_policy);
        if (!context) {
          missing.push_back(fmt::format("({}, {}, {})", program.id, corpus::to_string(spec.kind), to_string(set)));
          continue;
        }
        for (auto mode : modes) {
          prompt::IntentDirective directive = prompt::IntentDirective::for_mode(mode);
          if (auto it = options.directive_texts.find(mode); it != options.directive_texts.end() &&
                                                           mode != prompt::IntentMode::off) {
            directive.directive_text = it->second;
          }
          std::string text = prompt::render(loaded.at(set), variant.source, *context, directive);
          std::string digest = prompt::digest(text, options.model);
          for (std::size_t s = 0; s < options.samples; ++s) {
            PlannedJob pj;
            pj.job = Job{program.id, program.suite, spec.kind, set, mode, s, digest};
            pj.prompt = text;
            pj.variant_source = variant.source;
            pj.directive_text = directive.directive_text;
            pj.model = options.model;
            jobs.push_back(std::move(pj));
          }
        }
      }
    }
  }
  if (!missing.empty() && !options.skip_missing_artifacts) {
    std::string list;
    for (const auto& m : missing) list += (list.empty() ? "" : ", ") + m;
    throw Error(ErrorCode::MissingSymbolicArtifact, "missing symbolic artifacts for " + list);
  }
  return jobs;
}

std::string extract_code_block(std::string_view answer) {
  struct Block {
    std::string info;
    std::string body;
  };
  std::optional<Block> last_c, last_plain;
  std::optional<Block> open;
  for (std::string_view raw : util::split_lines(answer)) {
    std::string_view line = raw;
    while (!line.empty() && (line.front() == ' ' || line.front() == '\t')) line.remove_prefix(1);
    if (open) {
      if (line.starts_with("```") && util::trim(line.substr(3)).empty()) {
        auto word = util::to_lower(open->info.substr(0, open->info.find_first_of(" \t")));
        if (word == "c") last_c = std::move(*open);
        else if (open->info.empty()) last_plain = std::move(*open);
        open.reset();
      } else {
        open->body.append(raw);
        open->body.push_back('\n');
      }
    } else if (line.starts_with("```")) {
      open = Block{std::string(util::trim(line.substr(3))), {}};
    }
  }
  auto chosen = last_c ? last_c : last_plain;
  if (!chosen) throw Error(ErrorCode::NoCodeBlock, "answer contains no fenced code block");
  std::string code = std::move(chosen->body);
  while (!code.empty() && code.back() == '\n') code.pop_back();
  code.push_back('\n');
  return code;
}

std::string_view to_string(FailureKind k) {
  switch (k) {
    case FailureKind::no_code_block: return "no_code_block";
    case FailureKind::code_edited: return "code_edited";
    case FailureKind::zero_annotations: return "zero_annotations";
    case FailureKind::lex_failure: return "lex_failure";
    case FailureKind::provider_error: return "provider_error";
  }
  return "lex_failure";
}

std::optional<FailureKind> parse_failure_kind(std::string_view s) {
  for (auto k : {FailureKind::no_code_block, FailureKind::code_edited, FailureKind::zero_annotations,
                 FailureKind::lex_failure, FailureKind::provider_error}) {
    if (to_string(k) == s) return k;
  }
  return std::nullopt;
}

bool ValidationResult::has(FailureKind k) const {
  return std::any_of(failures.begin(), failures.end(), [k](const Failure& f) { return f.kind == k; });
}

ValidationResult validate(std::string_view original, std::string_view extracted) {
  ValidationResult result;
  acsl::CountRow counts;
  try {
    auto ts = ctokens::lex(std::string(extracted));
    counts = acsl::count(acsl::extract_annotations(ts));
  } catch (const Error& e) {
    result.failures.push_back({FailureKind::lex_failure, e.what(), std::nullopt});
    return result;
  }
  auto eq = ctokens::code_token_equivalent(original, extracted);
  if (!eq.equal) {
    const auto& d = *eq.first_divergence;
    std::string detail = fmt::format("first divergence: original {} vs generated {}",
                                     d.a ? ctokens::describe(*d.a) : "<end of file>",
                                     d.b ? ctokens::describe(*d.b) : "<end of file>");
    result.failures.push_back({FailureKind::code_edited, detail, d});
  }
  if (counts.total() == 0) {
    result.failures.push_back({FailureKind::zero_annotations, "no ACSL clauses found", std::nullopt});
  }
  return result;
}

namespace {

ordered_json token_json(const std::optional<ctokens::TokenRef>& t) {
  if (!t) return nullptr;
  ordered_json j;
  j["line"] = t->span.line;
  j["col"] = t->span.col;
  j["text"] = t->text;
  return j;
}

std::optional<ctokens::TokenRef> token_from_json(const json& j) {
  if (j.is_null()) return std::nullopt;
  ctokens::TokenRef t;
  t.text = j.at("text").get<std::string>();
  t.span.line = j.at("line").get<std::size_t>();
  t.span.col = j.at("col").get<std::size_t>();
  return t;
}

}  // namespace

std::string record_to_json(const GenerationRecord& r) {
  ordered_json j;
  j["program_id"] = r.job.program_id;
  j["suite"] = corpus::to_string(r.job.suite);
  j["variant"] = corpus::to_string(r.job.variant);
  j["set"] = to_string(r.job.set);
  j["intent_mode"] = prompt::to_string(r.job.intent_mode);
  j["sample_index"] = r.job.sample_index;
  j["prompt_digest"] = r.job.prompt_digest;
  j["model"] = r.model;
  j["temperature"] = r.temperature;
  j["intent_directive"] = r.intent_directive;
  j["reasoning"] = r.reasoning;
  j["answer"] = r.answer;
  j["extracted_code"] = r.extracted_code ? ordered_json(*r.extracted_code) : ordered_json(nullptr);
  ordered_json v;
  v["ok"] = r.validation.ok();
  v["failures"] = ordered_json::array();
  for (const auto& f : r.validation.failures) {
    ordered_json fj;
    fj["kind"] = to_string(f.kind);
    fj["detail"] = f.detail;
    if (f.divergence) {
      fj["divergence"] = {{"original", token_json(f.divergence->a)}, {"generated", token_json(f.divergence->b)}};
    } else {
      fj["divergence"] = nullptr;
    }
    v["failures"].push_back(std::move(fj));
  }
  j["validation"] = std::move(v);
  ordered_json counts;
  for (auto k : acsl::kAllClauseKinds) counts[std::string(acsl::column_name(k))] = r.counts.get(k);
  counts["total"] = r.counts.total();
  j["counts"] = std::move(counts);
  j["timestamps"] = {{"recorded_at", r.timestamps.recorded_at}, {"latency_ms", r.timestamps.latency_ms}};
  return j.dump();
}

GenerationRecord record_from_json(std::string_view line) {
  try {
    json j = json::parse(line);
    GenerationRecord r;
    r.job.program_id = j.at("program_id").get<std::string>();
    auto suite = corpus::parse_suite(j.at("suite").get<std::string>());
    auto variant = corpus::parse_variant_kind(j.at("variant").get<std::string>());
    auto set = parse_prompt_set(j.at("set").get<std::string>());
    auto mode = prompt::parse_intent_mode(j.at("intent_mode").get<std::string>());
    if (!suite || !variant || !set || !mode) throw Error(ErrorCode::StoreIo, "record has an unknown enum value");
    r.job.suite = *suite;
    r.job.variant = *variant;
    r.job.set = *set;
    r.job.intent_mode = *mode;
    r.job.sample_index = j.at("sample_index").get<std::size_t>();
    r.job.prompt_digest = j.at("prompt_digest").get<std::string>();
    r.model = j.at("model").get<std::string>();
    r.temperature = j.at("temperature").get<double>();
    r.intent_directive = j.at("intent_directive").get<std::string>();
    r.reasoning = j.at("reasoning").get<std::string>();
    r.answer = j.at("answer").get<std::string>();
    if (!j.at("extracted_code").is_null()) r.extracted_code = j["extracted_code"].get<std::string>();
    for (const auto& fj : j.at("validation").at("failures")) {
      Failure f;
      auto kind = parse_failure_kind(fj.at("kind").get<std::string>());
      if (!kind) throw Error(ErrorCode::StoreIo, "record has an unknown failure kind");
      f.kind = *kind;
      f.detail = fj.at("detail").get<std::string>();
      if (fj.contains("divergence") && !fj["divergence"].is_null()) {
        f.divergence = ctokens::Divergence{token_from_json(fj["divergence"].at("original")),
                                           token_from_json(fj["divergence"].at("generated"))};
      }
      r.validation.failures.push_back(std::move(f));
    }
    const auto& counts = j.at("counts");
    for (auto k : acsl::kAllClauseKinds) r.counts.at(k) = counts.at(std::string(acsl::column_name(k))).get<std::size_t>();
    r.timestamps.recorded_at = j.at("timestamps").at("recorded_at").get<std::string>();
    r.timestamps.latency_ms = j.at("timestamps").at("latency_ms").get<long long>();
    return r;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::StoreIo, std::string("malformed record: ") + e.what());
  }
}

RecordStore::RecordStore(fs::path path) : path_(std::move(path)) {}

std::vector<GenerationRecord> RecordStore::load() const {
  std::vector<GenerationRecord> out;
  if (!fs::exists(path_)) return out;
  std::string text = util::read_file(path_);
  for (auto line : util::split_lines(text)) {
    if (util::trim(line).empty()) continue;
    out.push_back(record_from_json(line));
  }
  return out;
}

std::set<std::string> RecordStore::completed_identities() const {
  std::set<std::string> ids;
  for (const auto& r : load()) ids.insert(r.job.identity());
  return ids;
}

void RecordStore::truncate() {
  std::lock_guard lock(mutex_);
  util::write_file_atomic(path_, "");
}

void RecordStore::append(const GenerationRecord& r) {
  std::string line = record_to_json(r) + "\n";
  std::lock_guard lock(mutex_);
  std::error_code ec;
  if (path_.has_parent_path()) fs::create_directories(path_.parent_path(), ec);
  std::ofstream out(path_, std::ios::binary | std::ios::app);
  if (!out) throw Error(ErrorCode::StoreIo, "cannot open record store '" + path_.string() + "'");
  out.write(line.data(), static_cast<std::streamsize>(line.size()));
  out.flush();
  if (!out) throw Error(ErrorCode::StoreIo, "cannot append to record store '" + path_.string() + "'");
}

namespace {

bool is_provider_error(ErrorCode c) {
  switch (c) {
    case ErrorCode::AuthMissing:
    case ErrorCode::HttpError:
    case ErrorCode::RateLimited:
    case ErrorCode::CacheMiss:
    case ErrorCode::CacheConflict:
    case ErrorCode::MalformedProviderPayload: return true;
    default: return false;
  }
}

}  // namespace

GenerationRecord run_job(const PlannedJob& planned, llm::Client& client) {
  GenerationRecord rec;
  rec.job = planned.job;
  rec.model = planned.model.model;
  rec.temperature = planned.model.temperature;
  rec.intent_directive = planned.directive_text;

  llm::ChatRequest req{planned.model.model, planned.model.temperature, planned.prompt, planned.job.sample_index};
  llm::ChatResponse resp;
  try {
    resp = client.complete(req);
  } catch (const Error& e) {
    if (!is_provider_error(e.code())) throw;
    rec.validation.failures.push_back(
        {FailureKind::provider_error, fmt::format("{}: {}", to_string(e.code()), e.what()), std::nullopt});
    return rec;
  }
  rec.reasoning = resp.reasoning;
  rec.answer = resp.answer;
  rec.timestamps.recorded_at = resp.recorded_at.empty() ? util::utc_timestamp() : resp.recorded_at;
  rec.timestamps.latency_ms = resp.latency_ms;

  try {
    rec.extracted_code = extract_code_block(resp.answer);
  } catch (const Error& e) {
    rec.validation.failures.push_back({FailureKind::no_code_block, e.what(), std::nullopt});
    return rec;
  }
  rec.validation = validate(planned.variant_source, *rec.extracted_code);
  if (!rec.validation.has(FailureKind::lex_failure)) rec.counts = acsl::count(*rec.extracted_code);
  return rec;
}

BatchSummary run_batch(const std::vector<PlannedJob>& jobs, llm::Client& client, RecordStore& store,
                       const BatchOptions& options) {
  BatchSummary summary;
  summary.planned = jobs.size();

  std::set<std::string> done;
  if (options.resume) done = store.completed_identities();
  else store.truncate();

  std::vector<const PlannedJob*> todo;
  for (const auto& j : jobs) {
    if (done.insert(j.job.identity()).second) todo.push_back(&j);
    else ++summary.skipped;
  }

  std::vector<std::optional<GenerationRecord>> results(todo.size());
  std::vector<std::exception_ptr> errors(todo.size());
  std::vector<bool> ready(todo.size(), false);
  std::mutex m;
  std::condition_variable cv;
  std::atomic<std::size_t> next{0};
  std::atomic<bool> stop{false};

  auto worker = [&] {
    while (!stop) {
      std::size_t i = next++;
      if (i >= todo.size()) return;
      std::optional<GenerationRecord> rec;
      std::exception_ptr err;
      try {
        rec = run_job(*todo[i], client);
      } catch (...) {
        err = std::current_exception();
      }
      {
        std::lock_guard lock(m);
        results[i] = std::move(rec);
        errors[i] = err;
        ready[i] = true;
      }
      cv.notify_all();
    }
  };

  std::size_t n_workers = std::clamp<std::size_t>(static_cast<std::size_t>(std::max(options.workers, 1)), 1,
                                                  std::max<std::size_t>(todo.size(), 1));
  std::vector<std::jthread> pool;
  for (std::size_t w = 0; w < n_workers && !todo.empty(); ++w) pool.emplace_back(worker);

  std::exception_ptr fatal;
  for (std::size_t i = 0; i < todo.size(); ++i) {
    std::optional<GenerationRecord> rec;
    {
      std::unique_lock lock(m);
      cv.wait(lock, [&] { return ready[i]; });
      if (errors[i]) {
        fatal = errors[i];
        stop = true;
        break;
      }
      rec = std::move(results[i]);
      results[i].reset();
    }
    try {
      store.append(*rec);
    } catch (...) {
      fatal = std::current_exception();
      stop = true;
      break;
    }
    ++summary.written;
    if (rec->validation.ok()) ++summary.ok;
    else if (rec->validation.has(FailureKind::provider_error)) ++summary.provider_errors;
    else ++summary.validation_failures;
    if (options.on_record) options.on_record(*rec);
  }
  pool.clear();
  if (fatal) std::rethrow_exception(fatal);
  return summary;
}

}  // namespace specforge::pipeline
