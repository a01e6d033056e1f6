#include "specforge/cli.hpp"

#include <algorithm>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "specforge/acsl.hpp"
#include "specforge/config.hpp"
#include "specforge/corpus.hpp"
#include "specforge/ctokens.hpp"
#include "specforge/llm.hpp"
#include "specforge/pipeline.hpp"
#include "specforge/prompt.hpp"
#include "specforge/report.hpp"
#include "specforge/symbolic.hpp"
#include "specforge/util.hpp"

namespace fs = std::filesystem;
using ojson = nlohmann::ordered_json;

namespace specforge::cli {

int exit_code_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::Config:
    case ErrorCode::ManifestSyntax:
    case ErrorCode::DuplicateId:
    case ErrorCode::ContextMismatch:
    case ErrorCode::UnresolvedPlaceholder: return kUsage;
    case ErrorCode::MissingSource:
    case ErrorCode::MissingSymbolicArtifact:
    case ErrorCode::TemplateMissing:
    case ErrorCode::ToolMissing:
    case ErrorCode::ToolFailed:
    case ErrorCode::Timeout:
    case ErrorCode::StoreIo: return kMissingArtifact;
    case ErrorCode::AuthMissing:
    case ErrorCode::HttpError:
    case ErrorCode::RateLimited:
    case ErrorCode::CacheMiss:
    case ErrorCode::CacheConflict:
    case ErrorCode::MalformedProviderPayload: return kProviderError;
    default: return kValidationFailed;
  }
}

namespace {

struct Globals {
  std::string config_path = "specforge.json";
  std::string mode;
  bool json = false;
};

struct Io {
  std::ostream& out;
  std::ostream& err;
  const Globals& g;

  void emit_json(const ojson& doc) const { out << doc.dump(2) << "\n"; }
};

ojson counts_json(const acsl::CountRow& row) {
  ojson j;
  for (auto k : acsl::kAllClauseKinds) j[std::string(acsl::column_name(k))] = row.get(k);
  j["total"] = row.total();
  return j;
}

ojson failures_json(const pipeline::ValidationResult& v) {
  ojson arr = ojson::array();
  for (const auto& f : v.failures) {
    ojson fj;
    fj["kind"] = pipeline::to_string(f.kind);
    fj["detail"] = f.detail;
    arr.push_back(std::move(fj));
  }
  return arr;
}

config::Config load(const Io& io) {
  auto c = config::load_config(io.g.config_path);
  if (!io.g.mode.empty()) {
    auto m = llm::parse_client_mode(io.g.mode);
    if (!m) throw Error(ErrorCode::Config, "unknown mode '" + io.g.mode + "'");
    c.client.mode = *m;
  }
  return c;
}

// ---- count ----------------------------------------------------------------

int cmd_count(const Io& io, const std::vector<std::string>& files) {
  std::string csv = acsl::count_csv_header() + "\n";
  ojson doc;
  doc["ok"] = true;
  doc["files"] = ojson::array();
  for (const auto& f : files) {
    auto row = acsl::count(util::read_file(f));
    csv += acsl::count_csv_row(fs::path(f).stem().string(), "", "", "", row) + "\n";
    doc["files"].push_back({{"file", f}, {"counts", counts_json(row)}});
  }
  if (io.g.json) io.emit_json(doc);
  else io.out << csv;
  return kOk;
}

// ---- validate -------------------------------------------------------------

int cmd_validate(const Io& io, const std::string& original, const std::string& annotated, bool is_answer) {
  std::string orig = util::read_file(original);
  ctokens::lex(orig);
  std::string text = util::read_file(annotated);
  pipeline::ValidationResult v;
  std::optional<std::string> code;
  if (is_answer) {
    try {
      code = pipeline::extract_code_block(text);
    } catch (const Error& e) {
      v.failures.push_back({pipeline::FailureKind::no_code_block, e.what(), std::nullopt});
    }
  } else {
    code = text;
  }
  acsl::CountRow counts;
  if (code) {
    v = pipeline::validate(orig, *code);
    if (!v.has(pipeline::FailureKind::lex_failure)) counts = acsl::count(*code);
  }
  if (io.g.json) {
    ojson doc;
    doc["ok"] = v.ok();
    doc["failures"] = failures_json(v);
    doc["counts"] = counts_json(counts);
    io.emit_json(doc);
  } else {
    io.out << (v.ok() ? "ok" : "invalid") << "\n";
    for (const auto& f : v.failures) io.out << pipeline::to_string(f.kind) << ": " << f.detail << "\n";
  }
  return v.ok() ? kOk : kValidationFailed;
}

// ---- prompt render --------------------------------------------------------

struct RenderArgs {
  std::string template_id;
  std::string program;
  std::string context;
  std::string context_kind;
  std::string template_dir;
  bool intent = false;
  bool implementation = false;
};

int cmd_render(const Io& io, const RenderArgs& a) {
  auto id = prompt::parse_template_id(a.template_id);
  if (!id) throw Error(ErrorCode::Config, "unknown template '" + a.template_id + "'");
  if (a.intent && a.implementation) throw Error(ErrorCode::Config, "--intent and --implementation are exclusive");
  prompt::TemplateStore store(a.template_dir.empty() ? prompt::TemplateStore::default_dir() : fs::path(a.template_dir));
  auto tmpl = store.load(*id);
  std::string program = util::read_file(a.program);

  symbolic::SymbolicContext ctx = symbolic::no_context();
  if (!a.context.empty()) {
    std::string kind = a.context_kind;
    if (kind.empty()) kind = fs::path(a.context).extension() == ".csv" ? "pathcrawler" : "eva";
    std::string raw = util::read_file(a.context);
    if (kind == "eva") ctx = symbolic::eva_context(std::move(raw));
    else if (kind == "pathcrawler") ctx = symbolic::pathcrawler_context(std::move(raw));
    else throw Error(ErrorCode::Config, "--context-kind must be eva or pathcrawler");
  }
  auto mode = a.intent ? prompt::IntentMode::intent
                       : a.implementation ? prompt::IntentMode::implementation : prompt::IntentMode::off;
  std::string text = prompt::render(tmpl, program, ctx, prompt::IntentDirective::for_mode(mode));
  if (io.g.json) {
    ojson doc;
    doc["ok"] = true;
    doc["template"] = prompt::to_string(*id);
    doc["intent_mode"] = prompt::to_string(mode);
    doc["prompt"] = text;
    io.emit_json(doc);
  } else {
    io.out << text;
  }
  return kOk;
}

// ---- corpus ---------------------------------------------------------------

corpus::Corpus load_corpus(const Io& io, const std::string& manifest) {
  if (!manifest.empty()) return corpus::load_manifest(manifest);
  return corpus::load_manifest(load(io).corpus);
}

int cmd_corpus_list(const Io& io, const std::string& manifest) {
  auto c = load_corpus(io, manifest);
  ojson doc;
  doc["ok"] = true;
  doc["programs"] = ojson::array();
  for (const auto& p : c.programs) {
    std::vector<std::string> kinds;
    for (const auto& v : c.variants_of(p.id)) kinds.emplace_back(corpus::to_string(v.kind));
    if (io.g.json) {
      doc["programs"].push_back({{"id", p.id}, {"suite", corpus::to_string(p.suite)}, {"variants", kinds}});
    } else {
      std::string joined;
      for (const auto& k : kinds) joined += (joined.empty() ? "" : ",") + k;
      io.out << p.id << "\t" << corpus::to_string(p.suite) << "\t" << joined << "\n";
    }
  }
  if (io.g.json) io.emit_json(doc);
  return kOk;
}

int cmd_corpus_materialize(const Io& io, const std::string& manifest, const std::string& out_dir) {
  auto c = load_corpus(io, manifest);
  ojson doc;
  doc["ok"] = true;
  doc["files"] = ojson::array();
  for (const auto& p : c.programs) {
    for (const auto& spec : c.variants_of(p.id)) {
      auto v = corpus::materialize_variant(p, spec);
      fs::path path = fs::path(out_dir) / fmt::format("{}.{}.c", p.id, corpus::to_string(v.kind));
      util::write_file_atomic(path, v.source);
      doc["files"].push_back(path.string());
      if (!io.g.json) io.out << path.string() << "\n";
    }
  }
  if (io.g.json) io.emit_json(doc);
  return kOk;
}

// ---- symbolic -------------------------------------------------------------

int cmd_symbolic_parse(const Io& io, const std::string& eva, const std::string& csv, bool pad) {
  ojson doc;
  doc["ok"] = true;
  std::ostringstream text;
  if (!eva.empty()) {
    auto r = symbolic::parse_eva_report(util::read_file(eva));
    ojson alarms = ojson::array();
    for (const auto& a : r.alarms) {
      alarms.push_back({{"file", a.file},
                        {"line", a.line},
                        {"category", symbolic::to_string(a.category)},
                        {"assertion", a.assertion_text}});
      text << a.file << ":" << a.line << "\t" << symbolic::to_string(a.category) << "\t" << a.assertion_text << "\n";
    }
    ojson states = ojson::array();
    for (const auto& s : r.final_states) {
      states.push_back({{"function", s.function}, {"variable", s.variable}, {"values", s.values}});
    }
    doc["alarms"] = std::move(alarms);
    doc["final_states"] = std::move(states);
    doc["non_terminating"] = r.non_terminating;
    text << "alarms: " << r.alarms.size() << "\n";
    text << "non_terminating: " << (r.non_terminating ? "true" : "false") << "\n";
  }
  if (!csv.empty()) {
    auto t = symbolic::parse_pathcrawler_csv(util::read_file(csv),
                                             pad ? symbolic::RaggedPolicy::pad : symbolic::RaggedPolicy::reject);
    std::map<std::string, std::size_t> hist;
    for (const auto& row : t.rows) {
      ++hist[row.verdict.kind == symbolic::Verdict::other ? row.verdict.text
                                                          : std::string(symbolic::to_string(row.verdict.kind))];
    }
    doc["rows"] = t.rows.size();
    doc["verdicts"] = hist;
    text << "rows: " << t.rows.size() << "\n";
    for (const auto& [verdict, n] : hist) text << verdict << ": " << n << "\n";
  }
  if (io.g.json) io.emit_json(doc);
  else io.out << text.str();
  return kOk;
}

int cmd_symbolic_run(const Io& io, const std::string& tool_name, const std::string& program) {
  auto c = load(io);
  symbolic::Tool tool;
  if (tool_name == "eva") tool = symbolic::Tool::eva;
  else if (tool_name == "pathcrawler") tool = symbolic::Tool::pathcrawler;
  else throw Error(ErrorCode::Config, "--tool must be eva or pathcrawler");
  auto it = c.tools.find(tool);
  if (it == c.tools.end()) throw Error(ErrorCode::ToolMissing, "no '" + tool_name + "' tool configured");
  std::string output = symbolic::run_external_tool(tool, program, it->second);
  if (io.g.json) io.emit_json({{"ok", true}, {"output", output}});
  else io.out << output;
  return kOk;
}

// ---- plan / generate ------------------------------------------------------

int cmd_plan(const Io& io) {
  auto c = load(io);
  auto jobs = pipeline::plan_jobs(corpus::load_manifest(c.corpus), c.plan_options());
  ojson doc;
  doc["ok"] = true;
  doc["count"] = jobs.size();
  doc["jobs"] = ojson::array();
  for (const auto& pj : jobs) {
    const auto& j = pj.job;
    if (io.g.json) {
      doc["jobs"].push_back({{"program_id", j.program_id},
                             {"variant", corpus::to_string(j.variant)},
                             {"set", pipeline::to_string(j.set)},
                             {"intent_mode", prompt::to_string(j.intent_mode)},
                             {"sample_index", j.sample_index},
                             {"prompt_digest", j.prompt_digest}});
    } else {
      io.out << fmt::format("{}\t{}\t{}\t{}\t{}\t{}\n", j.program_id, corpus::to_string(j.variant),
                            pipeline::to_string(j.set), prompt::to_string(j.intent_mode), j.sample_index,
                            j.prompt_digest);
    }
  }
  if (io.g.json) io.emit_json(doc);
  else io.err << jobs.size() << " jobs planned\n";
  return kOk;
}

int cmd_generate(const Io& io, bool resume) {
  auto c = load(io);
  auto jobs = pipeline::plan_jobs(corpus::load_manifest(c.corpus), c.plan_options());
  llm::Client client(c.client);
  pipeline::RecordStore store(c.store);
  pipeline::BatchOptions opts;
  opts.resume = resume;
  opts.workers = c.client.max_in_flight;
  opts.on_record = [&](const pipeline::GenerationRecord& r) {
    if (!r.validation.ok()) {
      io.err << r.job.identity() << ": " << pipeline::to_string(r.validation.failures.front().kind) << "\n";
    }
  };
  auto s = pipeline::run_batch(jobs, client, store, opts);
  int code = s.provider_errors ? kProviderError : s.validation_failures ? kValidationFailed : kOk;
  if (io.g.json) {
    ojson doc;
    doc["ok"] = code == kOk;
    doc["exit_code"] = code;
    doc["planned"] = s.planned;
    doc["written"] = s.written;
    doc["skipped"] = s.skipped;
    doc["valid"] = s.ok;
    doc["validation_failures"] = s.validation_failures;
    doc["provider_errors"] = s.provider_errors;
    doc["store"] = store.path().string();
    io.emit_json(doc);
  }
  io.err << fmt::format("planned {}, written {}, skipped {}, valid {}, invalid {}, provider errors {}\n", s.planned,
                        s.written, s.skipped, s.ok, s.validation_failures, s.provider_errors);
  return code;
}

// ---- report ---------------------------------------------------------------

struct ReportArgs {
  std::string group_by = "set";
  std::string filter = "all";
  std::string format = "csv";
  std::string out;
  std::string store;
  bool all_kinds = false;
  bool bugs = false;
  bool candidates = false;
};

int cmd_report(const Io& io, const ReportArgs& a) {
  std::vector<report::GroupKey> keys;
  std::stringstream ss(a.group_by);
  for (std::string part; std::getline(ss, part, ',');) {
    auto k = report::parse_group_key(util::trim(part));
    if (!k) throw Error(ErrorCode::Config, "unknown --group-by key '" + part + "'");
    keys.push_back(*k);
  }
  auto filter = report::parse_filter(a.filter);
  if (!filter) throw Error(ErrorCode::Config, "--filter must be all or valid-only");
  auto format = report::parse_format(a.format);
  if (!format) throw Error(ErrorCode::Config, "--format must be csv or md");

  fs::path store_path;
  std::vector<std::string> patterns = report::default_bug_patterns();
  if (!a.store.empty()) {
    store_path = a.store;
  } else {
    auto c = load(io);
    store_path = c.store;
    patterns = c.bug_patterns;
  }
  if (!fs::is_regular_file(store_path)) {
    throw Error(ErrorCode::MissingSource, "record store not found: " + store_path.string());
  }
  auto records = pipeline::RecordStore(store_path).load();

  std::string content;
  if (a.candidates) content = report::emit_candidates(records, patterns);
  else if (a.bugs) content = report::emit(report::bug_table(records, patterns), *format);
  else content = report::emit(report::aggregate_counts(records, keys, *filter), *format, a.all_kinds);

  if (!a.out.empty()) util::write_file_atomic(a.out, content);
  if (io.g.json) {
    ojson doc;
    doc["ok"] = true;
    doc["records"] = records.size();
    if (!a.out.empty()) doc["out"] = a.out;
    else doc["content"] = content;
    io.emit_json(doc);
  } else if (a.out.empty()) {
    io.out << content;
  }
  return kOk;
}

void report_error(const Io& io, int code, std::string_view kind, std::string_view message) {
  io.err << "error: " << message << "\n";
  if (io.g.json) {
    ojson doc;
    doc["ok"] = false;
    doc["exit_code"] = code;
    doc["error"] = {{"code", kind}, {"message", message}};
    io.emit_json(doc);
  }
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  Globals g;
  Io io{out, err, g};

  CLI::App app{"ACSL specification synthesis toolchain", "specforge"};
  app.require_subcommand(1);
  app.fallthrough();
  app.add_option("--config", g.config_path, "Project config file (JSON)");
  app.add_option("--mode", g.mode, "Client mode: live, record, replay-strict, replay-fallback");
  app.add_flag("--json", g.json, "Print one JSON document on stdout");

  std::function<int()> action;

  std::vector<std::string> count_files;
  auto* count = app.add_subcommand("count", "Count ACSL clauses per kind");
  count->add_option("--file", count_files, "Annotated C file")->required()->check(CLI::ExistingFile);
  count->callback([&] { action = [&] { return cmd_count(io, count_files); }; });

  std::string original, annotated;
  bool is_answer = false;
  auto* validate = app.add_subcommand("validate", "Check that only annotations were added");
  validate->add_option("--original", original, "Unannotated C file")->required();
  validate->add_option("--annotated", annotated, "Annotated C file")->required();
  validate->add_flag("--answer", is_answer, "Treat --annotated as a model answer and extract its code block");
  validate->callback([&] { action = [&] { return cmd_validate(io, original, annotated, is_answer); }; });

  RenderArgs render_args;
  auto* prompt_cmd = app.add_subcommand("prompt", "Prompt templates");
  prompt_cmd->require_subcommand(1);
  auto* render = prompt_cmd->add_subcommand("render", "Render a prompt to stdout");
  render->add_option("--template", render_args.template_id, "baseline, pathcrawler, eva or legacy_*")->required();
  render->add_option("--program", render_args.program, "C program")->required();
  render->add_option("--context", render_args.context, "EVA report or PathCrawler CSV");
  render->add_option("--context-kind", render_args.context_kind, "eva or pathcrawler (default: by extension)");
  render->add_option("--template-dir", render_args.template_dir, "Directory holding the template files");
  render->add_flag("--intent", render_args.intent, "Append the intent-priority directive");
  render->add_flag("--implementation", render_args.implementation, "Append the implementation-priority directive");
  render->callback([&] { action = [&] { return cmd_render(io, render_args); }; });

  std::string manifest, out_dir;
  auto* corpus_cmd = app.add_subcommand("corpus", "Inspect and materialize the program corpus");
  corpus_cmd->require_subcommand(1);
  corpus_cmd->add_option("--manifest", manifest, "Corpus manifest (default: from config)");
  auto* list = corpus_cmd->add_subcommand("list", "List programs and their variants");
  list->callback([&] { action = [&] { return cmd_corpus_list(io, manifest); }; });
  auto* materialize = corpus_cmd->add_subcommand("materialize", "Write every variant source to a directory");
  materialize->add_option("--out", out_dir, "Output directory")->required();
  materialize->callback([&] { action = [&] { return cmd_corpus_materialize(io, manifest, out_dir); }; });

  std::string eva_file, csv_file, tool_name, tool_program;
  bool pad = false;
  auto* symbolic_cmd = app.add_subcommand("symbolic", "Parse or produce analyzer output");
  symbolic_cmd->require_subcommand(1);
  auto* parse = symbolic_cmd->add_subcommand("parse", "Parse an EVA report or PathCrawler table");
  parse->add_option("--eva", eva_file, "EVA report")->check(CLI::ExistingFile);
  parse->add_option("--pathcrawler", csv_file, "PathCrawler CSV")->check(CLI::ExistingFile);
  parse->add_flag("--pad", pad, "Pad short PathCrawler rows instead of rejecting them");
  parse->callback([&] {
    if (eva_file.empty() && csv_file.empty()) throw CLI::ValidationError("symbolic parse", "give --eva or --pathcrawler");
    action = [&] { return cmd_symbolic_parse(io, eva_file, csv_file, pad); };
  });
  auto* run_tool = symbolic_cmd->add_subcommand("run", "Run a configured analyzer on one program");
  run_tool->add_option("--tool", tool_name, "eva or pathcrawler")->required();
  run_tool->add_option("--program", tool_program, "C program")->required();
  run_tool->callback([&] { action = [&] { return cmd_symbolic_run(io, tool_name, tool_program); }; });

  auto* plan = app.add_subcommand("plan", "List the jobs a generate run would execute");
  plan->callback([&] { action = [&] { return cmd_plan(io); }; });

  bool resume = false;
  auto* generate = app.add_subcommand("generate", "Run generation jobs and append records");
  generate->add_flag("--resume", resume, "Skip jobs already present in the record store");
  generate->callback([&] { action = [&] { return cmd_generate(io, resume); }; });

  ReportArgs report_args;
  auto* report_cmd = app.add_subcommand("report", "Aggregate records into tables");
  report_cmd->add_option("--group-by", report_args.group_by, "Comma list of set, suite, variant");
  report_cmd->add_option("--filter", report_args.filter, "all or valid-only");
  report_cmd->add_option("--format", report_args.format, "csv or md");
  report_cmd->add_option("--out", report_args.out, "Write to a file instead of stdout");
  report_cmd->add_option("--store", report_args.store, "Record store (default: from config)");
  report_cmd->add_flag("--all-kinds", report_args.all_kinds, "Show every clause kind");
  report_cmd->add_flag("--bugs", report_args.bugs, "Bug-mention table per suite");
  report_cmd->add_flag("--candidates", report_args.candidates, "List flagged reasoning sentences");
  report_cmd->callback([&] { action = [&] { return cmd_report(io, report_args); }; });

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    app.exit(e, out, err);
    return kOk;
  } catch (const CLI::CallForAllHelp& e) {
    app.exit(e, out, err);
    return kOk;
  } catch (const CLI::ParseError& e) {
    g.json = g.json || std::find(args.begin(), args.end(), "--json") != args.end();
    report_error(io, kUsage, "Usage", e.what());
    return kUsage;
  }

  try {
    return action ? action() : kUsage;
  } catch (const ctokens::LexError& e) {
    report_error(io, kValidationFailed, "LexFailure", e.what());
    return kValidationFailed;
  } catch (const Error& e) {
    int code = exit_code_for(e.code());
    report_error(io, code, to_string(e.code()), e.what());
    return code;
  } catch (const std::exception& e) {
    report_error(io, kMissingArtifact, "Internal", e.what());
    return kMissingArtifact;
  }
}

int run(int argc, const char* const* argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return run(args, std::cout, std::cerr);
}

}  // namespace specforge::cli
