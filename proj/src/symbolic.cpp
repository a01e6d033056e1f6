#include "specforge/symbolic.hpp"

#include <charconv>
#include <chrono>
#include <cstdlib>
#include <regex>

#include <fcntl.h>
#include <poll.h>
#include <signal.h>
#include <sys/wait.h>
#include <unistd.h>

#include <fmt/format.h>

#include "specforge/util.hpp"

namespace fs = std::filesystem;

namespace specforge::symbolic {

std::string_view to_string(AlarmCategory c) {
  switch (c) {
    case AlarmCategory::integer_overflow: return "integer_overflow";
    case AlarmCategory::invalid_memory_access: return "invalid_memory_access";
    case AlarmCategory::division_by_zero: return "division_by_zero";
    case AlarmCategory::other: return "other";
  }
  return "other";
}

AlarmCategory categorize_alarm(std::string_view message) {
  std::string m = util::to_lower(message);
  if (m.find("by zero") != std::string::npos) return AlarmCategory::division_by_zero;
  if (m.find("overflow") != std::string::npos || m.find("downcast") != std::string::npos) {
    return AlarmCategory::integer_overflow;
  }
  if (m.find("out of bounds") != std::string::npos || m.find("invalid memory") != std::string::npos ||
      m.find("mem_access") != std::string::npos || m.find("invalid pointer") != std::string::npos) {
    return AlarmCategory::invalid_memory_access;
  }
  return AlarmCategory::other;
}

std::size_t EvaSummary::count_of(AlarmCategory c) const {
  std::size_t n = 0;
  for (const auto& cat : categories) {
    if (cat.category == c) n += cat.count;
  }
  return n;
}

std::size_t EvaReport::alarms_in(AlarmCategory c) const {
  std::size_t n = 0;
  for (const auto& a : alarms) {
    if (a.category == c) ++n;
  }
  return n;
}

namespace {

[[noreturn]] void malformed(const std::string& what) {
  throw Error(ErrorCode::MalformedReport, "EVA report: " + what);
}

std::size_t indent_of(std::string_view line) {
  std::size_t i = 0;
  while (i < line.size() && (line[i] == ' ' || line[i] == '\t')) ++i;
  return i;
}

std::size_t to_size(const std::ssub_match& m) { return static_cast<std::size_t>(std::stoull(m.str())); }

// Frama-C tags lines as "[plugin:category]"; returns the tag without brackets.
std::string_view tag_of(std::string_view line) {
  if (line.empty() || line[0] != '[') return {};
  auto close = line.find(']');
  if (close == std::string_view::npos) return {};
  return line.substr(1, close - 1);
}

std::string assertion_of(std::string_view message) {
  static const std::regex kAssert(R"((^|[\s.])(assert\b.*)$)");
  std::string m(message);
  std::smatch match;
  if (std::regex_search(m, match, kAssert)) return std::string(util::trim(match[2].str()));
  return {};
}

}  // namespace

EvaReport parse_eva_report(std::string_view text) {
  static const std::regex kAlarm(R"(^\[eva:alarm\]\s+(.+?):(\d+):\s*Warning:\s*(.*)$)");
  static const std::regex kFinal(R"(^\[eva:final-states\]\s+Values at end of function\s+(\S+?):?\s*$)");
  static const std::regex kFunctions(R"(^(\d+) functions? analyzed \(out of (\d+)\))");
  static const std::regex kStatements(R"((\d+) statements reached \(out of (\d+)\))");
  static const std::regex kAlarmCount(R"(^(\d+) alarms? generated by the analysis)");
  static const std::regex kNoAlarm(R"(^No alarms? )");
  static const std::regex kCategory(R"(^(\d+) (.+?)\s*$)");

  EvaReport report;
  report.raw_text = std::string(text);
  auto lines = util::split_lines(text);

  bool recognized = false;
  enum class Block { none, alarm, final_states, summary } block = Block::none;
  std::string function;
  std::size_t category_indent = 0;
  bool in_categories = false;

  auto finish_alarm = [&] {
    if (block != Block::alarm) return;
    auto& a = report.alarms.back();
    a.message = util::collapse_whitespace(a.message);
    a.assertion_text = assertion_of(a.message);
    auto cut = a.message.find(a.assertion_text);
    std::string_view head = a.assertion_text.empty() ? std::string_view(a.message)
                                                     : std::string_view(a.message).substr(0, cut);
    a.category = categorize_alarm(head);
  };

  for (std::string_view raw : lines) {
    std::string line(raw);
    if (line.find("VALUES COMPUTED") != std::string::npos) recognized = true;
    if (line.find("NON TERMINATING FUNCTION") != std::string::npos) report.non_terminating = true;

    std::string_view tag = tag_of(line);
    if (!tag.empty()) {
      finish_alarm();
      block = Block::none;
      if (tag.starts_with("eva")) recognized = true;
      std::smatch m;
      if (std::regex_match(line, m, kAlarm)) {
        EvaAlarm a;
        a.file = m[1].str();
        a.line = to_size(m[2]);
        if (a.line == 0) malformed("alarm with line 0");
        a.message = m[3].str();
        report.alarms.push_back(std::move(a));
        block = Block::alarm;
      } else if (std::regex_match(line, m, kFinal)) {
        function = m[1].str();
        block = Block::final_states;
      } else if (tag == "eva:summary") {
        report.summary.emplace();
        in_categories = false;
        block = Block::summary;
      }
      continue;
    }

    std::string_view body = util::trim(raw);
    switch (block) {
      case Block::none:
        break;
      case Block::alarm:
        report.alarms.back().message += ' ';
        report.alarms.back().message += body;
        break;
      case Block::final_states: {
        if (body.empty() || body == "NON TERMINATING FUNCTION") break;
        FinalState fs{function, std::string(body), {}};
        for (std::string_view sep : {" in ", " \xE2\x88\x88 ", " = "}) {
          auto pos = body.find(sep);
          if (pos != std::string_view::npos) {
            fs.variable = std::string(util::trim(body.substr(0, pos)));
            fs.values = std::string(util::trim(body.substr(pos + sep.size())));
            break;
          }
        }
        report.final_states.push_back(std::move(fs));
        break;
      }
      case Block::summary: {
        auto& s = *report.summary;
        std::string b(body);
        std::smatch m;
        std::size_t indent = indent_of(raw);
        if (in_categories) {
          if (indent > category_indent && std::regex_match(b, m, kCategory)) {
            std::string label = m[2].str();
            s.categories.push_back({categorize_alarm(label), label, to_size(m[1])});
            break;
          }
          in_categories = false;
        }
        if (std::regex_search(b, m, kFunctions)) {
          s.functions_analyzed = to_size(m[1]);
          s.functions_total = to_size(m[2]);
        } else if (std::regex_search(b, m, kStatements)) {
          s.statements_reached = to_size(m[1]);
          s.statements_total = to_size(m[2]);
        } else if (std::regex_search(b, m, kAlarmCount)) {
          s.alarm_count = to_size(m[1]);
          category_indent = indent;
          in_categories = true;
        } else if (std::regex_search(b, m, kNoAlarm)) {
          s.alarm_count = 0;
        }
        break;
      }
    }
  }
  finish_alarm();

  if (!recognized) malformed("no EVA output recognized");
  if (report.summary && report.summary->alarm_count) {
    const auto& s = *report.summary;
    std::size_t sum = 0;
    for (const auto& c : s.categories) sum += c.count;
    if (sum != *s.alarm_count) {
      malformed(fmt::format("summary lists {} alarms but its categories add up to {}", *s.alarm_count, sum));
    }
    if (*s.alarm_count != report.alarms.size()) {
      malformed(fmt::format("summary lists {} alarms but {} were reported", *s.alarm_count,
                            report.alarms.size()));
    }
  }
  return report;
}

std::string_view to_string(Verdict v) {
  switch (v) {
    case Verdict::success: return "success";
    case Verdict::unknown: return "unknown";
    case Verdict::no_extra_coverage: return "no_extra_coverage";
    case Verdict::failure: return "failure";
    case Verdict::other: return "other";
  }
  return "other";
}

PcVerdict parse_verdict(std::string_view s) {
  PcVerdict v;
  v.text = std::string(s);
  std::string key = util::to_lower(util::trim(s));
  for (auto k : {Verdict::success, Verdict::unknown, Verdict::no_extra_coverage, Verdict::failure}) {
    if (key == to_string(k)) v.kind = k;
  }
  return v;
}

std::vector<std::vector<std::string>> parse_csv_records(std::string_view text) {
  std::vector<std::vector<std::string>> records;
  std::vector<std::string> record;
  std::string cell;
  bool quoted = false;
  bool any = false;
  for (std::size_t i = 0; i < text.size(); ++i) {
    char c = text[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < text.size() && text[i + 1] == '"') {
          cell.push_back('"');
          ++i;
        } else {
          quoted = false;
        }
      } else {
        cell.push_back(c);
      }
      continue;
    }
    if (c == '"') {
      quoted = true;
      any = true;
    } else if (c == ',') {
      record.push_back(std::move(cell));
      cell.clear();
      any = true;
    } else if (c == '\n' || c == '\r') {
      if (c == '\r' && i + 1 < text.size() && text[i + 1] == '\n') ++i;
      record.push_back(std::move(cell));
      cell.clear();
      records.push_back(std::move(record));
      record.clear();
      any = false;
    } else {
      cell.push_back(c);
      any = true;
    }
  }
  if (any || !cell.empty()) {
    record.push_back(std::move(cell));
    records.push_back(std::move(record));
  }
  return records;
}

namespace {

std::optional<long long> integer_cell(std::string_view s) {
  s = util::trim(s);
  if (s.empty()) return std::nullopt;
  long long v = 0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size()) return std::nullopt;
  return v;
}

}  // namespace

PcTable parse_pathcrawler_csv(std::string_view text, RaggedPolicy policy) {
  PcTable table;
  table.raw_text = std::string(text);

  std::string_view body = text;
  while (!body.empty() && (body.back() == '\n' || body.back() == '\r' || body.back() == ' ' || body.back() == '\t')) {
    body.remove_suffix(1);
  }
  if (!body.empty() && body.back() == '%') body.remove_suffix(1);

  auto records = parse_csv_records(body);
  std::erase_if(records, [](const std::vector<std::string>& r) {
    return r.size() == 1 && util::trim(r[0]).empty();
  });
  if (records.empty()) throw Error(ErrorCode::HeaderMissing, "PathCrawler table is empty");

  for (const auto& h : records.front()) table.header.emplace_back(util::trim(h));
  std::optional<std::size_t> verdict_col, output_col;
  for (std::size_t i = 0; i < table.header.size(); ++i) {
    if (table.header[i] == "verdict") verdict_col = i;
    if (table.header[i] == "output") output_col = i;
  }
  if (!verdict_col) throw Error(ErrorCode::HeaderMissing, "PathCrawler header has no 'verdict' column");

  for (std::size_t r = 1; r < records.size(); ++r) {
    auto cells = std::move(records[r]);
    if (cells.size() != table.header.size()) {
      if (policy == RaggedPolicy::pad && cells.size() < table.header.size()) {
        cells.resize(table.header.size());
      } else {
        throw Error(ErrorCode::RaggedRow, fmt::format("PathCrawler row {} has {} cells, header has {}", r,
                                                      cells.size(), table.header.size()));
      }
    }
    PcRow row;
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (i == *verdict_col) {
        row.verdict = parse_verdict(cells[i]);
      } else if (output_col && i == *output_col) {
        row.output = integer_cell(cells[i]);
      } else {
        row.inputs.emplace_back(table.header[i], integer_cell(cells[i]));
      }
    }
    row.cells = std::move(cells);
    table.rows.push_back(std::move(row));
  }
  return table;
}

std::string_view to_string(ContextKind k) {
  switch (k) {
    case ContextKind::none: return "none";
    case ContextKind::eva: return "eva";
    case ContextKind::pathcrawler: return "pathcrawler";
  }
  return "none";
}

SymbolicContext no_context() { return {}; }

SymbolicContext eva_context(std::string raw_report) {
  SymbolicContext ctx;
  ctx.kind = ContextKind::eva;
  ctx.parsed = parse_eva_report(raw_report);
  ctx.rendered_text = std::move(raw_report);
  return ctx;
}

SymbolicContext pathcrawler_context(std::string raw_csv, RaggedPolicy policy) {
  SymbolicContext ctx;
  ctx.kind = ContextKind::pathcrawler;
  ctx.parsed = parse_pathcrawler_csv(raw_csv, policy);
  ctx.rendered_text = std::move(raw_csv);
  return ctx;
}

std::string_view to_string(Tool t) { return t == Tool::eva ? "eva" : "pathcrawler"; }

std::string artifact_name(std::string_view stem, Tool t) {
  return fmt::format("{}.{}", stem, t == Tool::eva ? "eva.txt" : "pathcrawler.csv");
}

ToolFailure::ToolFailure(int exit_code, std::string output_tail)
    : Error(ErrorCode::ToolFailed, fmt::format("tool exited with status {}: {}", exit_code, output_tail)),
      exit_code_(exit_code),
      tail_(std::move(output_tail)) {}

namespace {

std::optional<fs::path> resolve_binary(const std::string& binary) {
  if (binary.empty()) return std::nullopt;
  if (binary.find('/') != std::string::npos) {
    if (::access(binary.c_str(), X_OK) == 0) return fs::path(binary);
    return std::nullopt;
  }
  const char* path = std::getenv("PATH");
  if (!path) return std::nullopt;
  std::string_view rest = path;
  while (true) {
    auto colon = rest.find(':');
    std::string dir(rest.substr(0, colon));
    if (dir.empty()) dir = ".";
    fs::path candidate = fs::path(dir) / binary;
    if (::access(candidate.c_str(), X_OK) == 0 && fs::is_regular_file(candidate)) return candidate;
    if (colon == std::string_view::npos) break;
    rest.remove_prefix(colon + 1);
  }
  return std::nullopt;
}

std::string tail(const std::string& s, std::size_t n = 2000) {
  return s.size() <= n ? s : s.substr(s.size() - n);
}

}  // namespace

std::string run_external_tool(Tool tool, const fs::path& program_path, const ToolConfig& config) {
  std::string artifact = artifact_name(program_path.stem().string(), tool);
  if (config.replay_dir) {
    fs::path stored = *config.replay_dir / artifact;
    if (fs::is_regular_file(stored)) return util::read_file(stored);
  }

  auto binary = resolve_binary(config.binary);
  if (!binary) {
    throw Error(ErrorCode::ToolMissing, fmt::format("{} binary '{}' not found", to_string(tool), config.binary));
  }

  std::vector<std::string> args;
  args.push_back(binary->string());
  args.insert(args.end(), config.flags.begin(), config.flags.end());
  args.push_back(program_path.string());
  std::vector<char*> argv;
  for (auto& a : args) argv.push_back(a.data());
  argv.push_back(nullptr);

  int fds[2];
  if (::pipe2(fds, O_CLOEXEC) != 0) throw Error(ErrorCode::ToolFailed, "cannot create pipe");
  pid_t pid = ::fork();
  if (pid < 0) {
    ::close(fds[0]);
    ::close(fds[1]);
    throw Error(ErrorCode::ToolFailed, "cannot fork");
  }
  if (pid == 0) {
    ::dup2(fds[1], STDOUT_FILENO);
    ::dup2(fds[1], STDERR_FILENO);
    int devnull = ::open("/dev/null", O_RDONLY);
    if (devnull >= 0) ::dup2(devnull, STDIN_FILENO);
    ::execv(argv[0], argv.data());
    ::_exit(127);
  }
  ::close(fds[1]);

  std::string output;
  auto deadline = std::chrono::steady_clock::now() + std::chrono::duration<double>(config.timeout_s);
  bool timed_out = false;
  char buf[4096];
  while (true) {
    auto left = std::chrono::duration_cast<std::chrono::milliseconds>(deadline - std::chrono::steady_clock::now());
    if (left.count() <= 0) {
      timed_out = true;
      break;
    }
    pollfd p{fds[0], POLLIN, 0};
    int rc = ::poll(&p, 1, static_cast<int>(std::min<long long>(left.count(), 1000)));
    if (rc < 0 && errno == EINTR) continue;
    if (rc == 0) continue;
    ssize_t n = ::read(fds[0], buf, sizeof buf);
    if (n < 0 && errno == EINTR) continue;
    if (n <= 0) break;
    output.append(buf, static_cast<std::size_t>(n));
  }
  ::close(fds[0]);
  if (timed_out) ::kill(pid, SIGKILL);
  int status = 0;
  while (::waitpid(pid, &status, 0) < 0 && errno == EINTR) {
  }
  if (timed_out) {
    throw Error(ErrorCode::Timeout, fmt::format("{} timed out after {}s on {}", to_string(tool),
                                                util::shortest_decimal(config.timeout_s), program_path.string()));
  }
  int code = WIFEXITED(status) ? WEXITSTATUS(status) : 128 + WTERMSIG(status);
  if (code != 0) throw ToolFailure(code, tail(output));

  util::write_file_atomic(program_path.parent_path() / artifact, output);
  return output;
}

}  // namespace specforge::symbolic
