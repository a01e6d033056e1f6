#include "specforge/report.hpp"

#include <map>

#include <fmt/format.h>

#include "specforge/util.hpp"

namespace specforge::report {

const char* const kReviewBanner = "CANDIDATES FOR HUMAN REVIEW";

std::string_view to_string(GroupKey k) {
  switch (k) {
    case GroupKey::set: return "set";
    case GroupKey::suite: return "suite";
    case GroupKey::variant: return "variant";
  }
  return "set";
}

std::optional<GroupKey> parse_group_key(std::string_view s) {
  for (auto k : {GroupKey::set, GroupKey::suite, GroupKey::variant}) {
    if (to_string(k) == s) return k;
  }
  return std::nullopt;
}

std::optional<RecordFilter> parse_filter(std::string_view s) {
  if (s == "all") return RecordFilter::all;
  if (s == "valid-only" || s == "valid_only") return RecordFilter::valid_only;
  return std::nullopt;
}

std::optional<Format> parse_format(std::string_view s) {
  if (s == "csv") return Format::csv;
  if (s == "md" || s == "markdown") return Format::markdown;
  return std::nullopt;
}

double CountTableRow::mean(acsl::ClauseKind k) const {
  return records == 0 ? 0.0 : static_cast<double>(sums.get(k)) / static_cast<double>(records);
}

double CountTableRow::mean_total() const {
  return records == 0 ? 0.0 : static_cast<double>(sums.total()) / static_cast<double>(records);
}

CountTable aggregate_counts(const std::vector<pipeline::GenerationRecord>& records,
                            const std::vector<GroupKey>& group_by, RecordFilter filter) {
  CountTable table;
  table.group_by = group_by;
  table.filter = filter;
  std::map<std::vector<int>, CountTableRow> groups;
  for (const auto& r : records) {
    if (filter == RecordFilter::valid_only && !r.validation.ok()) continue;
    std::vector<int> order;
    std::vector<std::string> key;
    for (auto g : group_by) {
      switch (g) {
        case GroupKey::set:
          order.push_back(static_cast<int>(r.job.set));
          key.emplace_back(pipeline::to_string(r.job.set));
          break;
        case GroupKey::suite:
          order.push_back(static_cast<int>(r.job.suite));
          key.emplace_back(corpus::to_string(r.job.suite));
          break;
        case GroupKey::variant:
          order.push_back(static_cast<int>(r.job.variant));
          key.emplace_back(corpus::to_string(r.job.variant));
          break;
      }
    }
    auto& row = groups[order];
    row.order = order;
    row.key = key;
    ++row.records;
    row.sums += r.counts;
  }
  for (auto& [order, row] : groups) table.rows.push_back(std::move(row));
  return table;
}

namespace {

std::vector<acsl::ClauseKind> shown_kinds(bool all_kinds) {
  if (all_kinds) return {acsl::kAllClauseKinds.begin(), acsl::kAllClauseKinds.end()};
  return {acsl::ClauseKind::requires_, acsl::ClauseKind::ensures, acsl::ClauseKind::assigns};
}

std::string join_row(const std::vector<std::string>& cells, Format format) {
  std::string line;
  if (format == Format::csv) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (i) line += ',';
      line += util::csv_cell(cells[i]);
    }
  } else {
    line = "|";
    for (const auto& c : cells) line += " " + c + " |";
  }
  return line + "\n";
}

std::string markdown_rule(std::size_t text_cols, std::size_t total_cols) {
  std::string line = "|";
  for (std::size_t i = 0; i < total_cols; ++i) line += i < text_cols ? " --- |" : " ---: |";
  return line + "\n";
}

}  // namespace

std::string emit(const CountTable& table, Format format, bool all_kinds) {
  auto kinds = shown_kinds(all_kinds);
  std::vector<std::string> header;
  for (auto g : table.group_by) header.emplace_back(to_string(g));
  header.emplace_back("records");
  for (auto k : kinds) header.emplace_back(acsl::column_name(k));
  if (all_kinds) header.emplace_back("total");
  for (auto k : kinds) header.push_back(fmt::format("mean_{}", acsl::column_name(k)));
  if (all_kinds) header.emplace_back("mean_total");

  std::string out = join_row(header, format);
  if (format == Format::markdown) out += markdown_rule(table.group_by.size(), header.size());
  for (const auto& row : table.rows) {
    std::vector<std::string> cells = row.key;
    cells.push_back(fmt::format("{}", row.records));
    for (auto k : kinds) cells.push_back(fmt::format("{}", row.sums.get(k)));
    if (all_kinds) cells.push_back(fmt::format("{}", row.sums.total()));
    for (auto k : kinds) cells.push_back(util::fixed_decimal(row.mean(k), 3));
    if (all_kinds) cells.push_back(util::fixed_decimal(row.mean_total(), 3));
    out += join_row(cells, format);
  }
  return out;
}

std::vector<std::string> default_bug_patterns() {
  return {"bug", "incorrect", "wrong", "off-by-one", "should be", "the code as written"};
}

std::vector<std::pair<std::size_t, std::size_t>> sentence_spans(std::string_view text) {
  std::vector<std::pair<std::size_t, std::size_t>> spans;
  auto blank = [](char c) { return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v'; };
  auto push = [&](std::size_t b, std::size_t e) {
    while (b < e && blank(text[b])) ++b;
    while (e > b && blank(text[e - 1])) --e;
    if (b < e) spans.emplace_back(b, e);
  };
  std::size_t start = 0;
  for (std::size_t i = 0; i < text.size(); ++i) {
    char c = text[i];
    if (c == '\n') {
      push(start, i);
      start = i + 1;
    } else if ((c == '.' || c == '!' || c == '?') && (i + 1 == text.size() || blank(text[i + 1]))) {
      push(start, i + 1);
      start = i + 1;
    }
  }
  push(start, text.size());
  return spans;
}

namespace {

bool word_char(char c) {
  return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c == '_';
}

bool contains_word(std::string_view haystack_lower, std::string_view needle_lower) {
  if (needle_lower.empty()) return false;
  std::size_t pos = 0;
  while ((pos = haystack_lower.find(needle_lower, pos)) != std::string_view::npos) {
    std::size_t end = pos + needle_lower.size();
    bool left = pos == 0 || !word_char(haystack_lower[pos - 1]) || !word_char(needle_lower.front());
    bool right = end == haystack_lower.size() || !word_char(haystack_lower[end]) || !word_char(needle_lower.back());
    if (left && right) return true;
    ++pos;
  }
  return false;
}

}  // namespace

std::vector<Snippet> flag_bug_mentions(std::string_view reasoning, const std::vector<std::string>& patterns) {
  std::vector<Snippet> out;
  std::vector<std::string> lowered;
  for (const auto& p : patterns) lowered.push_back(util::to_lower(p));
  for (auto [b, e] : sentence_spans(reasoning)) {
    std::string_view sentence = reasoning.substr(b, e - b);
    std::string lower = util::to_lower(sentence);
    for (std::size_t i = 0; i < patterns.size(); ++i) {
      if (contains_word(lower, lowered[i])) out.push_back({patterns[i], std::string(sentence), b, e});
    }
  }
  return out;
}

namespace {

std::string suite_label(corpus::Suite s) {
  std::string name(corpus::to_string(s));
  if (s == corpus::Suite::pathcrawler) return "PathCrawler";
  name[0] = static_cast<char>(name[0] - 'a' + 'A');
  return name;
}

}  // namespace

BugTable bug_table(const std::vector<pipeline::GenerationRecord>& records, const std::vector<std::string>& patterns) {
  constexpr corpus::Suite kSuites[] = {corpus::Suite::basic, corpus::Suite::famous, corpus::Suite::mirror,
                                       corpus::Suite::unique, corpus::Suite::pathcrawler};
  BugTable table;
  for (bool anonymized : {false, true}) {
    for (auto suite : kSuites) {
      BugTableRow row;
      row.label = (anonymized ? "Anonymized " : "") + suite_label(suite);
      auto kind = anonymized ? corpus::VariantKind::buggy_anonymized : corpus::VariantKind::buggy;
      for (const auto& r : records) {
        if (r.job.suite != suite || r.job.variant != kind) continue;
        ++row.total;
        if (!flag_bug_mentions(r.reasoning, patterns).empty()) ++row.flagged;
      }
      if (suite == corpus::Suite::pathcrawler && row.total == 0) continue;
      table.rows.push_back(std::move(row));
    }
  }
  return table;
}

std::string emit(const BugTable& table, Format format) {
  std::string out;
  if (format == Format::csv) {
    out = "test_suite,candidates_for_human_review,records\n";
    for (const auto& r : table.rows) out += fmt::format("{},{},{}\n", util::csv_cell(r.label), r.flagged, r.total);
    return out;
  }
  out = fmt::format("{}\n\n", kReviewBanner);
  out += "| Test Suite | Flagged |\n| --- | ---: |\n";
  for (const auto& r : table.rows) out += fmt::format("| {} | {}/{} |\n", r.label, r.flagged, r.total);
  return out;
}

std::string emit_candidates(const std::vector<pipeline::GenerationRecord>& records,
                            const std::vector<std::string>& patterns) {
  std::string out = fmt::format("{}\n", kReviewBanner);
  for (const auto& r : records) {
    auto snippets = flag_bug_mentions(r.reasoning, patterns);
    if (snippets.empty()) continue;
    out += fmt::format("\n{}\n", r.job.identity());
    for (const auto& s : snippets) {
      out += fmt::format("  [{}] {}-{}: {}\n", s.pattern_id, s.begin, s.end, s.sentence);
    }
  }
  return out;
}

}  // namespace specforge::report
