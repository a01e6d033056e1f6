#include "specforge/corpus.hpp"

#include <algorithm>
#include <charconv>
#include <fmt/format.h>
#include <map>
#include <regex>
#include <set>
#include <unordered_map>
#include <unordered_set>

#include <nlohmann/json.hpp>

#include "specforge/ctokens.hpp"
#include "specforge/error.hpp"
#include "specforge/util.hpp"

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace specforge::corpus {

std::string_view to_string(Suite s) {
  switch (s) {
    case Suite::basic: return "basic";
    case Suite::famous: return "famous";
    case Suite::mirror: return "mirror";
    case Suite::unique: return "unique";
    case Suite::pathcrawler: return "pathcrawler";
  }
  return "?";
}

std::string_view to_string(VariantKind k) {
  switch (k) {
    case VariantKind::baseline: return "baseline";
    case VariantKind::buggy: return "buggy";
    case VariantKind::anonymized: return "anonymized";
    case VariantKind::buggy_anonymized: return "buggy_anonymized";
  }
  return "?";
}

std::string_view to_string(MutationKind k) {
  switch (k) {
    case MutationKind::operator_swap: return "operator_swap";
    case MutationKind::off_by_one: return "off_by_one";
    case MutationKind::index_swap: return "index_swap";
    case MutationKind::token_replace: return "token_replace";
  }
  return "?";
}

std::optional<Suite> parse_suite(std::string_view s) {
  for (auto v : {Suite::basic, Suite::famous, Suite::mirror, Suite::unique, Suite::pathcrawler}) {
    if (to_string(v) == s) return v;
  }
  return std::nullopt;
}

std::optional<VariantKind> parse_variant_kind(std::string_view s) {
  for (auto v : {VariantKind::baseline, VariantKind::buggy, VariantKind::anonymized,
                 VariantKind::buggy_anonymized}) {
    if (to_string(v) == s) return v;
  }
  return std::nullopt;
}

namespace {

std::optional<MutationKind> parse_mutation_kind(std::string_view s) {
  for (auto v : {MutationKind::operator_swap, MutationKind::off_by_one, MutationKind::index_swap,
                 MutationKind::token_replace}) {
    if (to_string(v) == s) return v;
  }
  return std::nullopt;
}

[[noreturn]] void syntax(const std::string& what) {
  throw Error(ErrorCode::ManifestSyntax, "manifest: " + what);
}

std::string required_string(const json& obj, const char* key, const std::string& where) {
  auto it = obj.find(key);
  if (it == obj.end() || !it->is_string()) syntax(where + ": missing string field '" + key + "'");
  return it->get<std::string>();
}

MutationOp parse_mutation(const json& j, const std::string& where) {
  if (!j.is_object()) syntax(where + ": mutation must be an object");
  MutationOp op;
  auto kind = parse_mutation_kind(required_string(j, "op", where));
  if (!kind) syntax(where + ": unknown mutation op");
  op.op = *kind;
  if (j.contains("pattern")) {
    if (!j["pattern"].is_string()) syntax(where + ": pattern must be a string");
    op.pattern = j["pattern"].get<std::string>();
  }
  if (j.contains("line") != j.contains("column")) syntax(where + ": line and column go together");
  if (j.contains("line")) {
    if (!j["line"].is_number_unsigned() || !j["column"].is_number_unsigned()) {
      syntax(where + ": line/column must be positive integers");
    }
    op.line = j["line"].get<std::size_t>();
    op.column = j["column"].get<std::size_t>();
  }
  if (!op.pattern && !op.line) syntax(where + ": mutation needs a pattern or line/column locator");
  if (j.contains("replacement")) {
    if (!j["replacement"].is_string()) syntax(where + ": replacement must be a string");
    op.replacement = j["replacement"].get<std::string>();
  }
  return op;
}

}  // namespace

const Program* Corpus::find(std::string_view id) const {
  for (const auto& p : programs) {
    if (p.id == id) return &p;
  }
  return nullptr;
}

std::vector<VariantSpec> Corpus::variants_of(std::string_view program_id) const {
  std::vector<VariantSpec> out;
  for (const auto& v : variants) {
    if (v.program_id == program_id) out.push_back(v);
  }
  bool has_baseline = std::any_of(out.begin(), out.end(),
                                  [](const VariantSpec& v) { return v.kind == VariantKind::baseline; });
  if (!has_baseline) {
    VariantSpec base;
    base.program_id = std::string(program_id);
    out.push_back(base);
  }
  std::stable_sort(out.begin(), out.end(),
                   [](const VariantSpec& a, const VariantSpec& b) { return a.kind < b.kind; });
  return out;
}

Corpus load_manifest(const fs::path& path) {
  std::string text;
  try {
    text = util::read_file(path);
  } catch (const Error&) {
    throw Error(ErrorCode::ManifestSyntax, "cannot read manifest '" + path.string() + "'");
  }
  return parse_manifest(text, path.parent_path());
}

Corpus parse_manifest(std::string_view json_text, const fs::path& base_dir) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::parse_error& e) {
    syntax(e.what());
  }
  if (!doc.is_object()) syntax("top level must be an object");
  if (!doc.contains("programs") || !doc["programs"].is_array()) syntax("'programs' must be an array");

  Corpus corpus;
  std::unordered_set<std::string> ids;
  for (std::size_t i = 0; i < doc["programs"].size(); ++i) {
    const auto& entry = doc["programs"][i];
    std::string where = fmt::format("programs[{}]", i);
    if (!entry.is_object()) syntax(where + " must be an object");
    Program p;
    p.id = required_string(entry, "id", where);
    if (p.id.empty()) syntax(where + ": empty id");
    auto suite = parse_suite(required_string(entry, "suite", where));
    if (!suite) syntax(where + ": unknown suite");
    p.suite = *suite;
    if (entry.contains("notes")) {
      if (!entry["notes"].is_string()) syntax(where + ": notes must be a string");
      p.notes = entry["notes"].get<std::string>();
    }
    if (!ids.insert(p.id).second) throw Error(ErrorCode::DuplicateId, "duplicate program id '" + p.id + "'");
    p.path = base_dir / required_string(entry, "path", where);
    if (!fs::is_regular_file(p.path)) {
      throw Error(ErrorCode::MissingSource, "program '" + p.id + "': missing source " + p.path.string());
    }
    p.source = util::read_file(p.path);
    if (util::trim(p.source).empty()) syntax("program '" + p.id + "' has an empty source");
    if (ctokens::function_definitions(ctokens::lex(p.source)).empty()) {
      syntax("program '" + p.id + "' contains no function definition");
    }
    corpus.programs.push_back(std::move(p));
  }

  if (doc.contains("variants")) {
    if (!doc["variants"].is_array()) syntax("'variants' must be an array");
    std::set<std::pair<std::string, VariantKind>> seen;
    for (std::size_t i = 0; i < doc["variants"].size(); ++i) {
      const auto& entry = doc["variants"][i];
      std::string where = fmt::format("variants[{}]", i);
      if (!entry.is_object()) syntax(where + " must be an object");
      VariantSpec v;
      v.program_id = required_string(entry, "program_id", where);
      if (!corpus.find(v.program_id)) syntax(where + ": unknown program_id '" + v.program_id + "'");
      auto kind = parse_variant_kind(required_string(entry, "kind", where));
      if (!kind) syntax(where + ": unknown variant kind");
      v.kind = *kind;
      if (!seen.insert({v.program_id, v.kind}).second) {
        throw Error(ErrorCode::DuplicateId, fmt::format("duplicate variant '{}' for program '{}'",
                                                        to_string(v.kind), v.program_id));
      }
      if (entry.contains("patch_path")) {
        if (!entry["patch_path"].is_string()) syntax(where + ": patch_path must be a string");
        fs::path patch = base_dir / entry["patch_path"].get<std::string>();
        if (!fs::is_regular_file(patch)) {
          throw Error(ErrorCode::MissingSource, where + ": missing patch " + patch.string());
        }
        v.patch = util::read_file(patch);
      }
      if (entry.contains("mutations")) {
        if (!entry["mutations"].is_array()) syntax(where + ": mutations must be an array");
        for (std::size_t m = 0; m < entry["mutations"].size(); ++m) {
          v.mutations.push_back(parse_mutation(entry["mutations"][m], fmt::format("{}.mutations[{}]", where, m)));
        }
      }
      if (entry.contains("anonymize_opts")) {
        const auto& o = entry["anonymize_opts"];
        if (!o.is_object()) syntax(where + ": anonymize_opts must be an object");
        if (o.contains("strip_comments")) {
          if (!o["strip_comments"].is_boolean()) syntax(where + ": strip_comments must be a boolean");
          v.anonymize_opts.strip_comments = o["strip_comments"].get<bool>();
        }
      }
      bool has_patch = v.patch.has_value();
      bool has_mut = !v.mutations.empty();
      if (is_buggy(v.kind)) {
        if (has_patch == has_mut) syntax(where + ": buggy variants need exactly one of patch_path or mutations");
      } else if (has_patch || has_mut) {
        syntax(where + ": only buggy variants may carry a patch or mutations");
      }
      corpus.variants.push_back(std::move(v));
    }
  }
  return corpus;
}

namespace {

struct Run {
  std::size_t first;  // index into code-token positions
  std::size_t count;
};

Run locate(const ctokens::TokenStream& ts, const std::vector<std::size_t>& code, const MutationOp& op) {
  std::vector<std::string_view> pat;
  ctokens::TokenStream pat_ts;
  if (op.pattern) {
    pat_ts = ctokens::lex(*op.pattern);
    pat = pat_ts.code_texts();
    if (pat.empty()) throw Error(ErrorCode::InvalidMutation, "empty mutation pattern");
  }
  auto at_position = [&](std::size_t k) {
    const auto& span = ts[code[k]].span;
    return span.line == *op.line && span.col == *op.column;
  };

  std::vector<std::size_t> hits;
  if (!pat.empty()) {
    for (std::size_t k = 0; k + pat.size() <= code.size(); ++k) {
      bool match = true;
      for (std::size_t j = 0; j < pat.size() && match; ++j) match = ts[code[k + j]].text == pat[j];
      if (match && (!op.line || at_position(k))) hits.push_back(k);
    }
  } else {
    for (std::size_t k = 0; k < code.size(); ++k) {
      if (at_position(k)) hits.push_back(k);
    }
  }
  std::string what = op.pattern ? "'" + *op.pattern + "'" : fmt::format("{}:{}", *op.line, *op.column);
  if (hits.empty()) throw Error(ErrorCode::LocatorNotFound, "mutation locator " + what + " matches nothing");
  if (hits.size() > 1) {
    throw Error(ErrorCode::AmbiguousLocator,
                fmt::format("mutation locator {} matches {} places", what, hits.size()));
  }
  return {hits.front(), pat.empty() ? 1 : pat.size()};
}

bool is_operator(std::string_view t) {
  static const std::unordered_set<std::string_view> kNotOperators = {"(", ")", "[", "]", "{", "}",
                                                                    ";", ",", "...", "#", "##"};
  return ctokens::is_punctuator(t) && !kNotOperators.contains(t);
}

std::optional<long long> integer_value(std::string_view t) {
  while (!t.empty() && (t.back() == 'u' || t.back() == 'U' || t.back() == 'l' || t.back() == 'L')) {
    t.remove_suffix(1);
  }
  long long v = 0;
  auto [p, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  if (ec != std::errc() || p != t.data() + t.size()) return std::nullopt;
  return v;
}

// The one code token where `replacement` differs from the located run, as
// (before, after); nullopt unless the two differ in exactly one position.
std::optional<std::pair<std::string, std::string>> single_difference(const ctokens::TokenStream& ts,
                                                                     const std::vector<std::size_t>& code,
                                                                     const Run& run, std::string_view replacement) {
  auto rep = ctokens::lex(std::string(replacement));
  auto texts = rep.code_texts();
  if (texts.size() != run.count) return std::nullopt;
  std::optional<std::pair<std::string, std::string>> diff;
  for (std::size_t i = 0; i < run.count; ++i) {
    std::string_view before = ts[code[run.first + i]].text;
    if (before == texts[i]) continue;
    if (diff) return std::nullopt;
    diff.emplace(std::string(before), std::string(texts[i]));
  }
  return diff;
}

}  // namespace

std::string apply_mutation(std::string_view source, const MutationOp& op) {
  auto ts = ctokens::lex(std::string(source));
  auto code = ts.code_indices();
  Run run = locate(ts, code, op);
  const auto& first = ts[code[run.first]];
  const auto& last = ts[code[run.first + run.count - 1]];
  std::size_t begin = first.span.begin;
  std::size_t end = last.span.end;
  std::string replacement;

  auto need_replacement = [&] {
    if (!op.replacement) {
      throw Error(ErrorCode::InvalidMutation, fmt::format("{} needs a replacement", to_string(op.op)));
    }
    return *op.replacement;
  };

  switch (op.op) {
    case MutationKind::token_replace:
      replacement = need_replacement();
      break;
    case MutationKind::operator_swap: {
      replacement = need_replacement();
      auto diff = single_difference(ts, code, run, replacement);
      if (!diff || !is_operator(diff->first) || !is_operator(diff->second)) {
        throw Error(ErrorCode::InvalidMutation,
                    fmt::format("operator_swap must replace one operator with another ('{}' -> '{}')",
                                source.substr(begin, end - begin), replacement));
      }
      break;
    }
    case MutationKind::off_by_one: {
      replacement = need_replacement();
      auto diff = single_difference(ts, code, run, replacement);
      bool ok = false;
      if (diff) {
        auto from = integer_value(diff->first);
        auto to = integer_value(diff->second);
        if (from && to) ok = (*to - *from == 1) || (*from - *to == 1);
        static const std::map<std::string_view, std::string_view> kBoundary = {
            {"<", "<="}, {"<=", "<"}, {">", ">="}, {">=", ">"}};
        auto it = kBoundary.find(diff->first);
        if (it != kBoundary.end()) ok = it->second == diff->second;
      }
      if (!ok) {
        throw Error(ErrorCode::InvalidMutation,
                    fmt::format("off_by_one must shift an integer by one or flip a bound ('{}' -> '{}')",
                                source.substr(begin, end - begin), replacement));
      }
      break;
    }
    case MutationKind::index_swap: {
      // Expect: <expr-token> [ a ] [ b ]
      std::vector<std::pair<std::size_t, std::size_t>> groups;  // code positions of [ and ]
      std::size_t k = run.first + 1;
      std::size_t stop = run.first + run.count;
      while (k < stop && ts[code[k]].text == "[") {
        int depth = 0;
        std::size_t open = k;
        for (; k < stop; ++k) {
          if (ts[code[k]].text == "[") ++depth;
          if (ts[code[k]].text == "]" && --depth == 0) break;
        }
        if (k >= stop) break;
        groups.emplace_back(open, k);
        ++k;
      }
      if (groups.size() != 2 || k != stop) {
        throw Error(ErrorCode::InvalidMutation, "index_swap pattern must have the form x[a][b]");
      }
      auto inner = [&](std::pair<std::size_t, std::size_t> g) {
        std::size_t b = ts[code[g.first]].span.end;
        std::size_t e = ts[code[g.second]].span.begin;
        return std::string(source.substr(b, e - b));
      };
      std::size_t g0 = ts[code[groups[0].first]].span.begin;
      replacement = std::string(source.substr(begin, g0 - begin)) + "[" + inner(groups[1]) + "][" +
                    inner(groups[0]) + "]";
      if (op.replacement) {
        if (ctokens::lex(*op.replacement).code_texts() != ctokens::lex(replacement).code_texts()) {
          throw Error(ErrorCode::InvalidMutation,
                      "index_swap replacement '" + *op.replacement + "' is not the swapped form");
        }
      }
      break;
    }
  }

  std::string out(source.substr(0, begin));
  out += replacement;
  out += source.substr(end);
  if (ctokens::lex(out).code_texts() == ts.code_texts()) {
    throw Error(ErrorCode::InvalidMutation, "mutation does not change any code token");
  }
  return out;
}

std::string apply_patch(std::string_view source, std::string_view diff) {
  auto src_lines = util::split_lines(source);
  bool final_newline = !source.empty() && source.back() == '\n';
  bool new_final_newline = final_newline;
  auto diff_lines = util::split_lines(diff);

  static const std::regex kHunk(R"(^@@ -(\d+)(?:,(\d+))? \+(\d+)(?:,(\d+))? @@.*$)");
  std::vector<std::string> out;
  std::size_t cursor = 0;
  std::size_t i = 0;
  bool any_hunk = false;
  while (i < diff_lines.size()) {
    std::string line(diff_lines[i]);
    std::smatch m;
    if (!std::regex_match(line, m, kHunk)) {
      ++i;
      continue;
    }
    any_hunk = true;
    std::size_t old_start = std::stoul(m[1]);
    std::size_t old_len = m[2].matched ? std::stoul(m[2]) : 1;
    std::size_t new_len = m[4].matched ? std::stoul(m[4]) : 1;
    std::size_t start = old_len == 0 ? old_start : old_start - (old_start > 0 ? 1 : 0);
    if (start < cursor || start > src_lines.size()) {
      throw Error(ErrorCode::PatchConflict, "hunk '" + line + "' does not fit the source");
    }
    for (; cursor < start; ++cursor) out.emplace_back(src_lines[cursor]);
    ++i;
    std::size_t seen_old = 0, seen_new = 0;
    char prev = ' ';
    while (i < diff_lines.size() && (seen_old < old_len || seen_new < new_len ||
                                     (!diff_lines[i].empty() && diff_lines[i][0] == '\\'))) {
      std::string_view h = diff_lines[i];
      char tag = h.empty() ? ' ' : h[0];
      std::string_view body = h.empty() ? h : h.substr(1);
      if (tag == '\\') {
        if (prev == '+') new_final_newline = false;
        else if (prev == '-') new_final_newline = true;
        else new_final_newline = false;
        ++i;
        continue;
      }
      if (tag == ' ' || tag == '-') {
        if (cursor >= src_lines.size() || src_lines[cursor] != body) {
          throw Error(ErrorCode::PatchConflict,
                      fmt::format("hunk '{}' conflicts with source line {}", line, cursor + 1));
        }
        ++cursor;
        ++seen_old;
        if (tag == ' ') {
          out.emplace_back(body);
          ++seen_new;
        }
      } else if (tag == '+') {
        out.emplace_back(body);
        ++seen_new;
      } else {
        throw Error(ErrorCode::PatchConflict, "unexpected line in hunk: '" + std::string(h) + "'");
      }
      prev = tag;
      ++i;
    }
    if (seen_old != old_len || seen_new != new_len) {
      throw Error(ErrorCode::PatchConflict, "truncated hunk '" + line + "'");
    }
  }
  if (!any_hunk) throw Error(ErrorCode::PatchConflict, "patch contains no hunks");
  for (; cursor < src_lines.size(); ++cursor) out.emplace_back(src_lines[cursor]);

  std::string result;
  for (std::size_t k = 0; k < out.size(); ++k) {
    result += out[k];
    if (k + 1 < out.size() || new_final_newline) result += '\n';
  }
  return result;
}

Anonymized anonymize(std::string_view source, const AnonymizeOptions& opts) {
  auto ts = ctokens::lex(std::string(source));
  std::vector<std::string> order;
  std::unordered_set<std::string> defined;
  for (const auto& fn : ctokens::function_definitions(ts)) {
    if (fn.name == "main") continue;
    if (defined.insert(fn.name).second) order.push_back(fn.name);
  }
  std::unordered_set<std::string> taken;
  for (const auto& t : ts) {
    if (t.is_code() && ctokens::is_identifier(t.text) && !defined.contains(std::string(t.text))) {
      taken.insert(std::string(t.text));
    }
  }

  Anonymized result;
  std::unordered_map<std::string, std::string> rename;
  std::size_t n = 1;
  for (const auto& name : order) {
    while (taken.contains(fmt::format("f{}", n))) ++n;
    std::string placeholder = fmt::format("f{}", n++);
    rename.emplace(name, placeholder);
    result.rename_map.emplace_back(name, placeholder);
  }

  auto blank = [](char c) { return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v'; };
  bool removed = false;
  for (const auto& t : ts) {
    if (opts.strip_comments && t.cls == ctokens::TokenClass::comment) {
      removed = true;
      continue;
    }
    std::string_view text = t.text;
    if (t.is_code()) {
      auto it = rename.find(std::string(text));
      if (it != rename.end()) text = it->second;
    }
    if (removed && !result.source.empty() && !blank(result.source.back()) && !blank(text.front())) {
      result.source.push_back(' ');
    }
    removed = false;
    result.source.append(text);
  }
  return result;
}

ProgramVariant materialize_variant(const Program& p, const VariantSpec& v) {
  ProgramVariant out;
  out.program_id = p.id;
  out.kind = v.kind;
  if (v.kind == VariantKind::baseline) {
    if (v.patch || !v.mutations.empty()) {
      throw Error(ErrorCode::InvalidMutation, "baseline variant of '" + p.id + "' carries edits");
    }
    out.source = p.source;
    return out;
  }

  std::string source = p.source;
  if (is_buggy(v.kind)) {
    if (v.patch.has_value() == !v.mutations.empty()) {
      throw Error(ErrorCode::InvalidMutation,
                  "buggy variant of '" + p.id + "' needs exactly one of a patch or mutations");
    }
    if (v.patch) {
      source = apply_patch(source, *v.patch);
    } else {
      for (const auto& m : v.mutations) source = apply_mutation(source, m);
    }
    if (ctokens::code_token_equivalent(p.source, source).equal) {
      throw Error(ErrorCode::InvalidMutation, "buggy variant of '" + p.id + "' leaves the code unchanged");
    }
  } else if (v.patch || !v.mutations.empty()) {
    throw Error(ErrorCode::InvalidMutation, "anonymized variant of '" + p.id + "' carries edits");
  }

  if (is_anonymized(v.kind)) {
    auto anon = anonymize(source, v.anonymize_opts);
    source = std::move(anon.source);
    out.rename_map = std::move(anon.rename_map);
  }
  ctokens::lex(source);
  out.source = std::move(source);
  return out;
}

}  // namespace specforge::corpus
