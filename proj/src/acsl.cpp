#include "specforge/acsl.hpp"

#include <algorithm>
#include <cctype>
#include <fmt/format.h>
#include <unordered_set>

#include "specforge/util.hpp"

namespace specforge::acsl {

namespace {

constexpr std::array<std::string_view, kClauseKindCount> kColumnNames = {
    "requires",     "ensures",      "assigns",  "assert", "loop_invariant", "loop_assigns",
    "loop_variant", "behavior",     "logic",    "predicate", "ghost",        "other",
};

bool ident_char(char c) {
  return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c == '_';
}

bool blank(char c) { return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v'; }

// Reads an identifier starting at `i` after skipping blanks; advances `i`.
std::string_view next_word(std::string_view s, std::size_t& i) {
  while (i < s.size() && blank(s[i])) ++i;
  std::size_t b = i;
  while (i < s.size() && ident_char(s[i])) ++i;
  return s.substr(b, i - b);
}

const std::unordered_set<std::string_view>& known_keywords() {
  static const std::unordered_set<std::string_view> k = {
      "requires", "ensures",   "assigns",   "assert",    "check",     "admit",    "loop",
      "behavior", "behaviors", "assumes",   "complete",  "disjoint",  "logic",    "predicate",
      "ghost",    "axiomatic", "axiom",     "lemma",     "inductive", "invariant", "global",
      "type",     "decreases", "terminates", "exits",    "allocates", "frees",    "reads",
      "breaks",   "continues", "returns",   "for",       "model",     "case",
  };
  return k;
}

bool is_block_keyword(std::string_view w) {
  return w == "axiomatic" || w == "inductive" || w == "ghost";
}

// Blanks the parts of an annotation body that are not clause text: leading
// `@` runs on each line, a trailing `@` run, and `//` comments. Lengths are
// preserved so offsets keep mapping onto the source.
std::string clean_body(std::string_view body) {
  std::string buf(body);
  bool line_start = true;
  char quote = '\0';
  for (std::size_t i = 0; i < buf.size(); ++i) {
    char c = buf[i];
    if (c == '\n') {
      line_start = true;
      quote = '\0';
      continue;
    }
    if (line_start) {
      if (c == ' ' || c == '\t' || c == '\r') continue;
      if (c == '@') {
        buf[i] = ' ';
        continue;
      }
      line_start = false;
    }
    if (quote != '\0') {
      if (c == '\\') ++i;
      else if (c == quote) quote = '\0';
      continue;
    }
    if (c == '\'' || c == '"') {
      quote = c;
    } else if (c == '/' && i + 1 < buf.size() && buf[i + 1] == '/') {
      while (i < buf.size() && buf[i] != '\n') buf[i++] = ' ';
      --i;
    }
  }
  for (std::size_t i = buf.size(); i > 0 && (buf[i - 1] == '@' || blank(buf[i - 1])); --i) {
    if (buf[i - 1] == '@') buf[i - 1] = ' ';
  }
  return buf;
}

struct Chunk {
  std::size_t begin;
  std::size_t end;
  bool terminated;
};

// Matches `behavior <id> :` at `i`; returns the offset after the colon.
std::optional<std::size_t> behavior_header(std::string_view s, std::size_t i) {
  std::size_t j = i;
  if (next_word(s, j) != "behavior") return std::nullopt;
  if (next_word(s, j).empty()) return std::nullopt;
  while (j < s.size() && blank(s[j])) ++j;
  if (j < s.size() && s[j] == ':') return j + 1;
  return std::nullopt;
}

std::vector<Chunk> split_clauses(std::string_view s) {
  std::vector<Chunk> out;
  std::size_t i = 0;
  while (true) {
    while (i < s.size() && blank(s[i])) ++i;
    if (i >= s.size()) break;
    if (auto after = behavior_header(s, i)) {
      out.push_back({i, *after, true});
      i = *after;
      continue;
    }
    std::size_t probe = i;
    bool block_kw = is_block_keyword(next_word(s, probe));
    int depth = 0;
    int open_binders = 0;  // \forall, \exists, \let whose `;` is still ahead
    char quote = '\0';
    std::size_t j = i;
    bool done = false;
    for (; j < s.size(); ++j) {
      char c = s[j];
      if (quote != '\0') {
        if (c == '\\') ++j;
        else if (c == quote) quote = '\0';
        continue;
      }
      if (c == '\'' || c == '"') {
        quote = c;
      } else if (c == '\\') {
        std::size_t k = j + 1;
        while (k < s.size() && (std::isalnum(static_cast<unsigned char>(s[k])) || s[k] == '_')) ++k;
        auto word = s.substr(j + 1, k - j - 1);
        if (depth == 0 && (word == "forall" || word == "exists" || word == "let")) ++open_binders;
        j = k - 1;
      } else if (c == ';' && depth == 0 && open_binders > 0) {
        --open_binders;
      } else if (c == '(' || c == '[' || c == '{') {
        ++depth;
      } else if (c == ')' || c == ']' || c == '}') {
        if (depth > 0) --depth;
        if (c == '}' && depth == 0 && block_kw) {
          done = true;
          break;
        }
      } else if (c == ';' && depth == 0) {
        done = true;
        break;
      }
    }
    if (done) {
      out.push_back({i, j + 1, true});
      i = j + 1;
    } else {
      out.push_back({i, s.size(), false});
      break;
    }
  }
  return out;
}

struct Position {
  std::size_t line;
  std::size_t col;
};

Position advance(const ctokens::Span& from, std::string_view text, std::size_t offset) {
  Position p{from.line, from.col};
  for (std::size_t i = 0; i < offset && i < text.size(); ++i) {
    if (text[i] == '\n') {
      ++p.line;
      p.col = 1;
    } else {
      ++p.col;
    }
  }
  return p;
}

bool attaches_forward(ClauseKind k) {
  return k != ClauseKind::logic && k != ClauseKind::predicate && k != ClauseKind::ghost;
}

// Name of the function declared by the code that follows token `from` at
// top level: the first identifier directly followed by `(` before `;` or `{`.
std::optional<std::string> following_declarator(const ctokens::TokenStream& ts, std::size_t from) {
  std::string_view prev;
  for (std::size_t i = from + 1; i < ts.size(); ++i) {
    const auto& t = ts[i];
    if (!t.is_code()) continue;
    if (t.text == ";" || t.text == "{" || t.text == "}") return std::nullopt;
    if (t.text == "(" && ctokens::is_identifier(prev) && !ctokens::is_keyword(prev)) {
      return std::string(prev);
    }
    prev = t.text;
  }
  return std::nullopt;
}

}  // namespace

std::string_view column_name(ClauseKind k) { return kColumnNames[static_cast<std::size_t>(k)]; }

std::optional<ClauseKind> kind_from_column(std::string_view name) {
  for (auto k : kAllClauseKinds) {
    if (column_name(k) == name) return k;
  }
  return std::nullopt;
}

std::size_t CountRow::total() const {
  std::size_t t = 0;
  for (auto c : counts) t += c;
  return t;
}

CountRow& CountRow::operator+=(const CountRow& other) {
  for (std::size_t i = 0; i < counts.size(); ++i) counts[i] += other.counts[i];
  return *this;
}

ClauseKind classify_clause(std::string_view text) {
  std::size_t i = 0;
  auto w = next_word(text, i);
  if (w == "check" || w == "admit") w = next_word(text, i);
  if (w == "requires") return ClauseKind::requires_;
  if (w == "ensures") return ClauseKind::ensures;
  if (w == "assigns") return ClauseKind::assigns;
  if (w == "assert") return ClauseKind::assert_;
  if (w == "behavior") return ClauseKind::behavior;
  if (w == "logic") return ClauseKind::logic;
  if (w == "predicate") return ClauseKind::predicate;
  if (w == "ghost") return ClauseKind::ghost;
  if (w == "loop") {
    auto second = next_word(text, i);
    if (second == "invariant") return ClauseKind::loop_invariant;
    if (second == "assigns") return ClauseKind::loop_assigns;
    if (second == "variant") return ClauseKind::loop_variant;
  }
  return ClauseKind::other;
}

std::vector<Annotation> extract_annotations(std::string_view source) {
  return extract_annotations(ctokens::lex(std::string(source)));
}

std::vector<Annotation> extract_annotations(const ctokens::TokenStream& ts) {
  auto functions = ctokens::function_definitions(ts);
  std::vector<Annotation> out;
  for (std::size_t ti = 0; ti < ts.size(); ++ti) {
    const auto& tok = ts[ti];
    if (!tok.is_acsl()) continue;

    std::string_view body = tok.text.substr(3);
    if (tok.cls == ctokens::TokenClass::acsl_block) body.remove_suffix(2);
    const std::size_t body_offset = 3;
    std::string cleaned = clean_body(body);

    std::optional<std::string> inside;
    for (const auto& fn : functions) {
      if (ti > fn.body_open && ti < fn.body_close) inside = fn.name;
    }
    std::optional<std::string> forward;
    if (!inside) forward = following_declarator(ts, ti);

    for (const auto& chunk : split_clauses(cleaned)) {
      std::string_view raw = std::string_view(cleaned).substr(chunk.begin, chunk.end - chunk.begin);
      std::string text = util::collapse_whitespace(raw);
      if (text.empty()) continue;
      ClauseKind kind = classify_clause(text);
      if (!chunk.terminated) {
        std::size_t k = 0;
        auto w = next_word(text, k);
        if (!known_keywords().contains(w)) {
          auto pos = advance(tok.span, tok.text, body_offset + chunk.begin);
          throw Error(ErrorCode::MalformedClause,
                      fmt::format("malformed ACSL clause at {}:{}: '{}'", pos.line, pos.col, text));
        }
      }
      std::size_t end = chunk.end;
      while (end > chunk.begin && blank(cleaned[end - 1])) --end;

      Annotation a;
      a.kind = kind;
      a.clause_text = std::move(text);
      if (inside) a.enclosing_function = inside;
      else if (attaches_forward(kind)) a.enclosing_function = forward;
      auto pos = advance(tok.span, tok.text, body_offset + chunk.begin);
      a.span = ctokens::Span{tok.span.begin + body_offset + chunk.begin,
                             tok.span.begin + body_offset + end, pos.line, pos.col};
      out.push_back(std::move(a));
    }
  }
  return out;
}

CountRow count(const std::vector<Annotation>& annotations) {
  CountRow row;
  for (const auto& a : annotations) ++row.at(a.kind);
  return row;
}

CountRow count(std::string_view source) { return count(extract_annotations(source)); }

std::string strip_annotations(std::string_view source) {
  auto ts = ctokens::lex(std::string(source));
  std::string out;
  out.reserve(source.size());
  bool removed = false;
  for (const auto& t : ts) {
    if (t.is_acsl()) {
      removed = true;
      continue;
    }
    if (removed && !out.empty() && !blank(out.back()) && !t.text.empty() && !blank(t.text.front())) {
      out.push_back(' ');
    }
    removed = false;
    out.append(t.text);
  }
  return out;
}

std::string count_csv_header() {
  std::string h = "program,variant,set,sample";
  for (auto k : kAllClauseKinds) {
    h += ',';
    h += column_name(k);
  }
  h += ",total";
  return h;
}

std::string count_csv_row(std::string_view program, std::string_view variant, std::string_view set,
                          std::string_view sample, const CountRow& row) {
  std::string line = util::csv_cell(program) + ',' + util::csv_cell(variant) + ',' +
                     util::csv_cell(set) + ',' + util::csv_cell(sample);
  for (auto k : kAllClauseKinds) line += fmt::format(",{}", row.get(k));
  line += fmt::format(",{}", row.total());
  return line;
}

}  // namespace specforge::acsl
