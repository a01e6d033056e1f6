#include "specforge/ctokens.hpp"

#include <algorithm>
#include <array>
#include <fmt/format.h>
#include <unordered_set>

namespace specforge::ctokens {

std::string_view to_string(TokenClass c) {
  switch (c) {
    case TokenClass::code: return "code";
    case TokenClass::comment: return "comment";
    case TokenClass::acsl_block: return "acsl_block";
    case TokenClass::acsl_line: return "acsl_line";
    case TokenClass::whitespace: return "whitespace";
  }
  return "?";
}

std::string_view to_string(LexErrorKind k) {
  switch (k) {
    case LexErrorKind::unterminated_comment: return "unterminated comment";
    case LexErrorKind::unterminated_literal: return "unterminated literal";
    case LexErrorKind::line_splice: return "line continuation is not supported";
    case LexErrorKind::trigraph: return "trigraphs are not supported";
    case LexErrorKind::invalid_utf8: return "invalid UTF-8";
  }
  return "?";
}

LexError::LexError(LexErrorKind kind, std::size_t line, std::size_t col)
    : Error(ErrorCode::LexFailure,
            fmt::format("lex error at {}:{}: {}", line, col, to_string(kind))),
      kind_(kind),
      line_(line),
      col_(col) {}

namespace {

bool is_space(char c) {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v';
}

bool is_ident_start(char c) {
  auto u = static_cast<unsigned char>(c);
  return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || c == '_' || c == '$' || u >= 0x80;
}

bool is_digit(char c) { return c >= '0' && c <= '9'; }

bool is_ident_char(char c) { return is_ident_start(c) || is_digit(c); }

bool is_trigraph_tail(char c) {
  switch (c) {
    case '=': case '/': case '\'': case '(': case ')':
    case '!': case '<': case '>': case '-':
      return true;
    default:
      return false;
  }
}

// Longest first, so a linear scan implements maximal munch.
constexpr std::array<std::string_view, 48> kPunctuators = {
    ">>=", "<<=", "...", "->", "++", "--", "<<", ">>", "<=", ">=", "==", "!=",
    "&&",  "||",  "*=",  "/=", "%=", "+=", "-=", "&=", "^=", "|=", "##", "[",
    "]",   "(",   ")",   "{",  "}",  ".",  "&",  "*",  "+",  "-",  "~",  "!",
    "/",   "%",   "<",   ">",  "^",  "|",  "?",  ":",  ";",  "=",  ",",  "#",
};

// Returns the byte length of the UTF-8 sequence at s[i], or 0 if invalid.
std::size_t utf8_length(std::string_view s, std::size_t i) {
  auto b0 = static_cast<unsigned char>(s[i]);
  std::size_t n = 0;
  std::uint32_t cp = 0;
  if (b0 < 0x80) return 1;
  if ((b0 & 0xE0) == 0xC0) { n = 2; cp = b0 & 0x1F; }
  else if ((b0 & 0xF0) == 0xE0) { n = 3; cp = b0 & 0x0F; }
  else if ((b0 & 0xF8) == 0xF0) { n = 4; cp = b0 & 0x07; }
  else return 0;
  if (i + n > s.size()) return 0;
  for (std::size_t k = 1; k < n; ++k) {
    auto b = static_cast<unsigned char>(s[i + k]);
    if ((b & 0xC0) != 0x80) return 0;
    cp = (cp << 6) | (b & 0x3F);
  }
  if ((n == 2 && cp < 0x80) || (n == 3 && cp < 0x800) || (n == 4 && cp < 0x10000)) return 0;
  if (cp > 0x10FFFF || (cp >= 0xD800 && cp <= 0xDFFF)) return 0;
  return n;
}

class Lexer {
 public:
  explicit Lexer(std::string_view src) : src_(src) {}

  std::vector<Token> run() {
    validate_utf8();
    while (pos_ < src_.size()) step();
    return std::move(tokens_);
  }

 private:
  void validate_utf8() {
    std::size_t line = 1, col = 1;
    for (std::size_t i = 0; i < src_.size();) {
      std::size_t n = utf8_length(src_, i);
      if (n == 0) throw LexError(LexErrorKind::invalid_utf8, line, col);
      if (src_[i] == '\n') { ++line; col = 1; } else { col += n; }
      i += n;
    }
  }

  char peek(std::size_t ahead = 0) const {
    std::size_t i = pos_ + ahead;
    return i < src_.size() ? src_[i] : '\0';
  }

  // Position (line, col) of byte offset `at`, which must be >= tok_begin_.
  std::pair<std::size_t, std::size_t> where(std::size_t at) const {
    std::size_t line = line_, col = col_;
    for (std::size_t i = pos_; i < at && i < src_.size(); ++i) {
      if (src_[i] == '\n') { ++line; col = 1; } else { ++col; }
    }
    return {line, col};
  }

  [[noreturn]] void fail(LexErrorKind kind, std::size_t at) const {
    auto [line, col] = where(at);
    throw LexError(kind, line, col);
  }

  bool splice_at(std::size_t i) const {
    if (i >= src_.size() || src_[i] != '\\') return false;
    if (i + 1 < src_.size() && src_[i + 1] == '\n') return true;
    return i + 2 < src_.size() && src_[i + 1] == '\r' && src_[i + 2] == '\n';
  }

  void emit(TokenClass cls, std::size_t end) {
    Token t;
    t.cls = cls;
    t.text = src_.substr(pos_, end - pos_);
    t.span = Span{pos_, end, line_, col_};
    tokens_.push_back(t);
    for (std::size_t i = pos_; i < end; ++i) {
      if (src_[i] == '\n') {
        ++line_;
        col_ = 1;
        line_has_token_ = false;
      } else {
        ++col_;
      }
    }
    if (cls != TokenClass::whitespace && end > pos_ && src_[end - 1] != '\n') {
      line_has_token_ = true;
    }
    pos_ = end;
  }

  void step() {
    char c = peek();
    if (is_space(c)) {
      std::size_t end = pos_;
      while (end < src_.size() && is_space(src_[end])) ++end;
      emit(TokenClass::whitespace, end);
      return;
    }
    if (c == '/' && peek(1) == '*') return block_comment();
    if (c == '/' && peek(1) == '/') return line_comment();
    if (c == '#' && !line_has_token_) return directive();
    if (c == '"' || c == '\'') return literal(pos_);
    if (is_ident_start(c)) return identifier();
    if (is_digit(c) || (c == '.' && is_digit(peek(1)))) return number();
    if (c == '\\') {
      if (splice_at(pos_)) fail(LexErrorKind::line_splice, pos_);
      emit(TokenClass::code, pos_ + 1);
      return;
    }
    if (c == '?' && peek(1) == '?' && is_trigraph_tail(peek(2))) {
      fail(LexErrorKind::trigraph, pos_);
    }
    auto rest = src_.substr(pos_);
    for (auto p : kPunctuators) {
      if (rest.starts_with(p)) {
        emit(TokenClass::code, pos_ + p.size());
        return;
      }
    }
    // Anything else (`@`, backquote, ...) is a one-byte code token.
    emit(TokenClass::code, pos_ + 1);
  }

  void block_comment() {
    auto close = src_.find("*/", pos_ + 2);
    if (close == std::string_view::npos) fail(LexErrorKind::unterminated_comment, pos_);
    bool acsl = peek(2) == '@';
    emit(acsl ? TokenClass::acsl_block : TokenClass::comment, close + 2);
  }

  std::size_t end_of_line(std::size_t from) const {
    auto nl = src_.find('\n', from);
    return nl == std::string_view::npos ? src_.size() : nl;
  }

  void line_comment() {
    std::size_t end = end_of_line(pos_);
    std::size_t last = end;
    if (last > pos_ && last < src_.size() && src_[last - 1] == '\r') --last;
    if (last > pos_ + 2 && src_[last - 1] == '\\' && end < src_.size()) {
      fail(LexErrorKind::line_splice, last - 1);
    }
    bool acsl = peek(2) == '@';
    emit(acsl ? TokenClass::acsl_line : TokenClass::comment, end);
  }

  // A directive runs to the end of its line, stopping before a trailing
  // comment; trailing blanks are left to the whitespace token.
  void directive() {
    std::size_t line_end = end_of_line(pos_);
    std::size_t end = line_end;
    char quote = '\0';
    for (std::size_t i = pos_ + 1; i < line_end; ++i) {
      char ch = src_[i];
      if (splice_at(i)) fail(LexErrorKind::line_splice, i);
      if (quote != '\0') {
        if (ch == '\\') { ++i; continue; }
        if (ch == quote) quote = '\0';
        continue;
      }
      if (ch == '"' || ch == '\'') { quote = ch; continue; }
      if (ch == '/' && i + 1 < line_end && (src_[i + 1] == '/' || src_[i + 1] == '*')) {
        end = i;
        break;
      }
    }
    while (end > pos_ + 1 && is_space(src_[end - 1])) --end;
    emit(TokenClass::code, end);
  }

  void literal(std::size_t start) {
    std::size_t i = pos_;
    while (src_[i] != '"' && src_[i] != '\'') ++i;  // skip encoding prefix
    char quote = src_[i++];
    while (true) {
      if (i >= src_.size() || src_[i] == '\n') fail(LexErrorKind::unterminated_literal, start);
      char ch = src_[i];
      if (splice_at(i)) fail(LexErrorKind::line_splice, i);
      if (ch == '?' && i + 2 < src_.size() && src_[i + 1] == '?' && is_trigraph_tail(src_[i + 2])) {
        fail(LexErrorKind::trigraph, i);
      }
      if (ch == '\\') {
        if (i + 1 >= src_.size() || src_[i + 1] == '\n') fail(LexErrorKind::unterminated_literal, start);
        i += 2;
        continue;
      }
      ++i;
      if (ch == quote) break;
    }
    emit(TokenClass::code, i);
  }

  void identifier() {
    std::size_t end = pos_;
    while (end < src_.size() && is_ident_char(src_[end])) ++end;
    auto word = src_.substr(pos_, end - pos_);
    if (end < src_.size() && (src_[end] == '"' || src_[end] == '\'') &&
        (word == "L" || word == "u" || word == "U" || word == "u8")) {
      literal(pos_);
      return;
    }
    emit(TokenClass::code, end);
  }

  void number() {
    std::size_t end = pos_;
    while (end < src_.size()) {
      char ch = src_[end];
      if ((ch == '+' || ch == '-') && end > pos_) {
        char prev = src_[end - 1];
        if (prev == 'e' || prev == 'E' || prev == 'p' || prev == 'P') {
          ++end;
          continue;
        }
        break;
      }
      if (is_ident_char(ch) || ch == '.') {
        ++end;
        continue;
      }
      break;
    }
    emit(TokenClass::code, end);
  }

  std::string_view src_;
  std::size_t pos_ = 0;
  std::size_t line_ = 1;
  std::size_t col_ = 1;
  bool line_has_token_ = false;
  std::vector<Token> tokens_;
};

}  // namespace

TokenStream lex(std::string source) {
  TokenStream ts;
  ts.source_ = std::make_shared<const std::string>(std::move(source));
  ts.tokens_ = Lexer(*ts.source_).run();
  return ts;
}

std::vector<std::size_t> TokenStream::code_indices() const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < tokens_.size(); ++i) {
    if (tokens_[i].is_code()) out.push_back(i);
  }
  return out;
}

std::vector<std::string_view> TokenStream::code_texts() const {
  std::vector<std::string_view> out;
  for (const auto& t : tokens_) {
    if (t.is_code()) out.push_back(t.text);
  }
  return out;
}

bool is_identifier(std::string_view text) {
  if (text.empty() || !is_ident_start(text[0])) return false;
  return std::all_of(text.begin(), text.end(), is_ident_char);
}

bool is_number(std::string_view text) {
  return !text.empty() && (is_digit(text[0]) || (text.size() > 1 && text[0] == '.' && is_digit(text[1])));
}

bool is_string_or_char_literal(std::string_view text) {
  if (text.size() < 2) return false;
  char last = text.back();
  return (last == '"' || last == '\'') && text.find(last) < text.size() - 1;
}

bool is_preprocessor_line(std::string_view text) { return !text.empty() && text[0] == '#' && text.size() > 1; }

bool is_punctuator(std::string_view text) {
  return std::find(kPunctuators.begin(), kPunctuators.end(), text) != kPunctuators.end();
}

bool is_keyword(std::string_view text) {
  static const std::unordered_set<std::string_view> kKeywords = {
      "auto",     "break",    "case",     "char",     "const",    "continue", "default",
      "do",       "double",   "else",     "enum",     "extern",   "float",    "for",
      "goto",     "if",       "inline",   "int",      "long",     "register", "restrict",
      "return",   "short",    "signed",   "sizeof",   "static",   "struct",   "switch",
      "typedef",  "union",    "unsigned", "void",     "volatile", "while",    "_Bool",
      "_Complex", "_Alignas", "_Alignof", "_Atomic",  "_Generic", "_Noreturn", "_Static_assert",
      "_Thread_local", "bool", "true",    "false",    "nullptr",  "typeof",   "alignas",
      "alignof",  "static_assert", "thread_local", "constexpr",
  };
  return kKeywords.contains(text);
}

Equivalence code_token_equivalent(std::string_view a, std::string_view b) {
  auto ta = lex(std::string(a));
  auto tb = lex(std::string(b));
  auto ia = ta.code_indices();
  auto ib = tb.code_indices();
  std::size_t n = std::min(ia.size(), ib.size());
  std::size_t k = 0;
  while (k < n && ta[ia[k]].text == tb[ib[k]].text) ++k;
  Equivalence eq;
  if (k == ia.size() && k == ib.size()) return eq;
  eq.equal = false;
  Divergence d;
  if (k < ia.size()) d.a = TokenRef{std::string(ta[ia[k]].text), ta[ia[k]].span};
  if (k < ib.size()) d.b = TokenRef{std::string(tb[ib[k]].text), tb[ib[k]].span};
  eq.first_divergence = std::move(d);
  return eq;
}

std::vector<FunctionDefinition> function_definitions(const TokenStream& ts) {
  std::vector<FunctionDefinition> out;
  auto code = ts.code_indices();
  // matching_open[k] = position in `code` of the `(` matching the `)` at k.
  std::vector<std::size_t> matching_open(code.size(), code.size());
  std::vector<std::size_t> parens;
  for (std::size_t k = 0; k < code.size(); ++k) {
    auto text = ts[code[k]].text;
    if (text == "(") {
      parens.push_back(k);
    } else if (text == ")" && !parens.empty()) {
      matching_open[k] = parens.back();
      parens.pop_back();
    }
  }

  int depth = 0;
  std::optional<std::size_t> open_fn;
  for (std::size_t k = 0; k < code.size(); ++k) {
    auto text = ts[code[k]].text;
    if (text == "{") {
      if (depth == 0 && k > 0 && ts[code[k - 1]].text == ")") {
        std::size_t open = matching_open[k - 1];
        if (open < code.size() && open > 0) {
          auto name = ts[code[open - 1]].text;
          if (is_identifier(name) && !is_keyword(name)) {
            out.push_back({std::string(name), code[open - 1], code[k], ts.size()});
            open_fn = out.size() - 1;
          }
        }
      }
      ++depth;
    } else if (text == "}") {
      if (depth > 0) --depth;
      if (depth == 0 && open_fn) {
        out[*open_fn].body_close = code[k];
        open_fn.reset();
      }
    }
  }
  return out;
}

std::string describe(const TokenRef& t) {
  return fmt::format("{}:{} '{}'", t.span.line, t.span.col, t.text);
}

}  // namespace specforge::ctokens
