#pragma once

// C-aware lexer that keeps every byte of the input. Each token is one of
// code, plain comment, ACSL block (`/*@ ... */`), ACSL line (`//@ ...`) or
// whitespace. Joining the token texts in order reproduces the input.

#include <cstddef>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "specforge/error.hpp"

namespace specforge::ctokens {

enum class TokenClass { code, comment, acsl_block, acsl_line, whitespace };

std::string_view to_string(TokenClass c);

struct Span {
  std::size_t begin = 0;  // byte offset, inclusive
  std::size_t end = 0;    // byte offset, exclusive
  std::size_t line = 1;   // 1-based
  std::size_t col = 1;    // 1-based, in bytes

  bool operator==(const Span&) const = default;
};

struct Token {
  TokenClass cls = TokenClass::code;
  std::string_view text;  // view into the lexed source
  Span span;

  bool is_code() const { return cls == TokenClass::code; }
  bool is_acsl() const {
    return cls == TokenClass::acsl_block || cls == TokenClass::acsl_line;
  }
};

enum class LexErrorKind {
  unterminated_comment,
  unterminated_literal,
  line_splice,
  trigraph,
  invalid_utf8,
};

std::string_view to_string(LexErrorKind k);

class LexError : public Error {
 public:
  LexError(LexErrorKind kind, std::size_t line, std::size_t col);

  LexErrorKind kind() const noexcept { return kind_; }
  std::size_t line() const noexcept { return line_; }
  std::size_t col() const noexcept { return col_; }

 private:
  LexErrorKind kind_;
  std::size_t line_;
  std::size_t col_;
};

// Token views point into a shared immutable copy of the source, so streams
// can be copied and moved freely.
class TokenStream {
 public:
  const std::string& source() const { return *source_; }
  const std::vector<Token>& tokens() const { return tokens_; }
  std::size_t size() const { return tokens_.size(); }
  const Token& operator[](std::size_t i) const { return tokens_[i]; }
  auto begin() const { return tokens_.begin(); }
  auto end() const { return tokens_.end(); }

  // Indices of class=code tokens, in order.
  std::vector<std::size_t> code_indices() const;
  std::vector<std::string_view> code_texts() const;

 private:
  friend TokenStream lex(std::string source);

  std::shared_ptr<const std::string> source_ = std::make_shared<const std::string>();
  std::vector<Token> tokens_;
};

// Throws LexError.
TokenStream lex(std::string source);

bool is_identifier(std::string_view text);
bool is_number(std::string_view text);
bool is_string_or_char_literal(std::string_view text);
bool is_preprocessor_line(std::string_view text);
bool is_punctuator(std::string_view text);
bool is_keyword(std::string_view text);

struct TokenRef {
  std::string text;
  Span span;
};

struct Divergence {
  std::optional<TokenRef> a;  // absent when `a` ran out of code tokens first
  std::optional<TokenRef> b;
};

struct Equivalence {
  bool equal = true;
  std::optional<Divergence> first_divergence;
};

// Compares the code-token projections of two files. Throws LexError.
Equivalence code_token_equivalent(std::string_view a, std::string_view b);

struct FunctionDefinition {
  std::string name;
  std::size_t name_token = 0;   // index into the stream
  std::size_t body_open = 0;    // index of `{`
  std::size_t body_close = 0;   // index of matching `}` (or size() if open)
};

// Top-level function definitions found by brace tracking: a `{` at depth 0
// directly preceded by a `)` whose matching `(` follows an identifier.
std::vector<FunctionDefinition> function_definitions(const TokenStream& ts);

// Formats "line:col 'text'" for diagnostics.
std::string describe(const TokenRef& t);

}  // namespace specforge::ctokens
