#include "specforge/ctokens.hpp"

#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "support.hpp"

namespace specforge::ctokens {
namespace {

using specforge::testing::fixture;

std::string join(const TokenStream& ts) {
  std::string out;
  for (const auto& t : ts) out += t.text;
  return out;
}

std::vector<TokenClass> classes(const TokenStream& ts) {
  std::vector<TokenClass> out;
  for (const auto& t : ts) out.push_back(t.cls);
  return out;
}

TEST(Lexer, ClassifiesCommentsAndAnnotations) {
  auto ts = lex("/*@ requires x > 0; */ int f(int x); // done\n//@ assert x;\n/* plain */");
  std::vector<TokenClass> want = {
      TokenClass::acsl_block, TokenClass::whitespace, TokenClass::code,       TokenClass::whitespace,
      TokenClass::code,       TokenClass::code,       TokenClass::code,       TokenClass::whitespace,
      TokenClass::code,       TokenClass::code,       TokenClass::code,       TokenClass::whitespace,
      TokenClass::comment,    TokenClass::whitespace, TokenClass::acsl_line,  TokenClass::whitespace,
      TokenClass::comment,
  };
  EXPECT_EQ(classes(ts), want);
}

TEST(Lexer, PreprocessorLineIsOneToken) {
  auto ts = lex("#include <string.h>\n  #define N 10 // ten\nint x;");
  auto code = ts.code_texts();
  ASSERT_GE(code.size(), 2u);
  EXPECT_EQ(code[0], "#include <string.h>");
  EXPECT_EQ(code[1], "#define N 10");
  EXPECT_TRUE(is_preprocessor_line(code[1]));
}

TEST(Lexer, CommentMarkersInsideLiteralsStayCode) {
  auto ts = lex("char *s = \"/*@ not */\"; char c = '/';");
  for (const auto& t : ts) EXPECT_FALSE(t.is_acsl());
  EXPECT_EQ(ts.code_texts()[4], "\"/*@ not */\"");
}

TEST(Lexer, MaximalMunchPunctuators) {
  auto ts = lex("a<<=b->c...d");
  std::vector<std::string_view> want = {"a", "<<=", "b", "->", "c", "...", "d"};
  EXPECT_EQ(ts.code_texts(), want);
}

TEST(Lexer, SpansCarryLineAndColumn) {
  auto ts = lex("int\n  x;");
  auto idx = ts.code_indices();
  ASSERT_EQ(idx.size(), 3u);
  EXPECT_EQ(ts[idx[1]].span.line, 2u);
  EXPECT_EQ(ts[idx[1]].span.col, 3u);
  EXPECT_EQ(ts[idx[1]].span.begin, 6u);
}

TEST(Lexer, RejectsLineSplice) {
  try {
    lex("int a = 1 + \\\n 2;");
    FAIL() << "expected LexError";
  } catch (const LexError& e) {
    EXPECT_EQ(e.kind(), LexErrorKind::line_splice);
    EXPECT_EQ(e.line(), 1u);
  }
}

TEST(Lexer, RejectsTrigraph) {
  EXPECT_THROW(lex("int a ?\?= 1;"), LexError);
}

TEST(Lexer, RejectsUnterminatedComment) {
  try {
    lex("int a; /* open");
    FAIL() << "expected LexError";
  } catch (const LexError& e) {
    EXPECT_EQ(e.kind(), LexErrorKind::unterminated_comment);
  }
}

TEST(Lexer, RejectsUnterminatedString) {
  EXPECT_THROW(lex("char *s = \"abc\n\";"), LexError);
}

TEST(Lexer, RejectsInvalidUtf8) {
  std::string bad = "int a; // \xC3\x28\n";
  EXPECT_THROW(lex(bad), LexError);
  EXPECT_NO_THROW(lex("int a; // caf\xC3\xA9\n"));
}

TEST(Lexer, LosslessOnFixtures) {
  for (const char* name : {"listings/bsearch_baseline_spec.c", "listings/tritype_baseline_spec.c",
                           "listings/levenshtein_mutated_spec.c", "listings/labels_tritype_eva_spec.c",
                           "listings/apache_pc_spec.c"}) {
    std::string src = fixture(name);
    EXPECT_EQ(join(lex(src)), src) << name;
  }
}

TEST(Lexer, StreamSurvivesCopyAndMove) {
  TokenStream copy;
  {
    auto ts = lex("int x;");
    copy = ts;
    TokenStream moved = std::move(ts);
    EXPECT_EQ(join(moved), "int x;");
  }
  EXPECT_EQ(join(copy), "int x;");
}

TEST(Equivalence, IgnoresAnnotationsCommentsAndWhitespace) {
  auto eq = code_token_equivalent("int f(int x){return x;}",
                                  "/*@ ensures \\result == x; */\nint f(int x) {\n  // id\n  return x;\n}\n");
  EXPECT_TRUE(eq.equal);
  EXPECT_FALSE(eq.first_divergence);
}

TEST(Equivalence, ReportsFirstDivergenceOnMutatedLevenshtein) {
  auto eq = code_token_equivalent(fixture("listings/levenshtein.c"), fixture("listings/levenshtein_mutated_spec.c"));
  ASSERT_FALSE(eq.equal);
  ASSERT_TRUE(eq.first_divergence);
  const auto& d = *eq.first_divergence;
  ASSERT_TRUE(d.a && d.b);
  EXPECT_EQ(d.a->text, "x");
  EXPECT_EQ(d.a->span.line, 12u);
  EXPECT_EQ(d.a->span.col, 44u);
  EXPECT_EQ(d.b->text, "0");
  EXPECT_EQ(d.b->span.line, 22u);
  EXPECT_EQ(d.b->span.col, 44u);
}

TEST(Equivalence, ShorterFileDivergesAtEnd) {
  auto eq = code_token_equivalent("int x;", "int x; int y;");
  ASSERT_FALSE(eq.equal);
  EXPECT_FALSE(eq.first_divergence->a);
  EXPECT_EQ(eq.first_divergence->b->text, "int");
}

TEST(Functions, FindsTopLevelDefinitions) {
  auto ts = lex(fixture("listings/levenshtein.c"));
  auto defs = function_definitions(ts);
  ASSERT_EQ(defs.size(), 2u);
  EXPECT_EQ(defs[0].name, "min");
  EXPECT_EQ(defs[1].name, "levenshtein");
  EXPECT_EQ(ts[defs[1].body_open].text, "{");
  EXPECT_EQ(ts[defs[1].body_close].text, "}");
}

TEST(Functions, SkipsPrototypesAndInitializers) {
  auto defs = function_definitions(lex("int g(int);\nint t[2] = {1, 2};\nstruct s { int a; };\nint h(void) { return 0; }"));
  ASSERT_EQ(defs.size(), 1u);
  EXPECT_EQ(defs[0].name, "h");
}

}  // namespace
}  // namespace specforge::ctokens
