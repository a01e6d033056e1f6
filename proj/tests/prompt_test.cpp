#include "specforge/prompt.hpp"

#include <cstdlib>

#include <gtest/gtest.h>

#include "support.hpp"

namespace specforge::prompt {
namespace {

using specforge::testing::fixture;
using specforge::testing::template_dir;
using specforge::testing::TempDir;

ErrorCode code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no error thrown";
  return ErrorCode::Config;
}

class Golden : public ::testing::Test {
 protected:
  TemplateStore store{template_dir()};
  std::string program = fixture("golden/program.c");
};

TEST_F(Golden, Baseline) {
  EXPECT_EQ(render(store.load(TemplateId::baseline), program, symbolic::no_context()),
            fixture("golden/baseline.prompt.txt"));
}

TEST_F(Golden, PathCrawler) {
  auto ctx = symbolic::pathcrawler_context(fixture("golden/context.csv"));
  EXPECT_EQ(render(store.load(TemplateId::pathcrawler), program, ctx), fixture("golden/pathcrawler.prompt.txt"));
}

TEST_F(Golden, Eva) {
  auto ctx = symbolic::eva_context(fixture("golden/context.eva.txt"));
  EXPECT_EQ(render(store.load(TemplateId::eva), program, ctx), fixture("golden/eva.prompt.txt"));
}

TEST_F(Golden, IntentDirectiveBecomesNextGoal) {
  std::string golden = fixture("golden/baseline.prompt.txt");
  const std::string last_goal = "7. Do not skip any code in the returned solution to make it shorter.\n";
  auto pos = golden.find(last_goal);
  ASSERT_NE(pos, std::string::npos);
  std::string text(default_directive_text(IntentMode::intent));
  std::string want = golden;
  want.insert(pos + last_goal.size(), "8. " + text + "\n");
  EXPECT_EQ(render(store.load(TemplateId::baseline), program, symbolic::no_context(),
                   IntentDirective::for_mode(IntentMode::intent)),
            want);
}

TEST_F(Golden, ImplementationAndIntentDiffer) {
  auto t = store.load(TemplateId::eva);
  auto ctx = symbolic::eva_context(fixture("golden/context.eva.txt"));
  auto a = render(t, program, ctx, IntentDirective::for_mode(IntentMode::implementation));
  auto b = render(t, program, ctx, IntentDirective::for_mode(IntentMode::intent));
  EXPECT_NE(a, b);
  EXPECT_NE(a.find("\n9. "), std::string::npos);
}

TEST_F(Golden, ProgramTextIsNotReinterpreted) {
  std::string tricky = "int f(void) { return 0; } /* {eva_str} {program_str} */\n\n";
  auto out = render(store.load(TemplateId::baseline), tricky, symbolic::no_context());
  EXPECT_NE(out.find("```c\n" + tricky + "\n```"), std::string::npos);
}

TEST_F(Golden, LegacyTemplatesLoadAndRender) {
  auto out = render(store.load(TemplateId::legacy_pathcrawler), "int x;",
                    symbolic::pathcrawler_context("a,output,verdict\n1,2,success\n"));
  EXPECT_NE(out.find("int x;"), std::string::npos);
  EXPECT_NE(out.find("1,2,success"), std::string::npos);
  EXPECT_EQ(out.find("{csv}"), std::string::npos);
}

TEST(Render, ContextMismatch) {
  TemplateStore store(template_dir());
  EXPECT_EQ(code_of([&] { render(store.load(TemplateId::eva), "int x;", symbolic::no_context()); }),
            ErrorCode::ContextMismatch);
  EXPECT_EQ(code_of([&] {
              render(store.load(TemplateId::baseline), "int x;", symbolic::pathcrawler_context("a,verdict\n"));
            }),
            ErrorCode::ContextMismatch);
}

TEST(Templates, ValidationRejectsStrayOrMissingPlaceholders) {
  EXPECT_EQ(code_of([] { validate_template({TemplateId::baseline, "{program_str} {eva_str}"}); }),
            ErrorCode::UnresolvedPlaceholder);
  EXPECT_EQ(code_of([] { validate_template({TemplateId::pathcrawler, "{program_str}"}); }),
            ErrorCode::UnresolvedPlaceholder);
  EXPECT_NO_THROW(validate_template({TemplateId::pathcrawler, "{program_str}\n{pathcrawler_str}"}));
}

TEST(Templates, MissingFile) {
  TempDir dir;
  EXPECT_EQ(code_of([&] { TemplateStore(dir.path()).load(TemplateId::eva); }), ErrorCode::TemplateMissing);
}

TEST(Templates, DefaultDirHonoursEnvironment) {
  ::setenv("SPECFORGE_TEMPLATE_DIR", "/tmp/specforge-templates", 1);
  EXPECT_EQ(TemplateStore::default_dir(), "/tmp/specforge-templates");
  ::unsetenv("SPECFORGE_TEMPLATE_DIR");
  EXPECT_NE(TemplateStore::default_dir(), "/tmp/specforge-templates");
}

TEST(Goals, AppendWithoutGoalsSection) {
  EXPECT_EQ(append_goal("no list", "do it"), "no list\n1. do it\n");
}

TEST(Digest, MatchesHashlib) {
  EXPECT_EQ(sha256_hex(""), "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
  EXPECT_EQ(digest("hello", {"deepseek-reasoner", 0.7}),
            "af2b9937854adff3e23b4f721ee24b9b74a57c90fef36864fc5ea2c9fa05dff5");
  EXPECT_EQ(digest("hello", {"deepseek-reasoner", 1.0}),
            "760cff4f692865a8af6734365f62a7c50e2e796479399ccd740a79a82907ffbf");
  EXPECT_EQ(sha256_hex(fixture("golden/baseline.prompt.txt")),
            "99cd4a024cc339b156aa99156b813f2e7aa0eefa132617529200370b9d0fe064");
}

TEST(Names, RoundTrip) {
  for (auto id : {TemplateId::baseline, TemplateId::pathcrawler, TemplateId::eva, TemplateId::legacy_baseline,
                  TemplateId::legacy_pathcrawler, TemplateId::legacy_eva}) {
    EXPECT_EQ(parse_template_id(to_string(id)), id);
  }
  for (auto m : {IntentMode::off, IntentMode::implementation, IntentMode::intent}) {
    EXPECT_EQ(parse_intent_mode(to_string(m)), m);
  }
}

}  // namespace
}  // namespace specforge::prompt
