#include "specforge/pipeline.hpp"

#include <gtest/gtest.h>

#include "specforge/config.hpp"
#include "specforge/util.hpp"
#include "support.hpp"

namespace fs = std::filesystem;

namespace specforge::pipeline {
namespace {

using specforge::testing::copy_fixture_tree;
using specforge::testing::fixture;
using specforge::testing::planning_corpus;
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

class ForbiddenTransport : public llm::Transport {
 public:
  llm::HttpResult post_json(const std::string&, const std::string&,
                            const std::vector<std::pair<std::string, std::string>>&) override {
    ADD_FAILURE() << "network access in a replay mode";
    return {};
  }
};

PlanOptions base_options() {
  PlanOptions o;
  o.template_dir = template_dir();
  o.model = {"deepseek-reasoner", 0.7};
  return o;
}

TEST(Plan, FiftyProgramsFourVariantsThreeSamples) {
  auto jobs = plan_jobs(planning_corpus(50), base_options());
  EXPECT_EQ(jobs.size(), 600u);
}

TEST(Plan, OrderAndDeduplication) {
  auto o = base_options();
  o.samples = 2;
  o.intent_modes = {prompt::IntentMode::intent, prompt::IntentMode::off, prompt::IntentMode::intent};
  auto jobs = plan_jobs(planning_corpus(2), o);
  ASSERT_EQ(jobs.size(), 2u * 4 * 2 * 2);
  EXPECT_EQ(jobs[0].job.identity(), "p00|baseline|baseline_set|off|0");
  EXPECT_EQ(jobs[1].job.identity(), "p00|baseline|baseline_set|off|1");
  EXPECT_EQ(jobs[2].job.identity(), "p00|baseline|baseline_set|intent|0");
  EXPECT_EQ(jobs[4].job.identity(), "p00|buggy|baseline_set|off|0");
  EXPECT_EQ(jobs[16].job.identity(), "p01|baseline|baseline_set|off|0");
  EXPECT_EQ(jobs[0].job.prompt_digest, jobs[1].job.prompt_digest);
  EXPECT_NE(jobs[0].job.prompt_digest, jobs[2].job.prompt_digest);
  EXPECT_EQ(jobs[2].directive_text, prompt::default_directive_text(prompt::IntentMode::intent));
  EXPECT_EQ(jobs[4].variant_source, "int add0(int a) { return a - 0; }\n");
  EXPECT_EQ(jobs[8].variant_source, "int f1(int a) { return a + 0; }\n");
}

TEST(Plan, DirectiveOverride) {
  auto o = base_options();
  o.intent_modes = {prompt::IntentMode::implementation};
  o.directive_texts[prompt::IntentMode::implementation] = "Follow the code.";
  o.samples = 1;
  auto jobs = plan_jobs(planning_corpus(1), o);
  EXPECT_NE(jobs[0].prompt.find("8. Follow the code.\n"), std::string::npos);
}

TEST(Plan, MissingArtifacts) {
  TempDir dir;
  auto o = base_options();
  o.sets = {PromptSet::eva_set};
  o.symbolic_dir = dir.path();
  o.samples = 1;
  auto corpus = planning_corpus(1);
  EXPECT_EQ(code_of([&] { plan_jobs(corpus, o); }), ErrorCode::MissingSymbolicArtifact);

  dir.write("p00.eva.txt", "[eva] done\n");
  o.skip_missing_artifacts = true;
  auto jobs = plan_jobs(corpus, o);
  ASSERT_EQ(jobs.size(), 1u);
  EXPECT_EQ(jobs[0].job.variant, corpus::VariantKind::baseline);

  // A program-level artifact only stands in for the baseline.
  dir.write("p00.buggy.eva.txt", "[eva] buggy\n");
  EXPECT_EQ(plan_jobs(corpus, o).size(), 2u);
}

TEST(Plan, ArtifactCandidates) {
  auto c = artifact_candidates("s", "bs", corpus::VariantKind::baseline, symbolic::Tool::pathcrawler);
  EXPECT_EQ(c, (std::vector<fs::path>{"s/bs.baseline.pathcrawler.csv", "s/bs.pathcrawler.csv"}));
  c = artifact_candidates("s", "bs", corpus::VariantKind::buggy_anonymized, symbolic::Tool::eva);
  EXPECT_EQ(c, (std::vector<fs::path>{"s/bs.buggy_anonymized.eva.txt"}));
}

TEST(Extract, PrefersLastCBlock) {
  EXPECT_EQ(extract_code_block("a\n```c\nint x;\n```\nb\n```c\nint y;\n\n\n```\n```\nplain\n```\n"), "int y;\n");
  EXPECT_EQ(extract_code_block("```\nfirst\n```\n```\nsecond\n```"), "second\n");
  EXPECT_EQ(extract_code_block("```C\nint z;```\n```\n"), "int z;```\n");
  EXPECT_EQ(extract_code_block("```python\nx = 1\n```\n```\ny\n```"), "y\n");
  EXPECT_EQ(code_of([] { extract_code_block("no fences at all"); }), ErrorCode::NoCodeBlock);
  EXPECT_EQ(code_of([] { extract_code_block("```python\nx = 1\n```"); }), ErrorCode::NoCodeBlock);
}

TEST(Validate, AnnotatedListingPairsAreOk) {
  for (auto [orig, ann] : std::vector<std::pair<const char*, const char*>>{
           {"bsearch.c", "bsearch_baseline_spec.c"},
           {"bsearch.c", "bsearch_prelim_spec.c"},
           {"tritype.c", "tritype_baseline_spec.c"},
           {"tritype.c", "tritype_eva_spec.c"},
           {"alias5.c", "alias5_eva_spec.c"},
           {"apache.c", "apache_pc_spec.c"}}) {
    auto r = validate(fixture(std::string("listings/") + orig), fixture(std::string("listings/") + ann));
    EXPECT_TRUE(r.ok()) << ann << ": " << (r.failures.empty() ? "" : r.failures[0].detail);
  }
}

TEST(Validate, MutatedLevenshteinDivergesAtIndices) {
  auto r = validate(fixture("listings/levenshtein.c"), fixture("listings/levenshtein_mutated_spec.c"));
  ASSERT_TRUE(r.has(FailureKind::code_edited));
  EXPECT_FALSE(r.has(FailureKind::zero_annotations));
  const auto& f = r.failures[0];
  ASSERT_TRUE(f.divergence && f.divergence->a && f.divergence->b);
  EXPECT_EQ(f.divergence->a->span.line, 12u);
  EXPECT_EQ(f.divergence->b->span.line, 22u);
  EXPECT_EQ(f.detail, "first divergence: original 12:44 'x' vs generated 22:44 '0'");
}

TEST(Validate, EchoHasZeroAnnotations) {
  std::string src = fixture("listings/bsearch.c");
  auto r = validate(src, src);
  ASSERT_EQ(r.failures.size(), 1u);
  EXPECT_EQ(r.failures[0].kind, FailureKind::zero_annotations);
}

TEST(Validate, LexFailureShortCircuits) {
  auto r = validate("int x;", "int x; /* open");
  ASSERT_EQ(r.failures.size(), 1u);
  EXPECT_EQ(r.failures[0].kind, FailureKind::lex_failure);
}

TEST(Records, JsonRoundTrip) {
  GenerationRecord r;
  r.job = Job{"bs", corpus::Suite::famous, corpus::VariantKind::buggy, PromptSet::eva_set,
              prompt::IntentMode::intent, 2, "abc"};
  r.model = "m";
  r.temperature = 0.7;
  r.intent_directive = "d";
  r.reasoning = "why \"quoted\"\n";
  r.answer = "```c\nint x;\n```";
  r.extracted_code = "int x;\n";
  auto v = validate(fixture("listings/levenshtein.c"), fixture("listings/levenshtein_mutated_spec.c"));
  r.validation = v;
  r.counts.at(acsl::ClauseKind::requires_) = 2;
  r.timestamps = {"2025-01-20T00:00:00Z", 42};
  std::string line = record_to_json(r);
  EXPECT_EQ(line.find('\n'), std::string::npos);
  EXPECT_TRUE(line.starts_with(R"({"program_id":"bs","suite":"famous","variant":"buggy","set":"eva_set",)"));
  auto back = record_from_json(line);
  EXPECT_EQ(record_to_json(back), line);
  EXPECT_EQ(back.counts, r.counts);
  EXPECT_EQ(back.validation.failures[0].divergence->b->span.line, 22u);
  EXPECT_EQ(code_of([] { record_from_json("{not json"); }), ErrorCode::StoreIo);
}

class Project : public ::testing::Test {
 protected:
  void SetUp() override {
    copy_fixture_tree("e2e", dir.path());
    cfg = config::load_config(dir / "specforge.json");
    cfg.template_dir = template_dir();
    corpus = corpus::load_manifest(cfg.corpus);
  }
  std::vector<PlannedJob> plan() { return plan_jobs(corpus, cfg.plan_options()); }
  llm::Client client() { return llm::Client(cfg.client, std::make_shared<ForbiddenTransport>()); }

  TempDir dir;
  config::Config cfg;
  corpus::Corpus corpus;
};

TEST_F(Project, TritypeEvaReplayCounts) {
  auto c = client();
  for (const auto& pj : plan()) {
    if (pj.job.program_id != "tritype" || pj.job.set != PromptSet::eva_set) continue;
    auto rec = run_job(pj, c);
    EXPECT_TRUE(rec.validation.ok());
    EXPECT_EQ(rec.counts.get(acsl::ClauseKind::requires_), 3u);
    EXPECT_EQ(rec.counts.get(acsl::ClauseKind::ensures), 1u);
    EXPECT_EQ(rec.counts.total(), 4u);
    EXPECT_EQ(rec.timestamps.recorded_at, "2025-01-20T12:00:00Z");
    return;
  }
  FAIL() << "job not planned";
}

TEST_F(Project, BatchIsByteIdenticalAcrossRuns) {
  auto jobs = plan();
  ASSERT_EQ(jobs.size(), 9u);
  auto c = client();
  RecordStore a(dir / "a.jsonl"), b(dir / "b.jsonl");
  auto sa = run_batch(jobs, c, a, {false, 4, {}});
  auto sb = run_batch(jobs, c, b, {false, 1, {}});
  EXPECT_EQ(sa.written, 9u);
  EXPECT_EQ(sa.ok, 6u);
  EXPECT_EQ(sa.validation_failures, 3u);
  EXPECT_EQ(sb.written, 9u);
  EXPECT_EQ(util::read_file(a.path()), util::read_file(b.path()));
  auto recs = a.load();
  ASSERT_EQ(recs.size(), 9u);
  EXPECT_TRUE(recs[5].validation.has(FailureKind::zero_annotations));
  EXPECT_TRUE(recs[7].validation.has(FailureKind::no_code_block));
  EXPECT_TRUE(recs[8].validation.has(FailureKind::code_edited));
}

TEST_F(Project, ResumeSkipsCompletedJobs) {
  auto jobs = plan();
  auto c = client();
  RecordStore full(dir / "full.jsonl"), part(dir / "part.jsonl");
  run_batch(jobs, c, full);
  std::vector<PlannedJob> head(jobs.begin(), jobs.begin() + 4);
  run_batch(head, c, part);
  auto s = run_batch(jobs, c, part, {true, 2, {}});
  EXPECT_EQ(s.skipped, 4u);
  EXPECT_EQ(s.written, 5u);
  EXPECT_EQ(util::read_file(part.path()), util::read_file(full.path()));
  // Without resume the store starts over.
  s = run_batch(head, c, part);
  EXPECT_EQ(part.load().size(), 4u);
}

TEST_F(Project, EmptyCacheWritesProviderFailures) {
  cfg.client.cache_dir = dir / "empty-cache";
  auto c = client();
  RecordStore store(dir / "r.jsonl");
  auto s = run_batch(plan(), c, store);
  EXPECT_EQ(s.provider_errors, 9u);
  EXPECT_EQ(s.ok, 0u);
  for (const auto& r : store.load()) {
    ASSERT_EQ(r.validation.failures.size(), 1u);
    EXPECT_EQ(r.validation.failures[0].kind, FailureKind::provider_error);
    EXPECT_TRUE(r.validation.failures[0].detail.starts_with("CacheMiss"));
    EXPECT_EQ(r.counts.total(), 0u);
  }
}

TEST_F(Project, CallbackSeesRecordsInPlanOrder) {
  auto jobs = plan();
  auto c = client();
  RecordStore store(dir / "r.jsonl");
  std::vector<std::string> seen;
  run_batch(jobs, c, store, {false, 3, [&](const GenerationRecord& r) { seen.push_back(r.job.identity()); }});
  ASSERT_EQ(seen.size(), jobs.size());
  for (std::size_t i = 0; i < jobs.size(); ++i) EXPECT_EQ(seen[i], jobs[i].job.identity());
}

}  // namespace
}  // namespace specforge::pipeline
