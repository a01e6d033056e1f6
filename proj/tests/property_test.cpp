#include "properties.hpp"

#include <gtest/gtest.h>

#include "specforge/ctokens.hpp"

namespace specforge::testing {
namespace {

constexpr std::uint32_t kSeed = 20250120;
constexpr std::size_t kCases = 1000;

void expect_holds(const PropertyResult& r) {
  EXPECT_EQ(r.cases, kCases);
  EXPECT_EQ(r.failures, 0u) << r.name << ": " << r.counterexample;
}

TEST(Property, LexerIsLossless) { expect_holds(check_lexer_lossless(kSeed, kCases)); }
TEST(Property, StripIsIdempotent) { expect_holds(check_strip_idempotent(kSeed, kCases)); }
TEST(Property, StripLeavesNoAnnotations) { expect_holds(check_strip_leaves_no_annotations(kSeed, kCases)); }
TEST(Property, AnonymizeIsIdempotentAndRenamesOnlyFunctions) { expect_holds(check_anonymize(kSeed, kCases)); }
TEST(Property, AggregationIsAdditive) { expect_holds(check_aggregate_additive(kSeed, kCases)); }

TEST(Property, OtherSeedsHold) {
  for (std::uint32_t seed : {1u, 7u, 99u}) {
    for (const auto& r : run_all_properties(seed, 200)) EXPECT_TRUE(r.ok()) << r.name << ": " << r.counterexample;
  }
}

TEST(Property, GeneratorsProduceVariety) {
  std::mt19937 rng(kSeed);
  std::size_t with_acsl = 0, with_pp = 0;
  for (int i = 0; i < 200; ++i) {
    auto src = random_source(rng);
    with_acsl += src.find("/*@") != std::string::npos || src.find("//@") != std::string::npos;
    with_pp += src.find("\n#") != std::string::npos;
  }
  EXPECT_GT(with_acsl, 100u);
  EXPECT_GT(with_pp, 100u);
  std::size_t renamed = 0;
  for (int i = 0; i < 200; ++i) renamed += !corpus::anonymize(random_program(rng)).rename_map.empty();
  EXPECT_GT(renamed, 150u);
}

}  // namespace
}  // namespace specforge::testing
