#include "properties.hpp"

#include <algorithm>
#include <array>
#include <map>
#include <set>
#include <string_view>

#include <fmt/format.h>

#include "specforge/acsl.hpp"
#include "specforge/corpus.hpp"
#include "specforge/ctokens.hpp"
#include "specforge/report.hpp"

namespace specforge::testing {
namespace {

std::size_t pick(std::mt19937& rng, std::size_t n) { return std::uniform_int_distribution<std::size_t>(0, n - 1)(rng); }

bool chance(std::mt19937& rng, double p) { return std::bernoulli_distribution(p)(rng); }

template <typename T, std::size_t N>
const T& pick(std::mt19937& rng, const std::array<T, N>& items) {
  return items[pick(rng, N)];
}

std::string random_identifier(std::mt19937& rng) {
  static constexpr std::string_view head = "abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ_";
  static constexpr std::string_view tail = "abcdefghijklmnopqrstuvwxyz0123456789_";
  std::string s(1, head[pick(rng, head.size())]);
  for (std::size_t n = pick(rng, 7); n > 0; --n) s += tail[pick(rng, tail.size())];
  return s;
}

constexpr std::array<std::string_view, 9> kNumbers = {"0", "42", "0x1F", "3.14", "1e10", "10u", "1.5f", "077", "0UL"};

constexpr std::array<std::string_view, 8> kLiterals = {
    R"("abc")",  R"("a\"b")",  R"("/* not a comment */")", R"("//@ assert 0;")",
    R"('x')",    R"('\n')",    R"(L"wide")",               R"('\'')",
};

constexpr std::array<std::string_view, 24> kPunctuators = {
    "{", "}", "(", ")", "[", "]", ";", ",", "->", "++", "--", "<<=", "...",
    "==", "!=", "&&", "||", "+", "-", "*", "%", "<", ">", "?",
};

constexpr std::array<std::string_view, 5> kComments = {
    "/* c */", "/**/", "/* multi\n   line */", "// line comment\n", "/* @ spaced is plain */",
};

constexpr std::array<std::string_view, 9> kAnnotations = {
    "/*@ requires x > 0; */",
    "/*@ requires \\valid(p);\n    ensures \\result >= 0;\n    assigns \\nothing; */",
    "//@ assert a == b;\n",
    "/*@ loop invariant 0 <= i <= n;\n    loop assigns i;\n    loop variant n - i; */",
    "/*@ ghost int g = 0; */",
    "/*@ predicate p(integer x) = x > 0; */",
    "/*@ logic integer sq(integer x) = x * x; */",
    "/*@ behavior pos:\n      assumes x > 0;\n      ensures \\result == x; */",
    "//@ loop invariant \\forall integer k; 0 <= k < i ==> a[k] == 0;\n",
};

constexpr std::array<std::string_view, 3> kPreprocessor = {
    "\n#include <stdio.h>\n", "\n#define N 10\n", "\n#ifdef DEBUG\n#endif\n",
};

constexpr std::array<std::string_view, 5> kWhitespace = {" ", "\t", "\n", "  ", " \n "};

std::string fail_text(std::string_view reason, std::string_view input) {
  return fmt::format("{}\n--- input ---\n{}", reason, input);
}

void record_failure(PropertyResult& r, std::string_view reason, std::string_view input) {
  if (r.failures++ == 0) r.counterexample = fail_text(reason, input);
}

template <typename Check>
PropertyResult run_property(std::string name, std::uint32_t seed, std::size_t cases, Check check) {
  PropertyResult r{std::move(name)};
  std::mt19937 rng(seed);
  for (std::size_t i = 0; i < cases; ++i) {
    ++r.cases;
    try {
      check(rng, r);
    } catch (const std::exception& e) {
      record_failure(r, fmt::format("case {} threw: {}", i, e.what()), "");
    }
  }
  return r;
}

bool is_placeholder(std::string_view s) {
  return s.size() > 1 && s[0] == 'f' && std::all_of(s.begin() + 1, s.end(), [](char c) { return c >= '0' && c <= '9'; });
}

}  // namespace

std::string random_source(std::mt19937& rng) {
  std::string s;
  for (std::size_t n = 1 + pick(rng, 40); n > 0; --n) {
    switch (pick(rng, 9)) {
      case 0:
      case 1: s += random_identifier(rng); break;
      case 2: s += pick(rng, kNumbers); break;
      case 3: s += pick(rng, kLiterals); break;
      case 4:
      case 5: s += pick(rng, kPunctuators); break;
      case 6: s += pick(rng, kComments); break;
      case 7: s += pick(rng, kAnnotations); break;
      default: s += pick(rng, kPreprocessor); break;
    }
    s += pick(rng, kWhitespace);
  }
  return s;
}

std::string random_program(std::mt19937& rng) {
  std::set<std::string> taken;
  std::vector<std::string> names;
  static constexpr std::array<std::string_view, 4> preset = {"f1", "f2", "f3", "main"};
  for (std::size_t n = 1 + pick(rng, 6); names.size() < n;) {
    std::string name = chance(rng, 0.25) ? std::string(pick(rng, preset)) : random_identifier(rng);
    if (ctokens::is_keyword(name) || name == "a" || name == "s" || !taken.insert(name).second) continue;
    names.push_back(name);
  }
  std::string out;
  if (chance(rng, 0.5)) out += "#include <stdio.h>\n\n";
  for (std::string_view g : {"f1", "f2"}) {
    if (!taken.contains(std::string(g)) && chance(rng, 0.3)) out += fmt::format("int {} = 0;\n", g);
  }
  for (std::size_t i = 0; i < names.size(); ++i) {
    const std::string& name = names[i];
    out += fmt::format("/* {} */\nint {}(int a) {{\n", name, name);
    out += fmt::format("  const char *s = \"{}\";\n", name);
    if (i == 0 || names[i - 1] == "main") {
      out += "  return a;\n";
    } else {
      out += fmt::format("  return {}(a) + 1; // {}\n", names[i - 1], names[i - 1]);
    }
    out += "}\n\n";
  }
  return out;
}

std::vector<pipeline::GenerationRecord> random_records(std::mt19937& rng, std::size_t n) {
  static constexpr std::array<corpus::Suite, 5> suites = {corpus::Suite::basic, corpus::Suite::famous,
                                                          corpus::Suite::mirror, corpus::Suite::unique,
                                                          corpus::Suite::pathcrawler};
  static constexpr std::array<corpus::VariantKind, 4> variants = {
      corpus::VariantKind::baseline, corpus::VariantKind::buggy, corpus::VariantKind::anonymized,
      corpus::VariantKind::buggy_anonymized};
  static constexpr std::array<pipeline::PromptSet, 3> sets = {
      pipeline::PromptSet::baseline_set, pipeline::PromptSet::pathcrawler_set, pipeline::PromptSet::eva_set};
  std::vector<pipeline::GenerationRecord> records(n);
  for (std::size_t i = 0; i < n; ++i) {
    auto& r = records[i];
    r.job.program_id = fmt::format("p{}", i);
    r.job.suite = pick(rng, suites);
    r.job.variant = pick(rng, variants);
    r.job.set = pick(rng, sets);
    for (auto& c : r.counts.counts) c = chance(rng, 0.4) ? pick(rng, 6) : 0;
    if (chance(rng, 0.3)) r.validation.failures.push_back({pipeline::FailureKind::zero_annotations, "none", {}});
  }
  return records;
}

PropertyResult check_lexer_lossless(std::uint32_t seed, std::size_t cases) {
  return run_property("lexer losslessness", seed, cases, [](std::mt19937& rng, PropertyResult& r) {
    std::string src = random_source(rng);
    auto ts = ctokens::lex(src);
    std::string joined;
    std::size_t line = 1, col = 1, offset = 0;
    for (const auto& t : ts) {
      if (t.span.begin != offset || t.span.end != offset + t.text.size()) {
        return record_failure(r, fmt::format("span gap at offset {}", offset), src);
      }
      if (t.span.line != line || t.span.col != col) {
        return record_failure(r, fmt::format("position {}:{} reported as {}:{}", line, col, t.span.line, t.span.col),
                              src);
      }
      for (char c : t.text) {
        if (c == '\n') {
          ++line;
          col = 1;
        } else {
          ++col;
        }
      }
      offset = t.span.end;
      joined += t.text;
    }
    if (joined != src) record_failure(r, "joined tokens differ from input", src);
  });
}

PropertyResult check_strip_idempotent(std::uint32_t seed, std::size_t cases) {
  return run_property("strip idempotence", seed, cases, [](std::mt19937& rng, PropertyResult& r) {
    std::string src = random_source(rng);
    std::string once = acsl::strip_annotations(src);
    if (acsl::strip_annotations(once) != once) return record_failure(r, "strip(strip(x)) != strip(x)", src);
    if (!ctokens::code_token_equivalent(src, once).equal) record_failure(r, "strip changed code tokens", src);
  });
}

PropertyResult check_strip_leaves_no_annotations(std::uint32_t seed, std::size_t cases) {
  return run_property("count after strip", seed, cases, [](std::mt19937& rng, PropertyResult& r) {
    std::string src = random_source(rng);
    auto stripped = acsl::strip_annotations(src);
    if (acsl::count(stripped).total() != 0) return record_failure(r, "count(strip(x)) != 0", src);
    for (const auto& t : ctokens::lex(stripped)) {
      if (t.is_acsl()) return record_failure(r, "ACSL token left after strip", src);
    }
  });
}

PropertyResult check_anonymize(std::uint32_t seed, std::size_t cases) {
  return run_property("anonymize", seed, cases, [](std::mt19937& rng, PropertyResult& r) {
    std::string src = random_program(rng);
    auto once = corpus::anonymize(src);
    if (corpus::anonymize(once.source).source != once.source) {
      return record_failure(r, "anonymize is not idempotent", src);
    }
    std::map<std::string, std::string> renames(once.rename_map.begin(), once.rename_map.end());
    for (const auto& [from, to] : renames) {
      if (from == "main" || !is_placeholder(to)) return record_failure(r, fmt::format("bad rename {} -> {}", from, to), src);
    }
    auto a = ctokens::lex(src);
    auto b = ctokens::lex(once.source);
    if (a.size() != b.size()) return record_failure(r, "token count changed", src);
    for (std::size_t i = 0; i < a.size(); ++i) {
      if (a[i].cls != b[i].cls) return record_failure(r, "token class changed", src);
      if (a[i].text == b[i].text) continue;
      bool renamed = a[i].is_code() && ctokens::is_identifier(a[i].text) && renames.contains(std::string(a[i].text)) &&
                     renames.at(std::string(a[i].text)) == b[i].text;
      if (!renamed) {
        return record_failure(r, fmt::format("token {} changed: '{}' -> '{}'", i, a[i].text, b[i].text), src);
      }
    }
  });
}

PropertyResult check_aggregate_additive(std::uint32_t seed, std::size_t cases) {
  return run_property("aggregate additivity", seed, cases, [](std::mt19937& rng, PropertyResult& r) {
    auto records = random_records(rng, pick(rng, 40));
    std::vector<report::GroupKey> keys = {report::GroupKey::set, report::GroupKey::suite, report::GroupKey::variant};
    std::shuffle(keys.begin(), keys.end(), rng);
    keys.resize(1 + pick(rng, 3));
    auto filter = chance(rng, 0.5) ? report::RecordFilter::all : report::RecordFilter::valid_only;

    std::vector<pipeline::GenerationRecord> left, right;
    for (auto& rec : records) (chance(rng, 0.5) ? left : right).push_back(rec);

    using Key = std::vector<std::string>;
    std::map<Key, std::pair<std::size_t, acsl::CountRow>> expected;
    for (const auto* part : {&left, &right}) {
      for (const auto& row : report::aggregate_counts(*part, keys, filter).rows) {
        auto& e = expected[row.key];
        e.first += row.records;
        e.second += row.sums;
      }
    }
    auto whole = report::aggregate_counts(records, keys, filter);
    std::size_t seen = 0;
    for (const auto& row : whole.rows) {
      auto it = expected.find(row.key);
      if (it == expected.end() || it->second.first != row.records || !(it->second.second == row.sums)) {
        return record_failure(r, fmt::format("group {} is not the sum of its parts", fmt::join(row.key, "/")), "");
      }
      ++seen;
    }
    if (seen != expected.size()) record_failure(r, "group sets differ", "");
  });
}

std::vector<PropertyResult> run_all_properties(std::uint32_t seed, std::size_t cases) {
  return {
      check_lexer_lossless(seed, cases),
      check_strip_idempotent(seed + 1, cases),
      check_strip_leaves_no_annotations(seed + 2, cases),
      check_anonymize(seed + 3, cases),
      check_aggregate_additive(seed + 4, cases),
  };
}

}  // namespace specforge::testing
