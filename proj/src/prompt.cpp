#include "specforge/prompt.hpp"

#include <cstdlib>
#include <regex>
#include <set>

#include <openssl/evp.h>

#include <fmt/format.h>

#include "specforge/error.hpp"
#include "specforge/util.hpp"

namespace fs = std::filesystem;

namespace specforge::prompt {

namespace {

constexpr TemplateId kAllTemplates[] = {TemplateId::baseline,        TemplateId::pathcrawler,
                                        TemplateId::eva,             TemplateId::legacy_baseline,
                                        TemplateId::legacy_pathcrawler, TemplateId::legacy_eva};

bool is_legacy(TemplateId id) {
  return id == TemplateId::legacy_baseline || id == TemplateId::legacy_pathcrawler ||
         id == TemplateId::legacy_eva;
}

std::string program_placeholder(TemplateId id) { return is_legacy(id) ? "{program}" : "{program_str}"; }

std::optional<std::string> context_placeholder(TemplateId id) {
  switch (id) {
    case TemplateId::pathcrawler: return "{pathcrawler_str}";
    case TemplateId::eva: return "{eva_str}";
    case TemplateId::legacy_pathcrawler: return "{csv}";
    case TemplateId::legacy_eva: return "{eva}";
    default: return std::nullopt;
  }
}

}  // namespace

std::string_view to_string(TemplateId id) {
  switch (id) {
    case TemplateId::baseline: return "baseline";
    case TemplateId::pathcrawler: return "pathcrawler";
    case TemplateId::eva: return "eva";
    case TemplateId::legacy_baseline: return "legacy_baseline";
    case TemplateId::legacy_pathcrawler: return "legacy_pathcrawler";
    case TemplateId::legacy_eva: return "legacy_eva";
  }
  return "baseline";
}

std::optional<TemplateId> parse_template_id(std::string_view s) {
  for (auto id : kAllTemplates) {
    if (to_string(id) == s) return id;
  }
  return std::nullopt;
}

symbolic::ContextKind required_context(TemplateId id) {
  switch (id) {
    case TemplateId::pathcrawler:
    case TemplateId::legacy_pathcrawler: return symbolic::ContextKind::pathcrawler;
    case TemplateId::eva:
    case TemplateId::legacy_eva: return symbolic::ContextKind::eva;
    default: return symbolic::ContextKind::none;
  }
}

std::vector<std::string> required_placeholders(TemplateId id) {
  std::vector<std::string> out{program_placeholder(id)};
  if (auto c = context_placeholder(id)) out.push_back(*c);
  return out;
}

TemplateStore::TemplateStore(fs::path dir) : dir_(std::move(dir)) {}

fs::path TemplateStore::default_dir() {
  if (const char* env = std::getenv("SPECFORGE_TEMPLATE_DIR"); env && *env) return env;
#ifdef SPECFORGE_DEFAULT_TEMPLATE_DIR
  return SPECFORGE_DEFAULT_TEMPLATE_DIR;
#else
  return "templates";
#endif
}

PromptTemplate TemplateStore::load(TemplateId id) const {
  fs::path path = dir_ / fmt::format("{}.txt", to_string(id));
  if (!fs::is_regular_file(path)) {
    throw Error(ErrorCode::TemplateMissing, "prompt template not found: " + path.string());
  }
  PromptTemplate t{id, util::read_file(path)};
  validate_template(t);
  return t;
}

void validate_template(const PromptTemplate& t) {
  static const std::regex kPlaceholder(R"(\{[A-Za-z_][A-Za-z0-9_]*\})");
  auto required = required_placeholders(t.id);
  std::set<std::string> wanted(required.begin(), required.end());
  std::set<std::string> found;
  for (auto it = std::sregex_iterator(t.body.begin(), t.body.end(), kPlaceholder); it != std::sregex_iterator();
       ++it) {
    std::string name = it->str();
    if (!wanted.contains(name)) {
      throw Error(ErrorCode::UnresolvedPlaceholder,
                  fmt::format("template '{}' has unknown placeholder {}", to_string(t.id), name));
    }
    found.insert(name);
  }
  for (const auto& w : wanted) {
    if (!found.contains(w)) {
      throw Error(ErrorCode::UnresolvedPlaceholder,
                  fmt::format("template '{}' lacks placeholder {}", to_string(t.id), w));
    }
  }
}

std::string_view to_string(IntentMode m) {
  switch (m) {
    case IntentMode::off: return "off";
    case IntentMode::implementation: return "implementation";
    case IntentMode::intent: return "intent";
  }
  return "off";
}

std::optional<IntentMode> parse_intent_mode(std::string_view s) {
  for (auto m : {IntentMode::off, IntentMode::implementation, IntentMode::intent}) {
    if (to_string(m) == s) return m;
  }
  return std::nullopt;
}

std::string_view default_directive_text(IntentMode m) {
  switch (m) {
    case IntentMode::off: return "";
    case IntentMode::implementation:
      return "The provided code may contain bugs. Generate annotations for the implemented behavior, even where "
             "it conflicts with the evident intent.";
    case IntentMode::intent:
      return "The provided code may contain bugs. If the implementation conflicts with the evident intent, "
             "generate annotations for the intended behavior, not the implemented behavior.";
  }
  return "";
}

IntentDirective IntentDirective::off() { return {}; }

IntentDirective IntentDirective::for_mode(IntentMode m) {
  return {m, std::string(default_directive_text(m))};
}

std::string append_goal(std::string_view prompt, std::string_view text) {
  static const std::regex kNumbered(R"(^(\d+)\. )");
  auto lines = util::split_lines(prompt);
  auto end_of = [&](std::size_t i) {
    return static_cast<std::size_t>(lines[i].data() - prompt.data()) + lines[i].size();
  };
  std::optional<std::size_t> goals;
  for (std::size_t i = 0; i < lines.size() && !goals; ++i) {
    if (util::trim(lines[i]) == "GOALS:") goals = i;
  }
  if (!goals) {
    std::string out(prompt);
    if (!out.empty() && out.back() != '\n') out += '\n';
    return out + fmt::format("1. {}\n", text);
  }
  std::size_t insert_at = end_of(*goals);
  long last_number = 0;
  for (std::size_t i = *goals + 1; i < lines.size(); ++i) {
    std::string line(lines[i]);
    std::smatch m;
    if (!std::regex_search(line, m, kNumbered)) break;
    last_number = std::stol(m[1].str());
    insert_at = end_of(i);
  }
  std::string out(prompt.substr(0, insert_at));
  out += fmt::format("\n{}. {}", last_number + 1, text);
  out += prompt.substr(insert_at);
  return out;
}

std::string render(const PromptTemplate& t, std::string_view program, const symbolic::SymbolicContext& context,
                   const IntentDirective& directive) {
  if (context.kind != required_context(t.id)) {
    throw Error(ErrorCode::ContextMismatch,
                fmt::format("template '{}' needs context '{}', got '{}'", to_string(t.id),
                            symbolic::to_string(required_context(t.id)), symbolic::to_string(context.kind)));
  }
  validate_template(t);
  std::string program_ph = program_placeholder(t.id);
  auto context_ph = context_placeholder(t.id);

  std::string out;
  out.reserve(t.body.size() + program.size() + context.rendered_text.size());
  std::size_t i = 0;
  while (i < t.body.size()) {
    auto brace = t.body.find('{', i);
    if (brace == std::string::npos) {
      out.append(t.body, i, std::string::npos);
      break;
    }
    out.append(t.body, i, brace - i);
    std::string_view rest = std::string_view(t.body).substr(brace);
    if (rest.starts_with(program_ph)) {
      out += program;
      i = brace + program_ph.size();
    } else if (context_ph && rest.starts_with(*context_ph)) {
      out += context.rendered_text;
      i = brace + context_ph->size();
    } else {
      out += '{';
      i = brace + 1;
    }
  }
  if (directive.mode != IntentMode::off && !directive.directive_text.empty()) {
    out = append_goal(out, directive.directive_text);
  }
  return out;
}

std::string sha256_hex(std::string_view bytes) {
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), md, &len, EVP_sha256(), nullptr) != 1) {
    throw std::runtime_error("SHA-256 failed");
  }
  std::string hex;
  hex.reserve(len * 2);
  for (unsigned int i = 0; i < len; ++i) hex += fmt::format("{:02x}", md[i]);
  return hex;
}

std::string digest(std::string_view prompt, const ModelParams& params) {
  std::string material = params.model;
  material += '\0';
  material += util::shortest_decimal(params.temperature);
  material += '\0';
  material += prompt;
  return sha256_hex(material);
}

}  // namespace specforge::prompt
