#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "specforge/symbolic.hpp"

namespace specforge::prompt {

enum class TemplateId { baseline, pathcrawler, eva, legacy_baseline, legacy_pathcrawler, legacy_eva };

std::string_view to_string(TemplateId id);
std::optional<TemplateId> parse_template_id(std::string_view s);

// Context kind a template expects, and the placeholders its body must hold.
symbolic::ContextKind required_context(TemplateId id);
std::vector<std::string> required_placeholders(TemplateId id);

struct PromptTemplate {
  TemplateId id = TemplateId::baseline;
  std::string body;
};

// Looks templates up as `<dir>/<id>.txt`.
class TemplateStore {
 public:
  explicit TemplateStore(std::filesystem::path dir = default_dir());

  // Throws Error{TemplateMissing, UnresolvedPlaceholder}.
  PromptTemplate load(TemplateId id) const;
  const std::filesystem::path& dir() const { return dir_; }

  // $SPECFORGE_TEMPLATE_DIR, else the templates shipped with the build.
  static std::filesystem::path default_dir();

 private:
  std::filesystem::path dir_;
};

// Checks that the body holds exactly the placeholders its id requires.
void validate_template(const PromptTemplate& t);

enum class IntentMode { off, implementation, intent };

std::string_view to_string(IntentMode m);
std::optional<IntentMode> parse_intent_mode(std::string_view s);

struct IntentDirective {
  IntentMode mode = IntentMode::off;
  std::string directive_text;

  static IntentDirective off();
  static IntentDirective for_mode(IntentMode m);
};

std::string_view default_directive_text(IntentMode m);

// Substitutes the program and context into the template in a single pass
// and, when the directive is on, appends it as the next numbered goal.
// Throws Error{ContextMismatch, UnresolvedPlaceholder}.
std::string render(const PromptTemplate& t, std::string_view program, const symbolic::SymbolicContext& context,
                   const IntentDirective& directive = {});

// Inserts `text` as an extra numbered line after the list under "GOALS:".
std::string append_goal(std::string_view prompt, std::string_view text);

struct ModelParams {
  std::string model;
  double temperature = 0.7;
};

// Hex SHA-256 of model, NUL, shortest-decimal temperature, NUL, prompt.
std::string digest(std::string_view prompt, const ModelParams& params);
std::string sha256_hex(std::string_view bytes);

}  // namespace specforge::prompt
