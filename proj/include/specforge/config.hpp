#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "specforge/llm.hpp"
#include "specforge/pipeline.hpp"
#include "specforge/symbolic.hpp"

namespace specforge::config {

// Settings for one project. Relative paths in the file are resolved against
// the directory holding it.
struct Config {
  std::filesystem::path base_dir;
  std::filesystem::path corpus;
  std::filesystem::path store;
  std::filesystem::path symbolic_dir;
  std::filesystem::path template_dir;
  std::vector<pipeline::PromptSet> sets = {pipeline::PromptSet::baseline_set};
  std::size_t samples = 3;
  std::vector<prompt::IntentMode> intent_modes = {prompt::IntentMode::off};
  std::map<prompt::IntentMode, std::string> directive_texts;
  symbolic::RaggedPolicy ragged_policy = symbolic::RaggedPolicy::reject;
  bool skip_missing_artifacts = false;
  prompt::ModelParams model{"deepseek-reasoner", 0.7};
  llm::ClientConfig client;
  std::map<symbolic::Tool, symbolic::ToolConfig> tools;
  std::vector<std::string> bug_patterns;

  pipeline::PlanOptions plan_options() const;
};

// Throws Error{Config}. $SPECFORGE_CACHE_DIR, when set, replaces the cache
// directory from the file.
Config load_config(const std::filesystem::path& path);
Config parse_config(std::string_view json_text, const std::filesystem::path& base_dir);

}  // namespace specforge::config
