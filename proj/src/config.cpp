#include "specforge/config.hpp"

#include <cstdlib>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "specforge/error.hpp"
#include "specforge/report.hpp"
#include "specforge/util.hpp"

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace specforge::config {

namespace {

[[noreturn]] void bad(const std::string& what) { throw Error(ErrorCode::Config, "config: " + what); }

template <typename T>
T get(const json& obj, const char* key, T fallback) {
  auto it = obj.find(key);
  if (it == obj.end() || it->is_null()) return fallback;
  try {
    return it->get<T>();
  } catch (const json::exception&) {
    bad(fmt::format("'{}' has the wrong type", key));
  }
}

fs::path resolve(const fs::path& base, const std::string& p) {
  if (p.empty()) return {};
  fs::path path(p);
  return path.is_absolute() ? path : base / path;
}

symbolic::ToolConfig parse_tool(const json& j, const fs::path& base) {
  if (!j.is_object()) bad("tool entries must be objects");
  symbolic::ToolConfig t;
  t.binary = get<std::string>(j, "binary", "");
  t.flags = get<std::vector<std::string>>(j, "flags", {});
  t.timeout_s = get<double>(j, "timeout_s", 300);
  if (auto replay = get<std::string>(j, "replay_dir", ""); !replay.empty()) t.replay_dir = resolve(base, replay);
  return t;
}

}  // namespace

pipeline::PlanOptions Config::plan_options() const {
  pipeline::PlanOptions o;
  o.sets = sets;
  o.intent_modes = intent_modes;
  o.directive_texts = directive_texts;
  o.samples = samples;
  o.symbolic_dir = symbolic_dir;
  o.template_dir = template_dir;
  o.model = model;
  o.ragged_policy = ragged_policy;
  o.skip_missing_artifacts = skip_missing_artifacts;
  return o;
}

Config load_config(const fs::path& path) {
  if (!fs::is_regular_file(path)) bad("file not found: " + path.string());
  fs::path base = fs::absolute(path).parent_path();
  return parse_config(util::read_file(path), base);
}

Config parse_config(std::string_view json_text, const fs::path& base_dir) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::parse_error& e) {
    bad(e.what());
  }
  if (!doc.is_object()) bad("top level must be an object");

  Config c;
  c.base_dir = base_dir;
  c.corpus = resolve(base_dir, get<std::string>(doc, "corpus", "corpus.json"));
  c.store = resolve(base_dir, get<std::string>(doc, "store", "records.jsonl"));
  c.symbolic_dir = resolve(base_dir, get<std::string>(doc, "symbolic_dir", "symbolic"));
  std::string templates = get<std::string>(doc, "template_dir", "");
  c.template_dir = templates.empty() ? prompt::TemplateStore::default_dir() : resolve(base_dir, templates);

  if (doc.contains("sets")) {
    c.sets.clear();
    for (const auto& s : get<std::vector<std::string>>(doc, "sets", {})) {
      auto set = pipeline::parse_prompt_set(s);
      if (!set) bad("unknown prompt set '" + s + "'");
      c.sets.push_back(*set);
    }
  }
  long long samples = get<long long>(doc, "samples", 3);
  if (samples < 1) bad("'samples' must be at least 1");
  c.samples = static_cast<std::size_t>(samples);
  if (doc.contains("intent_modes")) {
    c.intent_modes.clear();
    for (const auto& s : get<std::vector<std::string>>(doc, "intent_modes", {})) {
      auto m = prompt::parse_intent_mode(s);
      if (!m) bad("unknown intent mode '" + s + "'");
      c.intent_modes.push_back(*m);
    }
  }
  for (const auto& [name, text] : get<std::map<std::string, std::string>>(doc, "intent_directives", {})) {
    auto m = prompt::parse_intent_mode(name);
    if (!m || *m == prompt::IntentMode::off) bad("intent_directives key '" + name + "' is not a directive mode");
    c.directive_texts[*m] = text;
  }
  std::string ragged = get<std::string>(doc, "ragged_policy", "reject");
  if (ragged == "reject") c.ragged_policy = symbolic::RaggedPolicy::reject;
  else if (ragged == "pad") c.ragged_policy = symbolic::RaggedPolicy::pad;
  else bad("ragged_policy must be 'reject' or 'pad'");
  c.skip_missing_artifacts = get<bool>(doc, "skip_missing_artifacts", false);

  json client = doc.contains("client") ? doc["client"] : json::object();
  if (!client.is_object()) bad("'client' must be an object");
  c.model.model = get<std::string>(client, "model", c.model.model);
  c.model.temperature = get<double>(client, "temperature", 0.7);
  if (c.model.temperature < 0 || c.model.temperature > 2) bad("temperature must lie in [0, 2]");
  c.client.base_url = get<std::string>(client, "base_url", c.client.base_url);
  std::string mode = get<std::string>(client, "mode", "replay_strict");
  auto parsed_mode = llm::parse_client_mode(mode);
  if (!parsed_mode) bad("unknown client mode '" + mode + "'");
  c.client.mode = *parsed_mode;
  c.client.cache_dir = resolve(base_dir, get<std::string>(client, "cache_dir", get<std::string>(doc, "cache_dir", "cache")));
  c.client.max_in_flight = get<int>(client, "max_in_flight", 4);
  if (c.client.max_in_flight < 1) bad("max_in_flight must be at least 1");
  c.client.request_timeout_s = get<double>(client, "timeout_s", 600);
  c.client.api_key_env = get<std::string>(client, "api_key_env", c.client.api_key_env);
  json retry = client.contains("retry") ? client["retry"] : json::object();
  c.client.retry.max_attempts = get<int>(retry, "max_attempts", c.client.retry.max_attempts);
  c.client.retry.base_delay_ms = get<int>(retry, "base_delay_ms", c.client.retry.base_delay_ms);
  if (const char* env = std::getenv("SPECFORGE_CACHE_DIR"); env && *env) c.client.cache_dir = env;

  if (doc.contains("tools")) {
    const auto& tools = doc["tools"];
    if (!tools.is_object()) bad("'tools' must be an object");
    if (tools.contains("eva")) c.tools[symbolic::Tool::eva] = parse_tool(tools["eva"], base_dir);
    if (tools.contains("pathcrawler")) c.tools[symbolic::Tool::pathcrawler] = parse_tool(tools["pathcrawler"], base_dir);
  }
  c.bug_patterns = get<std::vector<std::string>>(doc, "bug_patterns", report::default_bug_patterns());
  if (c.bug_patterns.empty()) bad("bug_patterns must not be empty");
  return c;
}

}  // namespace specforge::config
