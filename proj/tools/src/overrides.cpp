#include "acdc/app/app.hpp"

#include "acdc/core/errors.hpp"

#include <json.hpp>

#include <fstream>
#include <sstream>

namespace acdc::app {

using nlohmann::json;

namespace {

json parse_document(const std::string& text) {
  json doc = json::parse(text, nullptr, false);
  if (doc.is_discarded()) {
    parse_config(text);  // throws with line and column
    throw ConfigError("malformed JSON");
  }
  if (!doc.is_object()) throw ConfigError("config root must be an object");
  return doc;
}

void set_path(json& doc, const std::string& path, json value) {
  if (path.empty()) throw ConfigError("override: empty key");
  json* node = &doc;
  std::size_t start = 0;
  while (true) {
    const std::size_t dot = path.find('.', start);
    const std::string key = path.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
    if (key.empty()) throw ConfigError("override: empty path component in '" + path + "'");
    if (!node->is_object()) throw ConfigError("override: '" + path + "' walks through a non-object");
    if (dot == std::string::npos) {
      (*node)[key] = std::move(value);
      return;
    }
    node = &(*node)[key];
    if (node->is_null()) *node = json::object();
    start = dot + 1;
  }
}

}  // namespace

std::string apply_overrides(const std::string& json_text, const std::vector<std::string>& overrides) {
  json doc = parse_document(json_text);
  for (const auto& item : overrides) {
    const std::size_t eq = item.find('=');
    if (eq == std::string::npos) throw ConfigError("override '" + item + "' is not of the form key=value");
    const std::string raw = item.substr(eq + 1);
    json value = json::parse(raw, nullptr, false);
    if (value.is_discarded()) value = raw;
    set_path(doc, item.substr(0, eq), std::move(value));
  }
  return doc.dump(2);
}

ExperimentConfig load_config(const CommonOptions& options) {
  std::ifstream in(options.config);
  if (!in) throw ConfigError("cannot read config file '" + options.config.string() + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  const std::string text = buf.str();

  std::vector<std::string> all = options.overrides;
  if (options.seed) all.push_back("seed=" + std::to_string(*options.seed));
  if (options.out) all.push_back("output.dir=" + json(options.out->string()).dump());
  if (all.empty()) return parse_config(text);
  return parse_config(apply_overrides(text, all));
}

}  // namespace acdc::app
