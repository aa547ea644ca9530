#include "ontoforge/config.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <sstream>
#include <string>

#include "ontoforge/error.hpp"
#include "ontoforge/fsio.hpp"

namespace ontoforge {
namespace {

namespace pt = boost::property_tree;

template <typename T>
T as(const pt::ptree& node, const std::string& where) {
  try {
    return node.get_value<T>();
  } catch (const pt::ptree_bad_data&) {
    throw Error(ErrorKind::input_format, "config value for " + where + " has the wrong type");
  }
}

void apply_backend(const pt::ptree& section, BackendConfig& b) {
  for (const auto& [key, node] : section) {
    const std::string where = "[backend] " + key;
    if (key == "kind") {
      const auto kind = parse_backend_kind(node.data());
      if (!kind) throw Error(ErrorKind::input_format, where + ": expected http, replay or scripted");
      b.kind = *kind;
    } else if (key == "endpoint_url") {
      b.endpoint_url = node.data();
    } else if (key == "api_key_env_var") {
      b.api_key_env_var = node.data();
    } else if (key == "api_key") {
      throw Error(ErrorKind::input_format, "API keys are read from the environment only; set api_key_env_var");
    } else if (key == "model_name") {
      b.model_name = node.data();
    } else if (key == "fixture_dir") {
      b.fixture_dir = node.data();
    } else if (key == "script") {
      b.script_path = node.data();
    } else if (key == "max_retries") {
      b.max_retries = as<unsigned>(node, where);
    } else if (key == "request_timeout") {
      b.request_timeout = std::chrono::duration<double>(as<double>(node, where));
    } else if (key == "max_parallel") {
      b.max_parallel = as<unsigned>(node, where);
    } else if (key == "temperature") {
      b.temperature = as<double>(node, where);
    } else {
      throw Error(ErrorKind::input_format, "unknown config key " + where);
    }
  }
}

}  // namespace

AppConfig parse_config(std::string_view ini_text, AppConfig cfg) {
  pt::ptree tree;
  std::istringstream in{std::string(ini_text)};
  try {
    pt::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw Error(ErrorKind::input_format, std::string("config: ") + e.what());
  }
  for (const auto& [section, node] : tree) {
    if (section == "backend") {
      apply_backend(node, cfg.backend);
    } else if (section == "prompts") {
      for (const auto& [key, value] : node) {
        const std::string where = "[prompts] " + key;
        if (key == "budget") {
          cfg.budget = as<std::size_t>(value, where);
        } else if (key == "max_triples") {
          cfg.max_triples = as<std::size_t>(value, where);
        } else if (key == "templates") {
          cfg.templates_dir = value.data();
        } else {
          throw Error(ErrorKind::input_format, "unknown config key " + where);
        }
      }
    } else if (section == "validate") {
      for (const auto& [key, value] : node) {
        if (key != "threshold") throw Error(ErrorKind::input_format, "unknown config key [validate] " + key);
        cfg.threshold = as<double>(value, "[validate] threshold");
        if (cfg.threshold < 0.0 || cfg.threshold > 1.0) {
          throw Error(ErrorKind::input_format, "[validate] threshold must lie in [0, 1]");
        }
      }
    } else {
      throw Error(ErrorKind::input_format, "unknown config section [" + section + "]");
    }
  }
  return cfg;
}

AppConfig load_config(const std::filesystem::path& path, AppConfig base) {
  return parse_config(fsio::read_file(path), std::move(base));
}

}  // namespace ontoforge
