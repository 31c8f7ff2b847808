#include "memcurse/cli/cli.hpp"

#include <charconv>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <set>

#include <CLI11.hpp>

#include "internal.hpp"
#include "memcurse/util/hash.hpp"

namespace memcurse::cli {

namespace {

using nlohmann::json;

inline constexpr int kSchemaVersion = 1;
inline constexpr int kExitError = 1;

std::string dashed(std::string key) {
  for (char& c : key)
    if (c == '_') c = '-';
  return key;
}

std::uint64_t parse_seed(const std::string& s, const std::string& origin) {
  std::uint64_t v = 0;
  const auto [end, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || ec != std::errc() || end != s.data() + s.size())
    throw UsageError(origin + ": seed must be a non-negative integer, got '" + s + "'");
  return v;
}

/// Converts a flag string to the JSON type of the documented default.
json convert_flag(const std::string& key, const std::string& text, const json& def) {
  if (def.is_boolean()) {
    if (text == "true" || text == "1" || text == "yes") return true;
    if (text == "false" || text == "0" || text == "no") return false;
    throw UsageError("--" + dashed(key) + " expects true or false");
  }
  if (def.is_number_unsigned()) return parse_seed(text, "--" + dashed(key));
  if (def.is_number_integer()) {
    long long v = 0;
    const auto [end, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (text.empty() || ec != std::errc() || end != text.data() + text.size())
      throw UsageError("--" + dashed(key) + " expects an integer, got '" + text + "'");
    return v;
  }
  if (def.is_number()) {
    if (text.find_first_of(",:") != std::string::npos)
      throw UsageError("--" + dashed(key) + " expects a single number");
    try {
      return parse_grid(text).at(0);
    } catch (const UsageError& e) {
      throw UsageError("--" + dashed(key) + ": " + e.what());
    }
  }
  return text;
}

/// Checks a config-file value against the documented default's type.
json convert_file_value(const std::string& key, const json& v, const json& def) {
  const std::string where = "config key '" + key + "'";
  if (def.is_boolean()) {
    if (!v.is_boolean()) throw UsageError(where + " must be a boolean");
    return v;
  }
  if (def.is_number_unsigned()) {
    if (v.is_number_unsigned()) return v;
    if (v.is_number_integer() && v.get<long long>() >= 0) return v.get<std::uint64_t>();
    throw UsageError(where + " must be a non-negative integer");
  }
  if (def.is_number_integer()) {
    if (v.is_number_integer()) return v;
    if (v.is_number_float() && v.get<double>() == std::floor(v.get<double>())) return v.get<long long>();
    throw UsageError(where + " must be an integer");
  }
  if (def.is_number()) {
    if (v.is_number()) return v.get<double>();
    if (v.is_string()) return convert_flag(key, v.get<std::string>(), def);
    throw UsageError(where + " must be a number");
  }
  if (v.is_string()) return v;
  if (v.is_array()) {
    std::string joined;
    for (const auto& e : v) {
      if (!e.is_number() && !e.is_string()) throw UsageError(where + " entries must be numbers or strings");
      joined += (joined.empty() ? "" : ",") + (e.is_number() ? format_number(e.get<double>()) : e.get<std::string>());
    }
    return joined;
  }
  throw UsageError(where + " must be a string or a list");
}

json read_json_file(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw UsageError("cannot open " + path);
  try {
    return json::parse(f);
  } catch (const json::exception& e) {
    throw UsageError(path + ": " + e.what());
  }
}

const Command& find_command(const std::string& name) {
  for (const auto& c : commands())
    if (c.name == name) return c;
  throw UsageError("unknown command '" + name + "'");
}

std::uint64_t default_seed() {
  const char* env = std::getenv("MEMCURSE_SEED");
  return env ? parse_seed(env, "MEMCURSE_SEED") : 0;
}

struct Invocation {
  const Command* command = nullptr;
  json config;
  std::optional<json> manifest;  ///< set on replay
};

/// defaults <- config file <- flags.
json resolve_config(const Command& cmd, const std::optional<json>& file,
                    const std::map<std::string, std::string>& flags, const std::optional<std::string>& seed_flag) {
  std::string selector_value;
  if (!cmd.selector.empty()) {
    selector_value = cmd.selector_values.front();
    if (file && file->contains(cmd.selector)) selector_value = file->at(cmd.selector).get<std::string>();
    if (auto it = flags.find(cmd.selector); it != flags.end()) selector_value = it->second;
    if (std::find(cmd.selector_values.begin(), cmd.selector_values.end(), selector_value) ==
        cmd.selector_values.end())
      throw UsageError(cmd.selector + " must be one of the documented values, got '" + selector_value + "'");
  }
  json config = cmd.defaults(selector_value);
  config["seed"] = default_seed();
  if (file) {
    if (!file->is_object()) throw UsageError("config file must hold a JSON object");
    for (const auto& [key, value] : file->items()) {
      if (!config.contains(key)) throw UsageError("unknown config key '" + key + "' for " + cmd.name);
      config[key] = convert_file_value(key, value, config[key]);
    }
  }
  for (const auto& [key, text] : flags) {
    if (!config.contains(key))
      throw UsageError("--" + dashed(key) + " does not apply to this " + (cmd.selector.empty() ? "command" : cmd.selector));
    config[key] = convert_flag(key, text, config[key]);
  }
  if (seed_flag) config["seed"] = parse_seed(*seed_flag, "--seed");
  return config;
}

int execute(const Invocation& inv, const std::filesystem::path& out_dir, unsigned jobs) {
  OutputSet out(out_dir);
  Context ctx;
  ctx.config = inv.config;
  ctx.jobs = jobs;
  ctx.out = &out;
  int code = kExitOk;
  try {
    inv.command->run(ctx);
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    code = kExitUsage;
  } catch (const DomainError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    code = kExitUsage;
  } catch (const DimensionError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    code = kExitUsage;
  } catch (const OverflowError& e) {
    std::cerr << "divergence: " << e.what();
    for (const auto& l : e.labels()) std::cerr << " " << l;
    std::cerr << "\n";
    code = kExitDivergence;
  } catch (const SweepFailureError& e) {
    std::cerr << "divergence: " << e.what() << "\n";
    code = kExitDivergence;
  } catch (const DivergenceError& e) {
    std::cerr << "divergence: " << e.what() << "\n";
    code = kExitDivergence;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    code = kExitError;
  }
  if (code != kExitOk) {
    out.remove_all();
    return code;
  }

  json manifest = {{"schema_version", kSchemaVersion},
                   {"tool", "memcurse"},
                   {"command", inv.command->name},
                   {"config", ctx.config},
                   {"config_hash", "fnv1a64:" + util::hex64(util::fnv1a64(ctx.config.dump()))},
                   {"seeds", ctx.seeds.empty() ? std::vector<std::uint64_t>{ctx.config.at("seed").get<std::uint64_t>()}
                                               : ctx.seeds},
                   {"jobs", jobs},
                   {"status", ctx.diverged ? "diverged" : ctx.validation_failed ? "validation_failed" : "ok"},
                   {"outputs", out.hashes()}};
  try {
    out.write("manifest.json", manifest.dump(2) + "\n");
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    out.remove_all();
    return kExitError;
  }
  for (const auto& [name, hash] : manifest["outputs"].items()) std::cout << (out_dir / name).string() << " " << hash.get<std::string>() << "\n";

  if (inv.manifest) {
    const json& expected = inv.manifest->at("outputs");
    bool same = expected.size() == manifest["outputs"].size();
    for (const auto& [name, hash] : expected.items()) {
      const auto it = manifest["outputs"].find(name);
      if (it == manifest["outputs"].end() || *it != hash) {
        std::cerr << "replay mismatch: " << name << "\n";
        same = false;
      }
    }
    if (!same) return kExitValidation;
  }
  if (ctx.diverged) return kExitDivergence;
  if (ctx.validation_failed) return kExitValidation;
  return kExitOk;
}

}  // namespace

int run(int argc, char** argv) {
  std::vector<std::string> args;
  for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
  return run(args);
}

int run(const std::vector<std::string>& args) {
  CLI::App app{"Linear recurrent network analytics and experiments", "memcurse"};
  app.require_subcommand(0, 1);
  std::string config_path, manifest_path, out_dir = "memcurse_out", seed_text;
  unsigned jobs = 1;
  app.add_option("--config", config_path, "JSON config file; flags override its values");
  app.add_option("--manifest", manifest_path, "replay the run recorded in a manifest");
  app.add_option("--out", out_dir, "output directory")->capture_default_str();
  app.add_option("--seed", seed_text, "root seed (default: MEMCURSE_SEED or 0)");
  app.add_option("--jobs", jobs, "worker threads; outputs do not depend on it")
      ->capture_default_str()->check(CLI::PositiveNumber);

  // Flag storage per command; std::map keeps references stable.
  std::map<std::string, std::map<std::string, std::string>> values;
  std::map<std::string, std::vector<std::pair<std::string, CLI::Option*>>> options;
  for (const auto& cmd : commands()) {
    CLI::App* sub = app.add_subcommand(cmd.name, cmd.help);
    sub->fallthrough();
    std::set<std::string> keys;
    std::vector<std::string> selectors = cmd.selector_values;
    if (selectors.empty()) selectors.emplace_back();
    for (const auto& s : selectors) {
      const json defaults = cmd.defaults(s);
      for (const auto& [key, def] : defaults.items()) {
        if (!keys.insert(key).second) continue;
        const std::string help = "default: " + (def.is_string() ? def.get<std::string>() : def.dump());
        options[cmd.name].emplace_back(key, sub->add_option("--" + dashed(key), values[cmd.name][key], help));
      }
    }
  }

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    app.exit(e);
    return kExitOk;
  } catch (const CLI::CallForAllHelp& e) {
    app.exit(e);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    Invocation inv;
    const auto subs = app.get_subcommands();
    std::map<std::string, std::string> flags;
    if (!subs.empty())
      for (const auto& [key, opt] : options[subs[0]->get_name()])
        if (opt->count()) flags[key] = values[subs[0]->get_name()][key];

    if (!manifest_path.empty()) {
      json m = read_json_file(manifest_path);
      if (!m.is_object() || m.value("schema_version", 0) != kSchemaVersion)
        throw UsageError("unsupported manifest schema in " + manifest_path);
      inv.command = &find_command(m.at("command").get<std::string>());
      if (!subs.empty() && subs[0]->get_name() != inv.command->name)
        throw UsageError("manifest records command '" + inv.command->name + "'");
      if (!flags.empty() || !config_path.empty() || !seed_text.empty())
        throw UsageError("a manifest replay accepts only --out and --jobs");
      // Re-resolve so that the manifest's config is checked like a config file.
      inv.config = resolve_config(*inv.command, m.at("config"), {}, std::nullopt);
      if (inv.config != m.at("config")) throw UsageError("manifest config does not match the current schema");
      inv.manifest = std::move(m);
    } else {
      if (subs.empty()) {
        std::cerr << app.help();
        return kExitUsage;
      }
      inv.command = &find_command(subs[0]->get_name());
      std::optional<json> file;
      if (!config_path.empty()) file = read_json_file(config_path);
      inv.config = resolve_config(*inv.command, file, flags,
                                  seed_text.empty() ? std::nullopt : std::optional<std::string>(seed_text));
    }
    return execute(inv, out_dir, jobs);
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const json::exception& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return kExitUsage;
  }
}

}  // namespace memcurse::cli
