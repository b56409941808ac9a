#pragma once

#include <string>

#include <nlohmann/json.hpp>

namespace qp2loc {

// Strict TOML-subset parser: comments, bare keys, [table] / [a.b] headers,
// strings, integers, floats, booleans, and flat arrays. Re-defined keys and
// anything outside the subset are hard errors.
nlohmann::json parse_toml(const std::string& text);

// Loads a config file; .json (or a leading '{') selects JSON, else TOML.
nlohmann::json load_config(const std::string& path);

struct ConfigError : std::runtime_error {
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

// Rejects keys of `obj` missing from `allowed` (strict schemas).
void reject_unknown_keys(const nlohmann::json& obj, const std::vector<std::string>& allowed,
                         const std::string& where);

}  // namespace qp2loc
