#include "qp2loc/config.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>

namespace qp2loc {

namespace {

std::string trim(const std::string& s) {
  std::size_t a = 0, b = s.size();
  while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
  while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
  return s.substr(a, b - a);
}

// Strips an unquoted '#' comment.
std::string strip_comment(const std::string& line) {
  bool in_str = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    if (line[i] == '"') in_str = !in_str;
    if (line[i] == '#' && !in_str) return line.substr(0, i);
  }
  return line;
}

nlohmann::json parse_scalar(const std::string& tok, int line_no) {
  if (tok.empty()) throw ConfigError("toml line " + std::to_string(line_no) + ": empty value");
  if (tok.front() == '"') {
    if (tok.size() < 2 || tok.back() != '"')
      throw ConfigError("toml line " + std::to_string(line_no) + ": unterminated string");
    return tok.substr(1, tok.size() - 2);
  }
  if (tok == "true") return true;
  if (tok == "false") return false;
  // integer?
  bool is_int = !tok.empty();
  for (std::size_t i = 0; i < tok.size(); ++i) {
    const char c = tok[i];
    if (i == 0 && (c == '+' || c == '-')) continue;
    if (!std::isdigit(static_cast<unsigned char>(c))) {
      is_int = false;
      break;
    }
  }
  try {
    if (is_int) return std::stoll(tok);
    std::size_t used = 0;
    const double d = std::stod(tok, &used);
    if (used != tok.size()) throw std::invalid_argument(tok);
    return d;
  } catch (const std::exception&) {
    throw ConfigError("toml line " + std::to_string(line_no) + ": cannot parse value '" + tok + "'");
  }
}

// Splits a [...] array body at top-level commas (nested arrays supported).
nlohmann::json parse_value(const std::string& tok, int line_no) {
  if (!tok.empty() && tok.front() == '[') {
    if (tok.back() != ']')
      throw ConfigError("toml line " + std::to_string(line_no) + ": unterminated array");
    nlohmann::json arr = nlohmann::json::array();
    const std::string body = tok.substr(1, tok.size() - 2);
    int depth = 0;
    bool in_str = false;
    std::string cur;
    auto flush = [&]() {
      const std::string t = trim(cur);
      if (!t.empty()) arr.push_back(parse_value(t, line_no));
      cur.clear();
    };
    for (char c : body) {
      if (c == '"') in_str = !in_str;
      if (!in_str) {
        if (c == '[') ++depth;
        if (c == ']') --depth;
        if (c == ',' && depth == 0) {
          flush();
          continue;
        }
      }
      cur += c;
    }
    flush();
    return arr;
  }
  return parse_scalar(tok, line_no);
}

std::vector<std::string> split_dotted(const std::string& key, int line_no) {
  std::vector<std::string> parts;
  std::stringstream ss(key);
  std::string part;
  while (std::getline(ss, part, '.')) {
    part = trim(part);
    if (part.empty())
      throw ConfigError("toml line " + std::to_string(line_no) + ": bad dotted key '" + key + "'");
    parts.push_back(part);
  }
  return parts;
}

}  // namespace

nlohmann::json parse_toml(const std::string& text) {
  nlohmann::json root = nlohmann::json::object();
  nlohmann::json* table = &root;

  std::stringstream ss(text);
  std::string raw;
  int line_no = 0;
  while (std::getline(ss, raw)) {
    ++line_no;
    std::string line = trim(strip_comment(raw));
    if (line.empty()) continue;

    if (line.front() == '[') {
      if (line.back() != ']')
        throw ConfigError("toml line " + std::to_string(line_no) + ": malformed table header");
      const std::string name = trim(line.substr(1, line.size() - 2));
      table = &root;
      for (const std::string& part : split_dotted(name, line_no)) {
        if (!table->contains(part)) (*table)[part] = nlohmann::json::object();
        table = &(*table)[part];
        if (!table->is_object())
          throw ConfigError("toml line " + std::to_string(line_no) + ": '" + part +
                            "' is not a table");
      }
      continue;
    }

    const std::size_t eq = [&] {
      bool in_str = false;
      for (std::size_t i = 0; i < line.size(); ++i) {
        if (line[i] == '"') in_str = !in_str;
        if (line[i] == '=' && !in_str) return i;
      }
      return std::string::npos;
    }();
    if (eq == std::string::npos)
      throw ConfigError("toml line " + std::to_string(line_no) + ": expected key = value");
    const std::string key = trim(line.substr(0, eq));
    const std::string val = trim(line.substr(eq + 1));
    if (key.empty()) throw ConfigError("toml line " + std::to_string(line_no) + ": empty key");

    nlohmann::json* slot = table;
    const auto parts = split_dotted(key, line_no);
    for (std::size_t i = 0; i + 1 < parts.size(); ++i) {
      if (!slot->contains(parts[i])) (*slot)[parts[i]] = nlohmann::json::object();
      slot = &(*slot)[parts[i]];
    }
    if (slot->contains(parts.back()))
      throw ConfigError("toml line " + std::to_string(line_no) + ": duplicate key '" + key + "'");
    (*slot)[parts.back()] = parse_value(val, line_no);
  }
  return root;
}

nlohmann::json load_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  const std::string text = buf.str();

  const bool json_ext = path.size() >= 5 && path.substr(path.size() - 5) == ".json";
  std::size_t first = text.find_first_not_of(" \t\r\n");
  const bool json_body = first != std::string::npos && text[first] == '{';
  if (json_ext || json_body) {
    try {
      return nlohmann::json::parse(text);
    } catch (const std::exception& e) {
      throw ConfigError(std::string("JSON parse error: ") + e.what());
    }
  }
  return parse_toml(text);
}

void reject_unknown_keys(const nlohmann::json& obj, const std::vector<std::string>& allowed,
                         const std::string& where) {
  if (!obj.is_object()) throw ConfigError(where + ": expected a table");
  for (const auto& [key, val] : obj.items()) {
    if (std::find(allowed.begin(), allowed.end(), key) == allowed.end())
      throw ConfigError(where + ": unknown key '" + key + "'");
  }
}

}  // namespace qp2loc
