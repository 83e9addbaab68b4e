#include "mulab/config.hpp"

#include <cctype>
#include <cstdlib>
#include <sstream>
#include <stdexcept>

#include "mulab/io.hpp"

namespace mulab {

namespace {

std::string trim(const std::string& s) {
  std::size_t b = 0;
  std::size_t e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return s.substr(b, e - b);
}

/// Strips a trailing comment that is not inside a quoted string.
std::string strip_comment(const std::string& line) {
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    if (line[i] == '"') quoted = !quoted;
    if (line[i] == '#' && !quoted) return line.substr(0, i);
  }
  return line;
}

ConfigDoc::Scalar parse_scalar(const std::string& raw, int line_no) {
  const std::string token = trim(raw);
  if (token.empty()) {
    throw std::runtime_error("config line " + std::to_string(line_no) +
                             ": empty value");
  }
  if (token.front() == '"') {
    if (token.size() < 2 || token.back() != '"') {
      throw std::runtime_error("config line " + std::to_string(line_no) +
                               ": unterminated string");
    }
    return token.substr(1, token.size() - 2);
  }
  if (token == "true") return true;
  if (token == "false") return false;

  char* end = nullptr;
  const double d = std::strtod(token.c_str(), &end);
  if (end == token.c_str() + token.size()) {
    const bool integral =
        token.find_first_of(".eE") == std::string::npos;
    if (integral) return static_cast<std::int64_t>(std::strtoll(token.c_str(), nullptr, 10));
    return d;
  }
  // Bare words read as strings, so method names don't need quotes.
  return token;
}

std::vector<std::string> split_top_level(const std::string& body) {
  std::vector<std::string> parts;
  std::string current;
  bool quoted = false;
  for (char c : body) {
    if (c == '"') quoted = !quoted;
    if (c == ',' && !quoted) {
      parts.push_back(current);
      current.clear();
    } else {
      current.push_back(c);
    }
  }
  if (!trim(current).empty()) parts.push_back(current);
  return parts;
}

}  // namespace

ConfigDoc ConfigDoc::parse(const std::string& text) {
  ConfigDoc doc;
  doc.source_ = text;
  std::istringstream in(text);
  std::string line;
  std::string section;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    line = trim(strip_comment(line));
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') {
        throw std::runtime_error("config line " + std::to_string(line_no) +
                                 ": malformed section header");
      }
      section = trim(line.substr(1, line.size() - 2));
      doc.sections_[section];
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw std::runtime_error("config line " + std::to_string(line_no) +
                               ": expected key = value");
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string raw = trim(line.substr(eq + 1));
    if (key.empty()) {
      throw std::runtime_error("config line " + std::to_string(line_no) +
                               ": empty key");
    }
    if (!raw.empty() && raw.front() == '[') {
      if (raw.back() != ']') {
        throw std::runtime_error("config line " + std::to_string(line_no) +
                                 ": unterminated array");
      }
      std::vector<Scalar> items;
      for (const auto& part : split_top_level(raw.substr(1, raw.size() - 2))) {
        items.push_back(parse_scalar(part, line_no));
      }
      doc.sections_[section][key] = std::move(items);
    } else {
      doc.sections_[section][key] = parse_scalar(raw, line_no);
    }
  }
  return doc;
}

ConfigDoc ConfigDoc::load(const std::filesystem::path& path) {
  return parse(read_text(path));
}

const ConfigDoc::Scalar* ConfigDoc::find_scalar(const std::string& section,
                                                const std::string& key) const {
  const auto sit = sections_.find(section);
  if (sit == sections_.end()) return nullptr;
  const auto kit = sit->second.find(key);
  if (kit == sit->second.end()) return nullptr;
  return std::get_if<Scalar>(&kit->second);
}

const std::vector<ConfigDoc::Scalar>* ConfigDoc::find_list(
    const std::string& section, const std::string& key) const {
  const auto sit = sections_.find(section);
  if (sit == sections_.end()) return nullptr;
  const auto kit = sit->second.find(key);
  if (kit == sit->second.end()) return nullptr;
  return std::get_if<std::vector<Scalar>>(&kit->second);
}

bool ConfigDoc::has(const std::string& section, const std::string& key) const {
  const auto sit = sections_.find(section);
  return sit != sections_.end() && sit->second.count(key) > 0;
}

std::int64_t ConfigDoc::get_int(const std::string& section,
                                const std::string& key,
                                std::int64_t fallback) const {
  const Scalar* s = find_scalar(section, key);
  if (s == nullptr) return fallback;
  if (const auto* i = std::get_if<std::int64_t>(s)) return *i;
  throw std::runtime_error("config " + section + "." + key + ": expected integer");
}

double ConfigDoc::get_double(const std::string& section, const std::string& key,
                             double fallback) const {
  const Scalar* s = find_scalar(section, key);
  if (s == nullptr) return fallback;
  if (const auto* d = std::get_if<double>(s)) return *d;
  if (const auto* i = std::get_if<std::int64_t>(s)) return static_cast<double>(*i);
  throw std::runtime_error("config " + section + "." + key + ": expected number");
}

bool ConfigDoc::get_bool(const std::string& section, const std::string& key,
                         bool fallback) const {
  const Scalar* s = find_scalar(section, key);
  if (s == nullptr) return fallback;
  if (const auto* b = std::get_if<bool>(s)) return *b;
  throw std::runtime_error("config " + section + "." + key + ": expected bool");
}

std::string ConfigDoc::get_string(const std::string& section,
                                  const std::string& key,
                                  const std::string& fallback) const {
  const Scalar* s = find_scalar(section, key);
  if (s == nullptr) return fallback;
  if (const auto* str = std::get_if<std::string>(s)) return *str;
  throw std::runtime_error("config " + section + "." + key + ": expected string");
}

std::vector<std::int64_t> ConfigDoc::get_int_list(const std::string& section,
                                                  const std::string& key) const {
  const auto* list = find_list(section, key);
  if (list == nullptr) return {};
  std::vector<std::int64_t> out;
  for (const auto& s : *list) {
    if (const auto* i = std::get_if<std::int64_t>(&s)) out.push_back(*i);
    else throw std::runtime_error("config " + section + "." + key + ": expected integer list");
  }
  return out;
}

std::vector<std::string> ConfigDoc::get_string_list(const std::string& section,
                                                    const std::string& key) const {
  const auto* list = find_list(section, key);
  if (list == nullptr) return {};
  std::vector<std::string> out;
  for (const auto& s : *list) {
    if (const auto* str = std::get_if<std::string>(&s)) out.push_back(*str);
    else throw std::runtime_error("config " + section + "." + key + ": expected string list");
  }
  return out;
}

}  // namespace mulab
