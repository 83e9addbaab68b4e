#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <variant>
#include <vector>

namespace mulab {

/// Minimal TOML-style experiment config: [section] headers, key = value
/// pairs, '#' comments. Values are strings, integers, reals, booleans, or
/// single-line arrays of those.
class ConfigDoc {
 public:
  using Scalar = std::variant<bool, std::int64_t, double, std::string>;
  using Value = std::variant<Scalar, std::vector<Scalar>>;

  static ConfigDoc parse(const std::string& text);
  static ConfigDoc load(const std::filesystem::path& path);

  bool has(const std::string& section, const std::string& key) const;

  std::int64_t get_int(const std::string& section, const std::string& key,
                       std::int64_t fallback) const;
  double get_double(const std::string& section, const std::string& key,
                    double fallback) const;
  bool get_bool(const std::string& section, const std::string& key,
                bool fallback) const;
  std::string get_string(const std::string& section, const std::string& key,
                         const std::string& fallback) const;
  std::vector<std::int64_t> get_int_list(const std::string& section,
                                         const std::string& key) const;
  std::vector<std::string> get_string_list(const std::string& section,
                                           const std::string& key) const;

  const std::string& source_text() const { return source_; }

 private:
  const Scalar* find_scalar(const std::string& section,
                            const std::string& key) const;
  const std::vector<Scalar>* find_list(const std::string& section,
                                       const std::string& key) const;

  std::map<std::string, std::map<std::string, Value>> sections_;
  std::string source_;
};

}  // namespace mulab
