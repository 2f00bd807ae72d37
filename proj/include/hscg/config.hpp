#ifndef HSCG_CONFIG_HPP
#define HSCG_CONFIG_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "hscg/errors.hpp"

namespace hscg {

/// Minimal TOML-style configuration: `[section]` headers and `key = value`
/// pairs, where a value is a bool, number, quoted string, or a bracketed
/// list of numbers. Entries keep their file order so a parsed file
/// serializes back bit-exactly (comments excluded).
class ConfigFile {
 public:
  static ConfigFile parse_file(const std::string& path);
  static ConfigFile parse_string(const std::string& text,
                                 const std::string& origin = "<string>");

  std::string serialize() const;

  bool has(const std::string& section, const std::string& key) const;
  std::vector<std::string> sections() const;

  // Typed getters; the *_or forms return the fallback when the key is
  // absent and throw ConfigError on a type mismatch.
  std::string get_string(const std::string& section, const std::string& key) const;
  std::string get_string_or(const std::string& section, const std::string& key,
                            const std::string& fallback) const;
  double get_number(const std::string& section, const std::string& key) const;
  double get_number_or(const std::string& section, const std::string& key,
                       double fallback) const;
  long get_int_or(const std::string& section, const std::string& key,
                  long fallback) const;
  bool get_bool_or(const std::string& section, const std::string& key,
                   bool fallback) const;
  std::vector<long> get_int_list_or(const std::string& section,
                                    const std::string& key,
                                    std::vector<long> fallback) const;

  void set(const std::string& section, const std::string& key,
           const std::string& raw_value);

 private:
  struct Entry {
    std::string section;
    std::string key;
    std::string raw;  // value text exactly as parsed
  };
  const Entry* find(const std::string& section, const std::string& key) const;

  std::vector<Entry> entries_;
  std::vector<std::string> section_order_;
};

}  // namespace hscg

#endif
