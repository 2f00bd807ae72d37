#include "hscg/config.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

namespace hscg {

namespace {

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

[[noreturn]] void fail(const std::string& origin, int line,
                       const std::string& msg) {
  throw ConfigError(origin + ":" + std::to_string(line) + ": " + msg);
}

}  // namespace

ConfigFile ConfigFile::parse_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_string(ss.str(), path);
}

ConfigFile ConfigFile::parse_string(const std::string& text,
                                    const std::string& origin) {
  ConfigFile cfg;
  std::istringstream in(text);
  std::string line, section;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    // Strip comments outside quotes.
    bool in_quote = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
      if (line[i] == '"') in_quote = !in_quote;
      if (line[i] == '#' && !in_quote) {
        line.resize(i);
        break;
      }
    }
    line = trim(line);
    if (line.empty()) continue;

    if (line.front() == '[') {
      if (line.back() != ']') fail(origin, line_no, "unterminated section header");
      section = trim(line.substr(1, line.size() - 2));
      if (section.empty()) fail(origin, line_no, "empty section name");
      if (std::find(cfg.section_order_.begin(), cfg.section_order_.end(),
                    section) == cfg.section_order_.end())
        cfg.section_order_.push_back(section);
      continue;
    }

    const auto eq = line.find('=');
    if (eq == std::string::npos) fail(origin, line_no, "expected key = value");
    const std::string key = trim(line.substr(0, eq));
    const std::string raw = trim(line.substr(eq + 1));
    if (key.empty()) fail(origin, line_no, "empty key");
    if (raw.empty()) fail(origin, line_no, "empty value for key '" + key + "'");
    if (cfg.find(section, key) != nullptr)
      fail(origin, line_no, "duplicate key '" + key + "'");
    cfg.entries_.push_back({section, key, raw});
  }
  return cfg;
}

std::string ConfigFile::serialize() const {
  std::ostringstream out;
  bool first = true;
  auto emit_section = [&](const std::string& sec) {
    if (!sec.empty()) {
      if (!first) out << "\n";
      out << "[" << sec << "]\n";
    }
    first = false;
    for (const Entry& e : entries_)
      if (e.section == sec) out << e.key << " = " << e.raw << "\n";
  };
  bool has_global = std::any_of(entries_.begin(), entries_.end(),
                                [](const Entry& e) { return e.section.empty(); });
  if (has_global) emit_section("");
  for (const std::string& sec : section_order_) emit_section(sec);
  return out.str();
}

const ConfigFile::Entry* ConfigFile::find(const std::string& section,
                                          const std::string& key) const {
  for (const Entry& e : entries_)
    if (e.section == section && e.key == key) return &e;
  return nullptr;
}

bool ConfigFile::has(const std::string& section, const std::string& key) const {
  return find(section, key) != nullptr;
}

std::vector<std::string> ConfigFile::sections() const { return section_order_; }

std::string ConfigFile::get_string(const std::string& section,
                                   const std::string& key) const {
  const Entry* e = find(section, key);
  if (e == nullptr)
    throw ConfigError("missing config key [" + section + "] " + key);
  std::string raw = e->raw;
  if (raw.size() >= 2 && raw.front() == '"' && raw.back() == '"')
    return raw.substr(1, raw.size() - 2);
  return raw;
}

std::string ConfigFile::get_string_or(const std::string& section,
                                      const std::string& key,
                                      const std::string& fallback) const {
  return has(section, key) ? get_string(section, key) : fallback;
}

double ConfigFile::get_number(const std::string& section,
                              const std::string& key) const {
  const Entry* e = find(section, key);
  if (e == nullptr)
    throw ConfigError("missing config key [" + section + "] " + key);
  try {
    std::size_t pos = 0;
    const double v = std::stod(e->raw, &pos);
    if (pos != e->raw.size()) throw std::invalid_argument(e->raw);
    return v;
  } catch (const std::exception&) {
    throw ConfigError("config key [" + section + "] " + key +
                      " is not a number: " + e->raw);
  }
}

double ConfigFile::get_number_or(const std::string& section,
                                 const std::string& key, double fallback) const {
  return has(section, key) ? get_number(section, key) : fallback;
}

long ConfigFile::get_int_or(const std::string& section, const std::string& key,
                            long fallback) const {
  if (!has(section, key)) return fallback;
  const double v = get_number(section, key);
  const long r = static_cast<long>(v);
  if (static_cast<double>(r) != v)
    throw ConfigError("config key [" + section + "] " + key +
                      " must be an integer");
  return r;
}

bool ConfigFile::get_bool_or(const std::string& section, const std::string& key,
                             bool fallback) const {
  const Entry* e = find(section, key);
  if (e == nullptr) return fallback;
  if (e->raw == "true") return true;
  if (e->raw == "false") return false;
  throw ConfigError("config key [" + section + "] " + key +
                    " must be true or false");
}

std::vector<long> ConfigFile::get_int_list_or(const std::string& section,
                                              const std::string& key,
                                              std::vector<long> fallback) const {
  const Entry* e = find(section, key);
  if (e == nullptr) return fallback;
  const std::string& raw = e->raw;
  if (raw.size() < 2 || raw.front() != '[' || raw.back() != ']')
    throw ConfigError("config key [" + section + "] " + key +
                      " must be a [list]");
  std::vector<long> out;
  std::string body = raw.substr(1, raw.size() - 2);
  std::stringstream ss(body);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    tok = trim(tok);
    if (tok.empty()) continue;
    try {
      out.push_back(std::stol(tok));
    } catch (const std::exception&) {
      throw ConfigError("config key [" + section + "] " + key +
                        ": bad list element '" + tok + "'");
    }
  }
  return out;
}

void ConfigFile::set(const std::string& section, const std::string& key,
                     const std::string& raw_value) {
  for (Entry& e : entries_) {
    if (e.section == section && e.key == key) {
      e.raw = raw_value;
      return;
    }
  }
  if (!section.empty() &&
      std::find(section_order_.begin(), section_order_.end(), section) ==
          section_order_.end())
    section_order_.push_back(section);
  entries_.push_back({section, key, raw_value});
}

}  // namespace hscg
