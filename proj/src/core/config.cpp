#include "core/config.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

namespace smim::io {

Config Config::parse_string(const std::string& text) {
  Config cfg;
  std::istringstream in(text);
  std::string line, section;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    const auto begin = line.find_first_not_of(" \t\r");
    if (begin == std::string::npos) continue;
    const auto end = line.find_last_not_of(" \t\r");
    line = line.substr(begin, end - begin + 1);
    if (line.front() == '[') {
      if (line.back() != ']')
        throw std::invalid_argument("config line " + std::to_string(lineno) + ": bad section header");
      section = line.substr(1, line.size() - 2);
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw std::invalid_argument("config line " + std::to_string(lineno) + ": expected key=value");
    std::string key = line.substr(0, eq);
    std::string val = line.substr(eq + 1);
    key.erase(key.find_last_not_of(" \t") + 1);
    const auto vb = val.find_first_not_of(" \t");
    val = vb == std::string::npos ? "" : val.substr(vb);
    cfg.values_[section.empty() ? key : section + "." + key] = val;
  }
  return cfg;
}

Config Config::parse_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("config: cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_string(ss.str());
}

std::optional<std::string> Config::get(const std::string& key) const {
  const auto it = values_.find(key);
  if (it == values_.end()) return std::nullopt;
  return it->second;
}

std::string Config::get_or(const std::string& key, const std::string& dflt) const {
  const auto v = get(key);
  return v ? *v : dflt;
}

std::string Config::require(const std::string& key) const {
  const auto v = get(key);
  if (!v) throw std::invalid_argument("config: missing required field '" + key + "'");
  return *v;
}

double Config::num_or(const std::string& key, double dflt) const {
  const auto v = get(key);
  if (!v) return dflt;
  try {
    return std::stod(*v);
  } catch (const std::exception&) {
    throw std::invalid_argument("config: field '" + key + "' is not a number: " + *v);
  }
}

long long Config::int_or(const std::string& key, long long dflt) const {
  const auto v = get(key);
  if (!v) return dflt;
  try {
    return std::stoll(*v);
  } catch (const std::exception&) {
    throw std::invalid_argument("config: field '" + key + "' is not an integer: " + *v);
  }
}

unsigned long long Config::uint_or(const std::string& key, unsigned long long dflt) const {
  const auto v = get(key);
  if (!v) return dflt;
  try {
    return std::stoull(*v);
  } catch (const std::exception&) {
    throw std::invalid_argument("config: field '" + key + "' is not an unsigned integer: " + *v);
  }
}

std::string Config::to_string() const {
  std::string cur_section;
  std::ostringstream os;
  bool first = true;
  for (const auto& [key, value] : values_) {
    const auto dot = key.rfind('.');
    const std::string section = dot == std::string::npos ? "" : key.substr(0, dot);
    const std::string name = dot == std::string::npos ? key : key.substr(dot + 1);
    if (section != cur_section || first) {
      if (!first) os << "\n";
      if (!section.empty()) os << "[" << section << "]\n";
      cur_section = section;
      first = false;
    }
    os << name << " = " << value << "\n";
  }
  return os.str();
}

}  // namespace smim::io
