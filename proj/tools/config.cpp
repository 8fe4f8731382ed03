#include "config.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <fstream>

namespace slmtk {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

template <class T>
bool parse_full(const std::string& s, T& out) {
  const auto res = std::from_chars(s.data(), s.data() + s.size(), out);
  return res.ec == std::errc() && res.ptr == s.data() + s.size();
}

void check_value(const KeySpec& k, const std::string& v, const std::string& origin) {
  const std::string where = origin + ": " + k.name + " = '" + v + "': ";
  switch (k.type) {
    case KeyType::Int: {
      std::int64_t x;
      if (!parse_full(v, x)) throw ConfigError(where + "expected an integer");
      break;
    }
    case KeyType::Real: {
      double x;
      if (!parse_full(v, x)) throw ConfigError(where + "expected a number");
      break;
    }
    case KeyType::Bool:
      if (v != "true" && v != "false" && v != "1" && v != "0")
        throw ConfigError(where + "expected true or false");
      break;
    case KeyType::Prior:
      try {
        slm::parse_prior(v);
      } catch (const std::exception& e) {
        throw ConfigError(where + e.what());
      }
      break;
    case KeyType::Text: break;
  }
}

}  // namespace

Config::Config(std::vector<KeySpec> schema) : schema_(std::move(schema)) {
  for (const auto& k : schema_) {
    values_[k.name] = k.default_value;
    explicit_[k.name] = false;
  }
}

const KeySpec& Config::spec(const std::string& key) const {
  const auto it = std::find_if(schema_.begin(), schema_.end(),
                               [&](const KeySpec& k) { return k.name == key; });
  if (it == schema_.end()) throw ConfigError("unknown key '" + key + "'");
  return *it;
}

void Config::set(const std::string& key, const std::string& value, const std::string& origin) {
  const auto it = std::find_if(schema_.begin(), schema_.end(),
                               [&](const KeySpec& k) { return k.name == key; });
  if (it == schema_.end()) throw ConfigError(origin + ": unknown key '" + key + "'");
  check_value(*it, value, origin);
  values_[key] = value;
  explicit_[key] = true;
}

void Config::load_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file " + path.string());
  std::string line;
  for (std::size_t no = 1; std::getline(in, line); ++no) {
    const std::string origin = path.filename().string() + ":" + std::to_string(no);
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError(origin + ": expected key = value");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty()) throw ConfigError(origin + ": empty key");
    set(key, value, origin);
  }
}

bool Config::is_set(const std::string& key) const {
  spec(key);
  return explicit_.at(key);
}

const std::string& Config::raw(const std::string& key) const {
  spec(key);
  return values_.at(key);
}

std::int64_t Config::get_int(const std::string& key) const {
  std::int64_t x = 0;
  if (!parse_full(raw(key), x)) throw ConfigError(key + ": expected an integer");
  return x;
}

std::uint64_t Config::get_u64(const std::string& key) const {
  std::uint64_t x = 0;
  if (!parse_full(raw(key), x)) throw ConfigError(key + ": expected a non-negative integer");
  return x;
}

double Config::get_real(const std::string& key) const {
  double x = 0.0;
  if (!parse_full(raw(key), x)) throw ConfigError(key + ": expected a number");
  return x;
}

bool Config::get_bool(const std::string& key) const {
  const std::string& v = raw(key);
  return v == "true" || v == "1";
}

slm::ScalarPrior Config::get_prior(const std::string& key) const { return slm::parse_prior(raw(key)); }

std::string Config::get_text(const std::string& key) const { return raw(key); }

std::vector<std::pair<std::string, std::string>> Config::entries() const {
  std::vector<std::pair<std::string, std::string>> out;
  for (const auto& k : schema_) out.emplace_back(k.name, values_.at(k.name));
  return out;
}

}  // namespace slmtk
